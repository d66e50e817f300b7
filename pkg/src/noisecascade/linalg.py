"""
Dense linear-algebra kernels for two-mode Gaussian systems.

Everything here works on 2x2 complex mode-space matrices and their 4x4 real
quadrature embeddings.  Quadrature ordering is (x1, p1, x2, p2) with
x = (c + c†)/sqrt(2) and p = -i(c - c†)/sqrt(2).
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray


class SingularSystemError(Exception):
    """Vectorized Lyapunov system is numerically singular (drift not stable)."""


class NonSymmetricInputError(Exception):
    """A matrix that must be symmetric is not, beyond tolerance."""


class NoConvergenceError(Exception):
    """Newton iteration did not converge within the iteration cap."""


class UnstableEffectiveDriftError(Exception):
    """Effective drift lost stability during the Riccati iteration."""


def real_embedding_matrix(u: NDArray[np.complex128]) -> NDArray[np.float64]:
    """Return the 4x2 real matrix mapping input quadratures to mode quadratures.

    For a complex coupling vector u, mode k gets the rows
    [Re u_k, -Im u_k] (x-row) and [Im u_k, Re u_k] (p-row), so that
    R(u) R(u)^T is invariant under a global phase on u.
    """
    u = np.asarray(u, dtype=complex)
    R = np.zeros((4, 2))
    for k in range(2):
        R[2 * k, 0] = u[k].real
        R[2 * k, 1] = -u[k].imag
        R[2 * k + 1, 0] = u[k].imag
        R[2 * k + 1, 1] = u[k].real
    return R


def embed_drift(M: NDArray[np.complex128]) -> NDArray[np.float64]:
    """Lift a 2x2 complex mode-space drift to the 4x4 real quadrature drift.

    If the complex amplitudes obey dc/dt = M c then the quadrature vector
    obeys dq/dt = A q with A the returned matrix.  The spectrum of A is the
    spectrum of M together with its complex conjugate.
    """
    M = np.asarray(M, dtype=complex)
    A = np.zeros((4, 4))
    for j in range(2):
        for k in range(2):
            re, im = M[j, k].real, M[j, k].imag
            A[2 * j, 2 * k] = re
            A[2 * j, 2 * k + 1] = -im
            A[2 * j + 1, 2 * k] = im
            A[2 * j + 1, 2 * k + 1] = re
    return A


def eigenvalues_2x2(M: NDArray[np.complex128]) -> tuple[complex, complex]:
    """Closed-form eigenvalues of a 2x2 complex matrix (quadratic formula)."""
    M = np.asarray(M, dtype=complex)
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    disc = np.sqrt(complex(tr * tr - 4.0 * det))
    return ((tr + disc) / 2.0, (tr - disc) / 2.0)


def stability_margin(M: NDArray[np.complex128]) -> float:
    """Largest real part among the eigenvalues of the 2x2 complex drift.

    A negative return value certifies stability of the mode-space dynamics
    (and hence of its quadrature embedding, whose spectrum is the same plus
    conjugates).
    """
    lam1, lam2 = eigenvalues_2x2(M)
    return max(lam1.real, lam2.real)


def _check_symmetric(X: NDArray[np.float64], name: str, rtol: float = 1e-12) -> None:
    scale = max(np.abs(X).max(), 1.0)
    if np.abs(X - X.T).max() > rtol * scale:
        raise NonSymmetricInputError(f"{name} is not symmetric to relative {rtol}")


def solve_lyapunov(
    A: NDArray[np.float64],
    N: NDArray[np.float64],
    residual_rtol: float = 1e-10,
) -> NDArray[np.float64]:
    """Solve A V + V A^T + N = 0 for symmetric V.

    Uses the dense 16x16 vectorization of the equation solved by LU with
    partial pivoting.  The residual is checked against
    residual_rtol * max-norm of N.
    """
    A = np.asarray(A, dtype=float)
    N = np.asarray(N, dtype=float)
    _check_symmetric(N, "noise matrix N")
    n = A.shape[0]
    K = np.kron(A, np.eye(n)) + np.kron(np.eye(n), A)
    try:
        v = np.linalg.solve(K, -N.reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("vectorized Lyapunov system is singular") from exc
    V = v.reshape(n, n)
    V = 0.5 * (V + V.T)
    residual = np.abs(A @ V + V @ A.T + N).max()
    norm_n = np.abs(N).max()
    if residual > residual_rtol * norm_n:
        raise SingularSystemError(
            f"Lyapunov residual {residual:.3e} exceeds {residual_rtol:.1e} * |N| "
            "(drift unstable or marginally stable?)"
        )
    return V


def solve_riccati_biased(
    A: NDArray[np.float64],
    N: NDArray[np.float64],
    Fminus: NDArray[np.float64],
    Fplus: NDArray[np.float64],
    V0: NDArray[np.float64],
    step_tol: float = 1e-11,
    residual_rtol: float = 1e-9,
    max_iter: int = 100,
) -> NDArray[np.float64]:
    """Solve 0 = [A-F-] V + V [A-F-]^T + V F+ V + N by Newton-Kleinman.

    Each Newton step solves the Lyapunov equation with effective drift
    (A - F- + V_k F+) and constant term N - V_k F+ V_k; V0 is the warm start
    (typically the unbiased covariance).  Raises UnstableEffectiveDriftError
    if the effective drift loses stability, which signals a counting field
    outside the admissible large-deviation region.
    """
    A = np.asarray(A, dtype=float)
    N = np.asarray(N, dtype=float)
    _check_symmetric(N, "noise matrix N")
    _check_symmetric(Fminus, "Fminus")
    _check_symmetric(Fplus, "Fplus")
    _check_symmetric(V0, "warm start V0")
    Atil = A - Fminus
    V = 0.5 * (V0 + V0.T)
    for _ in range(max_iter):
        Aeff = Atil + V @ Fplus
        if np.linalg.eigvals(Aeff).real.max() >= 0.0:
            raise UnstableEffectiveDriftError(
                "effective drift unstable; counting field outside admissible region"
            )
        C = N - V @ Fplus @ V
        C = 0.5 * (C + C.T)
        try:
            V_next = solve_lyapunov(Aeff, C)
        except SingularSystemError as exc:
            raise UnstableEffectiveDriftError(str(exc)) from exc
        delta = np.abs(V_next - V).max()
        V = V_next
        if delta <= step_tol:
            residual = np.abs(Atil @ V + V @ Atil.T + V @ Fplus @ V + N).max()
            if residual > residual_rtol * max(np.abs(N).max(), 1.0):
                raise NoConvergenceError(
                    f"Riccati residual {residual:.3e} above tolerance after convergence"
                )
            return V
    raise NoConvergenceError(f"Newton-Kleinman did not converge in {max_iter} iterations")
