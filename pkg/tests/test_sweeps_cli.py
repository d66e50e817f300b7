"""Sweep configuration, execution, emission, and the CLI front end."""

import dataclasses
import json

import numpy as np
import pytest

from noisecascade.cli import main
from noisecascade.sweeps import (
    NegativeOccupationError,
    SchemaError,
    column_names,
    convert_mbar,
    emit,
    parse_config,
    run_sweep,
)


def fig2_config(points=5, fmt="csv", **extra):
    doc = {
        "model": "cascaded",
        "params": {
            "phi": 0.0, "mbar1": 50, "mbar2": 100, "F": 0.0,
            "kappa1": 1.0, "kappa2": 1.0, "gamma1": 1.0, "gamma2": 1.0,
        },
        "axes": [
            {"variable": "Delta", "min": -10.0, "max": 10.0, "points": points},
            {"variable": "mbar3", "min": 0.0, "max": 100.0, "points": points},
        ],
        "outputs": ["dn1", "dn2"],
        "format": fmt,
    }
    doc.update(extra)
    return json.dumps(doc)


class TestConvertMbar:
    def test_conversion_formula(self):
        out = convert_mbar({"mbar1": 50.0, "mbar2": 100.0, "mbar3": 20.0})
        assert out == {"nbar1": 80.0, "nbar2": 180.0, "nbar3": 20.0}

    def test_negative_result_rejected(self):
        with pytest.raises(NegativeOccupationError):
            convert_mbar({"mbar1": 50.0, "mbar2": 100.0, "mbar3": 120.0})

    def test_mixing_with_nbar_rejected(self):
        with pytest.raises(SchemaError):
            convert_mbar({"mbar1": 1.0, "nbar2": 1.0})

    def test_passthrough_without_mbar(self):
        params = {"nbar1": 1.0, "kappa1": 2.0}
        assert convert_mbar(params) == params


class TestParseConfig:
    def test_valid_config(self):
        cfg = parse_config(fig2_config())
        assert cfg.model == "cascaded"
        assert len(cfg.axes) == 2
        assert cfg.outputs == ("dn1", "dn2")

    def test_unknown_top_level_key(self):
        with pytest.raises(SchemaError, match="unknown top-level"):
            parse_config(fig2_config(plot=True))

    def test_unknown_parameter(self):
        doc = json.loads(fig2_config())
        doc["params"]["frequency"] = 1.0
        with pytest.raises(SchemaError, match="params.frequency"):
            parse_config(json.dumps(doc))

    def test_empty_axes(self):
        doc = json.loads(fig2_config())
        doc["axes"] = []
        with pytest.raises(SchemaError, match="axes"):
            parse_config(json.dumps(doc))

    def test_unknown_output(self):
        doc = json.loads(fig2_config())
        doc["outputs"] = ["n1", "temperature"]
        with pytest.raises(SchemaError, match="outputs"):
            parse_config(json.dumps(doc))

    def test_log_axis_needs_positive_bounds(self):
        doc = json.loads(fig2_config())
        doc["axes"][0]["spacing"] = "log"
        with pytest.raises(SchemaError, match="log spacing"):
            parse_config(json.dumps(doc))

    def test_negative_baseline_occupation(self):
        doc = json.loads(fig2_config())
        doc["params"]["mbar3"] = 120.0
        del doc["axes"][1]
        with pytest.raises(NegativeOccupationError):
            parse_config(json.dumps(doc))

    def test_theta_requires_s_grid(self):
        doc = json.loads(fig2_config())
        doc["outputs"] = ["theta"]
        with pytest.raises(SchemaError, match="s_grid"):
            parse_config(json.dumps(doc))


class TestRunSweep:
    def test_row_count_and_order(self):
        cfg = parse_config(fig2_config(points=3))
        rows = run_sweep(cfg)
        assert len(rows) == 9
        # row-major: first axis varies slowest
        deltas = [r.axis_values[0] for r in rows]
        assert deltas == sorted(deltas)

    def test_single_point_sweep(self):
        doc = json.loads(fig2_config())
        doc["axes"] = [{"variable": "mbar3", "min": 0.0, "max": 0.0, "points": 1}]
        rows = run_sweep(parse_config(json.dumps(doc)))
        assert len(rows) == 1
        assert rows[0].status == "ok"
        assert rows[0].outputs[1] == pytest.approx(25.0, abs=1e-9)

    def test_fig2_sign_structure(self):
        cfg = parse_config(fig2_config(points=11))
        for row in run_sweep(cfg):
            _, m3 = row.axis_values
            dn1, dn2 = row.outputs
            assert row.status == "ok"
            assert abs(dn1) <= 1e-10
            if m3 == 50.0:
                assert abs(dn2) <= 1e-9
            else:
                assert np.sign(dn2) == np.sign(50.0 - m3)

    def test_unstable_rows_carry_status_not_numbers(self):
        doc = {
            "model": "cascaded",
            "params": {"kappa2": 1.0, "gamma2": 0.0, "gamma1": 0.0},
            "axes": [{"variable": "kappa1", "min": 0.0, "max": 1.0, "points": 2}],
            "outputs": ["n1", "n2"],
        }
        rows = run_sweep(parse_config(json.dumps(doc)))
        assert rows[0].status == "unstable"  # kappa1 = 0: undamped first mode
        assert rows[0].outputs == (None, None)
        assert rows[1].status == "ok"

    def test_unsupported_baseline_flagged(self):
        doc = {
            "model": "cascaded",
            "params": {"kappa1": 1.0, "kappa2": 2.0, "gamma1": 1.0, "gamma2": 1.0},
            "axes": [{"variable": "nbar1", "min": 0.0, "max": 1.0, "points": 2}],
            "outputs": ["n1", "dn2"],
        }
        rows = run_sweep(parse_config(json.dumps(doc)))
        for row in rows:
            assert row.status == "unsupported"
            assert row.outputs[0] is not None  # plain occupation still fine
            assert row.outputs[1] is None

    def test_optomech_model(self):
        doc = {
            "model": "optomech",
            "params": {
                "omega_m": 5.0, "gamma_m": 0.4, "Delta1": 5.0, "Delta2": 5.0,
                "kappa1": 1.0, "kappa2": 1.0, "G1": 0.3, "G2": 0.3,
                "J": 0.45, "phi": 1.5707963267948966, "Nbar_m": 0.5,
            },
            "axes": [{"variable": "Nbar1", "min": 0.0, "max": 4.0, "points": 3}],
            "outputs": ["n1", "n2", "F_residual", "stability_margin"],
        }
        rows = run_sweep(parse_config(json.dumps(doc)))
        assert all(r.status == "ok" for r in rows)
        assert all(r.outputs[3] < 0 for r in rows)


class TestEmit:
    def test_csv_layout(self):
        cfg = parse_config(fig2_config(points=2))
        data = emit(run_sweep(cfg), cfg)
        lines = data.decode().split("\n")
        assert lines[0] == "Delta,mbar3,dn1,dn2,status"
        assert lines[-1] == ""  # trailing LF
        assert len(lines) == 2 + 4  # header + 4 rows + empty tail
        assert "\r" not in data.decode()

    def test_column_names_order(self):
        doc = json.loads(fig2_config())
        doc["outputs"] = ["theta", "n1"]
        doc["s_grid"] = [0.001, -0.001]
        cfg = parse_config(json.dumps(doc))
        assert column_names(cfg) == [
            "Delta", "mbar3", "theta@0.001", "theta@-0.001", "n1", "status",
        ]

    def test_json_round_trip_is_bit_exact(self):
        cfg = parse_config(fig2_config(points=3, fmt="json"))
        rows = run_sweep(cfg)
        records = json.loads(emit(rows, cfg))
        for row, rec in zip(rows, records):
            assert rec["dn2"] == row.outputs[1]
            assert rec["status"] == row.status

    def test_deterministic_across_parallel_modes(self):
        cfg = parse_config(fig2_config(points=4))
        serial = emit(run_sweep(cfg), cfg)
        parallel = emit(
            run_sweep(dataclasses.replace(cfg, parallel=True)), cfg
        )
        assert serial == parallel

    def test_empty_rows_rejected(self):
        cfg = parse_config(fig2_config())
        with pytest.raises(ValueError):
            emit([], cfg)


class TestCli:
    def test_steady_state(self, capsys):
        rc = main([
            "steady-state",
            "--set", "kappa1=1", "--set", "kappa2=1",
            "--set", "gamma1=1", "--set", "gamma2=1",
            "--set", "mbar1=50", "--set", "mbar2=100", "--set", "mbar3=0",
        ])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["dn1"] == pytest.approx(0.0, abs=1e-10)
        assert out["dn2"] == pytest.approx(25.0, abs=1e-9)

    def test_config_error_exit_code(self, capsys):
        rc = main(["steady-state", "--set", "kappa1=-1"])
        assert rc == 2

    def test_numerical_error_exit_code(self, capsys):
        rc = main(["steady-state", "--set", "kappa1=0", "--set", "kappa2=0",
                   "--set", "gamma1=0", "--set", "gamma2=0"])
        assert rc == 3

    def test_sweep_command(self, tmp_path, capsys):
        cfg_path = tmp_path / "sweep.json"
        cfg_path.write_text(fig2_config(points=2))
        out_path = tmp_path / "out.csv"
        rc = main(["sweep", str(cfg_path), "--out", str(out_path)])
        assert rc == 0
        content = out_path.read_bytes()
        assert content.startswith(b"Delta,mbar3,dn1,dn2,status")
        rc = main(["sweep", str(cfg_path), "--out", str(out_path), "--parallel"])
        assert rc == 0
        assert out_path.read_bytes() == content

    def test_sweep_bad_config_exit_code(self, tmp_path, capsys):
        cfg_path = tmp_path / "bad.json"
        cfg_path.write_text("{not json")
        assert main(["sweep", str(cfg_path)]) == 2

    def test_fcs_command(self, capsys):
        rc = main([
            "fcs", "1",
            "--set", "kappa1=1", "--set", "kappa2=1",
            "--set", "gamma1=1", "--set", "gamma2=1",
            "--set", "nbar1=2", "--set", "nbar2=1", "--set", "nbar3=0.5",
            "--s-points", "5",
        ])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert len(out["theta"]) == 5
        assert out["cumulants"]["1"] == pytest.approx(out["eta1_trace"], rel=1e-6)

    def test_design_command(self, capsys):
        rc = main([
            "design",
            "--set", "omega_m=5", "--set", "gamma_m=0.4",
            "--set", "Delta1=5", "--set", "Delta2=5",
            "--set", "kappa1=1", "--set", "kappa2=1",
            "--set", "G1=0.3", "--set", "G2=0.2",
        ])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["j_star"] == pytest.approx(0.3)
        assert out["residual"] <= 1e-12 * out["j_star"]

    def test_preset_command(self, capsys):
        rc = main(["preset", "microwave"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["Nbar_m"] == 0.5
        rc = main(["preset", "unknown"])
        assert rc == 2

    def test_map_om_command(self, capsys):
        rc = main([
            "map-om",
            "--set", "omega_m=5", "--set", "gamma_m=0.4",
            "--set", "Delta1=5", "--set", "Delta2=5",
            "--set", "kappa1=1", "--set", "kappa2=1",
            "--set", "G1=0.3", "--set", "G2=0.2", "--set", "J=0.3",
            "--set", "phi=1.5707963267948966",
        ])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["gamma1"] == pytest.approx(2.0 * 0.09 * 5.0)
        assert out["F_residual"] == pytest.approx(0.0, abs=1e-12)
