import json
import math

import numpy as np
import pytest

from vsl.cli import main as cli_main
from vsl.field import GridSpec, read_vsf, sample_profile, RadialProfile, write_vsf
from vsl.harness import ExperimentConfig, load_report, run_experiment

TINY_CONFIG = {
    "grid": {"n": 64, "L": 4.0},
    "profile": {"kind": "mollified-patch", "radius": 1.0},
    "perturbation": {"kind": "boundary-wobble", "mode": 3, "amplitude": 0.05},
    "solver": {"t_end": 0.5, "snapshot_stride": 2},
    "norms": {"p_list": [1, 2]},
    "bounds": {"enabled": True},
    "seed": 7,
}


class TestConfig:
    def test_roundtrip(self):
        cfg = ExperimentConfig.from_dict(TINY_CONFIG)
        again = ExperimentConfig.from_dict(cfg.to_dict())
        assert again == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            ExperimentConfig.from_dict({"gird": {}})

    def test_defaults(self):
        cfg = ExperimentConfig.from_dict({"profile": {"kind": "gaussian"}})
        assert cfg.grid_n == 256
        assert cfg.solver.cfl == 0.5
        assert cfg.p_list == (2.0,)


class TestRunExperiment:
    @pytest.fixture(scope="class")
    def report(self):
        return run_experiment(TINY_CONFIG)

    def test_schema_fields(self, report):
        for key in (
            "schema_version",
            "config",
            "provenance",
            "profile_params",
            "perturbation",
            "records",
            "sup_deviations",
            "bounds",
            "verdicts",
        ):
            assert key in report
        assert report["schema_version"] == 1

    def test_records_cover_run(self, report):
        records = report["records"]
        assert records[0]["t"] == 0.0
        assert records[-1]["t"] == pytest.approx(0.5)
        assert len(records) >= 3

    def test_sup_dominates_snapshots(self, report):
        for p in ("1", "2"):
            sup = report["sup_deviations"]["jp"][p]
            assert sup >= max(r["jp_dev"][p] for r in report["records"]) - 1e-15
            assert sup >= report["records"][0]["jp_dev"][p]

    def test_verdicts_derived(self, report):
        for p in ("1", "2"):
            measured = report["sup_deviations"]["jp"][p]
            bound = report["bounds"]["jp_total"][p]
            slack = report["verdicts"]["slack"]
            assert report["verdicts"]["jp_within_bound"][p] == (measured <= bound + slack)

    def test_deterministic(self):
        a = run_experiment(TINY_CONFIG)
        b = run_experiment(TINY_CONFIG)
        a.pop("timing_seconds_nondeterministic")
        b.pop("timing_seconds_nondeterministic")
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_zero_horizon(self):
        cfg = dict(TINY_CONFIG, solver={"t_end": 0.0})
        report = run_experiment(cfg)
        assert len(report["records"]) == 1

    def test_outputs_written(self, tmp_path):
        cfg = dict(TINY_CONFIG, output={"snapshots": True})
        run_experiment(cfg, out_dir=tmp_path / "run")
        assert (tmp_path / "run" / "report.json").exists()
        csv_lines = (tmp_path / "run" / "conservation.csv").read_text().splitlines()
        assert csv_lines[0] == "t,L1,L2,J,dist_drift,patch_q,boundary_mass"
        assert len(csv_lines) >= 3
        snaps = sorted((tmp_path / "run" / "snapshots").glob("*.vsf"))
        assert snaps
        f = read_vsf(snaps[0])
        assert f.spec.n == 64

    def test_load_report_checks_version(self, tmp_path):
        cfg = dict(TINY_CONFIG)
        run_experiment(cfg, out_dir=tmp_path)
        report = load_report(tmp_path / "report.json")
        assert report["provenance"]["tool"] == "vsl"
        doc = json.loads((tmp_path / "report.json").read_text())
        doc["schema_version"] = 99
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        with pytest.raises(ValueError, match="schema version"):
            load_report(bad)

    def test_gaussian_tail_radius_flow(self):
        cfg = {
            "grid": {"n": 128, "L": 10.0},
            "profile": {"kind": "gaussian"},
            "perturbation": {"kind": "boundary-wobble", "mode": 3, "amplitude": 0.05},
            "solver": {"t_end": 0.2},
            "norms": {"p_list": [2]},
            "bounds": {"enabled": True, "tail_epsilon": 0.01},
        }
        report = run_experiment(cfg)
        assert report["profile_params"]["R"] > 3.0
        assert report["profile_params"]["tail_impulse"] > 0.0
        assert report["verdicts"]["jp_within_bound"]["2"]


class TestCli:
    def test_rearrange_and_functionals(self, tmp_path, capsys):
        spec = GridSpec(64, 4.0)
        src = tmp_path / "in.vsf"
        dst = tmp_path / "out.vsf"
        X, Y = spec.meshgrid()
        from vsl.field import ScalarField

        write_vsf(ScalarField(spec, (((X - 1.0) ** 2 + Y**2) < 1.0).astype(float)), src)
        assert cli_main(["rearrange", str(src), str(dst)]) == 0
        assert cli_main(["functionals", str(dst), "--p", "1,2"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["integral"] == pytest.approx(math.pi, abs=0.2)
        assert set(out["lp"]) == {"1", "2"}

    def test_bound_matches_module(self, capsys):
        rc = cli_main(
            [
                "bound", "--M", "1", "--alpha", str(math.pi), "--R", "1",
                "--eps1", "0.01", "--epsJ", "0.01", "--epsP", "0.01", "--p", "2",
            ]
        )
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["l1"] == pytest.approx(1.4959, abs=2e-4)
        assert out["jp_total"] == pytest.approx(out["lp"] + out["j"], rel=1e-12)

    def test_experiment_writes_report(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(TINY_CONFIG))
        report_path = tmp_path / "report.json"
        rc = cli_main(["experiment", str(cfg_path), "--out", str(report_path)])
        assert rc == 0
        report = load_report(report_path)
        assert all(report["verdicts"]["jp_within_bound"].values())

    def test_evolve_prints_summary(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(dict(TINY_CONFIG, solver={"t_end": 0.2})))
        rc = cli_main(["evolve", str(cfg_path)])
        assert rc == 0
        assert "drift L1" in capsys.readouterr().out
