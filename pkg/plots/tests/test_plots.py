import json
from pathlib import Path

import pytest

from vsl_plot.cli import main as cli_main
from vsl_plot.figures import plot_field, plot_sweep, plot_timeseries
from vsl_plot.reports import SchemaMismatchError, load_report, read_field_vsf

DATA = Path(__file__).parent / "data"
GOLDEN = DATA / "golden_run" / "report.json"
SNAPSHOT = DATA / "golden_run" / "snapshots" / "snap_0000_t0.0000.vsf"
SWEEP = sorted(DATA.glob("sweep_a*/report.json"))


def _png_ok(path: Path) -> bool:
    return path.exists() and path.stat().st_size > 1000 and path.read_bytes()[:4] == b"\x89PNG"


class TestReaders:
    def test_golden_report_loads(self):
        report = load_report(GOLDEN)
        assert report["schema_version"] == 1
        assert report["records"]

    def test_schema_mismatch_fails_loudly(self, tmp_path):
        doc = json.loads(GOLDEN.read_text())
        doc["schema_version"] = 2
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        with pytest.raises(SchemaMismatchError):
            load_report(bad)

    def test_vsf_reader(self):
        values, L = read_field_vsf(SNAPSHOT)
        assert values.shape == (64, 64)
        assert L == 4.0
        assert 0.9 <= values.max() <= 1.1

    def test_vsf_bad_magic(self, tmp_path):
        bad = tmp_path / "bad.vsf"
        bad.write_bytes(b"XXXX" + bytes(20))
        with pytest.raises(ValueError, match="magic"):
            read_field_vsf(bad)

    def test_inputs_never_mutated(self, tmp_path):
        before = GOLDEN.read_bytes()
        plot_timeseries(GOLDEN, tmp_path / "x.png")
        assert GOLDEN.read_bytes() == before


class TestFigures:
    def test_timeseries(self, tmp_path):
        out = plot_timeseries(GOLDEN, tmp_path / "ts.png")
        assert _png_ok(out)

    def test_timeseries_empty_series_axes_only(self, tmp_path):
        doc = json.loads(GOLDEN.read_text())
        doc["records"] = []
        empty = tmp_path / "empty.json"
        empty.write_text(json.dumps(doc))
        out = plot_timeseries(empty, tmp_path / "empty.png")
        assert _png_ok(out)

    def test_field(self, tmp_path):
        out = plot_field(SNAPSHOT, tmp_path / "field.png")
        assert _png_ok(out)

    def test_late_time_snapshot(self, tmp_path):
        snaps = sorted(SNAPSHOT.parent.glob("*.vsf"))
        out = plot_field(snaps[-1], tmp_path / "late.png")
        assert _png_ok(out)

    def test_sweep_with_reference_slope(self, tmp_path):
        assert len(SWEEP) == 3
        out = plot_sweep(SWEEP, tmp_path / "sweep.png")
        assert _png_ok(out)

    def test_sweep_reference_lines_present(self):
        import matplotlib.pyplot as plt

        from vsl_plot.figures import build_sweep_figure

        fig, ax = build_sweep_figure([load_report(p) for p in SWEEP])
        labels = [line.get_label() for line in ax.get_lines()]
        assert any("slope 1/(2p) = 0.5" in lab for lab in labels)  # p = 1
        assert any("slope 1/(2p) = 0.25" in lab for lab in labels)  # p = 2
        # reference slope on the log-log axes matches 1/(2p)
        ref = [ln for ln in ax.get_lines() if "0.25" in ln.get_label()][0]
        x, y = ref.get_xdata(), ref.get_ydata()
        import numpy as np

        slope = np.polyfit(np.log(x), np.log(y), 1)[0]
        assert slope == pytest.approx(0.25, abs=1e-9)
        plt.close(fig)

    def test_sweep_needs_input(self, tmp_path):
        with pytest.raises(ValueError):
            plot_sweep([], tmp_path / "none.png")


class TestCli:
    def test_all_three_kinds(self, tmp_path, capsys):
        assert cli_main(["timeseries", str(GOLDEN), "-o", str(tmp_path / "a.png")]) == 0
        assert cli_main(["field", str(SNAPSHOT), "-o", str(tmp_path / "b.png")]) == 0
        assert cli_main(["sweep", *map(str, SWEEP), "-o", str(tmp_path / "c.png")]) == 0
        for name in ("a.png", "b.png", "c.png"):
            assert _png_ok(tmp_path / name)
