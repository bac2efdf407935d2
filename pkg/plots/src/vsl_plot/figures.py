"""The three figure kinds: deviation time series with bound overlays,
vorticity heatmaps, and perturbation-size sweep curves."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reports import deviation_series, load_report, read_field_vsf


def plot_timeseries(report_path: str | Path, out_path: str | Path) -> Path:
    """Deviation norms against time, with horizontal bound lines when present."""
    report = load_report(report_path)
    data = deviation_series(report)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, values in data["series"].items():
        ax.plot(data["t"], values, label=name)
    bounds = report.get("bounds", {})
    for p, value in sorted(bounds.get("jp_total", {}).items()):
        ax.axhline(value, linestyle="--", linewidth=1, color="gray")
        ax.annotate(f"bound jp[{p}]", xy=(0.99, value), xycoords=("axes fraction", "data"),
                    ha="right", va="bottom", fontsize=8, color="gray")
    ax.set_xlabel("t")
    ax.set_ylabel("deviation from profile")
    ax.set_title(_run_title(report))
    if data["series"]:
        ax.legend(fontsize=8)
    fig.tight_layout()
    out = Path(out_path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def plot_field(vsf_path: str | Path, out_path: str | Path) -> Path:
    """Heatmap of a VSF1 snapshot with a colorbar."""
    values, L = read_field_vsf(vsf_path)
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    im = ax.imshow(
        values,
        origin="lower",
        extent=(-L, L, -L, L),
        cmap="viridis",
        interpolation="nearest",
    )
    fig.colorbar(im, ax=ax, label="vorticity")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(Path(vsf_path).name)
    fig.tight_layout()
    out = Path(out_path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def build_sweep_figure(reports: list[dict]):
    """Sweep axes: one measured curve and one slope-1/(2p) reference per p."""
    if not reports:
        raise ValueError("sweep figure needs at least one report")
    p_keys = sorted(reports[0]["sup_deviations"]["jp"])
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for p in p_keys:
        sizes = []
        sups = []
        for rep in reports:
            pert = rep["perturbation"]
            sizes.append(pert["epsP"][p] + pert["epsJ"])
            sups.append(rep["sup_deviations"]["jp"][p])
        order = np.argsort(sizes)
        sizes = np.array(sizes)[order]
        sups = np.array(sups)[order]
        (line,) = ax.loglog(sizes, sups, marker="o", label=f"measured sup, p={p}")
        # reference with the bound's leading exponent 1/(2p), anchored at the
        # largest measured point
        expo = 1.0 / (2.0 * float(p))
        ref = sups[-1] * (sizes / sizes[-1]) ** expo
        ax.loglog(
            sizes, ref, linestyle=":", color=line.get_color(),
            label=f"slope 1/(2p) = {expo:g} reference",
        )
    ax.set_xlabel("initial perturbation size (J_p)")
    ax.set_ylabel("sup deviation over run")
    ax.set_title("perturbation-size sweep")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig, ax


def plot_sweep(report_paths: list[str | Path], out_path: str | Path) -> Path:
    """Measured sup deviation against initial perturbation size, log-log."""
    fig, _ax = build_sweep_figure([load_report(p) for p in report_paths])
    out = Path(out_path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def _run_title(report: dict) -> str:
    cfg = report.get("config", {})
    profile = cfg.get("profile", {})
    pert = cfg.get("perturbation", {})
    grid = cfg.get("grid", {})
    return (
        f"{profile.get('kind', '?')} + {pert.get('kind', '?')}, "
        f"n={grid.get('n', '?')}, L={grid.get('L', '?')}"
    )
