"""Experiment orchestration: build profile and perturbation, evolve, measure
deviations in every requested norm, evaluate the stability bounds, and emit a
machine-readable report.

The experiment config is a single JSON document; the report echoes it back
together with per-snapshot records, running-sup deviations (tracked every
step so no excursion between snapshots is missed), evaluated bounds, and
derived verdicts.  Two runs with the same config produce identical reports
on the same platform configuration.

Report schema (version 1), the only contract consumed by external tooling:

  schema_version        1
  config                echo of the input document
  provenance            tool/version/grid/seed/horizon/steps
  profile_params        M, alpha, R, tail_impulse, sixth_moment
  perturbation          eps1, epsJ, epsP (per p), clipped_mass
  records[]             t, l1_dev, l2_dev, j_dev, lp_dev{p}, jp_dev{p},
                        drift_l1, drift_l2, drift_impulse, dist_drift,
                        patch_q, patch_q_drift, boundary_mass, min_value
  sup_deviations        running max over every step: l1, l2, j, lp{p}, jp{p}
  bounds                l1, j{p}, lp{p}, jp_total{p}   (when enabled)
  verdicts              jp_within_bound{p}, slack
"""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    ProfileParams,
    bound_j,
    bound_jp_total,
    bound_l1,
    bound_lp,
    tail_impulse_of,
    tail_radius_for,
)
from .euler import ConservationRecord, FlowState, SolverConfig, conservation_report, evolve
from .field import (
    GridSpec,
    ScalarField,
    angular_impulse,
    lp_norm,
    write_vsf,
)
from .profiles import PerturbationSpec, make_profile, perturb
from .rearrange import discretization_slack

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed form of the experiment JSON document."""

    grid_n: int = 256
    grid_L: float = 4.0
    profile_kind: str = "mollified-patch"
    profile_params: dict = dc_field(default_factory=dict)
    perturbation: PerturbationSpec = PerturbationSpec("none")
    solver: SolverConfig = SolverConfig(t_end=10.0)
    p_list: tuple[float, ...] = (2.0,)
    bounds_enabled: bool = True
    tail_epsilon: float | None = None
    snapshots: bool = False
    seed: int = 0

    KEYS = ("grid", "profile", "perturbation", "solver", "norms", "bounds", "output", "seed")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        unknown = set(doc) - set(cls.KEYS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        grid = doc.get("grid", {})
        profile = dict(doc.get("profile", {"kind": "mollified-patch"}))
        pert = dict(doc.get("perturbation", {"kind": "none"}))
        solver = dict(doc.get("solver", {}))
        norms = doc.get("norms", {})
        bounds = doc.get("bounds", {})
        output = doc.get("output", {})
        return cls(
            grid_n=int(grid.get("n", 256)),
            grid_L=float(grid.get("L", 4.0)),
            profile_kind=profile.pop("kind"),
            profile_params=profile,
            perturbation=PerturbationSpec(
                kind=pert.pop("kind", "none"),
                seed=int(pert.pop("seed", 0)),
                params=pert,
            ),
            solver=SolverConfig(
                t_end=float(solver.get("t_end", 10.0)),
                cfl=float(solver.get("cfl", 0.5)),
                dealias=bool(solver.get("dealias", True)),
                filter_strength=float(solver.get("filter_strength", 0.0)),
                snapshot_stride=int(solver.get("snapshot_stride", 50)),
            ),
            p_list=tuple(float(p) for p in norms.get("p_list", [2.0])),
            bounds_enabled=bool(bounds.get("enabled", True)),
            tail_epsilon=(
                float(bounds["tail_epsilon"]) if bounds.get("tail_epsilon") is not None else None
            ),
            snapshots=bool(output.get("snapshots", False)),
            seed=int(doc.get("seed", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "grid": {"n": self.grid_n, "L": self.grid_L},
            "profile": {"kind": self.profile_kind, **self.profile_params},
            "perturbation": {
                "kind": self.perturbation.kind,
                "seed": self.perturbation.seed,
                **self.perturbation.params,
            },
            "solver": {
                "t_end": self.solver.t_end,
                "cfl": self.solver.cfl,
                "dealias": self.solver.dealias,
                "filter_strength": self.solver.filter_strength,
                "snapshot_stride": self.solver.snapshot_stride,
            },
            "norms": {"p_list": list(self.p_list)},
            "bounds": {"enabled": self.bounds_enabled, "tail_epsilon": self.tail_epsilon},
            "output": {"snapshots": self.snapshots},
            "seed": self.seed,
        }


def _pkey(p: float) -> str:
    return f"{p:g}"


@dataclass
class _DeviationTracker:
    """Running max of every deviation norm, updated each solver step."""

    zeta: ScalarField
    p_list: tuple[float, ...]
    sup: dict = dc_field(default_factory=dict)
    steps: int = 0

    def __post_init__(self):
        self.sup = {"l1": 0.0, "l2": 0.0, "j": 0.0}
        self.sup.update({f"lp:{_pkey(p)}": 0.0 for p in self.p_list})
        self.sup.update({f"jp:{_pkey(p)}": 0.0 for p in self.p_list})

    def measure(self, omega: ScalarField) -> dict:
        diff = ScalarField(omega.spec, omega.values - self.zeta.values)
        absdiff = ScalarField(omega.spec, np.abs(diff.values))
        j_dev = angular_impulse(absdiff)
        out = {
            "l1_dev": lp_norm(diff, 1),
            "l2_dev": lp_norm(diff, 2),
            "j_dev": j_dev,
            "lp_dev": {},
            "jp_dev": {},
        }
        for p in self.p_list:
            lp = lp_norm(diff, p)
            out["lp_dev"][_pkey(p)] = lp
            out["jp_dev"][_pkey(p)] = lp + j_dev
        return out

    def update(self, state: FlowState) -> dict:
        m = self.measure(state.omega)
        self.steps += 1
        self.sup["l1"] = max(self.sup["l1"], m["l1_dev"])
        self.sup["l2"] = max(self.sup["l2"], m["l2_dev"])
        self.sup["j"] = max(self.sup["j"], m["j_dev"])
        for p in self.p_list:
            k = _pkey(p)
            self.sup[f"lp:{k}"] = max(self.sup[f"lp:{k}"], m["lp_dev"][k])
            self.sup[f"jp:{k}"] = max(self.sup[f"jp:{k}"], m["jp_dev"][k])
        return m


def run_experiment(config: dict | ExperimentConfig, out_dir: str | Path | None = None) -> dict:
    """Run one experiment end to end and return the report document.

    When ``out_dir`` is given the report JSON, the conservation CSV log and
    (if configured) VSF1 snapshots are written there.
    """
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    spec = GridSpec(cfg.grid_n, cfg.grid_L)
    zeta, pp, profile = make_profile(cfg.profile_kind, cfg.profile_params, spec)

    if cfg.tail_epsilon is not None:
        p_max = max(cfg.p_list)
        R = tail_radius_for(profile, cfg.tail_epsilon, p_max, r_max=0.8 * spec.L, h=spec.h)
        pp = dataclasses.replace(
            pp, R=R, tail_impulse=tail_impulse_of(profile, R, h=spec.h)
        )

    pres = perturb(zeta, cfg.perturbation, cfg.p_list, profile=profile)
    state = FlowState.initial(pres.omega0)
    tracker = _DeviationTracker(zeta=zeta, p_list=cfg.p_list)

    records: list[dict] = []
    cons_rows: list[ConservationRecord] = []
    snap_fields: list[tuple[int, FlowState]] = []

    def on_step(s: FlowState) -> None:
        tracker.update(s)

    def on_snapshot(s: FlowState) -> None:
        m = tracker.measure(s.omega)
        rec = conservation_report(s)
        cons_rows.append(rec)
        records.append(
            {
                "t": s.t,
                **m,
                "drift_l1": rec.drift_l1,
                "drift_l2": rec.drift_l2,
                "drift_impulse": rec.drift_impulse,
                "dist_drift": rec.dist_drift,
                "patch_q": rec.patch_q,
                "patch_q_drift": rec.patch_q_drift,
                "boundary_mass": rec.boundary_mass,
                "min_value": rec.min_value,
            }
        )
        if cfg.snapshots:
            snap_fields.append((len(records) - 1, s))

    t0 = time.time()
    tracker.update(state)
    final = evolve(state, cfg.solver, on_snapshot=on_snapshot, on_step=on_step)
    wall = time.time() - t0

    sizes = pres.sizes
    any_p = cfg.p_list[0]
    report: dict = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "provenance": {
            "tool": "vsl",
            "version": __version__,
            "grid": {"n": spec.n, "L": spec.L, "h": spec.h},
            "seed": cfg.seed,
            "horizon": cfg.solver.t_end,
            "steps": tracker.steps - 1,
        },
        "profile_params": {
            "M": pp.M,
            "alpha": pp.alpha,
            "R": pp.R,
            "tail_impulse": pp.tail_impulse,
            "sixth_moment": pp.sixth_moment,
        },
        "perturbation": {
            "eps1": sizes[any_p].eps1,
            "epsJ": sizes[any_p].epsJ,
            "epsP": {_pkey(p): sizes[p].epsP for p in cfg.p_list},
            "clipped_mass": pres.clipped_mass,
        },
        "records": records,
        "sup_deviations": {
            "l1": tracker.sup["l1"],
            "l2": tracker.sup["l2"],
            "j": tracker.sup["j"],
            "lp": {_pkey(p): tracker.sup[f"lp:{_pkey(p)}"] for p in cfg.p_list},
            "jp": {_pkey(p): tracker.sup[f"jp:{_pkey(p)}"] for p in cfg.p_list},
        },
    }

    if cfg.bounds_enabled:
        b_l1 = {}
        b_j = {}
        b_lp = {}
        b_jp = {}
        verdicts = {}
        slack = discretization_slack(pres.omega0)
        for p in cfg.p_list:
            sz = sizes[p]
            b1 = bound_l1(pp, sz)
            b_l1[_pkey(p)] = b1
            b_j[_pkey(p)] = bound_j(pp, sz, b1)
            b_lp[_pkey(p)] = bound_lp(pp, sz, b1)
            b_jp[_pkey(p)] = bound_jp_total(pp, sz)
            measured = report["sup_deviations"]["jp"][_pkey(p)]
            verdicts[_pkey(p)] = bool(measured <= b_jp[_pkey(p)] + slack)
        report["bounds"] = {"l1": b_l1, "j": b_j, "lp": b_lp, "jp_total": b_jp}
        report["verdicts"] = {"jp_within_bound": verdicts, "slack": slack}

    # wall time is useful to humans but breaks report determinism if embedded;
    # it rides along outside the schema'd fields.
    report["timing_seconds_nondeterministic"] = round(wall, 3)

    if out_dir is not None:
        write_report(report, cons_rows, snap_fields, out_dir)
    return report


def write_report(
    report: dict,
    cons_rows: list[ConservationRecord],
    snap_fields: list[tuple[int, FlowState]],
    out_dir: str | Path,
) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "report.json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "conservation.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ConservationRecord.CSV_COLUMNS)
        for rec in cons_rows:
            w.writerow([repr(float(x)) for x in rec.csv_row()])
    if snap_fields:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        for idx, s in snap_fields:
            write_vsf(s.omega, snap_dir / f"snap_{idx:04d}_t{s.t:.4f}.vsf")
    return report_path


def load_report(path: str | Path) -> dict:
    with open(path) as fh:
        report = json.load(fh)
    version = report.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"report schema version {version} != supported {SCHEMA_VERSION}")
    return report
