"""Command-line interface.

Subcommands:
  rearrange    <in.vsf> <out.vsf>        symmetric-decreasing rearrangement
  functionals  <in.vsf> --p 1,2          norms, impulse, J_p, boundary mass
  bound        --M .. --alpha .. --R ..  evaluate the stability bounds
  evolve       <config.json>             run a flow, print conservation summary
  experiment   <config.json> --out ..    run and write the full report
  verify       --level fast|full         run the verification battery

VSL_THREADS caps FFT parallelism (default 1).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .bounds import PerturbationSize, ProfileParams, bound_j, bound_jp_total, bound_l1, bound_lp
from .field import (
    angular_impulse,
    boundary_mass_fraction,
    jp_norm,
    lp_norm,
    quadrature,
    read_vsf,
    write_vsf,
)
from .harness import run_experiment
from .rearrange import symmetric_rearrangement
from .verify import verify_suite


def _parse_p_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def cmd_rearrange(args) -> int:
    f = read_vsf(args.input)
    write_vsf(symmetric_rearrangement(f), args.output)
    return 0


def cmd_functionals(args) -> int:
    f = read_vsf(args.input)
    p_list = _parse_p_list(args.p)
    out = {
        "integral": quadrature(f),
        "sup": f.max_abs(),
        "impulse": angular_impulse(f),
        "boundary_mass_fraction": boundary_mass_fraction(f),
        "lp": {f"{p:g}": lp_norm(f, p) for p in p_list},
        "jp": {f"{p:g}": jp_norm(f, p) for p in p_list},
    }
    json.dump(out, sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


def cmd_bound(args) -> int:
    pp = ProfileParams(
        M=args.M, alpha=args.alpha, R=args.R, tail_impulse=args.tail_impulse
    )
    sz = PerturbationSize(eps1=args.eps1, epsJ=args.epsJ, epsP=args.epsP, p=args.p)
    b1 = bound_l1(pp, sz)
    out = {
        "l1": b1,
        "j": bound_j(pp, sz, b1),
        "lp": bound_lp(pp, sz, b1),
        "jp_total": bound_jp_total(pp, sz),
    }
    json.dump(out, sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


def _load_config(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def cmd_evolve(args) -> int:
    report = run_experiment(_load_config(args.config), out_dir=args.out)
    last = report["records"][-1]
    print(
        f"t = {last['t']:.4f}: drift L1 {last['drift_l1']:.3e}, "
        f"L2 {last['drift_l2']:.3e}, J {last['drift_impulse']:.3e}, "
        f"dist {last['dist_drift']:.3e}, boundary {last['boundary_mass']:.3e}"
    )
    return 0


def cmd_experiment(args) -> int:
    out = Path(args.out)
    if out.suffix == ".json":
        report = run_experiment(_load_config(args.config), out_dir=None)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        report_path = out
    else:
        report = run_experiment(_load_config(args.config), out_dir=out)
        report_path = out / "report.json"
    verdicts = report.get("verdicts", {}).get("jp_within_bound", {})
    status = "all-within-bound" if all(verdicts.values()) else "BOUND EXCEEDED"
    print(f"report: {report_path} ({status if verdicts else 'bounds disabled'})")
    return 0 if all(verdicts.values()) or not verdicts else 2


def cmd_verify(args) -> int:
    return verify_suite(level=args.level, out_dir=args.out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vsl", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=f"vsl {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rearrange", help="rearrange a field file")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(fn=cmd_rearrange)

    p = sub.add_parser("functionals", help="norms and functionals of a field file")
    p.add_argument("input")
    p.add_argument("--p", default="1,2", help="comma-separated L^p exponents")
    p.set_defaults(fn=cmd_functionals)

    p = sub.add_parser("bound", help="evaluate the stability bounds")
    p.add_argument("--M", type=float, required=True, help="sup bound of the profile")
    p.add_argument("--alpha", type=float, required=True, help="mass bound of the profile")
    p.add_argument("--R", type=float, required=True, help="support/truncation radius")
    p.add_argument("--tail-impulse", type=float, default=0.0, dest="tail_impulse")
    p.add_argument("--eps1", type=float, default=None, help="L1 perturbation size")
    p.add_argument("--epsJ", type=float, required=True, help="impulse perturbation size")
    p.add_argument("--epsP", type=float, required=True, help="L^p perturbation size")
    p.add_argument("--p", type=float, default=2.0)
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser("evolve", help="run a flow from a config document")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="output directory (report/CSV/snapshots)")
    p.set_defaults(fn=cmd_evolve)

    p = sub.add_parser("experiment", help="run an experiment and write its report")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="report.json path or output directory")
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("verify", help="run the verification battery")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--out", default=None, help="directory for emitted reports")
    p.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
