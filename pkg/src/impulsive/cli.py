"""Command-line front end.

Exit codes: 0 success, 1 hypothesis or precondition failure, 2 invalid
input (unreadable config, out-of-range parameter) or numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from impulsive.bifurcation import default_omega_grid, lambda_sweep, omega_scan, regime_table
from impulsive.config import ConfigError, RunConfig, load_config
from impulsive.errors import EscapeError, HypothesisError, PreconditionError, StepLimitError
from impulsive.export import fmt, write_csv
from impulsive.flow import simulate_impulsive
from impulsive.periodic import find_periodic_orbits
from impulsive.rmap import StroboscopicAnalyzer, check_shape_hypotheses, interval_bounds
from impulsive.vectorfield import validate_hypotheses

log = logging.getLogger("impulsive")

EXIT_OK, EXIT_PRECONDITION, EXIT_FAILURE = 0, 1, 2


class InvalidInput(Exception):
    pass


def _analyzer(cfg: RunConfig) -> StroboscopicAnalyzer:
    return StroboscopicAnalyzer(cfg.vector_field(), cfg.omega, cfg.integrator, cfg.grid_points)


def _outdir(cfg: RunConfig) -> Path:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return cfg.output_dir


def _lambda(cfg: RunConfig, required: bool = True) -> float:
    lam = cfg.lam
    if lam is None:
        if required:
            raise InvalidInput("lambda is required (config key 'lambda' or --lambda)")
        return 0.0
    if not lam > -1.0:
        raise InvalidInput(f"lambda must satisfy lambda > -1, got {lam!r}")
    return lam


def _require_valid(cfg: RunConfig):
    report = validate_hypotheses(cfg.vector_field())
    if not report.ok:
        for c in report.checks:
            if c.status == "fail":
                print(f"hypothesis failure: {c.name} ({c.detail})", file=sys.stderr)
        raise HypothesisError("vector field fails the structural hypotheses")
    return report


def _extra(cfg: RunConfig, args, name, default=None, cast=float):
    v = getattr(args, name, None)
    if v is None:
        v = cfg.extras.get(name, default)
    if v is None:
        raise InvalidInput(f"{name} is required")
    return cast(v)


def cmd_validate(cfg: RunConfig, args) -> int:
    vf = cfg.vector_field()
    report = validate_hypotheses(vf)
    status = {c.name: c for c in report.checks}
    p1 = [status[k] for k in ("h(0)=0", "A!=0", "H!=0")]
    p1_fail = [c for c in p1 if c.status == "fail"]
    if p1_fail:
        print("linear-part fail (" + "; ".join(f"{c.name}: {c.detail}" for c in p1_fail) + ")")
    elif status.get("A<0") and status["A<0"].status == "warn":
        print(f"linear-part warn (A={fmt_short(report.A)} > 0; regime tables need A<0)")
    else:
        print(f"linear-part ok (A={fmt_short(report.A)})")
    eq = status["equilibria"]
    k = len(report.equilibria)
    print(f"equilibria ok (k={k})" if eq.status == "ok" else f"equilibria fail ({eq.detail})")
    if cfg.lam is not None:
        print(f"pulse {'ok' if cfg.lam > -1 else 'fail'} (lambda={fmt_short(cfg.lam)})")
    if not report.ok:
        return EXIT_PRECONDITION
    an = _analyzer(cfg)
    shape = check_shape_hypotheses(an, report.equilibria)
    print(f"convexity {'ok' if shape.convexity_ok else 'warn'}"
          + ("" if shape.convexity_ok else " (" + "; ".join(
              v for v in shape.violations() if "convex" in v) + ")"))
    print(f"ratio-extrema {'ok' if shape.extrema_ok else 'warn'}")
    return EXIT_OK


def fmt_short(v: float) -> str:
    return f"{v:g}"


def cmd_rmap(cfg: RunConfig, args) -> int:
    _require_valid(cfg)
    tab = _analyzer(cfg).table()
    cols = ["x", "r_omega", "r_omega_prime", "g", "g_prime"]
    path = write_csv(_outdir(cfg) / "rmap.csv", cols, zip(*(tab[c] for c in cols)))
    print(path)
    return EXIT_OK


def cmd_gmap(cfg: RunConfig, args) -> int:
    _require_valid(cfg)
    tab = _analyzer(cfg).table()
    cols = ["x", "g", "g_prime"]
    path = write_csv(_outdir(cfg) / "gmap.csv", cols, zip(*(tab[c] for c in cols)))
    print(path)
    return EXIT_OK


def cmd_periodic(cfg: RunConfig, args) -> int:
    lam = _lambda(cfg)
    _require_valid(cfg)
    orbits = find_periodic_orbits(_analyzer(cfg), lam)
    rows = [(lam, o.x0, o.stability.value, o.residual, o.g_prime_value) for o in orbits]
    path = write_csv(_outdir(cfg) / "periodic.csv",
                     ["lambda", "x0", "stability", "residual", "g_prime"], rows)
    print(f"{len(orbits)} periodic orbit(s) at omega={cfg.omega:g}, lambda={lam:g}:")
    for o in orbits:
        print(f"  x0={o.x0:.12g}  {o.stability.value:22s} residual={o.residual:.2e}")
    print(path)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    _require_valid(cfg)
    lo = _extra(cfg, args, "lambda_min")
    hi = _extra(cfg, args, "lambda_max")
    n = _extra(cfg, args, "n_points", 101, int)
    if not -1.0 < lo < hi or n < 2:
        raise InvalidInput("sweep needs -1 < lambda_min < lambda_max and n_points >= 2")
    diagram = lambda_sweep(_analyzer(cfg), lo, hi, n)
    path = _outdir(cfg) / "sweep.csv"
    with open(path, "w", newline="") as fh:
        diagram.to_csv(fh)
    print(path)
    return EXIT_OK


def cmd_regimes(cfg: RunConfig, args) -> int:
    report = _require_valid(cfg)
    an = _analyzer(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table = regime_table(an, report.equilibria)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    out = _outdir(cfg)
    with open(out / "regimes.csv", "w", newline="") as fh:
        table.to_csv(fh)
    text = table.to_text()
    stable = [e for e in report.equilibria if e.kind.value == "stable"]
    bounds = [interval_bounds(an, j, report.equilibria) for j in range(1, len(stable))]
    if bounds:
        text += "\nratio envelopes:\n" + "".join(
            f"  j={b.j}: beta={b.beta:.12g} at m={b.m:.12g}, gamma={b.gamma:.12g} at M={b.M:.12g}\n"
            for b in bounds)
    (out / "regimes.txt").write_text(text)
    sys.stdout.write(text)
    print(out / "regimes.csv")
    print(out / "regimes.txt")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, args) -> int:
    lam = _lambda(cfg)
    _require_valid(cfg)
    vf = cfg.vector_field()
    x0 = _extra(cfg, args, "x0")
    n = _extra(cfg, args, "n_pulses", 50, int)
    if not 0.0 <= x0 <= vf.x_max:
        raise InvalidInput(f"x0 must lie in [0, x_max], got {x0!r}")
    traj = simulate_impulsive(vf, cfg.omega, lam, x0, n, None)
    out = _outdir(cfg)
    traj.write_csv(out / "trajectory.csv")
    pulses = write_csv(out / "pulses.csv", ["k", "t", "x_before", "x_after"],
                       [(k, j.t_k, j.x_before, j.x_after) for k, j in enumerate(traj.jumps, 1)])
    print(f"fate: {traj.fate.value}; {len(traj.jumps)} pulse(s)")
    print(out / "trajectory.csv")
    print(pulses)
    return EXIT_OK


def cmd_omega_scan(cfg: RunConfig, args) -> int:
    lam = _lambda(cfg)
    if lam == 0.0:
        raise PreconditionError("omega scan needs lambda != 0")
    _require_valid(cfg)
    x_ref = _extra(cfg, args, "x_ref")
    ratio = args.ratio
    grid = default_omega_grid(cfg.omega, ratio=ratio, floor=args.floor)
    report = omega_scan(cfg.vector_field(), lam, x_ref, grid, cfg.integrator, cfg.grid_points)
    path = _outdir(cfg) / "omega_scan.csv"
    with open(path, "w", newline="") as fh:
        report.to_csv(fh)
    if report.omega2 is None:
        print("tracked orbit persists over the whole omega grid")
    else:
        print(f"orbit lost at omega2={report.omega2:.12g}; fate: {report.fate.value}")
    print(path)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "rmap": cmd_rmap,
    "gmap": cmd_gmap,
    "periodic": cmd_periodic,
    "sweep": cmd_sweep,
    "regimes": cmd_regimes,
    "simulate": cmd_simulate,
    "omega-scan": cmd_omega_scan,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="impulsive",
                                description="Periodic orbits of scalar ODEs with periodic multiplicative pulses.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("config", help="TOML config path or bundled name (cubic, quintic)")
        sp.add_argument("--omega", type=float)
        sp.add_argument("--lambda", dest="lam", type=float)
        sp.add_argument("--grid-points", type=int)
        sp.add_argument("--output-dir", type=Path)
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "sweep":
            sp.add_argument("--lambda-min", type=float)
            sp.add_argument("--lambda-max", type=float)
            sp.add_argument("--n-points", type=int)
        if name == "simulate":
            sp.add_argument("--x0", type=float)
            sp.add_argument("--n-pulses", type=int)
        if name == "omega-scan":
            sp.add_argument("--x-ref", dest="x_ref", type=float)
            sp.add_argument("--ratio", type=float, default=0.9)
            sp.add_argument("--floor", type=float, default=1e-3)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.omega is not None and not args.omega > 0:
            raise InvalidInput(f"omega must be positive, got {args.omega!r}")
        if args.grid_points is not None and args.grid_points < 3:
            raise InvalidInput("grid points must be >= 3")
        cfg = cfg.with_overrides(omega=args.omega, lam=args.lam, grid_points=args.grid_points,
                                 output_dir=args.output_dir)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, InvalidInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (HypothesisError, PreconditionError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (EscapeError, StepLimitError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
