"""Saddle-node and transcritical points, regime tables, lambda sweeps and omega scans."""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from impulsive._numerics import bracket_roots
from impulsive.errors import EscapeError, PreconditionError
from impulsive.export import fmt
from impulsive.flow import DEFAULT_CONFIG, IntegratorConfig, classify_sequence, pulse_sequence
from impulsive.periodic import (
    FIXED_POINT_TOL,
    PeriodicOrbit,
    Stability,
    find_periodic_orbits,
)
from impulsive.rmap import (
    StroboscopicAnalyzer,
    check_shape_hypotheses,
    interval_bounds,
    stable_equilibria,
)
from impulsive.vectorfield import GRID_POINTS, Equilibrium, PolynomialVectorField, find_equilibria


class DegenerateWarning(RuntimeWarning):
    """``g'`` vanishes on a whole range, so saddle-nodes are not isolated."""


class BifurcationKind(str, enum.Enum):
    SADDLE_NODE = "saddle_node"
    TRANSCRITICAL = "transcritical"


@dataclass(frozen=True)
class BifurcationPoint:
    kind: BifurcationKind
    lambda_star: float
    x_star: float
    omega: float
    envelope: str = ""  # e.g. "gamma_1": which ratio extremum produced lambda_star


def saddle_node_points(an: StroboscopicAnalyzer,
                       equilibria: list[Equilibrium] | None = None) -> list[BifurcationPoint]:
    """Interior zeros of ``g'`` (roots of ``R(x) - x R'(x)``) with ``lambda* = g(x*)``.

    Each zero is a local maximum (``gamma_j``) or minimum (``beta_j``) of
    ``R(x)/x``. If the numerator vanishes on a stretch of grid points the
    ratio has a plateau; a :class:`DegenerateWarning` is issued and those
    points are skipped.
    """
    if equilibria is None:
        equilibria = find_equilibria(an.vf)
    xs = np.linspace(0.0, an.vf.x_max, an.grid_points)
    num = np.array([an.numerator(x) for x in xs])
    scale = max(1.0, float(np.max(np.abs(num))))
    flat = np.abs(num[1:]) <= 1e-11 * scale
    if flat.sum() > max(3, len(xs) // 100):
        warnings.warn("R(x)/x is constant on a range: saddle-nodes are not isolated",
                      DegenerateWarning, stacklevel=2)
        return []
    stable = [e.location for e in stable_equilibria(equilibria)]
    out = []
    for x in bracket_roots(an.numerator, xs, num):
        if x <= 0.0 or x >= an.vf.x_max:
            continue
        j = sum(1 for s in stable if s <= x)
        # ratio' = -numerator / x^2: numerator - to + means a maximum of the ratio
        eps = 1e-6 * max(1.0, x)
        is_max = an.numerator(max(x - eps, 0.0)) < an.numerator(min(x + eps, an.vf.x_max))
        env = f"{'gamma' if is_max else 'beta'}_{j}"
        out.append(BifurcationPoint(BifurcationKind.SADDLE_NODE, an.g(x), x, an.omega, env))
    return out


def transcritical_lambda(an: StroboscopicAnalyzer) -> BifurcationPoint:
    """The origin exchanges stability at ``lambda = exp(-A omega) - 1``."""
    if not an.A < 0:
        raise PreconditionError(f"transcritical value requires A = h'(0) < 0, got A={an.A:g}")
    return BifurcationPoint(BifurcationKind.TRANSCRITICAL, math.expm1(-an.A * an.omega), 0.0,
                            an.omega, "origin")


def orbit_labels(orbits: Sequence[PeriodicOrbit]) -> list[str]:
    """Labels ``Y<j><s|u>`` numbered per stability class; the origin is prefixed ``0=``."""
    counts = {"s": 0, "u": 0}
    out = []
    for o in orbits:
        if o.stability is Stability.DEGENERATE:
            label = "Yd"
        else:
            key = "s" if o.stability is Stability.STABLE else "u"
            counts[key] += 1
            label = f"Y{counts[key]}{key}"
        out.append(f"0={label}" if o.is_origin else label)
    return out


@dataclass
class RegimeRow:
    lambda_low: float
    lambda_high: float
    probe: float
    orbit_count: int
    signature: tuple[str, ...]
    orbits: list[float] = field(default_factory=list)


@dataclass
class RegimeTable:
    rows: list[RegimeRow]
    critical: list[BifurcationPoint]
    omega: float
    warnings: list[str] = field(default_factory=list)

    @property
    def counts(self) -> list[int]:
        return [r.orbit_count for r in self.rows]

    @property
    def signatures(self) -> list[tuple[str, ...]]:
        return [r.signature for r in self.rows]

    CSV_HEADER = ["lambda_low", "lambda_high", "probe_lambda", "orbit_count", "signature"]

    def to_csv(self, fh: IO[str]) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.CSV_HEADER)
        for r in self.rows:
            w.writerow([fmt(r.lambda_low), fmt(r.lambda_high), fmt(r.probe), r.orbit_count,
                        " ".join(r.signature)])

    def to_text(self) -> str:
        cells = [["lambda interval", "orbits", "stability (ordered)"]]
        for r in self.rows:
            lo = "-1" if r.lambda_low == -1.0 else f"{r.lambda_low:.10g}"
            hi = "inf" if math.isinf(r.lambda_high) else f"{r.lambda_high:.10g}"
            cells.append([f"({lo}, {hi})", str(r.orbit_count), ", ".join(r.signature)])
        widths = [max(len(row[i]) for row in cells) for i in range(3)]
        lines = ["  ".join(c.ljust(wd) for c, wd in zip(row, widths)).rstrip() for row in cells]
        lines.insert(1, "  ".join("-" * wd for wd in widths))
        lines.append("")
        lines.extend(f"note: {n}" for n in self.warnings if n.startswith("orbits beyond"))
        lines.append("critical values:")
        for p in self.critical:
            tag = p.envelope if p.kind is BifurcationKind.SADDLE_NODE else "exp(-A omega)-1"
            lines.append(f"  {p.kind.value:13s} lambda*={p.lambda_star:.12g}  x*={p.x_star:.12g}  ({tag})")
        return "\n".join(lines) + "\n"


def critical_values(an: StroboscopicAnalyzer, equilibria: list[Equilibrium]) -> list[BifurcationPoint]:
    pts = saddle_node_points(an, equilibria) + [transcritical_lambda(an)]
    pts.sort(key=lambda p: (p.lambda_star, p.x_star))
    dedup: list[BifurcationPoint] = []
    for p in pts:
        if dedup and abs(p.lambda_star - dedup[-1].lambda_star) <= 1e-12 * (1 + abs(p.lambda_star)):
            continue
        dedup.append(p)
    return dedup


def regime_table(an: StroboscopicAnalyzer, equilibria: list[Equilibrium] | None = None) -> RegimeTable:
    """Orbit count and ordered stability pattern on each open lambda-interval between critical values."""
    if not an.A < 0:
        raise PreconditionError(f"regime table requires A = h'(0) < 0, got A={an.A:g}")
    if equilibria is None:
        equilibria = find_equilibria(an.vf)
    notes = check_shape_hypotheses(an, equilibria).violations()
    for msg in notes:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    crit = critical_values(an, equilibria)
    lams = [p.lambda_star for p in crit]
    edges = [-1.0] + lams + [math.inf]
    rows = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if lo == -1.0:
            probe = max((hi - 1.0) / 2.0, -1.0 + 1e-9)
        elif math.isinf(hi):
            probe = lo + 1.0
        else:
            probe = 0.5 * (lo + hi)
        orbits = find_periodic_orbits(an, probe)
        rows.append(RegimeRow(lo, hi, probe, len(orbits), tuple(orbit_labels(orbits)),
                              [o.x0 for o in orbits]))
    lam_edge = an.g(an.vf.x_max)
    if lam_edge > lams[-1]:
        notes.append(f"orbits beyond x_max={an.vf.x_max:g} are not seen: counts hold for "
                     f"lambda < g(x_max) = {lam_edge:.10g}")
    return RegimeTable(rows, crit, an.omega, notes)


@dataclass
class SweepDiagram:
    points: list[tuple[float, float, Stability]]
    lambdas: list[float]

    def at(self, lam: float) -> list[tuple[float, Stability]]:
        return [(x, s) for l, x, s in self.points if l == lam]

    def counts(self) -> list[int]:
        return [len(self.at(l)) for l in self.lambdas]

    def to_csv(self, fh: IO[str]) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "x0", "stability"])
        for lam, x, s in self.points:
            w.writerow([fmt(lam), fmt(x), s.value])


def lambda_sweep(an: StroboscopicAnalyzer, lambda_min: float, lambda_max: float,
                 n_points: int) -> SweepDiagram:
    """Periodic orbits at each lambda of a uniform grid."""
    if not -1.0 < lambda_min < lambda_max:
        raise PreconditionError("need -1 < lambda_min < lambda_max")
    if n_points < 2:
        raise PreconditionError("need n_points >= 2")
    lams = [float(v) for v in np.linspace(lambda_min, lambda_max, n_points)]
    pts = []
    for lam in lams:
        for o in find_periodic_orbits(an, lam):
            pts.append((lam, o.x0, o.stability))
    return SweepDiagram(pts, lams)


def trace_branches(diagram: SweepDiagram, max_jump: float | None = None) -> list[list[tuple[float, float]]]:
    """Chain orbits across consecutive lambdas by nearest-neighbour matching.

    A point continues the branch whose last point is nearest, provided that
    branch ended at the previous lambda and the stability label matches.
    """
    branches: list[list[tuple[float, float]]] = []
    labels: list[Stability] = []
    prev_open: list[int] = []
    for lam in diagram.lambdas:
        now = diagram.at(lam)
        open_now = []
        taken = set()
        for x, st in now:
            best, best_d = None, math.inf
            for b in prev_open:
                if b in taken or labels[b] != st:
                    continue
                d = abs(branches[b][-1][1] - x)
                if d < best_d and (max_jump is None or d <= max_jump):
                    best, best_d = b, d
            if best is None:
                branches.append([(lam, x)])
                labels.append(st)
                best = len(branches) - 1
            else:
                branches[best].append((lam, x))
            taken.add(best)
            open_now.append(best)
        prev_open = open_now
    return branches


class ScanFate(str, enum.Enum):
    CONVERGES_TO_ZERO = "converges_to_zero"
    DIVERGES = "diverges"
    CONVERGES_TO_ORBIT = "converges_to_orbit"


@dataclass
class OmegaScanRow:
    omega: float
    orbit_present: bool
    x_tracked: float
    fate: ScanFate | None = None
    final_value: float | None = None


@dataclass
class OmegaScanReport:
    lam: float
    x_ref: float
    rows: list[OmegaScanRow]

    @property
    def omega2(self) -> float | None:
        """First grid value at which the tracked orbit is gone."""
        return next((r.omega for r in self.rows if not r.orbit_present), None)

    @property
    def fate(self) -> ScanFate | None:
        return next((r.fate for r in self.rows if not r.orbit_present), None)

    @property
    def monotone(self) -> bool:
        """Once lost, the orbit never reappears later in the grid."""
        seen_absent = False
        for r in self.rows:
            if not r.orbit_present:
                seen_absent = True
            elif seen_absent:
                return False
        return True

    def to_csv(self, fh: IO[str]) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["omega", "orbit_present", "x_tracked", "fate"])
        for r in self.rows:
            w.writerow([fmt(r.omega), int(r.orbit_present), fmt(r.x_tracked),
                        r.fate.value if r.fate else ""])


def default_omega_grid(omega1: float, ratio: float = 0.9, floor: float = 1e-3) -> list[float]:
    """Geometric grid from ``omega1`` down to ``floor * omega1``."""
    out = [float(omega1)]
    while out[-1] * ratio >= floor * omega1 * (1 - 1e-12):
        out.append(out[-1] * ratio)
    return out


def _fate(an: StroboscopicAnalyzer, lam: float, x_ref: float, orbits: list[PeriodicOrbit],
          max_pulses: int, zero_tol: float) -> tuple[ScanFate, float]:
    try:
        seq = pulse_sequence(an.vf, an.omega, lam, x_ref, max_pulses, an.cfg)
    except EscapeError as exc:
        return ScanFate.DIVERGES, float(exc.x) if exc.x is not None else math.inf
    final = seq[-1]
    trend = classify_sequence([x_ref] + seq)
    if final < zero_tol:
        return ScanFate.CONVERGES_TO_ZERO, final
    # a monotone sequence converges to the nearest fixed point in its direction
    if trend == "decreasing" and not any(0.0 < o.x0 < x_ref for o in orbits):
        return ScanFate.CONVERGES_TO_ZERO, final
    if trend == "increasing" and not any(o.x0 > x_ref for o in orbits):
        return ScanFate.DIVERGES, final
    return ScanFate.CONVERGES_TO_ORBIT, final


def omega_scan(vf: PolynomialVectorField, lam: float, x_ref: float,
               omega_grid: Sequence[float], cfg: IntegratorConfig = DEFAULT_CONFIG,
               grid_points: int = GRID_POINTS, max_pulses: int = 500,
               zero_tol: float = 1e-4) -> OmegaScanReport:
    """Follow the orbit through ``x_ref`` while the pulse period shrinks.

    At each omega the tracking window is the open bracket between the
    tracked orbit's neighbours (the origin included) at the previous omega.
    The orbit counts as present when an orbit of the same stability lies
    inside that bracket. Where it is absent, the fate of the solution from
    ``x_ref`` is decided by simulating up to ``max_pulses`` pulses.
    """
    lam = float(lam)
    if lam == 0.0:
        raise PreconditionError("omega scan needs lambda != 0")
    if not lam > -1.0:
        raise PreconditionError(f"lambda must exceed -1, got {lam!r}")
    grid = [float(w) for w in omega_grid]
    if not grid or any(b >= a for a, b in zip(grid, grid[1:])) or grid[-1] <= 0:
        raise PreconditionError("omega_grid must be a strictly decreasing list of positive values")

    an = StroboscopicAnalyzer(vf, grid[0], cfg, grid_points)
    orbits = find_periodic_orbits(an, lam)
    nontrivial = [o for o in orbits if not o.is_origin]
    if not nontrivial:
        raise PreconditionError(f"no nontrivial periodic orbit at omega={grid[0]:g}, lambda={lam:g}")
    start = min(nontrivial, key=lambda o: abs(o.x0 - x_ref))
    res = abs((1.0 + lam) * an.r_omega(x_ref) - x_ref) if 0 < x_ref <= vf.x_max else math.inf
    if res > FIXED_POINT_TOL * max(1.0, abs(x_ref)) and abs(start.x0 - x_ref) > 1e-8 * max(1.0, x_ref):
        raise PreconditionError(f"x_ref={x_ref!r} is not a periodic orbit at omega={grid[0]:g}")

    def bracket(orbs, x):
        below = [o.x0 for o in orbs if o.x0 < x]
        above = [o.x0 for o in orbs if o.x0 > x]
        return (max(below) if below else -math.inf, min(above) if above else math.inf)

    x_t, stab = start.x0, start.stability
    lo, hi = bracket(orbits, x_t)
    rows = [OmegaScanRow(grid[0], True, x_t)]
    for omega in grid[1:]:
        an = StroboscopicAnalyzer(vf, omega, cfg, grid_points)
        orbits = find_periodic_orbits(an, lam)
        cands = [o for o in orbits if not o.is_origin and lo < o.x0 < hi
                 and (o.stability == stab or Stability.DEGENERATE in (o.stability, stab))]
        if cands:
            near = min(cands, key=lambda o: abs(o.x0 - x_t))
            x_t = near.x0
            if near.stability is not Stability.DEGENERATE:
                stab = near.stability
            lo, hi = bracket(orbits, x_t)
            rows.append(OmegaScanRow(omega, True, x_t))
        else:
            fate, final = _fate(an, lam, x_ref, orbits, max_pulses, zero_tol)
            rows.append(OmegaScanRow(omega, False, x_t, fate, final))
    return OmegaScanReport(lam, x_ref, rows)
