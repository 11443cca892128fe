"""Locate, classify and verify the omega-periodic solutions for a pulse strength."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from impulsive._numerics import golden_section, local_extrema, refine_root, sign_change_cells
from impulsive.errors import DomainError, EscapeError, NotAFixedPointError, PreconditionError
from impulsive.flow import classify_sequence, pulse_sequence
from impulsive.rmap import StroboscopicAnalyzer

TANGENCY_TOL = 1e-9
DEGENERACY_TOL = 1e-8
FIXED_POINT_TOL = 1e-8


class Stability(str, enum.Enum):
    STABLE = "asymptotically_stable"
    UNSTABLE = "unstable"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class PeriodicOrbit:
    x0: float
    omega: float
    lam: float
    stability: Stability
    residual: float
    g_prime_value: float

    @property
    def is_origin(self) -> bool:
        return self.x0 == 0.0


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not lam > -1.0:
        raise PreconditionError(f"pulse strength must satisfy lambda > -1, got {lam!r}")
    return lam


def origin_stability(an: StroboscopicAnalyzer, lam: float, tol: float = DEGENERACY_TOL) -> Stability:
    """Stability of the trivial orbit from the multiplier ``(1 + lam) exp(A omega)``."""
    mu = (1.0 + lam) * an.origin_multiplier
    if mu < 1.0 - tol:
        return Stability.STABLE
    if mu > 1.0 + tol:
        return Stability.UNSTABLE
    return Stability.DEGENERATE


def _from_g_prime(gp: float, tol: float) -> Stability:
    if gp > tol:
        return Stability.STABLE
    if gp < -tol:
        return Stability.UNSTABLE
    return Stability.DEGENERATE


def _residual(an, x, lam):
    return abs((1.0 + lam) * an.r_omega(x) - x)


def _make_orbit(an, x, lam, tol_deg, degenerate=False):
    if x == 0.0:
        return PeriodicOrbit(0.0, an.omega, lam, origin_stability(an, lam, tol_deg), 0.0, float("nan"))
    gp = an.g_prime(x)
    st = Stability.DEGENERATE if degenerate else _from_g_prime(gp, tol_deg)
    return PeriodicOrbit(x, an.omega, lam, st, _residual(an, x, lam), gp)


def _extremum_location(an, a, b, maximize):
    """Critical point of ``R(x)/x`` in ``[a, b]`` via the numerator of ``g'``."""
    na, nb = an.numerator(a), an.numerator(b)
    if na * nb < 0.0:
        return refine_root(an.numerator, a, b, na, nb)
    return golden_section(an.ratio, a, b, 1e-10, maximize)[0]


def find_periodic_orbits(an: StroboscopicAnalyzer, lam: float,
                         tangency_tol: float = TANGENCY_TOL,
                         tol_deg: float = DEGENERACY_TOL) -> list[PeriodicOrbit]:
    """All omega-periodic orbits of the pulsed system, ordered by initial condition.

    The roots of ``(1 + lam) R(x) - x`` are located through the scale-free
    function ``G(x) = (1 + lam) R(x)/x - 1`` (with ``G(0)`` the origin
    multiplier minus one) so that orbits born at the origin are bracketed even
    when they sit inside the first grid cell. Grid extrema of ``G`` are refined
    to catch tangencies (reported as degenerate) and root pairs hidden inside
    one cell. The trivial orbit ``x0 = 0`` is always included.
    """
    lam = _check_lambda(lam)
    xs, rs = an.grid()
    with np.errstate(divide="ignore", invalid="ignore"):
        G = (1.0 + lam) * rs / xs - 1.0
    G[0] = (1.0 + lam) * an.origin_multiplier - 1.0
    Gf = lambda x: (1.0 + lam) * an.ratio(x) - 1.0  # noqa: E731

    found: dict[float, bool] = {}  # x -> degenerate
    cells = set(int(i) for i in sign_change_cells(G))
    for i in sorted(cells):
        x = refine_root(Gf, float(xs[i]), float(xs[i + 1]), float(G[i]), float(G[i + 1]))
        if x > 0.0:
            found[x] = False
    for i in np.flatnonzero(G[1:] == 0.0) + 1:
        found[float(xs[i])] = False

    d = np.diff(G)
    for i in local_extrema(G):
        if i == 1 or min(abs(d[i - 1]), abs(d[i])) <= 1e-13:
            continue
        a, b = float(xs[i - 1]), float(xs[i + 1])
        xe = _extremum_location(an, a, b, maximize=d[i - 1] > 0)
        Fe = xe * Gf(xe)
        if abs(Fe) < tangency_tol:
            for x in [x for x in found if a <= x <= b]:
                del found[x]
            found[xe] = True
        elif (i - 1) not in cells and i not in cells and np.sign(Fe) != np.sign(G[i]):
            for lo, hi in ((a, xe), (xe, b)):
                x = refine_root(Gf, lo, hi)
                found[x] = False

    dx = float(xs[1] - xs[0])
    orbits = [_make_orbit(an, 0.0, lam, tol_deg)]
    for x in sorted(found):
        if x >= an.vf.x_max - dx:
            warnings.warn(f"periodic orbit at x0={x:.6g} lies within one grid cell of x_max; "
                          "it may be a truncation artifact", RuntimeWarning, stacklevel=2)
        orbits.append(_make_orbit(an, x, lam, tol_deg, degenerate=found[x]))
    return orbits


def classify(an: StroboscopicAnalyzer, x0: float, lam: float,
             tol_deg: float = DEGENERACY_TOL, fp_tol: float = FIXED_POINT_TOL) -> Stability:
    """Stability of the orbit through the fixed point ``x0`` from the sign of ``g'(x0)``."""
    lam = _check_lambda(lam)
    x0 = float(x0)
    if x0 == 0.0:
        return origin_stability(an, lam, tol_deg)
    res = _residual(an, x0, lam)
    if res > fp_tol * max(1.0, x0):
        raise NotAFixedPointError(f"x0={x0!r} is not a fixed point for lambda={lam!r} (residual {res:.3g})")
    return _from_g_prime(an.g_prime(x0), tol_deg)


def lambda_for_initial_condition(an: StroboscopicAnalyzer, x0: float) -> float:
    """Pulse strength for which ``x0`` seeds an omega-periodic solution."""
    x0 = float(x0)
    if not (0.0 < x0 <= an.vf.x_max):
        raise DomainError(f"x0 must lie in (0, x_max], got {x0!r}")
    return an.g(x0)


@dataclass
class SideResult:
    start: float
    sequence: list[float]
    escaped: bool
    trend: str
    final_distance: float
    converges: bool
    moves_away: bool


@dataclass
class VerificationReport:
    orbit: PeriodicOrbit
    eps: float
    n_pulses: int
    return_residual: float
    sides: list[SideResult] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        """``stable``, ``unstable``, ``semistable`` or ``inconclusive`` from simulation alone."""
        if not self.sides:
            return "inconclusive"
        conv = [s.converges for s in self.sides]
        away = [s.moves_away for s in self.sides]
        if all(conv):
            return "stable"
        if all(away):
            return "unstable"
        if all(c or a for c, a in zip(conv, away)) and any(conv) and any(away):
            return "semistable"
        return "inconclusive"

    @property
    def contraction(self) -> float:
        """Initial over final distance, worst side (``inf`` if a side lands exactly)."""
        finals = [s.final_distance for s in self.sides]
        worst = max(finals) if finals else float("nan")
        return math.inf if worst == 0.0 else self.eps / worst

    @property
    def agrees(self) -> bool:
        expected = {Stability.STABLE: "stable", Stability.UNSTABLE: "unstable",
                    Stability.DEGENERATE: "semistable"}[self.orbit.stability]
        return self.verdict == expected


def basin_eps(orbit: PeriodicOrbit, orbits: list[PeriodicOrbit], eps: float) -> float:
    """Cap ``eps`` at a tenth of the distance to the nearest other orbit."""
    others = [abs(o.x0 - orbit.x0) for o in orbits if o.x0 != orbit.x0]
    return min([eps] + [0.1 * d for d in others])


def _sequence(an, lam, y0, n):
    try:
        return pulse_sequence(an.vf, an.omega, lam, y0, n, an.cfg), False
    except EscapeError as exc:
        return list(getattr(exc, "partial", [])), True


def verify_orbit(an: StroboscopicAnalyzer, orbit: PeriodicOrbit, n_pulses: int = 50,
                 eps: float = 1e-3, orbits: list[PeriodicOrbit] | None = None) -> VerificationReport:
    """Check an orbit by brute-force simulation of the pulsed system.

    Reports the return residual ``max_k |phi(k omega, x0) - x0|`` and, for
    starts ``x0 +- eps``, whether the pulse sequences approach ``x0``
    monotonically or move away. Passing ``orbits`` caps ``eps`` inside the
    bracket formed by the neighbouring orbits.
    """
    if orbits is not None:
        eps = basin_eps(orbit, orbits, eps)
    lam, x0 = orbit.lam, orbit.x0
    seq, escaped = _sequence(an, lam, x0, n_pulses)
    residual = math.inf if escaped else max((abs(s - x0) for s in seq), default=0.0)
    report = VerificationReport(orbit, eps, n_pulses, residual)
    for side in (-1.0, 1.0):
        y0 = x0 + side * eps
        if y0 < 0.0 or y0 > an.vf.x_max:
            continue
        seq, escaped = _sequence(an, lam, y0, n_pulses)
        trend = "increasing" if escaped and not seq else classify_sequence([y0] + seq)
        final = math.inf if escaped else abs(seq[-1] - x0)
        toward = "increasing" if side < 0 else "decreasing"
        away = "decreasing" if side < 0 else "increasing"
        converges = not escaped and trend == toward and final < eps
        noise = FIXED_POINT_TOL * max(1.0, abs(x0))
        if converges and (seq[-1] - x0) * side < -noise:
            converges = False  # overshoot contradicts monotone approach
        moves_away = escaped or (trend == away and final > eps)
        report.sides.append(SideResult(y0, seq, escaped, trend, final, converges, moves_away))
    return report
