"""The time-omega map ``R``, the auxiliary map ``g`` and per-interval envelopes."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from impulsive._numerics import golden_section, local_extrema, refine_root, sign_change_cells
from impulsive.errors import DomainError, PreconditionError
from impulsive.flow import DEFAULT_CONFIG, IntegratorConfig, flow_map, flow_with_variational
from impulsive.vectorfield import (
    GRID_POINTS,
    Equilibrium,
    EquilibriumKind,
    PolynomialVectorField,
)

GOLDEN_TOL = 1e-10


class StroboscopicAnalyzer:
    """Evaluates ``R(x) = phi_0(omega, x)`` and derived quantities for one ``omega``.

    Values are memoised per exact abscissa; every entry is a deterministic
    function of ``x``, so results never depend on what is cached.
    """

    def __init__(self, vf: PolynomialVectorField, omega: float,
                 cfg: IntegratorConfig = DEFAULT_CONFIG, grid_points: int = GRID_POINTS):
        if not omega > 0:
            raise PreconditionError(f"omega must be positive, got {omega!r}")
        self.vf = vf
        self.omega = float(omega)
        self.cfg = cfg
        self.grid_points = int(grid_points)
        self._r: dict[float, float] = {}
        self._rp: dict[float, tuple[float, float]] = {}
        self._grid: tuple[np.ndarray, np.ndarray] | None = None
        self._lock = threading.Lock()

    def __repr__(self):
        return f"StroboscopicAnalyzer(coeffs={self.vf.coeffs}, omega={self.omega})"

    @property
    def A(self) -> float:
        return self.vf.A

    @property
    def origin_multiplier(self) -> float:
        """``lim_{x->0} R(x)/x = exp(A omega)``."""
        return math.exp(self.vf.A * self.omega)

    def _check(self, x: float) -> float:
        x = float(x)
        if not (0.0 <= x <= self.vf.x_max):
            raise DomainError(f"x={x!r} outside [0, {self.vf.x_max!r}]")
        return x

    def r_omega(self, x: float) -> float:
        x = self._check(x)
        v = self._r.get(x)
        if v is None:
            v = flow_map(self.vf, x, self.omega, self.cfg)
            with self._lock:
                self._r[x] = v
        return v

    def r_and_prime(self, x: float) -> tuple[float, float]:
        """``(R(x), R'(x))`` from a single variational integration."""
        x = self._check(x)
        v = self._rp.get(x)
        if v is None:
            v = flow_with_variational(self.vf, x, self.omega, self.cfg)
            with self._lock:
                self._rp[x] = v
        return v

    def r_omega_prime(self, x: float) -> float:
        return self.r_and_prime(x)[1]

    def ratio(self, x: float) -> float:
        """``R(x)/x``, continued at 0 by ``exp(A omega)``."""
        x = self._check(x)
        if x == 0.0:
            return self.origin_multiplier
        return self.r_omega(x) / x

    def g(self, x: float) -> float:
        """``x / R(x) - 1``, continued at 0 by ``exp(-A omega) - 1``."""
        x = self._check(x)
        if x == 0.0:
            return math.exp(-self.vf.A * self.omega) - 1.0
        return x / self.r_omega(x) - 1.0

    def g_prime(self, x: float) -> float:
        x = self._check(x)
        if x == 0.0:
            raise DomainError("g' is not defined at x=0")
        r, rp = self.r_and_prime(x)
        return (r - x * rp) / (r * r)

    def numerator(self, x: float) -> float:
        """``R(x) - x R'(x)``; has the sign of ``g'``."""
        r, rp = self.r_and_prime(x)
        return r - x * rp

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Uniform abscissae on ``[0, x_max]`` and ``R`` on them (memoised)."""
        if self._grid is None:
            xs = np.linspace(0.0, self.vf.x_max, self.grid_points)
            rs = np.array([self.r_omega(x) for x in xs])
            self._grid = (xs, rs)
        return self._grid

    def table(self, xs: np.ndarray | None = None) -> dict[str, np.ndarray]:
        """Columns ``x, R, R', g, g'`` on ``xs`` (default: the analyzer grid)."""
        if xs is None:
            xs = np.linspace(0.0, self.vf.x_max, self.grid_points)
        rows = []
        for x in xs:
            r, rp = self.r_and_prime(x)
            g = self.g(x)
            gp = float("nan") if x == 0.0 else (r - x * rp) / (r * r)
            rows.append((x, r, rp, g, gp))
        arr = np.array(rows).reshape(-1, 5)
        return {k: arr[:, i] for i, k in enumerate(["x", "r_omega", "r_omega_prime", "g", "g_prime"])}


# module-level aliases mirroring the analyzer methods

def r_omega(an: StroboscopicAnalyzer, x: float) -> float:
    return an.r_omega(x)


def r_omega_prime(an: StroboscopicAnalyzer, x: float) -> float:
    return an.r_omega_prime(x)


def g(an: StroboscopicAnalyzer, x: float) -> float:
    return an.g(x)


def g_prime(an: StroboscopicAnalyzer, x: float) -> float:
    return an.g_prime(x)


@dataclass
class IntervalBounds:
    """Extremes of ``R(x)/x`` on ``[lo, hi]``: ``beta`` at ``m``, ``gamma`` at ``M``.

    ``truncated`` marks the last interval, cut at ``x_max``; its bounds are
    boundary values rather than the envelope of an unbounded interval.
    """

    j: int
    lo: float
    hi: float
    m: float
    M: float
    beta: float
    gamma: float
    truncated: bool = False
    unique: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def lambda_gamma(self) -> float:
        return 1.0 / self.gamma - 1.0

    @property
    def lambda_beta(self) -> float:
        return 1.0 / self.beta - 1.0


def stable_equilibria(equilibria: list[Equilibrium]) -> list[Equilibrium]:
    return [e for e in equilibria if e.kind is EquilibriumKind.STABLE]


def _interval(an: StroboscopicAnalyzer, j: int, equilibria: list[Equilibrium]) -> tuple[float, float, bool]:
    stable = stable_equilibria(equilibria)
    n = len(stable)
    if not 1 <= j <= n:
        raise PreconditionError(f"interval index j={j} outside 1..{n}")
    lo = stable[j - 1].location
    if j < n:
        return lo, stable[j].location, False
    return lo, an.vf.x_max, True


def _refine_extremum(an, xs, vals, i, maximize):
    """Golden-section refinement of a grid extremum at interior index ``i``."""
    if i == 0 or i == len(xs) - 1:
        return float(xs[i]), float(vals[i])
    return golden_section(an.ratio, float(xs[i - 1]), float(xs[i + 1]), GOLDEN_TOL, maximize)


def interval_bounds(an: StroboscopicAnalyzer, j: int, equilibria: list[Equilibrium],
                    grid_points: int = GRID_POINTS, tie_rtol: float = 1e-9) -> IntervalBounds:
    """Minimiser/maximiser of ``R(x)/x`` on the ``j``-th stable-to-stable interval (1-based).

    Grid scan followed by golden-section refinement. When the extreme value
    is attained at separated grid locations (a plateau or a tie) the leftmost
    one is returned and ``unique`` is cleared.
    """
    lo, hi, truncated = _interval(an, j, equilibria)
    xs = np.linspace(lo, hi, grid_points)
    vals = np.array([an.ratio(x) for x in xs])
    notes = []

    def pick(arr, maximize):
        i = int(np.argmax(arr) if maximize else np.argmin(arr))
        ext = arr[i]
        near = np.flatnonzero(np.abs(arr - ext) <= tie_rtol * max(1.0, abs(ext)))
        # ties are fine only when they form one contiguous cluster of width <= 2
        unique = near.size <= 3 and (near.max() - near.min()) <= 2
        if not unique:
            i = int(near.min())
        return i, unique

    i_min, u_min = pick(vals, False)
    i_max, u_max = pick(vals, True)
    if u_min:
        m, beta = _refine_extremum(an, xs, vals, i_min, False)
    else:
        m, beta = float(xs[i_min]), float(vals[i_min])
        notes.append("minimum of R(x)/x not unique")
    if u_max:
        M, gamma = _refine_extremum(an, xs, vals, i_max, True)
    else:
        M, gamma = float(xs[i_max]), float(vals[i_max])
        notes.append("maximum of R(x)/x not unique")
    if truncated:
        notes.append(f"interval truncated at x_max={hi:g}; bounds are not the unbounded envelope")
    return IntervalBounds(j, lo, hi, m, M, beta, gamma, truncated, u_min and u_max, notes)


@dataclass
class IntervalShape:
    j: int
    lo: float
    hi: float
    unstable: float | None
    inflections: list[float]
    convex_concave: bool  # one convex-to-concave switch, located at the unstable equilibrium
    relaxed: bool  # at least one convex-to-concave switch inside the interval
    unique_extrema: bool
    sign_flip: float | None  # where R' - R/x turns negative right of the unstable equilibrium
    numerator_signs_ok: bool


@dataclass
class ShapeReport:
    intervals: list[IntervalShape]

    @property
    def convexity_ok(self) -> bool:
        return all(s.convex_concave for s in self.intervals)

    @property
    def extrema_ok(self) -> bool:
        return all(s.unique_extrema for s in self.intervals)

    @property
    def sign_pattern_ok(self) -> bool:
        return all(s.numerator_signs_ok for s in self.intervals)

    def violations(self) -> list[str]:
        out = []
        for s in self.intervals:
            if not s.convex_concave:
                where = ", ".join(f"{x:.6g}" for x in s.inflections) or "none"
                out.append(f"interval {s.j}: convex/concave switch not at unstable equilibrium "
                           f"(inflections at {where})")
            if not s.unique_extrema:
                out.append(f"interval {s.j}: extrema of R(x)/x not unique")
            if not s.numerator_signs_ok:
                out.append(f"interval {s.j}: sign pattern of R' - R/x irregular")
        return out


def check_shape_hypotheses(an: StroboscopicAnalyzer, equilibria: list[Equilibrium],
                           grid_points: int = GRID_POINTS) -> ShapeReport:
    """Convexity pattern of ``R``, uniqueness of ratio extrema and the sign of ``R' - R/x``.

    Only the bounded intervals between consecutive stable equilibria are
    checked; the truncated last interval has no unstable equilibrium and no
    interior envelope.
    """
    stable = stable_equilibria(equilibria)
    unstable = [e.location for e in equilibria if e.kind is EquilibriumKind.UNSTABLE]
    out = []
    for j in range(1, len(stable)):
        lo, hi = stable[j - 1].location, stable[j].location
        xu = next((u for u in unstable if lo < u < hi), None)
        bounds = interval_bounds(an, j, equilibria, grid_points)
        xs = np.linspace(lo, hi, grid_points)
        dx = xs[1] - xs[0]
        rp = np.array([an.r_and_prime(x)[1] for x in xs])
        # R' increasing <=> convex; first differences of the variational R'
        # are far less noisy than second differences of R
        d = np.diff(rp)
        noise = 1e-9 * np.max(np.abs(rp))
        sgn = np.where(d > noise, 1, np.where(d < -noise, -1, 0))
        mids = 0.5 * (xs[1:] + xs[:-1])
        nz = np.flatnonzero(sgn)
        switches = []
        for a, b in zip(nz, nz[1:]):
            if sgn[a] != sgn[b]:
                switches.append((0.5 * (mids[a] + mids[b]), sgn[a] > 0))
        inflections = [s[0] for s in switches]
        relaxed = any(up for _, up in switches)
        strict = (len(switches) == 1 and switches[0][1] and xu is not None
                  and abs(switches[0][0] - xu) <= 2 * dx)

        # R' - R/x has the sign of -numerator: expected + on (lo, m), - on (m, M),
        # + on (M, hi); for the interval starting at the origin m = 0
        inner = xs[1:-1]
        num = np.array([an.numerator(x) for x in inner])
        changes = [(refine_root(an.numerator, float(inner[i]), float(inner[i + 1])), num[i] < 0)
                   for i in sign_change_cells(num)]
        expected = [False, True] if lo > 0.0 else [True]  # True: numerator - to +
        loc_tol = 1e-6 * max(1.0, hi)
        signs_ok = [up for _, up in changes] == expected
        if signs_ok:
            signs_ok = abs(changes[-1][0] - bounds.M) <= loc_tol
            if lo > 0.0:
                signs_ok = signs_ok and abs(changes[0][0] - bounds.m) <= loc_tol
        flip = next((x for x, up in changes if up), None)
        out.append(IntervalShape(j, lo, hi, xu, inflections, strict, relaxed,
                                 bounds.unique, flip, signs_ok))
    return ShapeReport(out)
