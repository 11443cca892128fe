"""Polynomial right-hand sides ``h`` and their equilibria."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from impulsive import _dopri
from impulsive._numerics import bracket_roots, refine_root, sign_change_cells
from impulsive.errors import DomainError, HypothesisError

GRID_POINTS = 4096
ROOT_TOL = 1e-12


class EquilibriumKind(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class PolynomialVectorField:
    """``h(x) = sum_i coeffs[i] * x**i`` on the truncated domain ``[0, x_max]``.

    Construction only checks that the data is well formed; the structural
    hypotheses (``h(0) = 0``, hyperbolic origin, nonlinear part) are checked
    by :func:`validate_hypotheses` so that invalid systems can still be
    inspected and reported on.
    """

    coeffs: tuple[float, ...]
    x_max: float
    _c: np.ndarray = field(init=False, repr=False, compare=False)
    _dc: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs or not all(math.isfinite(c) for c in coeffs):
            raise ValueError("coeffs must be a non-empty list of finite reals")
        # drop trailing zeros so that degree() is meaningful
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        if not (math.isfinite(self.x_max) and self.x_max > 0):
            raise ValueError(f"x_max must be a positive real, got {self.x_max!r}")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "x_max", float(self.x_max))
        c = np.array(coeffs, dtype=float)
        dc = c[1:] * np.arange(1, len(c)) if len(c) > 1 else np.zeros(1)
        object.__setattr__(self, "_c", c)
        object.__setattr__(self, "_dc", dc)

    @classmethod
    def from_roots(cls, roots: Sequence[float], scale: float, x_max: float) -> PolynomialVectorField:
        """``h(x) = scale * prod(x - r)``; handy for constructing reference systems."""
        c = np.polynomial.polynomial.polyfromroots(roots) * scale
        return cls(tuple(c), x_max)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def A(self) -> float:
        """Linear part ``dh(0)``."""
        return self.coeffs[1] if len(self.coeffs) > 1 else 0.0

    def _check(self, x: float) -> None:
        if not (0.0 <= x <= self.x_max):
            raise DomainError(f"x={x!r} outside [0, {self.x_max!r}]")

    def eval(self, x: float) -> float:
        self._check(x)
        return _dopri.horner(self._c, float(x))

    __call__ = eval

    def deriv(self, x: float) -> float:
        self._check(x)
        return _dopri.horner(self._dc, float(x))

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        """Vectorised Horner evaluation without domain checks."""
        acc = np.zeros_like(np.asarray(xs, dtype=float))
        for c in self._c[::-1]:
            acc = acc * xs + c
        return acc

    def deriv_array(self, xs: np.ndarray) -> np.ndarray:
        acc = np.zeros_like(np.asarray(xs, dtype=float))
        for c in self._dc[::-1]:
            acc = acc * xs + c
        return acc


@dataclass(frozen=True)
class Equilibrium:
    location: float
    slope: float
    kind: EquilibriumKind


def find_equilibria(vf: PolynomialVectorField, tol: float = ROOT_TOL,
                    grid_points: int = GRID_POINTS) -> list[Equilibrium]:
    """All zeros of ``h`` in ``[0, x_max]``, increasing, each with slope and kind.

    Roots are bracketed by sign changes on a uniform grid and refined to
    ``tol``. Raises :class:`HypothesisError` for a non-hyperbolic zero,
    including double roots that produce no sign change.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    xs = np.linspace(0.0, vf.x_max, grid_points)
    h = lambda x: _dopri.horner(vf._c, x)  # noqa: E731
    dh = lambda x: _dopri.horner(vf._dc, x)  # noqa: E731
    roots = bracket_roots(h, xs, vf.eval_array(xs), xtol=tol)

    # touching zeros hide between grid points: look at critical points of h
    dvals = vf.deriv_array(xs)
    crit = [float(x) for x in xs[dvals == 0.0]]
    for i in sign_change_cells(dvals):
        crit.append(refine_root(dh, float(xs[i]), float(xs[i + 1]), xtol=tol))
    hscale = max(1.0, float(np.max(np.abs(vf.eval_array(xs)))))
    for c in crit:
        if abs(h(c)) <= 1e-12 * hscale and not any(abs(c - r) < 1e-6 for r in roots):
            raise HypothesisError(f"non-hyperbolic zero of h near x={c:.17g}")

    out = []
    for r in roots:
        s = dh(r)
        if abs(s) < max(tol, 1e-9):
            raise HypothesisError(f"non-hyperbolic zero of h at x={r:.17g} (h'={s:.3g})")
        out.append(Equilibrium(r, s, EquilibriumKind.STABLE if s < 0 else EquilibriumKind.UNSTABLE))
    return out


@dataclass
class HypothesisCheck:
    name: str
    status: str  # "ok", "warn" or "fail"
    detail: str


@dataclass
class ValidationReport:
    checks: list[HypothesisCheck]
    equilibria: list[Equilibrium]
    A: float

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    @property
    def warnings(self) -> list[HypothesisCheck]:
        return [c for c in self.checks if c.status == "warn"]

    def status_of(self, name: str) -> str:
        for c in self.checks:
            if c.name == name:
                return c.status
        raise KeyError(name)

    def summary(self) -> str:
        return "\n".join(f"{c.name} {c.status} ({c.detail})" for c in self.checks)


def validate_hypotheses(vf: PolynomialVectorField) -> ValidationReport:
    """Check the smoothness/linear-part and equilibrium-pattern hypotheses.

    Never raises; every failure is recorded in the report.
    """
    checks = []
    c = vf.coeffs
    A = vf.A
    checks.append(HypothesisCheck("h(0)=0", "ok" if c[0] == 0.0 else "fail", f"h(0)={c[0]:g}"))
    if A == 0.0:
        checks.append(HypothesisCheck("A!=0", "fail", "A=0, origin not hyperbolic"))
    else:
        checks.append(HypothesisCheck("A!=0", "ok", f"A={A:g}"))
        if A > 0:
            checks.append(HypothesisCheck("A<0", "warn", f"A={A:g}>0; regime tables need A<0"))
        else:
            checks.append(HypothesisCheck("A<0", "ok", f"A={A:g}"))
    nonlinear = vf.degree >= 2
    checks.append(HypothesisCheck("H!=0", "ok" if nonlinear else "fail",
                                  f"degree {vf.degree}"))

    equilibria: list[Equilibrium] = []
    try:
        equilibria = find_equilibria(vf)
    except HypothesisError as exc:
        checks.append(HypothesisCheck("equilibria", "fail", str(exc)))
    else:
        kinds = [e.kind for e in equilibria]
        alternating = all(a != b for a, b in zip(kinds, kinds[1:]))
        ends_stable = bool(kinds) and kinds[-1] is EquilibriumKind.STABLE
        starts_origin = bool(equilibria) and equilibria[0].location == 0.0
        k = len(equilibria)
        if alternating and ends_stable and starts_origin:
            parity_ok = (k % 2 == 1) if kinds[0] is EquilibriumKind.STABLE else (k % 2 == 0)
        else:
            parity_ok = False
        detail = f"k={k}: " + ", ".join(f"{e.location:.6g}{e.kind.value[0]}" for e in equilibria)
        checks.append(HypothesisCheck("equilibria", "ok" if parity_ok else "fail", detail))

    return ValidationReport(checks, equilibria, A)
