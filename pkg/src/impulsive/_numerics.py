"""Scalar bracketing, root refinement and golden-section extremization."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def sign_change_cells(values: np.ndarray) -> np.ndarray:
    """Indices ``i`` with a strict sign change between ``values[i]`` and ``values[i+1]``."""
    v = np.asarray(values, dtype=float)
    return np.flatnonzero(v[:-1] * v[1:] < 0.0)


def refine_root(f: Callable[[float], float], a: float, b: float, fa: float | None = None,
                fb: float | None = None, xtol: float = 1e-12) -> float:
    """Refine a bracketed root of ``f`` in ``[a, b]``.

    The bracket is re-checked with ``f`` itself because grid values may come
    from a differently-rounded evaluation; if the sign change has vanished the
    endpoint with the smaller residual is returned.
    """
    fa = f(a) if fa is None else fa
    fb = f(b) if fb is None else fb
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        return a if abs(fa) < abs(fb) else b
    return brentq(f, a, b, xtol=xtol, rtol=4.0 * np.finfo(float).eps, maxiter=200)


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10,
                   maximize: bool = False) -> tuple[float, float]:
    """Golden-section search for the extremum of a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x))`` with the bracket shrunk below ``tol``.
    """
    sgn = -1.0 if maximize else 1.0
    a, b = min(a, b), max(a, b)
    c = a + INV_PHI2 * (b - a)
    d = a + INV_PHI * (b - a)
    fc = sgn * f(c)
    fd = sgn * f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI2 * (b - a)
            fc = sgn * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = sgn * f(d)
    if fc < fd:
        return c, sgn * fc
    return d, sgn * fd


def bracket_roots(f: Callable[[float], float], xs: Sequence[float], values: np.ndarray,
                  xtol: float = 1e-12) -> list[float]:
    """All roots visible on the grid: exact grid zeros plus refined sign changes."""
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    roots = [float(x) for x in xs[values == 0.0]]
    for i in sign_change_cells(values):
        roots.append(refine_root(f, float(xs[i]), float(xs[i + 1]), float(values[i]),
                                 float(values[i + 1]), xtol))
    return sorted(roots)


def local_extrema(values: np.ndarray) -> np.ndarray:
    """Interior grid indices where the discrete slope changes sign."""
    v = np.asarray(values, dtype=float)
    d = np.diff(v)
    return np.flatnonzero(d[:-1] * d[1:] < 0.0) + 1
