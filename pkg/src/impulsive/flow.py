"""Smooth flow, variational flow and the pulsed (impulsive) flow."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

import numpy as np

from impulsive import _dopri
from impulsive.errors import DomainError, EscapeError, PreconditionError, StepLimitError
from impulsive.vectorfield import PolynomialVectorField


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = float("inf")
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if int(self.max_steps) < 1:
            raise ValueError("max_steps must be a positive integer")


DEFAULT_CONFIG = IntegratorConfig()


class Fate(str, enum.Enum):
    COMPLETED = "completed"
    ESCAPED_DOMAIN = "escaped_domain"


@dataclass(frozen=True)
class JumpRecord:
    t_k: float
    x_before: float
    x_after: float


@dataclass
class Trajectory:
    """Samples of a pulsed solution.

    ``samples`` is right-continuous: the entry at each pulse time holds the
    post-pulse value; the pre-pulse value lives in the matching JumpRecord.
    """

    samples: list[tuple[float, float]] = field(default_factory=list)
    jumps: list[JumpRecord] = field(default_factory=list)
    fate: Fate = Fate.COMPLETED

    @property
    def t(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def x(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])

    def to_csv(self, fh: IO[str]) -> None:
        """Write ``t,x,is_jump`` rows, with pre- and post-jump rows at each pulse."""
        from impulsive.export import fmt

        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "is_jump"])
        jumps = {j.t_k: j for j in self.jumps}
        for t, x in self.samples:
            j = jumps.get(t)
            if j is not None:
                w.writerow([fmt(t), fmt(j.x_before), 1])
                w.writerow([fmt(t), fmt(j.x_after), 1])
            else:
                w.writerow([fmt(t), fmt(x), 0])

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            self.to_csv(fh)


def _check_x0(vf: PolynomialVectorField, x0: float) -> None:
    if not (0.0 <= x0 <= vf.x_max):
        raise DomainError(f"initial condition {x0!r} outside [0, {vf.x_max!r}]")


def _integrate(vf, x0, t, cfg, with_var):
    if t < 0:
        raise DomainError(f"time must be nonnegative, got {t!r}")
    _check_x0(vf, x0)
    x, y, status, _ = _dopri.run(vf._c, vf._dc, x0, t, cfg.rel_tol, cfg.abs_tol,
                                 cfg.max_step, int(cfg.max_steps), vf.x_max, with_var)
    if status == _dopri.ESCAPED:
        raise EscapeError(f"trajectory from x0={x0!r} exceeded x_max={vf.x_max!r}", x=x)
    if status == _dopri.STEP_LIMIT:
        raise StepLimitError(f"step limit {cfg.max_steps} exceeded from x0={x0!r}")
    return x, y


def flow_map(vf: PolynomialVectorField, x0: float, t: float,
             cfg: IntegratorConfig = DEFAULT_CONFIG) -> float:
    """State at time ``t`` of ``x' = h(x)``, ``x(0) = x0``."""
    return _integrate(vf, float(x0), float(t), cfg, False)[0]


def flow_with_variational(vf: PolynomialVectorField, x0: float, t: float,
                          cfg: IntegratorConfig = DEFAULT_CONFIG) -> tuple[float, float]:
    """``(phi(t, x0), d phi(t, x0) / d x0)``.

    The derivative solves ``y' = h'(phi) y``, ``y(0) = 1`` alongside the
    state, using the same Runge-Kutta stages.
    """
    return _integrate(vf, float(x0), float(t), cfg, True)


def _check_pulse(omega: float, lam: float) -> None:
    if not omega > 0:
        raise PreconditionError(f"omega must be positive, got {omega!r}")
    if not lam >= -1.0:
        raise PreconditionError(f"lambda must satisfy lambda > -1 (or the boundary -1), got {lam!r}")


def _segment(vf, x0, omega, cfg, record):
    """Integrate one inter-pulse segment; returns (x_end, ts, xs, escaped)."""
    n = int(cfg.max_steps) + 1 if record else 1
    ts = np.empty(n)
    xs = np.empty(n)
    x, _, status, n_rec = _dopri.integrate(vf._c, vf._dc, float(x0), float(omega), cfg.rel_tol,
                                           cfg.abs_tol, cfg.max_step, int(cfg.max_steps),
                                           vf.x_max, False, record, ts, xs)
    if status == _dopri.STEP_LIMIT:
        raise StepLimitError(f"step limit {cfg.max_steps} exceeded from x0={x0!r}")
    return x, ts[:n_rec], xs[:n_rec], status == _dopri.ESCAPED


def simulate_impulsive(vf: PolynomialVectorField, omega: float, lam: float, x0: float,
                       n_pulses: int, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate the pulsed system over ``[0, n_pulses * omega]``.

    Pulses ``x -> (1 + lam) x`` act at ``t = k * omega`` for ``k = 1..n_pulses``;
    there is no pulse at ``t = 0``. The run stops with ``fate=escaped_domain``
    as soon as the state exceeds ``x_max``.
    """
    _check_pulse(omega, lam)
    _check_x0(vf, x0)
    cfg = cfg or IntegratorConfig(max_steps=200_000)
    traj = Trajectory(samples=[(0.0, float(x0))])
    x = float(x0)
    factor = 1.0 + lam
    for k in range(1, n_pulses + 1):
        t0 = (k - 1) * omega
        x_end, ts, xs, escaped = _segment(vf, x, omega, cfg, True)
        for t, xv in zip(ts[1:-1], xs[1:-1]):
            traj.samples.append((t0 + float(t), float(xv)))
        if escaped:
            traj.samples.append((t0 + float(ts[-1]), float(xs[-1])))
            traj.fate = Fate.ESCAPED_DOMAIN
            return traj
        t_k = k * omega
        x_after = factor * x_end
        traj.jumps.append(JumpRecord(t_k, x_end, x_after))
        traj.samples.append((t_k, x_after))
        x = x_after
        if x > vf.x_max:
            traj.fate = Fate.ESCAPED_DOMAIN
            return traj
    return traj


def pulse_sequence(vf: PolynomialVectorField, omega: float, lam: float, x0: float, K: int,
                   cfg: IntegratorConfig = DEFAULT_CONFIG) -> list[float]:
    """Post-pulse values ``[phi_lam(T_1, x0), ..., phi_lam(T_K, x0)]``.

    Raises :class:`EscapeError` when the sequence leaves ``[0, x_max]``; the
    error carries the values computed so far as ``partial``.
    """
    _check_pulse(omega, lam)
    _check_x0(vf, x0)
    out: list[float] = []
    x = float(x0)
    factor = 1.0 + lam
    for k in range(1, K + 1):
        try:
            x = factor * _integrate(vf, x, omega, cfg, False)[0]
        except EscapeError as exc:
            exc.partial = out  # type: ignore[attr-defined]
            exc.t = k * omega
            raise
        if x > vf.x_max:
            exc = EscapeError(f"pulse sequence diverged past x_max at pulse {k}", t=k * omega, x=x)
            exc.partial = out + [x]  # type: ignore[attr-defined]
            raise exc
        out.append(x)
    return out


def classify_sequence(seq: list[float], rtol: float = 1e-9, atol: float = 1e-12) -> str:
    """Label a pulse sequence ``constant``, ``increasing``, ``decreasing`` or ``oscillating``.

    Successive differences below ``atol + rtol*|x|`` count as zero: once a
    sequence has converged to integrator precision its increments are noise.
    """
    signs = set()
    for a, b in zip(seq, seq[1:]):
        d = b - a
        if abs(d) <= atol + rtol * max(abs(a), abs(b)):
            continue
        signs.add(d > 0)
    if not signs:
        return "constant"
    if len(signs) == 2:
        return "oscillating"
    return "increasing" if signs.pop() else "decreasing"
