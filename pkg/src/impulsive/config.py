"""Run configuration: a flat TOML file plus an optional ``[integrator]`` table."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from impulsive.flow import IntegratorConfig
from impulsive.vectorfield import GRID_POINTS, PolynomialVectorField

BUNDLED = Path(__file__).parent / "configs"

_TOP_KEYS = {"coeffs", "x_max", "omega", "lambda", "grid_points", "output_dir", "integrator",
             "x0", "n_pulses", "lambda_min", "lambda_max", "n_points", "x_ref"}
_INTEGRATOR_KEYS = {"rel_tol", "abs_tol", "max_step", "max_steps"}


class ConfigError(ValueError):
    """The configuration file is unreadable or malformed."""


@dataclass(frozen=True)
class RunConfig:
    coeffs: tuple[float, ...]
    x_max: float
    omega: float
    lam: float | None = None
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    grid_points: int = GRID_POINTS
    output_dir: Path = Path("out")
    extras: dict = field(default_factory=dict)

    def vector_field(self) -> PolynomialVectorField:
        return PolynomialVectorField(self.coeffs, self.x_max)

    def with_overrides(self, **kw) -> RunConfig:
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def resolve(path: str | Path) -> Path:
    """A filesystem path, or the name of a bundled config (``cubic``, ``quintic``)."""
    p = Path(path)
    if p.exists():
        return p
    for cand in (BUNDLED / p.name, BUNDLED / f"{p.name}.toml"):
        if cand.exists():
            return cand
    return p


def _real(data, key, required=True):
    if key not in data:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return None
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{key!r} must be a finite real, got {v!r}")
    return float(v)


def load_config(path: str | Path) -> RunConfig:
    path = resolve(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc

    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    coeffs = data.get("coeffs")
    if not isinstance(coeffs, list) or not coeffs:
        raise ConfigError("'coeffs' must be a non-empty array of reals")
    coeffs = tuple(_real({"c": c}, "c") for c in coeffs)
    x_max = _real(data, "x_max")
    omega = _real(data, "omega")
    if x_max <= 0:
        raise ConfigError("'x_max' must be positive")
    if omega <= 0:
        raise ConfigError("'omega' must be positive")
    lam = _real(data, "lambda", required=False)

    integ = data.get("integrator", {})
    if not isinstance(integ, dict) or set(integ) - _INTEGRATOR_KEYS:
        raise ConfigError(f"[integrator] accepts only {sorted(_INTEGRATOR_KEYS)}")
    try:
        icfg = IntegratorConfig(**integ)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [integrator]: {exc}") from exc

    gp = data.get("grid_points", GRID_POINTS)
    if isinstance(gp, bool) or not isinstance(gp, int) or gp < 3:
        raise ConfigError("'grid_points' must be an integer >= 3")
    out = data.get("output_dir", "out")
    if not isinstance(out, str):
        raise ConfigError("'output_dir' must be a string")
    extras = {k: data[k] for k in ("x0", "n_pulses", "lambda_min", "lambda_max", "n_points", "x_ref")
              if k in data}
    return RunConfig(coeffs, x_max, omega, lam, icfg, gp, Path(out), extras)
