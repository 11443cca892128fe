"""Periodic solutions of scalar ODEs ``x' = h(x)`` with pulses ``x -> (1 + lambda) x`` every ``omega``."""

from impulsive.bifurcation import (
    BifurcationKind,
    BifurcationPoint,
    RegimeTable,
    SweepDiagram,
    default_omega_grid,
    lambda_sweep,
    omega_scan,
    regime_table,
    saddle_node_points,
    transcritical_lambda,
)
from impulsive.flow import (
    IntegratorConfig,
    Trajectory,
    flow_map,
    flow_with_variational,
    pulse_sequence,
    simulate_impulsive,
)
from impulsive.periodic import (
    PeriodicOrbit,
    Stability,
    classify,
    find_periodic_orbits,
    lambda_for_initial_condition,
    verify_orbit,
)
from impulsive.rmap import StroboscopicAnalyzer, check_shape_hypotheses, interval_bounds
from impulsive.vectorfield import (
    Equilibrium,
    PolynomialVectorField,
    find_equilibria,
    validate_hypotheses,
)

__version__ = "0.1.0"
