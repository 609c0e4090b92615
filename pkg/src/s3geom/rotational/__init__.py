"""Rotationally invariant CMC profiles."""

from .integrator import DomainExit, Event, Trajectory, integrate
from .profile import (
    ClosedFormPeriods,
    DelaunayClass,
    DelaunayKind,
    DomainError,
    NoSolution,
    NoSolutionError,
    OmegaBounds,
    ProfileEvent,
    ProfileSingularity,
    ProfileSolution,
    ProfileState,
    QuadratureError,
    classify,
    clifford_energy,
    closed_form_periods,
    discriminant,
    energy,
    graph_curvature,
    graph_curvature_reduced,
    graph_slope,
    integrate_profile,
    launch_state,
    ode_rhs,
    omega_bounds,
    period_by_quadrature,
    petal_axis_offset,
    profile_points,
    revolve,
    sigma_dot_reduced,
    sin_sigma_of_omega,
    sphere_profile_tau,
)
