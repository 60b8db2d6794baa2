"""Navier-Stokes flow with friction-type slip and leak boundary conditions.

Taylor-Hood finite elements on rectangles, a C2 regularization of the
friction functional, backward Euler in time with Newton on the coupled
velocity/pressure system, and verification studies for the resulting
estimates and complementarity conditions.
"""

from .mesh import Mesh, build_rectangle_mesh, boundary_trace_quadrature
from .regularizer import Regularizer
from .spaces import MixedSpace, ConstraintSet, build_mixed_space, build_constraints, interpolate
from .forms import AssembledForms, assemble_forms
from .saddle import Discretization, discretize
from .stepper import (
    LeakSmallnessViolated,
    LinearSolveFailed,
    NewtonDiverged,
    RunConfig,
    State,
    Trajectory,
    run_simulation,
    step,
)
from .config import ConfigError, parse_config

__version__ = "0.1.0"

__all__ = [
    "Mesh",
    "build_rectangle_mesh",
    "boundary_trace_quadrature",
    "Regularizer",
    "MixedSpace",
    "ConstraintSet",
    "build_mixed_space",
    "build_constraints",
    "interpolate",
    "AssembledForms",
    "assemble_forms",
    "Discretization",
    "discretize",
    "LeakSmallnessViolated",
    "LinearSolveFailed",
    "NewtonDiverged",
    "RunConfig",
    "State",
    "Trajectory",
    "run_simulation",
    "step",
    "ConfigError",
    "parse_config",
]
