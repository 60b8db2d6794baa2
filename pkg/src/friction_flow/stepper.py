"""Backward-Euler time stepping of the regularized friction problem.

Each step solves, for ``u`` in the constrained space and ``p``,

    ((u - u_prev)/dt, v) + a0(u, v) + a1~(u, u, v)
        + int_G1 g alpha_eps(u_trace) . v_trace ds + b(v, p) = (f(t+dt), v)
    b(u, q) = 0

by Newton's method on the coupled saddle system.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .constants import ConstantEstimates, estimate_constants
from .forms import (
    BC_KINDS,
    convection_jacobian,
    convection_residual,
    friction_jacobian,
    friction_residual,
    h1_seminorm,
    j_eps_value,
    j_value,
    l2_norm,
    load_vector,
    trace_l2_norm,
)
from .initdata import adapt_initial_velocity, check_compatibility, g_at_gamma1, make_initial_data
from .mesh import build_rectangle_mesh
from .newton import LinearSolveFailed, NewtonDiverged, newton_solve
from .regularizer import Regularizer
from .saddle import Discretization, discretize
from .stress import complementarity_report, recover_boundary_stress

log = logging.getLogger(__name__)

__all__ = [
    "RunConfig",
    "State",
    "Trajectory",
    "LeakSmallnessViolated",
    "NewtonDiverged",
    "LinearSolveFailed",
    "newton_solve",
    "step",
    "run_simulation",
    "build_discretization",
]


class LeakSmallnessViolated(UserWarning):
    """``gamma1_h ||u_n||_{L2(Gamma1)}`` exceeded ``alpha_h / 4``."""


def _zero_vector(*args):
    x = args[-2]
    return np.zeros_like(x), np.zeros_like(x)


def _one_scalar(t, x, y):
    return np.ones_like(x)


@dataclass
class RunConfig:
    """Geometry, physics, data and solver settings of one run.

    Fields are callables: ``f(t, x, y) -> (fx, fy)``, ``g(t, x, y) -> g``,
    ``u0(x, y)``, ``u0_rhs(x, y)`` (closed form of ``-nu lap u0``, plus
    ``grad p0`` for LBCF) and ``p0(x, y)``.
    """

    T_end: float
    bc_kind: str = "SBCF"
    width: float = 1.0
    height: float = 1.0
    nx: int = 8
    ny: int = 8
    gamma1_side: str = "bottom"
    nu: float = 1.0
    epsilon: float = 1e-2
    dt: float = 1e-2
    f: Callable = _zero_vector
    g: Callable = _one_scalar
    u0: Callable = _zero_vector
    u0_rhs: Callable | None = None
    p0: Callable | None = None
    adapt_initial: bool = True
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    monitor: bool = True
    output_dir: str | None = None
    snapshots: str = "last"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.T_end >= self.dt * (1 - 1e-12):
            raise ValueError("T_end must be at least dt")
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.bc_kind not in BC_KINDS:
            raise ValueError(f"bc_kind must be one of {BC_KINDS}")
        if not (self.newton_tol > 0 and self.newton_max_iter > 0):
            raise ValueError("Newton parameters must be positive")

    @property
    def n_steps(self) -> int:
        return max(1, math.ceil(self.T_end / self.dt - 1e-9))


@dataclass(frozen=True, eq=False)
class State:
    t: float
    u: np.ndarray
    p: np.ndarray
    energy: float
    traces: np.ndarray
    bc_kind: str
    newton_iters: int = 0


@dataclass
class Trajectory:
    states: list
    records: list = field(default_factory=list)
    disc: Discretization | None = None
    constants: ConstantEstimates | None = None

    @property
    def final(self) -> State:
        return self.states[-1]


def build_discretization(cfg: RunConfig, kind: str | None = None) -> Discretization:
    mesh = build_rectangle_mesh(cfg.width, cfg.height, cfg.nx, cfg.ny, cfg.gamma1_side)
    return discretize(mesh, cfg.nu, cfg.bc_kind, kind)


def make_state(disc: Discretization, t: float, u: np.ndarray, p: np.ndarray | None = None, iters: int = 0) -> State:
    space = disc.space
    p = np.zeros(space.n_pressure_dofs) if p is None else p
    return State(
        t=float(t),
        u=u,
        p=p,
        energy=float(u @ (disc.forms.M @ u)),
        traces=space.trace(u, disc.bc_kind),
        bc_kind=disc.bc_kind,
        newton_iters=iters,
    )


def _frictionless(disc: Discretization) -> bool:
    return disc.constraints.kind == "V0"


def step(state: State, cfg: RunConfig, disc: Discretization, reg: Regularizer, constants: ConstantEstimates | None = None) -> State:
    """Advance one backward-Euler step.

    The previous pressure is not used: pressure enters linearly, so each
    Newton solve starts from ``p = 0``.
    """
    space, fo, kind = disc.space, disc.forms, disc.bc_kind
    dt = cfg.dt
    t1 = state.t + dt
    F = load_vector(space, cfg.f, t1)
    g = g_at_gamma1(disc, cfg.g, t1)
    Mprev = fo.M @ state.u / dt
    lhs = fo.M / dt + fo.A0
    friction = not _frictionless(disc)

    def residual(u):
        r = lhs @ u - Mprev + convection_residual(space, u, kind) - F
        if friction:
            r = r + friction_residual(space, g, space.trace(u, kind), reg)
        return r

    def jacobian(u):
        J = lhs + convection_jacobian(space, u, kind)
        if friction:
            J = J + friction_jacobian(space, g, space.trace(u, kind), reg)
        return J

    rhs_norm = float(np.linalg.norm(disc.constraints.reduce(F + Mprev)))
    u, p, stats = disc.solve(residual, jacobian, state.u, tol=cfg.newton_tol, max_iter=cfg.newton_max_iter, rhs_norm=rhs_norm)
    new = make_state(disc, t1, u, p, stats.iterations)
    if kind == "LBCF" and constants is not None and leak_monitor(disc, u, constants, 4.0):
        warnings.warn(LeakSmallnessViolated(_leak_message(t1, disc, u, constants)), stacklevel=2)
    return new


def leak_monitor(disc: Discretization, u: np.ndarray, constants: ConstantEstimates, divisor: float) -> bool:
    """True when ``gamma1_h ||u_n||_{L2(Gamma1)} > alpha_h / divisor``."""
    return bool(constants.gamma1_h * trace_l2_norm(disc.space, u, "LBCF") > constants.alpha_h / divisor)


def _leak_message(t, disc, u, constants) -> str:
    leak = constants.gamma1_h * trace_l2_norm(disc.space, u, "LBCF")
    return f"t={t:.6g}: gamma1_h*||u_n|| = {leak:.3e} > alpha_h/4 = {constants.alpha_h / 4:.3e}"


def initial_velocity(cfg: RunConfig, disc: Discretization, reg: Regularizer) -> np.ndarray:
    data = make_initial_data(disc, cfg.u0, cfg.u0_rhs, cfg.g, cfg.p0)
    if not cfg.adapt_initial or _frictionless(disc):
        return data.u0
    report = check_compatibility(data, disc)
    if report.stress_exceeds_g:
        log.warning("initial data incompatible: max |sigma|/g = %.3g > 1 on Gamma1; proceeding", report.max_stress_ratio)
    return adapt_initial_velocity(data, disc, reg, tol=cfg.newton_tol, max_iter=cfg.newton_max_iter)


def step_record(prev: State, cur: State, cfg: RunConfig, disc: Discretization, reg: Regularizer, constants=None) -> dict:
    """Per-step diagnostics row (see the README for the column meanings)."""
    space, kind = disc.space, disc.bc_kind
    g = g_at_gamma1(disc, cfg.g, cur.t)
    trace = cur.traces
    stress = recover_boundary_stress(prev, cur, cfg, disc)
    comp = complementarity_report(stress, trace, g, reg)
    flag = 0
    if kind == "LBCF" and constants is not None:
        flag = int(leak_monitor(disc, cur.u, constants, 4.0))
    return {
        "t": cur.t,
        "energy": cur.energy,
        "h1_seminorm": h1_seminorm(disc.forms, cur.u),
        "j_value": j_value(space, g, trace),
        "j_eps_value": j_eps_value(space, g, trace, reg),
        ("slip_norm" if kind == "SBCF" else "leak_norm"): trace_l2_norm(space, cur.u, kind),
        "overshoot": comp.overshoot,
        "comp_residual": comp.comp_residual,
        "newton_iters": cur.newton_iters,
        "monitor_flag": flag,
    }


def run_simulation(
    cfg: RunConfig,
    disc: Discretization | None = None,
    initial_u: np.ndarray | None = None,
    constants: ConstantEstimates | None = None,
    records: bool = True,
) -> Trajectory:
    """Integrate from the adapted initial velocity to ``T_end``.

    For LBCF with ``cfg.monitor`` the Korn and trace constants are estimated
    (unless given) and the leak smallness monitor runs every step.
    """
    disc = disc or build_discretization(cfg)
    reg = Regularizer(cfg.epsilon)
    if disc.bc_kind == "LBCF" and cfg.monitor and constants is None:
        constants = estimate_constants(disc.forms)
    u0 = initial_velocity(cfg, disc, reg) if initial_u is None else disc.constraints.apply(initial_u)
    state = make_state(disc, 0.0, u0)
    traj = Trajectory(states=[state], disc=disc, constants=constants)
    if disc.bc_kind == "LBCF" and constants is not None:
        if leak_monitor(disc, u0, constants, 4.0):
            warnings.warn(LeakSmallnessViolated(_leak_message(0.0, disc, u0, constants)), stacklevel=2)
        elif leak_monitor(disc, u0, constants, 8.0):
            log.warning("initial leak exceeds alpha_h / (8 gamma1_h)")
    for k in range(1, cfg.n_steps + 1):
        try:
            new = step(state, cfg, disc, reg, constants)
        except (NewtonDiverged, LinearSolveFailed) as exc:
            exc.step = k
            exc.args = (f"step {k} (t={state.t + cfg.dt:.6g}): {exc.args[0] if exc.args else exc}",)
            raise
        if records:
            traj.records.append(step_record(state, new, cfg, disc, reg, constants))
        traj.states.append(new)
        state = new
    return traj
