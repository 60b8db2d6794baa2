"""Adaptation of the initial velocity to the regularized friction problem.

Given ``u0`` and the load ``(-nu lap u0 [+ grad p0], v)``, the adapted
velocity solves

    a0(u, v) + int_G1 g(0) alpha_eps(u_trace) . v_trace ds = rhs(v)

for every discretely divergence-free ``v`` in the constrained space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forms import friction_jacobian, friction_residual, load_vector, trace_l2_norm
from .regularizer import Regularizer
from .saddle import Discretization
from .spaces import evaluate_scalar_field, interpolate, interpolate_pressure
from .stress import riesz_boundary


@dataclass(frozen=True, eq=False)
class InitialData:
    u0: np.ndarray
    rhs: np.ndarray
    g0_values: np.ndarray
    p0: np.ndarray | None = None


def g_at_gamma1(disc: Discretization, g, t: float) -> np.ndarray:
    """Friction modulus ``g(t, x, y)`` at the Gamma1 nodes."""
    return evaluate_scalar_field(g, disc.space.gamma1.points, t)


def make_initial_data(disc: Discretization, u0, rhs=None, g=None, p0=None) -> InitialData:
    """Interpolate ``u0(x, y)`` and build the load from ``rhs(x, y)``.

    ``rhs`` should be the closed form of ``-nu lap u0`` (plus ``grad p0``
    for LBCF). Without it the discrete surrogate ``a0(u0_h, .)``
    (plus ``b(., p0_h)``) is used. ``g(t, x, y)`` defaults to one.
    """
    space = disc.space
    u0h = disc.constraints.apply(interpolate(space, u0))
    p0h = interpolate_pressure(space, p0) if p0 is not None else None
    if rhs is not None:
        load = load_vector(space, rhs)
    else:
        load = disc.forms.A0 @ u0h
        if p0h is not None:
            load = load + disc.forms.B.T @ p0h
    g = g if g is not None else (lambda t, x, y: np.ones_like(x))
    return InitialData(u0=u0h, rhs=load, g0_values=g_at_gamma1(disc, g, 0.0), p0=p0h)


def adapt_initial_velocity(
    data: InitialData, disc: Discretization, reg: Regularizer, tol: float = 1e-10, max_iter: int = 50
) -> np.ndarray:
    space = disc.space
    kind = disc.bc_kind
    A0 = disc.forms.A0
    g = data.g0_values
    if not np.all(np.isfinite(data.rhs)):
        raise ValueError("initial-data load is not finite")

    def residual(u):
        return A0 @ u + friction_residual(space, g, space.trace(u, kind), reg) - data.rhs

    def jacobian(u):
        return A0 + friction_jacobian(space, g, space.trace(u, kind), reg)

    rhs_norm = float(np.linalg.norm(disc.constraints.reduce(data.rhs)))
    u, _, _ = disc.solve(residual, jacobian, data.u0, tol=tol, max_iter=max_iter, rhs_norm=rhs_norm)
    return u


@dataclass(frozen=True)
class CompatibilityReport:
    max_stress_ratio: float  # max |sigma| / g(0) on Gamma1
    comp_residual: float
    leak_norm: float  # ||u0 . n||_{L2(Gamma1)}
    stress_exceeds_g: bool
    leak_budget_exceeded: bool


def check_compatibility(data: InitialData, disc: Discretization, constants=None) -> CompatibilityReport:
    """Advisory check that the friction law holds for ``u0`` at ``t = 0``.

    ``constants`` (``alpha_h``, ``gamma1_h``) enables the LBCF leak budget
    ``gamma1_h ||u0n|| <= alpha_h / 8``.
    """
    space = disc.space
    kind = disc.bc_kind
    r = disc.forms.A0 @ data.u0 - data.rhs
    if data.p0 is not None:
        r = r + disc.forms.B.T @ data.p0
    stress = riesz_boundary(space, r, kind)
    trace = space.trace(data.u0, kind)
    g = data.g0_values
    act = stress.active
    if kind == "SBCF":
        mag_s = np.linalg.norm(stress.values, axis=1)
        mag_u = np.linalg.norm(trace, axis=1)
        dot = np.sum(stress.values * trace, axis=1)
    else:
        mag_s, mag_u, dot = np.abs(stress.values), np.abs(trace), stress.values * trace
    ratio = float(np.max(mag_s[act] / g[act])) if act.any() else 0.0
    comp = float(np.sum(np.where(act, stress.weights * np.abs(dot + g * mag_u), 0.0)))
    leak = trace_l2_norm(space, data.u0, "LBCF")
    budget = False
    if kind == "LBCF" and constants is not None:
        budget = bool(constants.gamma1_h * leak > constants.alpha_h / 8.0)
    return CompatibilityReport(
        max_stress_ratio=ratio,
        comp_residual=comp,
        leak_norm=leak,
        stress_exceeds_g=bool(ratio > 1.0),
        leak_budget_exceeded=budget,
    )
