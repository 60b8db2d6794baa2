"""Boundary stress recovery from the discrete momentum residual.

The stress on Gamma1 is the Riesz representative, with respect to the nodal
Gamma1 mass, of

    <sigma, v> = a0(u, v) + b(v, p) - (f, v) + (u', v) + a1~(u, u, v)

tested with velocities whose only nonzero values sit at one free Gamma1
node, pointing along the tangent (SBCF) or the normal (LBCF).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .forms import convection_residual, load_vector
from .regularizer import Regularizer
from .spaces import MixedSpace


@dataclass(frozen=True, eq=False)
class BoundaryStress:
    """Stress samples at the Gamma1 nodes.

    ``values`` is (K, 2) tangential vectors for SBCF and (K,) normal
    components for LBCF. Nodes shared with Gamma0 carry no test function;
    they are reported as zero and excluded through ``active``.
    """

    values: np.ndarray
    bc_kind: str
    nodes: np.ndarray
    weights: np.ndarray
    active: np.ndarray


def riesz_boundary(space: MixedSpace, residual: np.ndarray, bc_kind: str) -> BoundaryStress:
    g1 = space.gamma1
    nodal = space.nodal_values(residual)[g1.nodes]
    active = ~g1.corner
    if bc_kind == "SBCF":
        comp = np.where(active, (nodal @ g1.tangent) / g1.weights, 0.0)
        values = comp[:, None] * g1.tangent[None, :]
    elif bc_kind == "LBCF":
        values = np.where(active, (nodal @ g1.normal) / g1.weights, 0.0)
    else:
        raise ValueError(f"unknown bc kind {bc_kind!r}")
    return BoundaryStress(values=values, bc_kind=bc_kind, nodes=g1.nodes, weights=g1.weights, active=active)


def momentum_residual(disc, u, p, u_prev, dt, f_load) -> np.ndarray:
    """``a0(u,.) + b(.,p) - (f,.) + ((u - u_prev)/dt, .) + a1~(u,u,.)``."""
    fo = disc.forms
    r = fo.A0 @ u + fo.B.T @ p - f_load + convection_residual(disc.space, u, disc.bc_kind)
    if u_prev is not None:
        r = r + fo.M @ (u - u_prev) / dt
    return r


def recover_boundary_stress(prev, cur, cfg, disc) -> BoundaryStress:
    """Stress of ``cur`` with ``u'`` replaced by the backward difference."""
    dt = cur.t - prev.t
    if not np.isclose(dt, cfg.dt, rtol=1e-9, atol=0.0):
        raise ValueError(f"states are {dt} apart, expected dt={cfg.dt}")
    f_load = load_vector(disc.space, cfg.f, cur.t)
    r = momentum_residual(disc, cur.u, cur.p, prev.u, dt, f_load)
    return riesz_boundary(disc.space, r, disc.bc_kind)


@dataclass(frozen=True)
class ComplementarityReport:
    overshoot: float
    comp_residual: float
    stick_fraction: float


def complementarity_report(stress: BoundaryStress, trace, g_values, reg: Regularizer) -> ComplementarityReport:
    """Defects of ``|sigma| <= g`` and ``sigma . u + g |u| = 0`` on Gamma1.

    ``overshoot`` is ``max (|sigma| - g) / g`` over the active nodes,
    ``comp_residual`` the nodal-quadrature integral of
    ``|sigma . u + g |u||`` and ``stick_fraction`` the fraction of Gamma1
    (by nodal weight) where ``|u| < eps``.
    """
    g = np.asarray(g_values, dtype=float)
    trace = np.asarray(trace, dtype=float)
    s = stress.values
    if trace.ndim == 2:
        mag_s = np.linalg.norm(s, axis=1)
        mag_u = np.linalg.norm(trace, axis=1)
        dot = np.sum(s * trace, axis=1)
    else:
        mag_s, mag_u, dot = np.abs(s), np.abs(trace), s * trace
    act = stress.active
    overshoot = float(np.max((mag_s[act] - g[act]) / g[act])) if act.any() else 0.0
    defect = np.where(act, np.abs(dot + g * mag_u), 0.0)
    w = stress.weights
    return ComplementarityReport(
        overshoot=overshoot,
        comp_residual=float(np.sum(w * defect)),
        stick_fraction=float(np.sum(w[mag_u < reg.epsilon]) / np.sum(w)),
    )


def shift_pressure_constant(state, delta: float):
    """Add the constant ``delta`` to the pressure of an LBCF state."""
    if state.bc_kind != "LBCF":
        raise ValueError("pressure constant shifts apply to LBCF only; SBCF pressure has pinned mean")
    return replace(state, p=state.p + float(delta))
