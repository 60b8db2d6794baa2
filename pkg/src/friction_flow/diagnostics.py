"""Verification studies: constants, epsilon limit, stability, thresholds."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .constants import (
    ConstantEstimates,
    estimate_constants,
    estimate_korn_constant,
    estimate_trace_constant,
    trace_ratio,
)
from .forms import integrate_g, l2_norm, trace_l2_norm
from .initdata import g_at_gamma1
from .regularizer import Regularizer
from .stepper import RunConfig, build_discretization, initial_velocity, run_simulation
from .stress import complementarity_report, recover_boundary_stress

__all__ = [
    "ConstantEstimates",
    "estimate_constants",
    "estimate_korn_constant",
    "estimate_trace_constant",
    "trace_ratio",
    "epsilon_study",
    "stability_study",
    "threshold_sweep",
    "hard_constraint_run",
    "worker_count",
]


def worker_count() -> int:
    """Worker cap from ``FRICTION_FLOW_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("FRICTION_FLOW_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _final_complementarity(traj, cfg):
    disc = traj.disc
    prev, cur = traj.states[-2], traj.states[-1]
    g = g_at_gamma1(disc, cfg.g, cur.t)
    stress = recover_boundary_stress(prev, cur, cfg, disc)
    return stress, complementarity_report(stress, cur.traces, g, Regularizer(cfg.epsilon)), g


@dataclass(frozen=True)
class EpsilonRow:
    epsilon: float
    l2_difference: float
    comp_residual: float
    j_gap: float
    eps_int_g: float


def epsilon_study(cfg: RunConfig, eps_list) -> list[EpsilonRow]:
    """Run once per epsilon and compare ``u_eps(T)`` with the smallest-eps run."""
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(a <= b for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be non-empty and strictly descending")
    disc = build_discretization(cfg)

    def one(eps):
        c = replace(cfg, epsilon=eps)
        return run_simulation(c, disc=disc, records=False)

    trajs = _map(one, eps_list)
    ref = trajs[-1].final.u
    rows = []
    for eps, traj in zip(eps_list, trajs):
        c = replace(cfg, epsilon=eps)
        _, comp, g = _final_complementarity(traj, c)
        space = disc.space
        trace = traj.final.traces
        mag = np.linalg.norm(trace, axis=-1) if trace.ndim == 2 else np.abs(trace)
        reg = Regularizer(eps)
        rho = reg.rho(trace, vector=trace.ndim == 2)
        j_gap = float(np.sum(space.gamma1.weights * g * np.abs(mag - rho)))
        rows.append(
            EpsilonRow(
                epsilon=eps,
                l2_difference=l2_norm(disc.forms, traj.final.u - ref),
                comp_residual=comp.comp_residual,
                j_gap=j_gap,
                eps_int_g=eps * integrate_g(space, g),
            )
        )
    return rows


@dataclass(frozen=True)
class StabilityResult:
    times: np.ndarray
    error_series: np.ndarray
    amplification: float  # K(T) = error(T) / delta0
    max_amplification: float


def random_solenoidal_field(disc, seed: int = 0) -> np.ndarray:
    """Unit-L2 discretely divergence-free field in the constrained space.

    A smooth random field is projected by a Stokes-type solve
    ``(M + K) w + B^T q = (M + K) z``, ``B w = 0``.
    """
    rng = np.random.default_rng(seed)
    space = disc.space
    x, y = space.node_coords.T
    W, H = space.mesh.width, space.mesh.height
    z = np.zeros(space.n_velocity_dofs)
    for c in range(2):
        vals = np.zeros(space.n_nodes)
        for kx in range(1, 4):
            for ky in range(1, 4):
                vals += rng.standard_normal() * np.sin(kx * np.pi * x / W) * np.sin(ky * np.pi * y / H)
        z[c * space.n_nodes : (c + 1) * space.n_nodes] = vals
    G = disc.forms.gram
    rhs = G @ z
    w, _, _ = disc.solve(lambda u: G @ u - rhs, lambda u: G, np.zeros_like(z), tol=1e-13, max_iter=3)
    return w / l2_norm(disc.forms, w)


def stability_study(cfg: RunConfig, delta0: float, seed: int = 0) -> StabilityResult:
    """Distance between a base run and one started from ``u0 + delta0 w``."""
    if delta0 < 0:
        raise ValueError("delta0 must be nonnegative")
    disc = build_discretization(cfg)
    reg = Regularizer(cfg.epsilon)
    u0 = initial_velocity(cfg, disc, reg)
    w = random_solenoidal_field(disc, seed)
    base, pert = _map(
        lambda start: run_simulation(cfg, disc=disc, initial_u=start, records=False),
        [u0, u0 + delta0 * w],
    )
    times = np.array([s.t for s in base.states])
    err = np.array([l2_norm(disc.forms, a.u - b.u) for a, b in zip(base.states, pert.states)])
    if delta0 == 0:
        return StabilityResult(times, err, 0.0, 0.0)
    return StabilityResult(times, err, float(err[-1] / delta0), float(err.max() / delta0))


def hard_constraint_run(cfg: RunConfig):
    """Same run with the friction boundary clamped (u = 0 on all of Gamma)."""
    disc = build_discretization(cfg, kind="V0")
    return run_simulation(cfg, disc=disc, records=False)


@dataclass(frozen=True)
class SweepRow:
    g: float
    state: str  # stick / slip (SBCF) or seal / leak (LBCF)
    trace_norm: float
    stress_max: float


def threshold_sweep(cfg: RunConfig, g_list) -> list[SweepRow]:
    """Classify the end state of one run per constant friction modulus.

    Stick (seal) when ``||trace||_{L2(Gamma1)} < 2 eps |Gamma1|^{1/2}``.
    Rows come back sorted by ``g``.
    """
    g_list = sorted(float(g) for g in g_list)
    if any(g <= 0 for g in g_list):
        raise ValueError("friction modulus must be strictly positive")
    disc = build_discretization(cfg)
    cutoff = 2.0 * cfg.epsilon * np.sqrt(disc.space.gamma1.length)
    names = ("stick", "slip") if cfg.bc_kind == "SBCF" else ("seal", "leak")

    def one(gv):
        c = replace(cfg, g=lambda t, x, y, gv=gv: np.full_like(x, gv))
        traj = run_simulation(c, disc=disc, records=False)
        stress, _, _ = _final_complementarity(traj, c)
        mag = np.linalg.norm(stress.values, axis=-1) if stress.values.ndim == 2 else np.abs(stress.values)
        norm = trace_l2_norm(disc.space, traj.final.u, cfg.bc_kind)
        return SweepRow(gv, names[0] if norm < cutoff else names[1], norm, float(mag[stress.active].max()))

    return _map(one, g_list)


def sweep_is_monotone(rows: list[SweepRow]) -> bool:
    """No stick/seal entry below a slip/leak entry in increasing g."""
    stuck = [r.state in ("stick", "seal") for r in sorted(rows, key=lambda r: r.g)]
    return all(not a or b for a, b in zip(stuck, stuck[1:]))
