"""Finite-element forms: viscous, divergence, mass, convection, friction.

Interior integrals use a degree-5 rule, exact for every polynomial integrand
that arises here. The convection form is skew-symmetrized::

    a1~(u, v, w) = 1/2 [a1(u, v, w) - a1(u, w, v)]            (SBCF)
    a1~(u, v, w) = 1/2 [a1(u, v, w) - a1(u, w, v)]
                   + 1/2 int_G1 u_n v.w ds                     (LBCF)

Friction integrals over Gamma1 use nodal (Gauss-Lobatto) quadrature on the
P2 trace nodes, so the friction terms act node by node.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import _fem
from .regularizer import Regularizer
from .spaces import MixedSpace, evaluate_vector_field

BC_KINDS = ("SBCF", "LBCF")
BOUNDARY_GAUSS_POINTS = 4


@dataclass(frozen=True)
class _Quadrature:
    phi: np.ndarray  # (Q, 6)
    dphi: np.ndarray  # (M, Q, 6, 2)
    psi: np.ndarray  # (Q, 3) P1 basis
    w: np.ndarray  # (M, Q) physical weights
    points: np.ndarray  # (M, Q, 2)
    # Gauss rule on Gamma1 edges
    b_psi: np.ndarray  # (Qb, 3) trace basis
    b_w: np.ndarray  # (k, Qb)
    b_points: np.ndarray  # (k, Qb, 2)


@lru_cache(maxsize=16)
def quadrature(space: MixedSpace) -> _Quadrature:
    L = _fem.TRI_BARY
    verts = space.mesh.vertices[space.mesh.triangles]  # (M, 3, 2)
    s, wb = np.polynomial.legendre.leggauss(BOUNDARY_GAUSS_POINTS)
    s = 0.5 * (s + 1.0)
    wb = 0.5 * wb
    g1 = space.gamma1
    p0, p1 = g1.edge_points[:, 0], g1.edge_points[:, 1]
    return _Quadrature(
        phi=_fem.p2_values(L),
        dphi=_fem.p2_gradients(L, space.grad_bary),
        psi=L.copy(),
        w=space.areas[:, None] * _fem.TRI_WEIGHTS[None, :],
        points=np.einsum("qi,mid->mqd", L, verts),
        b_psi=_fem.edge_p2_values(s),
        b_w=g1.edge_lengths[:, None] * wb[None, :],
        b_points=p0[:, None, :] + s[None, :, None] * (p1 - p0)[:, None, :],
    )


def _scatter(space: MixedSpace, local: np.ndarray, row_off=0, col_off=0, shape=None) -> sp.csr_matrix:
    """Assemble (M, 6, 6) element blocks indexed [test, trial] over P2 nodes."""
    en = space.element_nodes
    rows = np.broadcast_to(en[:, :, None], local.shape) + row_off
    cols = np.broadcast_to(en[:, None, :], local.shape) + col_off
    n = space.n_nodes
    shape = shape or (n, n)
    return sp.coo_matrix((local.ravel(), (rows.ravel(), cols.ravel())), shape=shape).tocsr()


def _vector_blocks(space: MixedSpace, blocks, edge_blocks=None) -> sp.csr_matrix:
    """Assemble ``blocks[c][d]`` (element arrays or None) into a 2x2 block
    operator, plus optional Gamma1 edge blocks in the same layout."""
    n = space.n_nodes
    data, rows, cols = [], [], []
    for nodes, blk in ((space.element_nodes, blocks), (space.gamma1.edge_nodes, edge_blocks)):
        if blk is None:
            continue
        for c in range(2):
            for d in range(2):
                local = blk[c][d]
                if local is None:
                    continue
                data.append(local.ravel())
                rows.append((np.broadcast_to(nodes[:, :, None], local.shape) + c * n).ravel())
                cols.append((np.broadcast_to(nodes[:, None, :], local.shape) + d * n).ravel())
    if not data:
        return sp.csr_matrix((2 * n, 2 * n))
    return sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(2 * n, 2 * n)
    ).tocsr()


@dataclass(frozen=True, eq=False)
class AssembledForms:
    """Linear operators of the discretization.

    ``A0`` viscous form, ``B`` divergence (rows pressure, cols velocity) with
    ``p @ B @ v = b(v, p)``, ``M`` velocity mass, ``K`` vector Laplacian
    stiffness (so ``M + K`` is the H1 Gram matrix), ``M_gamma1`` the
    diagonal nodal mass on the Gamma1 nodes.
    """

    space: MixedSpace
    nu: float
    A0: sp.csr_matrix
    B: sp.csr_matrix
    M: sp.csr_matrix
    K: sp.csr_matrix
    M_gamma1: sp.dia_matrix
    pressure_mass: np.ndarray  # integral of each P1 basis function

    @property
    def gram(self) -> sp.csr_matrix:
        return self.M + self.K


def _stiffness_local(space: MixedSpace) -> np.ndarray:
    q = quadrature(space)
    return np.einsum("mq,mqad,mqbd->mba", q.w, q.dphi, q.dphi)


def assemble_a0(space: MixedSpace, nu: float) -> sp.csr_matrix:
    """``(nu/2) sum_ij int (d_i u_j + d_j u_i)(d_i v_j + d_j v_i)``."""
    if not nu > 0:
        raise ValueError(f"viscosity must be positive, got {nu}")
    q = quadrature(space)
    lap = _stiffness_local(space)
    blocks = [[None, None], [None, None]]
    for c in range(2):
        for d in range(2):
            cross = np.einsum("mq,mqa,mqb->mba", q.w, q.dphi[..., c], q.dphi[..., d])
            blocks[c][d] = nu * (cross + lap if c == d else cross)
    return _vector_blocks(space, blocks)


def assemble_b(space: MixedSpace) -> sp.csr_matrix:
    """``b(v, q) = -int div(v) q``, shape (n_pressure, n_velocity)."""
    q = quadrature(space)
    tri = space.mesh.triangles
    n = space.n_nodes
    mats = []
    for d in range(2):
        local = -np.einsum("mq,mqa,qk->mka", q.w, q.dphi[..., d], q.psi)
        rows = np.broadcast_to(tri[:, :, None], local.shape)
        cols = np.broadcast_to(space.element_nodes[:, None, :], local.shape)
        mats.append(
            sp.coo_matrix(
                (local.ravel(), (rows.ravel(), cols.ravel())), shape=(space.n_pressure_dofs, n)
            ).tocsr()
        )
    return sp.hstack(mats).tocsr()


def assemble_mass(space: MixedSpace) -> sp.csr_matrix:
    q = quadrature(space)
    local = np.einsum("mq,qa,qb->mba", q.w, q.phi, q.phi)
    return _vector_blocks(space, [[local, None], [None, local]])


def assemble_stiffness(space: MixedSpace) -> sp.csr_matrix:
    lap = _stiffness_local(space)
    return _vector_blocks(space, [[lap, None], [None, lap]])


def assemble_forms(space: MixedSpace, nu: float) -> AssembledForms:
    q = quadrature(space)
    pm = np.zeros(space.n_pressure_dofs)
    np.add.at(pm, space.mesh.triangles, np.einsum("mq,qk->mk", q.w, q.psi))
    return AssembledForms(
        space=space,
        nu=float(nu),
        A0=assemble_a0(space, nu),
        B=assemble_b(space),
        M=assemble_mass(space),
        K=assemble_stiffness(space),
        M_gamma1=sp.diags(space.gamma1.weights),
        pressure_mass=pm,
    )


def load_vector(space: MixedSpace, field, *args) -> np.ndarray:
    """``(f, v)`` for every velocity basis function; ``field(*args, x, y)``."""
    q = quadrature(space)
    vals = evaluate_vector_field(field, q.points, *args)  # (M, Q, 2)
    n = space.n_nodes
    out = np.zeros(2 * n)
    for c in range(2):
        np.add.at(out[c * n : (c + 1) * n], space.element_nodes, np.einsum("mq,mq,qa->ma", q.w, vals[..., c], q.phi))
    return out


# --- convection ----------------------------------------------------------


def _at_quadrature(space: MixedSpace, u: np.ndarray):
    q = quadrature(space)
    un = space.nodal_values(u)[space.element_nodes]  # (M, 6, 2)
    uq = np.einsum("qa,mac->mqc", q.phi, un)
    # gu[..., c, d] = d_d u_c
    gu = np.einsum("mqad,mac->mqcd", q.dphi, un)
    return uq, gu


def _gamma1_at_gauss(space: MixedSpace, u: np.ndarray) -> np.ndarray:
    q = quadrature(space)
    un = space.nodal_values(u)[space.gamma1.edge_nodes]  # (k, 3, 2)
    return np.einsum("qj,kjc->kqc", q.b_psi, un)


def _check_kind(bc_kind):
    if bc_kind not in BC_KINDS:
        raise ValueError(f"bc kind must be one of {BC_KINDS}, got {bc_kind!r}")


def a1_standard(space: MixedSpace, u, v, w) -> float:
    """Unmodified ``int ((u . grad) v) . w``."""
    q = quadrature(space)
    uq, _ = _at_quadrature(space, u)
    _, gv = _at_quadrature(space, v)
    wq, _ = _at_quadrature(space, w)
    return float(np.einsum("mq,mqd,mqcd,mqc->", q.w, uq, gv, wq))


def boundary_convection(space: MixedSpace, u, v, w) -> float:
    """``1/2 int_Gamma1 u_n v . w ds`` by Gauss quadrature."""
    q = quadrature(space)
    n = space.gamma1.normal
    ub = _gamma1_at_gauss(space, u)
    vb = _gamma1_at_gauss(space, v)
    wb = _gamma1_at_gauss(space, w)
    return 0.5 * float(np.einsum("kq,kq,kqc,kqc->", q.b_w, ub @ n, vb, wb))


def _boundary_blocks(space, u, with_k2: bool):
    """Gamma1 contributions of ``1/2 int u_n v.w`` (trial v) and its
    derivative in ``u`` (trial delta), as edge-local 3x3 blocks."""
    q = quadrature(space)
    n = space.gamma1.normal
    ub = _gamma1_at_gauss(space, u)
    pp = q.b_psi[:, :, None] * q.b_psi[:, None, :]  # (q, b, a)
    k1 = 0.5 * np.einsum("kq,qba->kba", q.b_w * (ub @ n), pp)
    k2 = None
    if with_k2:
        base = [0.5 * np.einsum("kq,qba->kba", q.b_w * ub[..., c], pp) for c in range(2)]
        k2 = [[n[d] * base[c] for d in range(2)] for c in range(2)]
    return k1, k2


def _skew_local(space: MixedSpace, uq: np.ndarray) -> np.ndarray:
    q = quadrature(space)
    # adv[m, b, a] = int (u . grad phi_a) phi_b
    udphi = np.einsum("mqd,mqad->mqa", uq, q.dphi) * q.w[..., None]
    adv = np.matmul(q.phi.T[None], udphi)
    return 0.5 * (adv - adv.transpose(0, 2, 1))


def convection_matrix(space: MixedSpace, u: np.ndarray, bc_kind: str) -> sp.csr_matrix:
    """Matrix ``C(u)`` with ``w @ C(u) @ v = a1~(u, v, w)``."""
    _check_kind(bc_kind)
    uq, _ = _at_quadrature(space, u)
    skew = _skew_local(space, uq)
    edge = None
    if bc_kind == "LBCF":
        k1, _ = _boundary_blocks(space, u, with_k2=False)
        edge = [[k1, None], [None, k1]]
    return _vector_blocks(space, [[skew, None], [None, skew]], edge)


def convection_apply(space: MixedSpace, u, v, w, bc_kind: str) -> float:
    return float(np.asarray(w) @ (convection_matrix(space, u, bc_kind) @ np.asarray(v)))


def convection_residual(space: MixedSpace, u: np.ndarray, bc_kind: str) -> np.ndarray:
    """Vector ``a1~(u, u, phi_i)``, assembled without forming ``C(u)``."""
    _check_kind(bc_kind)
    q = quadrature(space)
    uq, gu = _at_quadrature(space, u)
    conv = np.einsum("mqd,mqcd->mqc", uq, gu)  # (u . grad) u
    udphi = np.einsum("mqd,mqad->mqa", uq, q.dphi)  # u . grad phi_a
    n = space.n_nodes
    out = np.zeros(2 * n)
    for c in range(2):
        local = 0.5 * (q.w * conv[..., c]) @ q.phi - 0.5 * np.einsum("mq,mqa->ma", q.w * uq[..., c], udphi)
        np.add.at(out[c * n : (c + 1) * n], space.element_nodes, local)
    if bc_kind == "LBCF":
        ub = _gamma1_at_gauss(space, u)
        wun = 0.5 * q.b_w * (ub @ space.gamma1.normal)
        for c in range(2):
            np.add.at(out[c * n : (c + 1) * n], space.gamma1.edge_nodes, (wun * ub[..., c]) @ q.b_psi)
    return out


def convection_jacobian(space: MixedSpace, u: np.ndarray, bc_kind: str) -> sp.csr_matrix:
    """Derivative of ``u -> a1~(u, u, .)``: ``C(u) + D(u)`` where
    ``w @ D(u) @ delta = a1~(delta, u, w)``."""
    _check_kind(bc_kind)
    q = quadrature(space)
    uq, gu = _at_quadrature(space, u)
    skew = _skew_local(space, uq)
    mass_qba = q.phi[:, :, None] * q.phi[:, None, :]  # (q, b, a)
    blocks = [[None, None], [None, None]]
    for c in range(2):
        wu = 0.5 * q.w * uq[..., c]
        for d in range(2):
            first = 0.5 * np.einsum("mq,qba->mba", q.w * gu[..., c, d], mass_qba)
            second = -np.matmul(q.phi.T[None], wu[..., None] * q.dphi[..., d]).transpose(0, 2, 1)
            blocks[c][d] = first + second + (skew if c == d else 0.0)
    edge = None
    if bc_kind == "LBCF":
        k1, k2 = _boundary_blocks(space, u, with_k2=True)
        edge = [[k2[c][d] + (k1 if c == d else 0.0) for d in range(2)] for c in range(2)]
    return _vector_blocks(space, blocks, edge)


# --- friction ------------------------------------------------------------


def _check_g(g_values) -> np.ndarray:
    g = np.asarray(g_values, dtype=float)
    if not np.all(g > 0):
        raise ValueError("friction modulus must be strictly positive")
    return g


def friction_residual(space: MixedSpace, g_values, trace, reg: Regularizer) -> np.ndarray:
    """``int_G1 g alpha_eps(trace) . v_trace ds`` for every basis function.

    A (K, 2) ``trace`` is the tangential trace (SBCF), a (K,) ``trace`` the
    normal trace (LBCF).
    """
    g = _check_g(g_values)
    trace = np.asarray(trace, dtype=float)
    g1 = space.gamma1
    n = space.n_nodes
    out = np.zeros(2 * n)
    wg = g1.weights * g
    if trace.ndim == 2:
        a = reg.alpha(trace, vector=True)
        for c in range(2):
            out[c * n + g1.nodes] = wg * a[:, c]
    else:
        a = reg.alpha(trace)
        for c in range(2):
            out[c * n + g1.nodes] = wg * a * g1.normal[c]
    return out


def friction_jacobian(space: MixedSpace, g_values, trace, reg: Regularizer) -> sp.csr_matrix:
    """``int_G1 g v_trace^T beta_eps(trace) w_trace ds`` as a sparse operator."""
    g = _check_g(g_values)
    trace = np.asarray(trace, dtype=float)
    g1 = space.gamma1
    n = space.n_nodes
    wg = g1.weights * g
    if trace.ndim == 2:
        T = np.outer(g1.tangent, g1.tangent)
        local = wg[:, None, None] * (T @ reg.beta(trace, vector=True) @ T)
    else:
        local = (wg * reg.beta(trace))[:, None, None] * np.outer(g1.normal, g1.normal)[None]
    rows, cols, vals = [], [], []
    for c in range(2):
        for d in range(2):
            rows.append(c * n + g1.nodes)
            cols.append(d * n + g1.nodes)
            vals.append(local[:, c, d])
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(2 * n, 2 * n)
    ).tocsr()


def _magnitude(trace) -> np.ndarray:
    trace = np.asarray(trace, dtype=float)
    return np.linalg.norm(trace, axis=-1) if trace.ndim == 2 else np.abs(trace)


def j_value(space: MixedSpace, g_values, trace) -> float:
    """``int_G1 g |trace| ds``."""
    g = _check_g(g_values)
    return float(np.sum(space.gamma1.weights * g * _magnitude(trace)))


def j_eps_value(space: MixedSpace, g_values, trace, reg: Regularizer) -> float:
    """``int_G1 g rho_eps(trace) ds``."""
    g = _check_g(g_values)
    trace = np.asarray(trace, dtype=float)
    return float(np.sum(space.gamma1.weights * g * reg.rho(trace, vector=trace.ndim == 2)))


def integrate_g(space: MixedSpace, g_values) -> float:
    return float(np.sum(space.gamma1.weights * np.asarray(g_values, dtype=float)))


# --- norms ---------------------------------------------------------------


def l2_norm(forms: AssembledForms, u) -> float:
    return float(np.sqrt(max(u @ (forms.M @ u), 0.0)))


def h1_norm(forms: AssembledForms, u) -> float:
    return float(np.sqrt(max(u @ (forms.gram @ u), 0.0)))


def h1_seminorm(forms: AssembledForms, u) -> float:
    return float(np.sqrt(max(u @ (forms.K @ u), 0.0)))


def trace_l2_norm(space: MixedSpace, u, bc_kind: str) -> float:
    """L2(Gamma1) norm of the tangential (SBCF) or normal (LBCF) trace."""
    _check_kind(bc_kind)
    q = quadrature(space)
    direction = space.gamma1.tangent if bc_kind == "SBCF" else space.gamma1.normal
    vals = _gamma1_at_gauss(space, u) @ direction
    return float(np.sqrt(np.sum(q.b_w * vals**2)))
