"""Discrete Korn and trace constants."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .forms import AssembledForms, boundary_convection, h1_norm, quadrature, trace_l2_norm
from .spaces import build_constraints


@dataclass(frozen=True)
class ConstantEstimates:
    alpha_h: float
    gamma1_h: float

    @property
    def leak_budget(self) -> float:
        """Largest admissible ``||u0n||_{L2(Gamma1)}`` at ``t = 0``."""
        return self.alpha_h / (8.0 * self.gamma1_h)


def estimate_korn_constant(forms: AssembledForms, kind: str = "V") -> float:
    """Smallest ``a0(v, v) / ||v||_{H1}^2`` over the constrained space.

    Shift-invert Lanczos around zero, i.e. inverse iteration for the lowest
    generalized eigenvalue.
    """
    P = build_constraints(forms.space, kind).basis
    A = (P.T @ forms.A0 @ P).tocsc()
    G = (P.T @ forms.gram @ P).tocsc()
    if A.shape[0] == 0:
        raise ValueError("constrained space is trivial")
    v0 = np.ones(A.shape[0])
    vals, vecs = spla.eigsh(A, k=1, M=G, sigma=0.0, which="LM", v0=v0, tol=1e-12)
    lam, x = float(vals[0]), vecs[:, 0]
    res = np.linalg.norm(A @ x - lam * (G @ x)) / max(np.linalg.norm(A @ x), 1e-300)
    if not (lam > 0 and res < 1e-8):
        raise RuntimeError(f"eigen-iteration stagnation (lambda={lam:.3e}, residual={res:.3e})")
    return lam


def trace_ratio(forms: AssembledForms, u: np.ndarray, v: np.ndarray) -> float:
    """``|1/2 int_G1 u_n |v|^2| / (||u_n||_{L2(G1)} ||v||_{H1}^2)``."""
    space = forms.space
    un = trace_l2_norm(space, u, "LBCF")
    vn = h1_norm(forms, v)
    if un == 0.0 or vn == 0.0:
        return 0.0
    return abs(boundary_convection(space, u, v, v)) / (un * vn**2)


class _TraceProblem:
    """The trace ratio restricted to V_tau, in normal-trace coordinates.

    ``v`` enters through its minimal-H1 extension, so the quadratic form in
    the denominator is the Schur complement of the Gram matrix onto the
    Gamma1 normal dofs.
    """

    def __init__(self, forms: AssembledForms):
        space = forms.space
        cons = build_constraints(space, "Vtau")
        P = cons.basis
        G = (P.T @ forms.gram @ P).tocsc()
        nb = len(cons.rotated_nodes)
        nf = P.shape[1]
        b = np.arange(nf - nb, nf)
        i = np.arange(nf - nb)
        Gii = G[i][:, i].tocsc()
        Gib = G[i][:, b].toarray()
        Gbb = G[b][:, b].toarray()
        X = spla.splu(Gii).solve(Gib)
        S = Gbb - Gib.T @ X
        self.S = 0.5 * (S + S.T)
        self.P, self.b, self.nf = P, b, nf

        # Gauss values of the normal trace from the free Gamma1 nodal values
        q = quadrature(space)
        g1 = space.gamma1
        pos = {node: k for k, node in enumerate(cons.rotated_nodes)}
        k_edges, nq = q.b_w.shape
        T = np.zeros((k_edges * nq, nb))
        for e, nodes in enumerate(g1.edge_nodes):
            for j, node in enumerate(nodes):
                if node in pos:
                    T[e * nq : (e + 1) * nq, pos[node]] += q.b_psi[:, j]
        self.T = T
        self.w = q.b_w.ravel()
        self.Mt = T.T @ (self.w[:, None] * T)

    def ratio(self, u, v) -> float:
        tu, tv = self.T @ u, self.T @ v
        num = 0.5 * abs(np.sum(self.w * tu * tv**2))
        den = np.sqrt(max(u @ self.Mt @ u, 0.0)) * (v @ self.S @ v)
        return num / den if den > 0 else 0.0

    def best_u(self, v):
        tv = self.T @ v
        return np.linalg.solve(self.Mt, self.T.T @ (self.w * tv**2))

    def best_v(self, u):
        W = 0.5 * self.T.T @ ((self.w * (self.T @ u))[:, None] * self.T)
        vals, vecs = sla.eigh(W, self.S)
        k = int(np.argmax(np.abs(vals)))
        return vecs[:, k]

    def full_field(self, coeffs):
        z = np.zeros(self.nf)
        z[self.b] = coeffs
        return self.P @ z


def estimate_trace_constant(
    forms: AssembledForms, n_samples: int = 1000, n_refine: int = 8, n_starts: int = 5, seed: int = 0
) -> float:
    """Sampled lower bound for the boundary-convection constant over V_tau.

    Random (u_n, v_n) pairs are scored, and the best few are improved by
    alternating exact maximization in ``u`` (L2 projection of ``|v|^2``)
    and in ``v`` (generalized eigenproblem against the Schur complement).
    """
    tp = _TraceProblem(forms)
    rng = np.random.default_rng(seed)
    nb = len(tp.b)
    if nb == 0:
        raise ValueError("Gamma1 has no free nodes")
    scored = []
    for _ in range(n_samples):
        u = rng.standard_normal(nb)
        v = rng.standard_normal(nb)
        scored.append((tp.ratio(u, v), u, v))
    scored.sort(key=lambda item: -item[0])
    best = scored[0][0]
    for _, u, v in scored[:n_starts]:
        for _ in range(n_refine):
            u = tp.best_u(v)
            best = max(best, tp.ratio(u, v))
            v = tp.best_v(u)
            best = max(best, tp.ratio(u, v))
    return float(best)


def estimate_constants(forms: AssembledForms, n_samples: int = 200, seed: int = 0) -> ConstantEstimates:
    return ConstantEstimates(
        alpha_h=estimate_korn_constant(forms, "V"),
        gamma1_h=estimate_trace_constant(forms, n_samples=n_samples, seed=seed),
    )
