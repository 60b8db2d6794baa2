"""Mixed velocity/pressure nonlinear solves on a constrained velocity space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .forms import BC_KINDS, AssembledForms, assemble_forms
from .mesh import Mesh
from .newton import NewtonStats, newton_solve
from .spaces import ConstraintSet, MixedSpace, build_constraints, build_mixed_space

DEFAULT_KIND = {"SBCF": "Vn", "LBCF": "Vtau"}


@dataclass(frozen=True, eq=False)
class Discretization:
    """Everything needed to assemble and solve on one mesh.

    ``pin_pressure`` is set when the admissible velocities have zero normal
    trace on the whole boundary; the pressure is then fixed to zero mean.
    """

    space: MixedSpace
    forms: AssembledForms
    constraints: ConstraintSet
    bc_kind: str

    @property
    def pin_pressure(self) -> bool:
        return self.constraints.kind in ("Vn", "V0")

    def with_kind(self, kind: str) -> "Discretization":
        return Discretization(self.space, self.forms, build_constraints(self.space, kind), self.bc_kind)

    def solve(self, velocity_residual, velocity_jacobian, u_guess, tol=1e-10, max_iter=50, rhs_norm=0.0):
        """Newton solve of ``R(u) + B^T p = 0, B u = 0`` over the constrained space.

        ``velocity_residual(u)`` and ``velocity_jacobian(u)`` act on full
        velocity vectors. Returns ``(u, p, NewtonStats)``.
        """
        P = self.constraints.basis
        B = self.forms.B
        BP = (B @ P).tocsr()
        nf, npr = P.shape[1], B.shape[0]
        m = self.forms.pressure_mass
        # With u.n = 0 on the whole boundary the continuity rows sum to zero,
        # so the first pressure dof and its row are dropped and the mean is
        # removed afterwards. This keeps the factorization sparse.
        k0 = 1 if self.pin_pressure else 0
        BPk = BP[k0:]
        Bk = B[k0:]

        def split(z):
            return z[:nf], z[nf:]

        def residual(z):
            x, pk = split(z)
            u = P @ x
            ru = P.T @ (velocity_residual(u) + Bk.T @ pk)
            return np.concatenate([ru, BPk @ x])

        def jacobian(z):
            x = split(z)[0]
            Juu = (P.T @ velocity_jacobian(P @ x) @ P).tocsr()
            return sp.bmat([[Juu, BPk.T], [BPk, None]], format="csc")

        z0 = np.zeros(nf + npr - k0)
        z0[:nf] = P.T @ u_guess
        z, stats = newton_solve(residual, jacobian, z0, tol=tol, max_iter=max_iter, rhs_norm=rhs_norm)
        x, pk = split(z)
        p = np.concatenate([np.zeros(k0), pk])
        if k0:
            p -= (m @ p) / m.sum()
        return P @ x, p, stats


def discretize(mesh: Mesh, nu: float, bc_kind: str, kind: str | None = None) -> Discretization:
    if bc_kind not in BC_KINDS:
        raise ValueError(f"bc kind must be one of {BC_KINDS}, got {bc_kind!r}")
    space = build_mixed_space(mesh)
    return Discretization(
        space=space,
        forms=assemble_forms(space, nu),
        constraints=build_constraints(space, kind or DEFAULT_KIND[bc_kind]),
        bc_kind=bc_kind,
    )


__all__ = ["Discretization", "discretize", "NewtonStats"]
