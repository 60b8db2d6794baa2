"""Taylor-Hood (P2/P1) spaces and the constrained velocity subspaces.

Velocity dofs are component-blocked: dof ``c * n_nodes + node`` carries
component ``c`` of the nodal value, nodes being mesh vertices followed by
edge midpoints. Constrained subspaces are represented by an orthonormal
basis ``P`` of the admissible coefficient vectors, so ``P @ P.T`` is the
constraint projection and ``P.T @ A @ P`` the reduced operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _fem
from .mesh import GAMMA0, GAMMA1, Mesh, side_normal

KINDS = ("V", "Vn", "Vtau", "V0")


@dataclass(frozen=True, eq=False)
class GammaOneNodes:
    """Velocity nodes on the friction boundary, with nodal (Simpson) weights.

    The weights are the exact edge integrals of the P2 trace basis, so the
    boundary mass operator in this basis is diagonal.
    """

    nodes: np.ndarray  # (K,) node ids, ordered along the side
    points: np.ndarray  # (K, 2)
    weights: np.ndarray  # (K,)
    normal: np.ndarray  # (2,) outward, constant on the flat side
    tangent: np.ndarray  # (2,)
    corner: np.ndarray  # (K,) True where the node also lies on Gamma0
    edge_nodes: np.ndarray  # (k, 3) first / mid / last node of each edge
    edge_lengths: np.ndarray  # (k,)
    edge_points: np.ndarray  # (k, 2, 2) endpoint coordinates

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def length(self) -> float:
        return float(self.edge_lengths.sum())


@dataclass(frozen=True, eq=False)
class MixedSpace:
    mesh: Mesh
    edges: np.ndarray  # (ne, 2) sorted vertex pairs
    element_nodes: np.ndarray  # (nt, 6)
    node_coords: np.ndarray  # (nn, 2)
    gamma1: GammaOneNodes
    gamma0_nodes: np.ndarray
    boundary_nodes: np.ndarray
    areas: np.ndarray = field(repr=False)
    grad_bary: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.node_coords)

    @property
    def n_velocity_dofs(self) -> int:
        return 2 * self.n_nodes

    @property
    def n_pressure_dofs(self) -> int:
        return self.mesh.n_vertices

    def dof(self, node, comp):
        return comp * self.n_nodes + np.asarray(node)

    def nodal_values(self, u: np.ndarray) -> np.ndarray:
        """Velocity coefficients reshaped to (n_nodes, 2)."""
        return np.asarray(u).reshape(2, self.n_nodes).T

    def normal_trace(self, u: np.ndarray) -> np.ndarray:
        """``u . n`` at the Gamma1 nodes."""
        return self.nodal_values(u)[self.gamma1.nodes] @ self.gamma1.normal

    def tangential_trace(self, u: np.ndarray) -> np.ndarray:
        """``u - (u . n) n`` at the Gamma1 nodes, shape (K, 2)."""
        ut = self.nodal_values(u)[self.gamma1.nodes] @ self.gamma1.tangent
        return ut[:, None] * self.gamma1.tangent[None, :]

    def trace(self, u: np.ndarray, bc_kind: str) -> np.ndarray:
        """Friction-relevant trace: tangential (SBCF) or normal (LBCF)."""
        if bc_kind == "SBCF":
            return self.tangential_trace(u)
        if bc_kind == "LBCF":
            return self.normal_trace(u)
        raise ValueError(f"unknown bc kind {bc_kind!r}")


def build_mixed_space(mesh: Mesh) -> MixedSpace:
    tri = mesh.triangles
    nv = mesh.n_vertices
    local = np.stack([tri[:, _fem.LOCAL_EDGES[k]] for k in range(3)], axis=1)  # (nt, 3, 2)
    all_edges = np.sort(local.reshape(-1, 2), axis=1)
    edges, inverse = np.unique(all_edges, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    element_nodes = np.column_stack([tri, nv + inverse.reshape(-1, 3)])
    mid = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    node_coords = np.vstack([mesh.vertices, mid])

    edge_id = {tuple(e): i for i, e in enumerate(edges)}

    def boundary_edge_nodes(idx):
        out = []
        for a, b in mesh.boundary_edges[idx]:
            out.append((a, nv + edge_id[(min(a, b), max(a, b))], b))
        return np.array(out, dtype=np.int64)

    g0 = boundary_edge_nodes(mesh.tagged(GAMMA0))
    g1_idx = mesh.tagged(GAMMA1)
    g1 = boundary_edge_nodes(g1_idx)
    gamma0_nodes = np.unique(g0)
    boundary_nodes = np.unique(np.concatenate([g0.ravel(), g1.ravel()]))

    # Gamma1 is one straight side traversed in order, so its nodes chain up
    chain = [g1[0, 0]]
    for a, m, b in g1:
        chain += [m, b]
    nodes = np.array(chain, dtype=np.int64)
    weights = np.zeros(len(nodes))
    lengths = mesh.boundary_lengths[g1_idx]
    for k, ln in enumerate(lengths):
        weights[2 * k : 2 * k + 3] += ln * np.array([1.0, 4.0, 1.0]) / 6.0
    normal = side_normal(mesh.gamma1_side)
    tangent = np.array([-normal[1], normal[0]])
    gamma1 = GammaOneNodes(
        nodes=nodes,
        points=node_coords[nodes],
        weights=weights,
        normal=normal,
        tangent=tangent,
        corner=np.isin(nodes, gamma0_nodes),
        edge_nodes=g1,
        edge_lengths=lengths,
        edge_points=mesh.vertices[mesh.boundary_edges[g1_idx]],
    )
    areas, grad_bary = _fem.geometry(mesh.vertices, tri)
    return MixedSpace(
        mesh=mesh,
        edges=edges,
        element_nodes=element_nodes,
        node_coords=node_coords,
        gamma1=gamma1,
        gamma0_nodes=gamma0_nodes,
        boundary_nodes=boundary_nodes,
        areas=areas,
        grad_bary=grad_bary,
    )


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Homogeneous velocity constraints realizing V, V_n, V_tau or V0.

    ``fixed_dofs`` are forced to zero; at each of ``rotated_nodes`` the
    local frame is (normal, tangent) and the ``eliminated`` component of
    that frame is removed.
    """

    kind: str
    fixed_dofs: np.ndarray
    rotated_nodes: np.ndarray
    frame_normal: np.ndarray
    frame_tangent: np.ndarray
    eliminated: str | None
    basis: sp.csr_matrix  # (n_dofs, n_free), orthonormal columns

    @property
    def n_free(self) -> int:
        return self.basis.shape[1]

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.basis @ (self.basis.T @ u)

    def reduce(self, u: np.ndarray) -> np.ndarray:
        return self.basis.T @ u

    def expand(self, x: np.ndarray) -> np.ndarray:
        return self.basis @ x


def build_constraints(space: MixedSpace, kind: str) -> ConstraintSet:
    if kind not in KINDS:
        raise ValueError(f"constraint kind must be one of {KINDS}, got {kind!r}")
    nn = space.n_nodes
    g1 = space.gamma1
    free_g1 = g1.nodes[~g1.corner]
    if kind == "V0":
        clamped = space.boundary_nodes
    else:
        clamped = space.gamma0_nodes
    rotated = free_g1 if kind in ("Vn", "Vtau") else np.zeros(0, dtype=np.int64)
    eliminated = {"Vn": "normal", "Vtau": "tangent"}.get(kind)

    fixed = np.concatenate([clamped, nn + clamped])
    plain = np.setdiff1d(np.arange(nn), np.concatenate([clamped, rotated]))

    rows, cols = [], []
    vals = []
    col = 0
    for c in range(2):
        rows.append(c * nn + plain)
        cols.append(col + np.arange(len(plain)))
        vals.append(np.ones(len(plain)))
        col += len(plain)
    if len(rotated):
        keep = g1.tangent if eliminated == "normal" else g1.normal
        ids = col + np.arange(len(rotated))
        for c in range(2):
            if keep[c] != 0.0:
                rows.append(c * nn + rotated)
                cols.append(ids)
                vals.append(np.full(len(rotated), keep[c]))
        col += len(rotated)
    basis = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(2 * nn, col),
    )
    return ConstraintSet(
        kind=kind,
        fixed_dofs=np.sort(fixed),
        rotated_nodes=rotated,
        frame_normal=g1.normal,
        frame_tangent=g1.tangent,
        eliminated=eliminated,
        basis=basis,
    )


def _vector_values(values, n: int) -> np.ndarray:
    if isinstance(values, tuple | list):
        fx, fy = (np.broadcast_to(np.asarray(v, dtype=float), (n,)) for v in values)
        return np.column_stack([fx, fy])
    arr = np.asarray(values, dtype=float)
    return np.broadcast_to(arr, (n, 2)).copy()


def evaluate_vector_field(field, points: np.ndarray, *args) -> np.ndarray:
    """Evaluate ``field(*args, x, y)`` at ``points`` (..., 2) -> (..., 2).

    The field may return an ``(fx, fy)`` pair or an array ending in 2.
    """
    pts = np.asarray(points, dtype=float)
    flat = pts.reshape(-1, 2)
    out = _vector_values(field(*args, flat[:, 0], flat[:, 1]), len(flat))
    return out.reshape(pts.shape)


def evaluate_scalar_field(field, points: np.ndarray, *args) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    flat = pts.reshape(-1, 2)
    out = np.broadcast_to(np.asarray(field(*args, flat[:, 0], flat[:, 1]), dtype=float), (len(flat),))
    return out.reshape(pts.shape[:-1]).copy()


def interpolate(space: MixedSpace, field) -> np.ndarray:
    """Nodal P2 interpolant of the vector field ``field(x, y)``."""
    vals = evaluate_vector_field(field, space.node_coords)
    if not np.all(np.isfinite(vals)):
        raise ValueError("field is not finite at every velocity node")
    return np.concatenate([vals[:, 0], vals[:, 1]])


def interpolate_pressure(space: MixedSpace, field) -> np.ndarray:
    return evaluate_scalar_field(field, space.mesh.vertices)
