"""Crossed-triangle meshes of axis-aligned rectangles.

The boundary is split into two tagged parts: ``Gamma1`` is one full side of
the rectangle (where the friction law acts) and ``Gamma0`` is the rest
(homogeneous Dirichlet).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

GAMMA0 = "Gamma0"
GAMMA1 = "Gamma1"
SIDES = ("bottom", "right", "top", "left")

_SIDE_NORMALS = {
    "bottom": (0.0, -1.0),
    "right": (1.0, 0.0),
    "top": (0.0, 1.0),
    "left": (-1.0, 0.0),
}


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangulation with tagged, oriented boundary edges.

    Boundary edges are stored counter-clockwise so the domain lies to the
    left of each edge; ``boundary_normals`` are the outward unit normals.
    """

    vertices: np.ndarray  # (nv, 2)
    triangles: np.ndarray  # (nt, 3), counter-clockwise
    boundary_edges: np.ndarray  # (nb, 2) vertex pairs
    boundary_tags: np.ndarray  # (nb,) of GAMMA0 / GAMMA1
    boundary_normals: np.ndarray  # (nb, 2)
    boundary_lengths: np.ndarray  # (nb,)
    width: float
    height: float
    gamma1_side: str

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def tagged(self, tag: str) -> np.ndarray:
        """Indices of the boundary edges carrying ``tag``."""
        if tag not in (GAMMA0, GAMMA1):
            raise KeyError(f"unknown boundary tag {tag!r}")
        idx = np.flatnonzero(self.boundary_tags == tag)
        if idx.size == 0:
            raise KeyError(f"no boundary edges tagged {tag!r}")
        return idx

    def tagged_length(self, tag: str) -> float:
        return float(self.boundary_lengths[self.tagged(tag)].sum())

    def dump(self) -> str:
        """Plain-text listing for debugging.

        Sections: ``vertices`` (index x y), ``triangles`` (index v0 v1 v2),
        ``boundary`` (index v0 v1 tag nx ny length).
        """
        lines = [f"vertices {self.n_vertices}"]
        lines += [f"{i} {x:.17g} {y:.17g}" for i, (x, y) in enumerate(self.vertices)]
        lines.append(f"triangles {self.n_triangles}")
        lines += [f"{i} {a} {b} {c}" for i, (a, b, c) in enumerate(self.triangles)]
        lines.append(f"boundary {len(self.boundary_edges)}")
        for i, ((a, b), tag, n, ln) in enumerate(
            zip(self.boundary_edges, self.boundary_tags, self.boundary_normals, self.boundary_lengths)
        ):
            lines.append(f"{i} {a} {b} {tag} {n[0]:.17g} {n[1]:.17g} {ln:.17g}")
        return "\n".join(lines) + "\n"


def build_rectangle_mesh(
    width: float, height: float, nx: int, ny: int, gamma1_side: str = "bottom"
) -> Mesh:
    """Structured crossed mesh of ``[0, width] x [0, height]``.

    Each of the ``nx * ny`` cells is split into four triangles through its
    center, giving ``4 nx ny`` triangles and ``2 (nx + ny)`` boundary edges.
    """
    if nx < 1 or ny < 1:
        raise ValueError(f"subdivision counts must be >= 1, got nx={nx}, ny={ny}")
    if not (width > 0 and height > 0):
        raise ValueError(f"rectangle sides must be positive, got {width} x {height}")
    if gamma1_side not in SIDES:
        raise ValueError(f"gamma1_side must be one of {SIDES}, got {gamma1_side!r}")

    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    gx, gy = np.meshgrid(xs, ys)
    corners = np.column_stack([gx.ravel(), gy.ravel()])
    cx, cy = np.meshgrid(0.5 * (xs[:-1] + xs[1:]), 0.5 * (ys[:-1] + ys[1:]))
    centers = np.column_stack([cx.ravel(), cy.ravel()])
    vertices = np.vstack([corners, centers])

    def vid(i, j):
        return j * (nx + 1) + i

    n_corner = len(corners)
    tris = []
    for j in range(ny):
        for i in range(nx):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            m = n_corner + j * nx + i
            tris += [(a, b, m), (b, c, m), (c, d, m), (d, a, m)]
    triangles = np.array(tris, dtype=np.int64)

    edges, sides = [], []
    for i in range(nx):
        edges.append((vid(i, 0), vid(i + 1, 0)))
        sides.append("bottom")
    for j in range(ny):
        edges.append((vid(nx, j), vid(nx, j + 1)))
        sides.append("right")
    for i in range(nx, 0, -1):
        edges.append((vid(i, ny), vid(i - 1, ny)))
        sides.append("top")
    for j in range(ny, 0, -1):
        edges.append((vid(0, j), vid(0, j - 1)))
        sides.append("left")
    boundary_edges = np.array(edges, dtype=np.int64)
    d = vertices[boundary_edges[:, 1]] - vertices[boundary_edges[:, 0]]
    lengths = np.hypot(d[:, 0], d[:, 1])
    # counter-clockwise traversal: outward normal is the tangent turned clockwise
    normals = np.column_stack([d[:, 1], -d[:, 0]]) / lengths[:, None]
    tags = np.array([GAMMA1 if s == gamma1_side else GAMMA0 for s in sides])

    return Mesh(
        vertices=vertices,
        triangles=triangles,
        boundary_edges=boundary_edges,
        boundary_tags=tags,
        boundary_normals=normals,
        boundary_lengths=lengths,
        width=float(width),
        height=float(height),
        gamma1_side=gamma1_side,
    )


class TraceQuadrature(NamedTuple):
    """Quadrature on tagged boundary edges.

    ``edge`` indexes ``Mesh.boundary_edges`` and ``s`` is the local edge
    coordinate in ``[0, 1]`` measured from the first edge vertex.
    """

    points: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    edge: np.ndarray
    s: np.ndarray


def _edge_rule(npoints: int, rule: str) -> tuple[np.ndarray, np.ndarray]:
    if rule == "gauss":
        x, w = np.polynomial.legendre.leggauss(npoints)
        return 0.5 * (x + 1.0), 0.5 * w
    if rule == "lobatto":
        if npoints != 3:
            raise ValueError("only the 3-point Gauss-Lobatto rule is provided")
        return np.array([0.0, 0.5, 1.0]), np.array([1.0, 4.0, 1.0]) / 6.0
    raise ValueError(f"unknown edge rule {rule!r}")


def boundary_trace_quadrature(
    mesh: Mesh, tag: str, npoints: int = 3, rule: str = "gauss"
) -> TraceQuadrature:
    """Per-edge quadrature points, weights and normals on the ``tag`` edges."""
    idx = mesh.tagged(tag)
    s, w = _edge_rule(npoints, rule)
    p0 = mesh.vertices[mesh.boundary_edges[idx, 0]]
    p1 = mesh.vertices[mesh.boundary_edges[idx, 1]]
    points = p0[:, None, :] + s[None, :, None] * (p1 - p0)[:, None, :]
    weights = w[None, :] * mesh.boundary_lengths[idx, None]
    normals = np.broadcast_to(mesh.boundary_normals[idx, None, :], points.shape)
    return TraceQuadrature(
        points=points.reshape(-1, 2),
        weights=weights.ravel(),
        normals=np.ascontiguousarray(normals).reshape(-1, 2),
        edge=np.repeat(idx, len(s)),
        s=np.tile(s, len(idx)),
    )


def side_normal(side: str) -> np.ndarray:
    return np.array(_SIDE_NORMALS[side])
