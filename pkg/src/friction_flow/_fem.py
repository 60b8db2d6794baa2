"""Reference-element machinery for P2 velocity / P1 pressure on triangles."""

from __future__ import annotations

import numpy as np

# 7-point degree-5 rule (Radon), barycentric points, weights summing to one.
_R15 = np.sqrt(15.0)
_A1, _B1 = (9.0 - 2.0 * _R15) / 21.0, (6.0 + _R15) / 21.0
_A2, _B2 = (9.0 + 2.0 * _R15) / 21.0, (6.0 - _R15) / 21.0
TRI_BARY = np.array(
    [
        [1 / 3, 1 / 3, 1 / 3],
        [_A1, _B1, _B1],
        [_B1, _A1, _B1],
        [_B1, _B1, _A1],
        [_A2, _B2, _B2],
        [_B2, _A2, _B2],
        [_B2, _B2, _A2],
    ]
)
TRI_WEIGHTS = np.array(
    [9 / 40] + [(155 + _R15) / 1200] * 3 + [(155 - _R15) / 1200] * 3
)

# local edge k is opposite local vertex k
LOCAL_EDGES = np.array([[1, 2], [2, 0], [0, 1]])


def p2_values(L: np.ndarray) -> np.ndarray:
    """P2 basis at barycentric points ``L`` (..., 3) -> (..., 6)."""
    v = L * (2.0 * L - 1.0)
    e = 4.0 * np.stack([L[..., 1] * L[..., 2], L[..., 2] * L[..., 0], L[..., 0] * L[..., 1]], axis=-1)
    return np.concatenate([v, e], axis=-1)


def p2_gradients(L: np.ndarray, grad_L: np.ndarray) -> np.ndarray:
    """Physical P2 gradients.

    ``L`` is (Q, 3), ``grad_L`` is (M, 3, 2); returns (M, Q, 6, 2).
    """
    gv = (4.0 * L - 1.0)[None, :, :, None] * grad_L[:, None, :, :]
    ge = []
    for j, k in LOCAL_EDGES:
        ge.append(
            4.0
            * (
                L[None, :, j, None] * grad_L[:, None, k, :]
                + L[None, :, k, None] * grad_L[:, None, j, :]
            )
        )
    return np.concatenate([gv, np.stack(ge, axis=2)], axis=2)


def geometry(vertices: np.ndarray, triangles: np.ndarray):
    """Areas (M,) and barycentric gradients (M, 3, 2) of affine triangles."""
    p = vertices[triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    g1 = np.column_stack([d2[:, 1], -d2[:, 0]]) / det[:, None]
    g2 = np.column_stack([-d1[:, 1], d1[:, 0]]) / det[:, None]
    g0 = -(g1 + g2)
    return 0.5 * det, np.stack([g0, g1, g2], axis=1)


def edge_p2_values(s: np.ndarray) -> np.ndarray:
    """P2 trace basis on an edge at local coordinate ``s``: (first, mid, last)."""
    s = np.asarray(s, dtype=float)
    return np.stack([(1 - s) * (1 - 2 * s), 4 * s * (1 - s), s * (2 * s - 1)], axis=-1)
