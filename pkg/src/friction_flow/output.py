"""CSV time series and legacy-VTK ASCII snapshots."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .stress import BoundaryStress

COMMON_HEAD = ["t", "energy", "h1_seminorm", "j_value", "j_eps_value"]
COMMON_TAIL = ["overshoot", "comp_residual", "newton_iters", "monitor_flag"]
HEADERS = {
    "SBCF": COMMON_HEAD + ["slip_norm"] + COMMON_TAIL,
    "LBCF": COMMON_HEAD + ["leak_norm"] + COMMON_TAIL,
}
STUDY_HEADERS = {
    "eps-study": ["epsilon", "l2_difference", "comp_residual", "j_gap", "eps_int_g"],
    "stability": ["delta0", "t", "error"],
    "sweep": ["g", "state", "trace_norm", "stress_max"],
    "verify-regularizer": ["property", "passed", "worst"],
    "constants": ["alpha_h", "gamma1_h", "leak_budget"],
}


def fmt(value) -> str:
    """17 significant digits, negative zero written as 0."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    v = float(value)
    if v == 0.0:
        return "0"
    return "%.17g" % v


def write_rows(path, header, rows) -> Path:
    """Write dict rows (or sequences matching ``header``) as CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            vals = [row[k] for k in header] if isinstance(row, dict) else list(row)
            if len(vals) != len(header):
                raise ValueError(f"row has {len(vals)} fields, header has {len(header)}")
            w.writerow([fmt(v) for v in vals])
    return path


def write_time_series(path, records, bc_kind: str) -> Path:
    header = HEADERS[bc_kind]
    ts = [r["t"] for r in records]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("time series rows must be strictly increasing in t")
    return write_rows(path, header, records)


def read_csv(path) -> tuple[list, list]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _vertex_stress(space, stress: BoundaryStress | None, bc_kind: str) -> np.ndarray:
    nv = len(space.mesh.vertices)
    out = np.zeros((nv, 2)) if bc_kind == "SBCF" else np.zeros(nv)
    if stress is None:
        return out
    is_vertex = stress.nodes < nv
    out[stress.nodes[is_vertex]] = stress.values[is_vertex]
    return out


def write_snapshot(state, space, path, stress: BoundaryStress | None = None) -> Path:
    """Legacy VTK ASCII unstructured grid of one state.

    Points are the mesh vertices and cells the triangles. Point data hold
    the velocity, the pressure and the Gamma1 boundary stress (zero away
    from Gamma1). The full coefficient vectors, including the edge
    midpoint velocity values, are stored as field data for exact reloads.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mesh = space.mesh
    verts = mesh.vertices
    tris = mesh.triangles
    nv = len(verts)
    vel = space.nodal_values(state.u)[:nv]
    sig = _vertex_stress(space, stress, state.bc_kind)
    lines = [
        "# vtk DataFile Version 3.0",
        f"friction_flow t={fmt(state.t)} bc_kind={state.bc_kind}",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        "FIELD FieldData 3",
        "TIME 1 1 double",
        fmt(state.t),
        f"velocity_dofs 1 {len(state.u)} double",
        " ".join(fmt(v) for v in state.u),
        f"pressure_dofs 1 {len(state.p)} double",
        " ".join(fmt(v) for v in state.p),
        f"POINTS {nv} double",
    ]
    lines += [f"{fmt(x)} {fmt(y)} 0" for x, y in verts]
    lines.append(f"CELLS {len(tris)} {4 * len(tris)}")
    lines += [f"3 {a} {b} {c}" for a, b, c in tris]
    lines.append(f"CELL_TYPES {len(tris)}")
    lines += ["5"] * len(tris)
    lines += [f"POINT_DATA {nv}", "VECTORS velocity double"]
    lines += [f"{fmt(a)} {fmt(b)} 0" for a, b in vel]
    lines += ["SCALARS pressure double 1", "LOOKUP_TABLE default"]
    lines += [fmt(v) for v in state.p]
    if state.bc_kind == "SBCF":
        lines.append("VECTORS boundary_stress double")
        lines += [f"{fmt(a)} {fmt(b)} 0" for a, b in sig]
    else:
        lines += ["SCALARS boundary_stress double 1", "LOOKUP_TABLE default"]
        lines += [fmt(v) for v in sig]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_snapshot(path) -> dict:
    """Parse a file written by :func:`write_snapshot` into arrays."""
    tokens = Path(path).read_text().splitlines()
    out = {"header": tokens[1]}
    i = 4
    n_fields = int(tokens[i].split()[2])
    i += 1
    for _ in range(n_fields):
        name, _, n, _ = tokens[i].split()
        out[name] = np.array(tokens[i + 1].split(), dtype=float)
        if len(out[name]) != int(n):
            raise ValueError(f"field {name}: expected {n} values")
        i += 2
    npts = int(tokens[i].split()[1])
    out["points"] = np.array([ln.split() for ln in tokens[i + 1 : i + 1 + npts]], dtype=float)[:, :2]
    i += 1 + npts
    ncell = int(tokens[i].split()[1])
    out["cells"] = np.array([ln.split()[1:] for ln in tokens[i + 1 : i + 1 + ncell]], dtype=int)
    i += 1 + ncell
    i += 1 + ncell  # CELL_TYPES block
    i += 1  # POINT_DATA
    while i < len(tokens):
        parts = tokens[i].split()
        if parts[0] == "VECTORS":
            out[parts[1]] = np.array([ln.split() for ln in tokens[i + 1 : i + 1 + npts]], dtype=float)[:, :2]
            i += 1 + npts
        elif parts[0] == "SCALARS":
            out[parts[1]] = np.array(tokens[i + 2 : i + 2 + npts], dtype=float)
            i += 2 + npts
        else:
            raise ValueError(f"unexpected line {tokens[i]!r}")
    out["t"] = float(out["TIME"][0])
    return out
