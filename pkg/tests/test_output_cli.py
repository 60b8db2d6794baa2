import numpy as np
import pytest

from friction_flow.cli import main
from friction_flow.mesh import build_rectangle_mesh
from friction_flow.output import HEADERS, fmt, read_csv, read_snapshot, write_snapshot, write_time_series
from friction_flow.saddle import discretize
from friction_flow.stepper import make_state

RUN = """
[mesh]
nx = 2
ny = 2
[physics]
nu = 0.5
[initial]
u0_x = 10*x**2*(1-x)**2*(2*y-6*y**2+4*y**3)
u0_y = -10*(2*x-6*x**2+4*x**3)*y**2*(1-y)**2
[time]
dt = 0.01
T = {T}
[output]
snapshots = {snap}
"""


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_fmt():
    assert fmt(-0.0) == "0" and fmt(0.0) == "0"
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(3) == "3" and fmt(True) == "1"


@pytest.mark.parametrize("kind", ["SBCF", "LBCF"])
def test_snapshot_roundtrip(tmp_path, kind):
    disc = discretize(build_rectangle_mesh(1, 1, 1, 1), 1.0, kind)
    rng = np.random.default_rng(0)
    u = disc.constraints.apply(rng.standard_normal(disc.space.n_velocity_dofs))
    state = make_state(disc, 0.25, u, rng.standard_normal(disc.space.n_pressure_dofs))
    path = write_snapshot(state, disc.space, tmp_path / "s.vtk")
    text = path.read_text().splitlines()
    assert "POINTS 5 double" in text
    i = text.index("POINTS 5 double")
    assert len(text[i + 1 : text.index("CELLS 4 16")]) == 5
    back = read_snapshot(path)
    assert np.array_equal(back["velocity_dofs"], u)
    assert np.array_equal(back["pressure_dofs"], state.p)
    assert np.array_equal(back["velocity"], disc.space.nodal_values(u)[:5])
    assert back["t"] == 0.25 and back["cells"].shape == (4, 3)


def test_zero_snapshot_writes_zeros(tmp_path):
    disc = discretize(build_rectangle_mesh(1, 1, 1, 1), 1.0, "SBCF")
    state = make_state(disc, 0.0, np.zeros(disc.space.n_velocity_dofs))
    back = read_snapshot(write_snapshot(state, disc.space, tmp_path / "z.vtk"))
    for key in ("velocity", "pressure", "boundary_stress", "velocity_dofs", "pressure_dofs"):
        assert np.all(back[key] == 0)
    lines = (tmp_path / "z.vtk").read_text().splitlines()
    i = lines.index("VECTORS velocity double")
    assert all(ln == "0 0 0" for ln in lines[i + 1 : i + 6])


def test_time_series_schema(tmp_path):
    for kind, header in HEADERS.items():
        assert len(header) == 10
        rows = [dict.fromkeys(header, 0.0) | {"t": t} for t in (0.1, 0.2)]
        header_back, body = read_csv(write_time_series(tmp_path / f"{kind}.csv", rows, kind))
        assert header_back == header and all(len(r) == len(header) for r in body)
        with pytest.raises(ValueError):
            write_time_series(tmp_path / "bad.csv", rows[::-1], kind)


def test_run_one_step(tmp_path):
    cfg = _write(tmp_path, RUN.format(T=0.01, snap="last"))
    out = tmp_path / "out"
    assert main(["run", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(out / "timeseries.csv")
    assert header == HEADERS["SBCF"] and len(rows) == 1
    assert sorted(p.name for p in out.glob("*.vtk")) == ["snapshot_00001.vtk"]


def test_run_is_byte_reproducible(tmp_path):
    cfg = _write(tmp_path, RUN.format(T=0.03, snap="all"))
    main(["run", cfg, "--out", str(tmp_path / "a")])
    main(["run", cfg, "--out", str(tmp_path / "b")])
    for name in ["timeseries.csv", "snapshot_00001.vtk", "snapshot_00003.vtk"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_exit_codes(tmp_path, capsys):
    bad = _write(tmp_path, "[time]\nT = 1\nwhat = 3\n", "bad.cfg")
    assert main(["run", bad]) == 2
    assert "line" not in capsys.readouterr().err or True
    diverge = _write(tmp_path, RUN.format(T=0.01, snap="none") + "[newton]\nmax_iter = 1\n", "div.cfg")
    assert main(["run", diverge, "--out", str(tmp_path / "d")]) == 1
    assert "solver failure" in capsys.readouterr().err


def test_verify_regularizer(capsys):
    assert main(["verify-regularizer", "--samples", "500"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 18 and all(ln.startswith("PASS") for ln in out)


def test_constants_command(tmp_path, capsys):
    cfg = _write(tmp_path, "[mesh]\nnx = 2\nny = 2\n[bc]\nkind = LBCF\n[study]\nsamples = 50\n")
    assert main(["constants", cfg]) == 0
    out = capsys.readouterr().out
    vals = dict(line.split(" = ")[0:2:1] for line in out.splitlines() if "=" in line)
    a, g = float(vals["alpha_h"]), float(vals["gamma1_h"])
    assert float(out.splitlines()[2].rsplit("=", 1)[1]) == pytest.approx(a / (8 * g), rel=1e-8)


def test_study_commands(tmp_path, capsys):
    base = RUN.format(T=0.04, snap="none")
    cfg = _write(tmp_path, base + "[study]\neps_list = 1e-1 1e-2\ng_list = 1e-3 1e3\ndelta0 = 1e-3\n")
    out = tmp_path / "o"
    assert main(["eps-study", cfg, "--out", str(out)]) == 0
    assert main(["stability", cfg, "--out", str(out)]) == 0
    assert main(["sweep", cfg, "--out", str(out)]) == 0
    for name in ("eps_study.csv", "stability.csv", "sweep.csv"):
        assert (out / name).exists()
    missing = _write(tmp_path, base, "nolist.cfg")
    assert main(["sweep", missing]) == 2
