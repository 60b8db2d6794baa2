"""Plain-text run configuration.

The file is a list of ``[section]`` headers and ``key = value`` lines;
``#`` starts a comment line. Every key is documented in the README and
listed in :data:`SCHEMA`. Expressions are parsed with :mod:`.expr`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .expr import Expr, ExprError, negative_laplacian, parse_expr
from .mesh import SIDES, build_rectangle_mesh
from .spaces import build_mixed_space
from .stepper import RunConfig

_TXY = ("t", "x", "y")
_XY = ("x", "y")


def _float(s):
    return float(s)


def _int(s):
    return int(s)


def _bool(s):
    low = s.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _floats(s):
    return [float(v) for v in s.replace(",", " ").split()]


def _str(s):
    return s


def _choice(*options):
    def conv(s):
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {s!r}")
        return s

    return conv


def _expr(variables):
    def conv(s):
        return parse_expr(s, variables)

    return conv


# section -> key -> (converter, default); a default of ... marks a key that
# some command requires
SCHEMA = {
    "mesh": {
        "width": (_float, 1.0),
        "height": (_float, 1.0),
        "nx": (_int, 8),
        "ny": (_int, 8),
        "gamma1_side": (_choice(*SIDES), "bottom"),
    },
    "bc": {
        "kind": (_choice("SBCF", "LBCF"), "SBCF"),
        "monitor": (_bool, True),
    },
    "physics": {
        "nu": (_float, 1.0),
        "f_x": (_expr(_TXY), "0"),
        "f_y": (_expr(_TXY), "0"),
    },
    "friction": {
        "epsilon": (_float, 1e-2),
        "g_expr": (_expr(_TXY), "1"),
    },
    "initial": {
        "u0_x": (_expr(_XY), "0"),
        "u0_y": (_expr(_XY), "0"),
        "p0": (_expr(_XY), None),
        "rhs_x": (_expr(_XY), None),
        "rhs_y": (_expr(_XY), None),
        "adapt": (_bool, True),
    },
    "time": {
        "dt": (_float, 1e-2),
        "T": (_float, ...),
    },
    "newton": {
        "tol": (_float, 1e-10),
        "max_iter": (_int, 50),
    },
    "study": {
        "eps_list": (_floats, None),
        "delta0": (_floats, None),
        "g_list": (_floats, None),
        "seed": (_int, 0),
        "samples": (_int, 200),
    },
    "output": {
        "dir": (_str, "out"),
        "snapshots": (_choice("none", "last", "all"), "last"),
    },
}


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        loc = f"{path or '<config>'}:{line}: " if line is not None else f"{path or '<config>'}: "
        super().__init__(loc + message)
        self.line = line


@dataclass
class StudyConfig:
    eps_list: list | None = None
    delta0: list | None = None
    g_list: list | None = None
    seed: int = 0
    samples: int = 200


@dataclass
class ConfigFile:
    """Parsed file: the run settings, study settings and raw entries."""

    run: RunConfig
    study: StudyConfig
    output_dir: str
    entries: dict = field(default_factory=dict)  # "section.key" -> (value text, line, column)


def read_entries(text: str, path: str | None = None) -> dict:
    """Split the document into ``{"section.key": (value, line, column)}``."""
    entries = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("unterminated section header", lineno, path)
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno, path)
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno, path)
        if section is None:
            raise ConfigError("key outside of any section", lineno, path)
        key, value = (s.strip() for s in line.split("=", 1))
        col = raw.index("=") + 2 + (len(raw.split("=", 1)[1]) - len(raw.split("=", 1)[1].lstrip()))
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {section}.{key}", lineno, path)
        full = f"{section}.{key}"
        if full in entries:
            raise ConfigError(f"duplicate key {full} (lines {entries[full][1]} and {lineno})", lineno, path)
        if not value:
            raise ConfigError(f"empty value for {full}", lineno, path)
        entries[full] = (value, lineno, col)
    return entries


def _values(entries: dict, path) -> dict:
    out = {}
    for section, keys in SCHEMA.items():
        for key, (conv, default) in keys.items():
            full = f"{section}.{key}"
            if full in entries:
                text, lineno, col = entries[full]
                try:
                    out[full] = conv(text)
                except ExprError as exc:
                    raise ConfigError(f"column {col + exc.column - 1}: {full}: {exc.message}", lineno, path) from None
                except ValueError as exc:
                    raise ConfigError(f"invalid value for {full}: {exc}", lineno, path) from None
            elif default is ...:
                out[full] = ...
            elif isinstance(default, str):
                out[full] = conv(default)
            else:
                out[full] = default
    return out


def _vector(ex, ey):
    def field_fn(*args):
        return ex(*args), ey(*args)

    return field_fn


def _check_g_positive(cfg: RunConfig, entries, path):
    """Sample g on the Gamma1 nodes at every step time."""
    mesh = build_rectangle_mesh(cfg.width, cfg.height, cfg.nx, cfg.ny, cfg.gamma1_side)
    pts = build_mixed_space(mesh).gamma1.points
    for k in range(cfg.n_steps + 1):
        t = min(k * cfg.dt, cfg.T_end)
        vals = cfg.g(t, pts[:, 0], pts[:, 1])
        if not np.all(np.isfinite(vals) & (vals > 0)):
            line = entries["friction.g_expr"][1] if "friction.g_expr" in entries else None
            raise ConfigError("friction modulus must be strictly positive", line, path)


def build_config(text: str, path: str | None = None, require=("time.T",)) -> ConfigFile:
    entries = read_entries(text, path)
    v = _values(entries, path)
    for key in require:
        if v.get(key) is ... or v.get(key) is None:
            raise ConfigError(f"missing required key {key}", None, path)
    nu = v["physics.nu"]
    u0x, u0y = v["initial.u0_x"], v["initial.u0_y"]
    p0 = v["initial.p0"]
    rx, ry = v["initial.rhs_x"], v["initial.rhs_y"]
    if (rx is None) != (ry is None):
        raise ConfigError("initial.rhs_x and initial.rhs_y must be given together", None, path)
    if rx is None:
        # closed-form -nu lap u0 (+ grad p0)
        rx, ry = negative_laplacian(u0x, nu), negative_laplacian(u0y, nu)
        if p0 is not None:
            rx = _plus(rx, p0.diff("x"))
            ry = _plus(ry, p0.diff("y"))
    T = v["time.T"]
    if T is ...:
        T = v["time.dt"]
    try:
        cfg = RunConfig(
            T_end=T,
            bc_kind=v["bc.kind"],
            width=v["mesh.width"],
            height=v["mesh.height"],
            nx=v["mesh.nx"],
            ny=v["mesh.ny"],
            gamma1_side=v["mesh.gamma1_side"],
            nu=nu,
            epsilon=v["friction.epsilon"],
            dt=v["time.dt"],
            f=_vector(v["physics.f_x"], v["physics.f_y"]),
            g=v["friction.g_expr"],
            u0=_vector(u0x, u0y),
            u0_rhs=_vector(rx, ry),
            p0=p0,
            adapt_initial=v["initial.adapt"],
            newton_tol=v["newton.tol"],
            newton_max_iter=v["newton.max_iter"],
            monitor=v["bc.monitor"],
            output_dir=v["output.dir"],
            snapshots=v["output.snapshots"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc), None, path) from None
    if cfg.width <= 0 or cfg.height <= 0:
        raise ConfigError("mesh.width and mesh.height must be positive", None, path)
    if cfg.nx < 1 or cfg.ny < 1:
        raise ConfigError("mesh.nx and mesh.ny must be at least 1", None, path)
    if not math.isfinite(cfg.T_end):
        raise ConfigError("time.T must be finite", None, path)
    _check_g_positive(cfg, entries, path)
    study = StudyConfig(
        eps_list=v["study.eps_list"],
        delta0=v["study.delta0"],
        g_list=v["study.g_list"],
        seed=v["study.seed"],
        samples=v["study.samples"],
    )
    return ConfigFile(run=cfg, study=study, output_dir=v["output.dir"], entries=entries)


def _plus(a, b):
    return Expr(f"{a.text} + {b.text}", a.variables, a.sym + b.sym)


def load_config(path, require=("time.T",)) -> ConfigFile:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return build_config(text, str(path), require)


def parse_config(path) -> RunConfig:
    """Read and validate a configuration file into a :class:`RunConfig`."""
    return load_config(path).run
