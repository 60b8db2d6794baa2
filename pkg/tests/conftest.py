import numpy as np
import pytest

from friction_flow.forms import assemble_forms
from friction_flow.mesh import build_rectangle_mesh
from friction_flow.saddle import discretize
from friction_flow.spaces import build_mixed_space


def stream_field(amp=10.0):
    """Solenoidal field from psi = amp x^2 (1-x)^2 y^2 (1-y)^2 on the unit square.

    Vanishes with its gradient on the whole boundary.
    """

    def u0(x, y):
        X, dX = x**2 * (1 - x) ** 2, 2 * x * (1 - x) * (1 - 2 * x)
        Y, dY = y**2 * (1 - y) ** 2, 2 * y * (1 - y) * (1 - 2 * y)
        return amp * X * dY, -amp * dX * Y

    return u0


def slip_stream_field(amp=20.0):
    """Solenoidal field with u.n = 0 on the boundary and nonzero slip on y = 0."""

    def u0(x, y):
        X, dX = x**2 * (1 - x) ** 2, 2 * x * (1 - x) ** 2 - 2 * x**2 * (1 - x)
        h, dh = y * (1 - y) ** 2, (1 - y) ** 2 - 2 * y * (1 - y)
        return amp * X * dh, -amp * dX * h

    return u0


@pytest.fixture(scope="session")
def cell_space():
    return build_mixed_space(build_rectangle_mesh(1.0, 1.0, 1, 1))


@pytest.fixture(scope="session")
def space4():
    return build_mixed_space(build_rectangle_mesh(1.0, 1.0, 4, 4))


@pytest.fixture(scope="session")
def forms4(space4):
    return assemble_forms(space4, 1.0)


@pytest.fixture(scope="session")
def disc4_sbcf():
    return discretize(build_rectangle_mesh(1.0, 1.0, 4, 4), 1.0, "SBCF")


@pytest.fixture(scope="session")
def disc4_lbcf():
    return discretize(build_rectangle_mesh(1.0, 1.0, 4, 4), 1.0, "LBCF")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def manufactured(psi_expr, nu=1.0, p_expr=None):
    """Solenoidal ``u0 = curl psi`` and the closed form of ``-nu lap u0 (+ grad p)``.

    ``psi_expr`` and ``p_expr`` are sympy expressions in ``x, y``.
    """
    import sympy as sy

    x, y = sy.symbols("x y", real=True)
    ux, uy = sy.diff(psi_expr, y), -sy.diff(psi_expr, x)
    rx = -nu * (sy.diff(ux, x, 2) + sy.diff(ux, y, 2))
    ry = -nu * (sy.diff(uy, x, 2) + sy.diff(uy, y, 2))
    if p_expr is not None:
        rx, ry = rx + sy.diff(p_expr, x), ry + sy.diff(p_expr, y)

    def vec(ex, ey):
        fx, fy = sy.lambdify((x, y), ex, "numpy"), sy.lambdify((x, y), ey, "numpy")
        return lambda X, Y: (fx(X, Y) + 0 * X, fy(X, Y) + 0 * X)

    return vec(ux, uy), vec(rx, ry)


def stick_psi(amp=10.0):
    import sympy as sy

    x, y = sy.symbols("x y", real=True)
    return amp * x**2 * (1 - x) ** 2 * y**2 * (1 - y) ** 2


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_report(request):
    """Record one PASS/FAIL line per acceptance criterion.

    The line goes to the terminal immediately and again in the summary.
    """
    config = request.config
    lines = config.stash.setdefault(_ACCEPTANCE, [])

    def report(number: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        lines.append(line)
        reporter = config.pluginmanager.get_plugin("terminalreporter")
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
