import numpy as np
import pytest
import scipy.linalg as sla
import sympy as sy

from friction_flow.forms import (
    a1_standard,
    assemble_forms,
    boundary_convection,
    convection_apply,
    convection_jacobian,
    convection_matrix,
    convection_residual,
    friction_jacobian,
    friction_residual,
    integrate_g,
    j_eps_value,
    j_value,
)
from friction_flow.mesh import build_rectangle_mesh
from friction_flow.regularizer import Regularizer
from friction_flow.spaces import build_constraints, build_mixed_space, interpolate, interpolate_pressure

X, Y = sy.symbols("x y", real=True)


def _interp(space, ex, ey):
    fx, fy = sy.lambdify((X, Y), ex, "numpy"), sy.lambdify((X, Y), ey, "numpy")
    return interpolate(space, lambda x, y: (fx(x, y) + 0 * x, fy(x, y) + 0 * x))


def _exact_a1(u, v, w):
    """int_(0,1)^2 ((u . grad) v) . w for sympy fields."""
    conv = [u[0] * sy.diff(v[c], X) + u[1] * sy.diff(v[c], Y) for c in range(2)]
    return float(sy.integrate(conv[0] * w[0] + conv[1] * w[1], (X, 0, 1), (Y, 0, 1)))


# quadratic fields are reproduced exactly by the P2 interpolant
U = (Y**2 + 1, X - Y)
V = (X * Y, X**2 - 1)
W = (1 + X, Y * (1 - X))


@pytest.fixture(scope="module")
def sp3():
    return build_mixed_space(build_rectangle_mesh(1.0, 1.0, 3, 3))


@pytest.fixture(scope="module")
def fo3(sp3):
    return assemble_forms(sp3, 1.0)


def test_a0_kills_rigid_motions(fo3, sp3):
    for field in [lambda x, y: (1 + 0 * x, 0 * y), lambda x, y: (0 * x, 1 + 0 * y), lambda x, y: (y, -x)]:
        u = interpolate(sp3, field)
        assert abs(u @ fo3.A0 @ u) < 1e-12
        assert np.max(np.abs(fo3.A0 @ u)) < 1e-12


def test_a0_hand_value(sp3):
    u = interpolate(sp3, lambda x, y: (x, -y))
    for nu in (1.0, 2.5):
        assert u @ assemble_forms(sp3, nu).A0 @ u == pytest.approx(4.0 * nu, abs=1e-10)


def test_a0_against_exact_integral(fo3, sp3):
    def D(f):
        return sy.Matrix([[sy.diff(f[i], v) for v in (X, Y)] for i in range(2)])

    Du, Dv = D(U), D(V)
    exact = float(sy.integrate(sum(((Du + Du.T) / 2)[i, j] * ((Dv + Dv.T) / 2)[i, j] for i in range(2) for j in range(2)) * 2, (X, 0, 1), (Y, 0, 1)))
    assert _interp(sp3, *V) @ fo3.A0 @ _interp(sp3, *U) == pytest.approx(exact, abs=1e-10)


def test_operator_structure(fo3, sp3):
    A = fo3.A0.toarray()
    assert np.max(np.abs(A - A.T)) <= 1e-10 * np.max(np.abs(A))
    assert np.linalg.eigvalsh(A).min() > -1e-10
    P = build_constraints(sp3, "V").basis
    assert np.linalg.eigvalsh((P.T @ fo3.A0 @ P).toarray()).min() > 1e-6
    M = fo3.M.toarray()
    assert np.max(np.abs(M - M.T)) < 1e-15
    assert np.linalg.eigvalsh(M).min() > 0


def test_divergence_hand_values(fo3, sp3):
    one = np.ones(sp3.n_pressure_dofs)
    assert one @ fo3.B @ interpolate(sp3, lambda x, y: (x, y)) == pytest.approx(-2.0, abs=1e-10)
    rng = np.random.default_rng(0)
    q = rng.standard_normal(sp3.n_pressure_dofs)
    assert abs(q @ fo3.B @ interpolate(sp3, lambda x, y: (y, -x))) < 1e-12
    v = interpolate(sp3, lambda x, y: (x**2, 0 * y))
    qx = interpolate_pressure(sp3, lambda x, y: x)
    assert qx @ fo3.B @ v == pytest.approx(-2.0 / 3.0, abs=1e-10)


def test_divergence_rows_against_constant(fo3, sp3):
    # sum_k B[k, i] = -int div phi_i, and the divergence theorem gives the
    # boundary flux, which vanishes for interior basis functions
    col = np.ones(sp3.n_pressure_dofs) @ fo3.B
    interior = np.setdiff1d(np.arange(sp3.n_nodes), sp3.boundary_nodes)
    assert np.max(np.abs(col[interior])) < 1e-14
    assert np.max(np.abs(col[sp3.n_nodes + interior])) < 1e-14


def test_standard_convection_values(sp3):
    u = interpolate(sp3, lambda x, y: (1 + 0 * x, 0 * y))
    v = interpolate(sp3, lambda x, y: (x, 0 * y))
    assert a1_standard(sp3, u, v, u) == pytest.approx(1.0, abs=1e-12)
    # skew value: (1 - 0) / 2, and the boundary term vanishes since u.n = 0 on y = 0
    for kind in ("SBCF", "LBCF"):
        assert convection_apply(sp3, u, v, u, kind) == pytest.approx(0.5, abs=1e-12)


def test_convection_against_exact_integrals(sp3):
    u, v, w = (_interp(sp3, *f) for f in (U, V, W))
    assert a1_standard(sp3, u, v, w) == pytest.approx(_exact_a1(U, V, W), abs=1e-12)
    skew = 0.5 * (_exact_a1(U, V, W) - _exact_a1(U, W, V))
    assert convection_apply(sp3, u, v, w, "SBCF") == pytest.approx(skew, abs=1e-12)
    # Gamma1 = bottom side, n = (0, -1)
    bnd = 0.5 * float(sy.integrate((-U[1] * (V[0] * W[0] + V[1] * W[1])).subs(Y, 0), (X, 0, 1)))
    assert boundary_convection(sp3, u, v, w) == pytest.approx(bnd, abs=1e-12)
    assert convection_apply(sp3, u, v, w, "LBCF") == pytest.approx(skew + bnd, abs=1e-12)


def test_skew_identities_random(sp3):
    rng = np.random.default_rng(7)
    n = sp3.n_velocity_dofs
    for _ in range(100):
        u, v, w = rng.standard_normal((3, n))
        assert abs(convection_apply(sp3, u, v, v, "SBCF")) < 1e-12
        lb = convection_apply(sp3, u, v, v, "LBCF") - boundary_convection(sp3, u, v, v)
        assert abs(lb) < 1e-12
    C = convection_matrix(sp3, u, "SBCF")
    assert abs(w @ C @ v + v @ C @ w) < 1e-12
    assert convection_apply(sp3, u, np.zeros(n), np.zeros(n), "SBCF") == 0.0


@pytest.mark.parametrize("kind", ["SBCF", "LBCF"])
def test_convection_jacobian(sp3, kind):
    rng = np.random.default_rng(3)
    n = sp3.n_velocity_dofs
    u, d = rng.standard_normal((2, n))
    assert np.allclose(convection_residual(sp3, u, kind), convection_matrix(sp3, u, kind) @ u, atol=1e-13)
    J = convection_jacobian(sp3, u, kind)
    h = 1e-6
    fd = (convection_residual(sp3, u + h * d, kind) - convection_residual(sp3, u - h * d, kind)) / (2 * h)
    assert np.linalg.norm(fd - J @ d) < 1e-6 * np.linalg.norm(J @ d)
    assert abs(convection_jacobian(sp3, np.zeros(n), kind)).max() == 0.0
    assert abs(convection_jacobian(sp3, 2 * u, kind) - 2 * J).max() < 1e-12


def _trace_velocity(space, kind, values):
    """Velocity vector whose Gamma1 nodal trace is ``values`` (tangential or normal)."""
    g1 = space.gamma1
    direction = g1.tangent if kind == "SBCF" else g1.normal
    u = np.zeros(space.n_velocity_dofs)
    for c in range(2):
        u[c * space.n_nodes + g1.nodes] = values * direction[c]
    return u


@pytest.mark.parametrize("kind", ["SBCF", "LBCF"])
def test_friction_residual(sp3, kind):
    reg = Regularizer(1e-2)
    g1 = sp3.gamma1
    g = np.ones(g1.size)
    zero = sp3.trace(np.zeros(sp3.n_velocity_dofs), kind)
    assert np.all(friction_residual(sp3, g, zero, reg) == 0)
    u = _trace_velocity(sp3, kind, np.full(g1.size, 5.0))
    r = friction_residual(sp3, g, sp3.trace(u, kind), reg)
    direction = g1.tangent if kind == "SBCF" else g1.normal
    total = sum(direction[c] * r[c * sp3.n_nodes : (c + 1) * sp3.n_nodes].sum() for c in range(2))
    assert total == pytest.approx(integrate_g(sp3, g), abs=1e-12)
    assert total == pytest.approx(1.0, abs=1e-12)
    rng = np.random.default_rng(0)
    for _ in range(20):
        w = rng.standard_normal(sp3.n_velocity_dofs)
        gg = rng.uniform(0.5, 2.0, g1.size)
        rr = friction_residual(sp3, gg, sp3.trace(rng.standard_normal(sp3.n_velocity_dofs) * 0.01, kind), reg)
        assert abs(rr @ w) <= j_value(sp3, gg, sp3.trace(w, kind)) + 1e-14


@pytest.mark.parametrize("kind", ["SBCF", "LBCF"])
def test_friction_jacobian(sp3, fo3, kind):
    eps = 1e-2
    reg = Regularizer(eps)
    g1 = sp3.gamma1
    g = np.ones(g1.size)
    big = sp3.trace(_trace_velocity(sp3, kind, np.full(g1.size, 1.0)), kind)
    assert abs(friction_jacobian(sp3, g, big, reg)).max() == 0.0
    zero = sp3.trace(np.zeros(sp3.n_velocity_dofs), kind)
    J0 = friction_jacobian(sp3, g, zero, reg)
    rng = np.random.default_rng(1)
    for _ in range(5):
        v, w = rng.standard_normal((2, sp3.n_velocity_dofs))
        tv, tw = sp3.trace(v, kind), sp3.trace(w, kind)
        mass = np.sum(g1.weights * (np.sum(tv * tw, axis=-1) if tv.ndim == 2 else tv * tw))
        assert w @ J0 @ v == pytest.approx(np.pi / (2 * eps) * mass, rel=1e-12)
        direction = g1.tangent if kind == "SBCF" else g1.normal
        pv = sp3.nodal_values(v)[g1.nodes] @ direction
        pw = sp3.nodal_values(w)[g1.nodes] @ direction
        assert mass == pytest.approx(pv @ fo3.M_gamma1 @ pw, rel=1e-13)
    u = rng.standard_normal(sp3.n_velocity_dofs) * 0.02
    J = friction_jacobian(sp3, rng.uniform(0.5, 2, g1.size), sp3.trace(u, kind), reg).toarray()
    assert np.allclose(J, J.T, atol=1e-12)
    assert np.linalg.eigvalsh(J).min() >= -1e-10


@pytest.mark.parametrize("kind", ["SBCF", "LBCF"])
def test_friction_residual_is_gradient_of_j_eps(sp3, kind):
    reg = Regularizer(0.05)
    rng = np.random.default_rng(5)
    g = rng.uniform(0.5, 2.0, sp3.gamma1.size)
    u, d = rng.standard_normal((2, sp3.n_velocity_dofs)) * 0.05
    h = 1e-6
    fd = (j_eps_value(sp3, g, sp3.trace(u + h * d, kind), reg) - j_eps_value(sp3, g, sp3.trace(u - h * d, kind), reg)) / (2 * h)
    assert fd == pytest.approx(friction_residual(sp3, g, sp3.trace(u, kind), reg) @ d, rel=1e-6, abs=1e-10)
    # Jacobian is the derivative of the residual
    Jd = friction_jacobian(sp3, g, sp3.trace(u, kind), reg) @ d
    fd2 = (friction_residual(sp3, g, sp3.trace(u + h * d, kind), reg) - friction_residual(sp3, g, sp3.trace(u - h * d, kind), reg)) / (2 * h)
    assert np.linalg.norm(fd2 - Jd) <= 1e-5 * max(np.linalg.norm(Jd), 1.0)


def test_j_functionals(sp3):
    g1 = sp3.gamma1
    g = np.ones(g1.size)
    reg = Regularizer(1e-2)
    zero = np.zeros((g1.size, 2))
    assert j_value(sp3, g, zero) == 0.0 and j_eps_value(sp3, g, zero, reg) == 0.0
    const = np.tile([0.3, 0.0], (g1.size, 1))
    assert j_value(sp3, g, const) == pytest.approx(0.3, abs=1e-14)
    rng = np.random.default_rng(2)
    for _ in range(20):
        gg = rng.uniform(0.1, 3.0, g1.size)
        tr = rng.standard_normal((g1.size, 2)) * 10.0 ** rng.uniform(-4, 0)
        assert abs(j_eps_value(sp3, gg, tr, reg) - j_value(sp3, gg, tr)) <= 1e-2 * integrate_g(sp3, gg)
        lam = rng.uniform(0, 5)
        assert j_value(sp3, gg, lam * tr) == pytest.approx(lam * j_value(sp3, gg, tr), rel=1e-13)


def test_nonpositive_g_rejected(sp3):
    reg = Regularizer(1e-2)
    g = np.ones(sp3.gamma1.size)
    g[2] = 0.0
    tr = np.zeros(sp3.gamma1.size)
    for fn in (lambda: friction_residual(sp3, g, tr, reg), lambda: friction_jacobian(sp3, g, tr, reg), lambda: j_value(sp3, g, tr)):
        with pytest.raises(ValueError, match="strictly positive"):
            fn()
