import numpy as np
import pytest

from conftest import manufactured, stick_psi
from friction_flow.constants import estimate_korn_constant
from friction_flow.diagnostics import random_solenoidal_field
from friction_flow.forms import friction_residual, h1_norm, integrate_g, l2_norm
from friction_flow.initdata import adapt_initial_velocity, check_compatibility, make_initial_data
from friction_flow.mesh import build_rectangle_mesh
from friction_flow.regularizer import Regularizer
from friction_flow.saddle import discretize


def _g(value):
    return lambda t, x, y: np.full_like(x, value)


@pytest.fixture(scope="module")
def disc8():
    return discretize(build_rectangle_mesh(1, 1, 8, 8), 1.0, "SBCF")


@pytest.fixture(scope="module")
def stick_data(disc8):
    u0, rhs = manufactured(stick_psi(10.0))
    return make_initial_data(disc8, u0, rhs, _g(2.0))


def test_zero_data_gives_zero(disc4_sbcf):
    zero = lambda x, y: (0 * x, 0 * y)
    data = make_initial_data(disc4_sbcf, zero, zero)
    u = adapt_initial_velocity(data, disc4_sbcf, Regularizer(1e-2))
    assert np.all(u == 0)


def test_constraints_hold(disc4_sbcf, disc4_lbcf):
    f = lambda x, y: (np.sin(3 * x) * y, np.cos(x + y))
    for disc in (disc4_sbcf, disc4_lbcf):
        data = make_initial_data(disc, f)
        assert np.allclose(disc.constraints.apply(data.u0), data.u0, atol=1e-15)
        u = adapt_initial_velocity(data, disc, Regularizer(1e-2))
        assert np.max(np.abs(disc.space.trace(u, "LBCF" if disc.bc_kind == "SBCF" else "SBCF"))) < 1e-14


def test_distance_bound_and_rate(disc8, stick_data):
    alpha = estimate_korn_constant(disc8.forms, "V")
    bound_g = integrate_g(disc8.space, stick_data.g0_values)
    errs = []
    for eps in (1e-1, 1e-2, 5e-3, 1e-3):
        u = adapt_initial_velocity(stick_data, disc8, Regularizer(eps))
        err = h1_norm(disc8.forms, u - stick_data.u0)
        assert err**2 <= 2 * eps / alpha * bound_g
        errs.append(err)
    assert all(b <= a for a, b in zip(errs, errs[1:]))
    assert errs[1] / errs[2] >= 1.2


def test_adapted_velocity_stays_bounded(disc8, stick_data):
    u = adapt_initial_velocity(stick_data, disc8, Regularizer(1e-3))
    assert l2_norm(disc8.forms, u) <= 2 * l2_norm(disc8.forms, stick_data.u0)
    assert h1_norm(disc8.forms, u) <= 2 * h1_norm(disc8.forms, stick_data.u0)


def test_residual_on_solenoidal_directions(disc8, stick_data):
    reg = Regularizer(1e-2)
    u = adapt_initial_velocity(stick_data, disc8, reg)
    space = disc8.space
    r = disc8.forms.A0 @ u + friction_residual(space, stick_data.g0_values, space.trace(u, "SBCF"), reg) - stick_data.rhs
    for seed in range(20):
        v = random_solenoidal_field(disc8, seed)
        assert abs(r @ v) < 1e-9


def test_compatibility_zero(disc4_sbcf, disc4_lbcf):
    zero = lambda x, y: (0 * x, 0 * y)
    for disc in (disc4_sbcf, disc4_lbcf):
        rep = check_compatibility(make_initial_data(disc, zero, zero), disc)
        assert rep.max_stress_ratio == 0 and rep.comp_residual == 0 and rep.leak_norm == 0
        assert not rep.stress_exceeds_g and not rep.leak_budget_exceeded


def test_compatibility_leak_norm_vanishes(disc4_lbcf):
    u0, rhs = manufactured(stick_psi(5.0))
    rep = check_compatibility(make_initial_data(disc4_lbcf, u0, rhs), disc4_lbcf)
    assert rep.leak_norm <= 1e-12


def test_compatibility_flags_large_stress(disc8):
    g = _g(2.0)
    u0, rhs = manufactured(stick_psi(10.0))
    ok = check_compatibility(make_initial_data(disc8, u0, rhs, g), disc8)
    assert not ok.stress_exceeds_g
    u0, rhs = manufactured(stick_psi(100.0))
    bad = check_compatibility(make_initial_data(disc8, u0, rhs, g), disc8)
    assert bad.stress_exceeds_g
    assert bad.max_stress_ratio == pytest.approx(10 * ok.max_stress_ratio, rel=1e-9)


def test_nonpositive_g_rejected(disc4_sbcf):
    u0, rhs = manufactured(stick_psi(1.0))
    data = make_initial_data(disc4_sbcf, u0, rhs, _g(-1.0))
    with pytest.raises(ValueError, match="strictly positive"):
        adapt_initial_velocity(data, disc4_sbcf, Regularizer(1e-2))


def test_nonfinite_rhs_rejected(disc4_sbcf):
    data = make_initial_data(disc4_sbcf, lambda x, y: (0 * x, 0 * y), lambda x, y: (np.nan + 0 * x, 0 * y))
    with pytest.raises(ValueError):
        adapt_initial_velocity(data, disc4_sbcf, Regularizer(1e-2))
