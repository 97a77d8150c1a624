import numpy as np
import pytest

from ckbateman.arnold import (
    GridState,
    ck_gaussian,
    ck_gaussian_state,
    ck_residual,
    free_gaussian,
    free_gaussian_state,
    qat_forward,
    qat_inverse,
    t_of_tau,
    tau_of_t,
    uniform_grid,
)
from ckbateman.errors import CausticCrossed
from ckbateman.model_core import build_basis
from ckbateman.weylalg import PhysParams


def test_free_gaussian_solves_free_equation_and_is_normalized():
    """Independent oracle: ``i hbar psi_tau = -(hbar^2/2m) psi_kk`` by finite differences."""
    m, hb = 1.3, 0.9
    k = np.linspace(-3, 3, 13)
    tau, h = 0.6, 1e-3

    def f(kk, tt):
        return free_gaussian(kk, tt, sigma=0.8, k0=0.2, p0=0.5, m=m, hbar=hb)

    dt = (f(k, tau + h) - f(k, tau - h)) / (2 * h)
    dkk = (f(k + h, tau) - 2 * f(k, tau) + f(k - h, tau)) / h**2
    np.testing.assert_allclose(1j * hb * dt, -(hb**2) / (2 * m) * dkk, atol=1e-5)
    xs = uniform_grid(-20, 20, 4096)
    assert abs(np.sum(np.abs(f(xs, tau)) ** 2) * (xs[1] - xs[0]) - 1) < 1e-12


def test_residual_vanishes_on_undamped_ground_state():
    """Sanity of the residual itself: the gamma = 0 ground state is exact."""
    p = PhysParams(gamma=0.0, omega=1.2, m=0.7, hbar=1.1)

    def gs(x, t):
        return np.exp(-p.m * p.omega * x**2 / (2 * p.hbar) - 0.5j * p.omega * t)

    x = np.linspace(-2, 2, 9)
    assert ck_residual(gs, x, 0.3, p).max() < 1e-7
    assert ck_residual(lambda x, t: gs(x, 0.0), x, 0.3, p).max() > 0.1


@pytest.mark.parametrize("which", ["params", "params_alt"])
def test_inverse_image_solves_damped_equation(which, request):
    p = request.getfixturevalue(which)
    b = build_basis(p)
    x = np.linspace(-4, 4, 33)
    for t in (0.2, 0.6, 1.0):
        res = ck_residual(lambda xx, tt: ck_gaussian(xx, tt, b, sigma=0.9, k0=0.5, p0=-0.3), x, t, p)
        assert res.max() < 1e-5


def test_forward_inverse_roundtrip(params):
    b = build_basis(params)
    xs = uniform_grid(-12, 12, 1024)
    s = ck_gaussian_state(xs, 0.7, b, k0=0.4, p0=0.2)
    back = qat_inverse(qat_forward(s, b), b)
    assert back.l2_distance(s) < 1e-12
    f = free_gaussian_state(xs, 0.35, params, k0=0.1)
    assert qat_forward(qat_inverse(f, b), b).l2_distance(f) < 1e-12


def test_forward_image_is_free_evolution_and_preserves_norm(params):
    b = build_basis(params)
    xs = uniform_grid(-12, 12, 1024)
    t = 0.8
    s = ck_gaussian_state(xs, t, b, sigma=1.1, k0=0.3, p0=0.6)
    fwd = qat_forward(s, b)
    assert fwd.frame == "free" and abs(fwd.t - tau_of_t(b, t)) < 1e-15
    ref = free_gaussian(fwd.xs, fwd.t, sigma=1.1, k0=0.3, p0=0.6)
    assert np.max(np.abs(fwd.psi - ref)) < 1e-12
    assert abs(fwd.norm() - s.norm()) < 1e-12


def test_ck_gaussian_reduces_to_free_gaussian_at_t0(params):
    b = build_basis(params)
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(ck_gaussian(x, 0.0, b, k0=1.0, p0=0.5), free_gaussian(x, 0.0, k0=1.0, p0=0.5), atol=1e-15)


def test_time_maps_are_inverse_and_guard_caustic(params):
    b = build_basis(params)
    for t in (-0.9, -0.2, 0.0, 0.5, 1.6):
        assert abs(t_of_tau(b, tau_of_t(b, t)) - t) < 1e-10
    with pytest.raises(CausticCrossed):
        tau_of_t(b, b.domain()[1] + 0.05)


def test_frame_checks(params):
    b = build_basis(params)
    xs = uniform_grid(-8, 8, 64)
    s = ck_gaussian_state(xs, 0.2, b)
    with pytest.raises(ValueError):
        qat_inverse(s, b)
    with pytest.raises(ValueError):
        qat_forward(qat_forward(s, b), b)


def test_grid_state_save_load(tmp_path, params):
    b = build_basis(params)
    s = ck_gaussian_state(uniform_grid(-8, 8, 64), 0.3, b, k0=0.2)
    s.save(tmp_path / "state")
    r = GridState.load(tmp_path / "state")
    assert r.t == s.t and r.frame == s.frame and r.params == s.params
    np.testing.assert_array_equal(r.psi, s.psi)
    np.testing.assert_array_equal(r.xs, s.xs)
