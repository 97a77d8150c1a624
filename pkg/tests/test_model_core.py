import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from ckbateman.errors import CausticCrossed, OverdampedUnsupported
from ckbateman.model_core import arnold_map, build_basis, classical_trajectory
from ckbateman.weylalg import PhysParams


def _ode(params, y0, times):
    """Independent oracle: integrate ``x'' + gamma x' + omega^2 x = 0``."""
    g, w2 = params.gamma, params.omega**2
    sol = solve_ivp(lambda t, v: [v[1], -g * v[1] - w2 * v[0]], (0, times[-1]), y0,
                    t_eval=times, rtol=1e-12, atol=1e-13, method="DOP853")
    return sol.y


@pytest.mark.parametrize("which", ["params", "params_alt"])
def test_basis_matches_numerical_ode(which, request):
    p = request.getfixturevalue(which)
    b = build_basis(p)
    ts = np.linspace(0, 10, 41)
    u1 = _ode(p, [0.0, 1.0], ts)
    u2 = _ode(p, [1.0, 0.0], ts)
    np.testing.assert_allclose(b.u1(ts).real, u1[0], atol=1e-9)
    np.testing.assert_allclose(b.u1_dot()(ts).real, u1[1], atol=1e-9)
    np.testing.assert_allclose(b.u2(ts).real, u2[0], atol=1e-9)
    np.testing.assert_allclose(b.u2_dot()(ts).real, u2[1], atol=1e-9)


def test_ode_residual_vanishes_exactly(params):
    for r in build_basis(params).ode_residuals():
        assert r.is_zero() or r.max_amplitude() < 1e-13


def test_wronskian_is_damping_factor(params):
    """Abel: ``u1' u2 - u1 u2' = e^{-gamma t}``."""
    b = build_basis(params)
    ts = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(b.W(ts).real, np.exp(-params.gamma * ts), rtol=1e-13)


def test_domain_is_first_zero_of_u2(params):
    b = build_basis(params)
    g, Om = params.gamma, params.Omega
    t_plus = (math.pi - math.atan(2 * Om / g)) / Om
    lo, hi = b.domain()
    assert abs(hi - t_plus) < 1e-10
    assert lo < 0 and abs(b.u2(lo)) < 1e-10


def test_trajectory_matches_oracle_and_momentum_convention(params):
    b = build_basis(params)
    ts = np.linspace(0, 10, 101)
    tr = classical_trajectory(b, 0.7, -0.4, ts)
    ref = _ode(params, [0.7, -0.4], ts)
    np.testing.assert_allclose(tr.positions, ref[0], atol=1e-9)
    np.testing.assert_allclose(tr.momenta, params.m * np.exp(params.gamma * ts) * ref[1], atol=1e-8)


def test_trajectory_csv(tmp_path, params):
    tr = classical_trajectory(build_basis(params), 1.0, 0.0, np.linspace(0, 1, 5))
    lines = tr.to_csv(tmp_path / "traj.csv").read_text().splitlines()
    assert lines[0] == "t,x,p" and len(lines) == 6


def test_arnold_map_and_caustic(params):
    b = build_basis(params)
    kappa, tau = arnold_map(b, np.array([1.0, 2.0]), 0.5)
    np.testing.assert_allclose(kappa, np.array([1.0, 2.0]) / b.u2(0.5).real)
    assert abs(tau - b.u1(0.5).real / b.u2(0.5).real) < 1e-15
    assert arnold_map(b, 1.0, 0.0) == (1.0, 0.0)
    with pytest.raises(CausticCrossed):
        arnold_map(b, 1.0, b.domain()[1] + 0.1)


def test_overdamped_rejected():
    with pytest.raises(OverdampedUnsupported):
        build_basis(PhysParams(gamma=3.0, omega=1.0))
