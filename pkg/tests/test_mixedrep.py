import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from ckbateman.errors import OriginSingular
from ckbateman.mixedrep import (
    EigenLabel,
    MixedPoint,
    characteristic_matrix,
    eigenfunction_eval,
    eigenfunction_on_path,
    energy,
    energy_scan,
    evolve_first_order,
    first_order_residual,
    loop_monodromy,
    monodromy_check,
    spectrum_enumerate,
    stationary_residual,
    velocity_field,
)


def _phi0(x, p):
    return np.exp(-((x - 0.3) ** 2) - 0.5 * (p + 0.2) ** 2 + 0.7j * x * p)


def test_characteristics_match_ode_integration(params):
    """``exp(V t)`` against integrating ``dX/ds = V X`` with an ODE solver."""
    V = velocity_field(params)
    X0 = np.array([0.4, -1.1])
    for t in (0.5, 2.0):
        sol = solve_ivp(lambda s, v: V @ v, (0, t), X0, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(characteristic_matrix(params, t) @ X0, sol.y[:, -1], atol=1e-10)


def test_evolved_function_solves_first_order_equation(params_alt):
    X, P = np.meshgrid(np.linspace(-1, 1, 5), np.linspace(-1, 1, 5))

    def phi_t(x, p, t):
        return evolve_first_order(_phi0, x, p, t, params_alt)

    res = first_order_residual(phi_t, X, P, 0.8, params_alt)
    assert res.max() < 1e-8
    np.testing.assert_allclose(phi_t(X, P, 0.0), _phi0(X, P))


def test_complex_variable_is_eigenvector_of_flow(params):
    """``L z = (gamma/2 - i Omega) z`` for ``z = p_y + i m Omega x``."""
    V = velocity_field(params)
    mo = params.m * params.Omega
    x, p = 0.37, -0.81
    vx, vp = V @ np.array([x, p])
    Lz = vp + 1j * mo * vx
    assert abs(Lz - (params.gamma / 2 - 1j * params.Omega) * complex(p, mo * x)) < 1e-14


@pytest.mark.parametrize("n,lam", [(0, 0.0), (2, 0.25), (-3, 0.5), (4, -0.7)])
def test_eigenfunction_matches_integer_power_form(params, n, lam):
    """Independent form: ``(z/|z|)^n |z|^{-2 i lambda}`` with ``n`` an integer."""
    label = EigenLabel.make(n, lam, params)
    rng = np.random.default_rng(n + 10)
    for _ in range(10):
        x, p = rng.uniform(-2, 2, 2)
        pt = MixedPoint.make(x, p, params)
        z = pt.z
        ref = (z / abs(z)) ** n * np.exp(-2j * lam * np.log(abs(z)))
        assert abs(eigenfunction_eval(label, pt, params) - ref) < 1e-12


@pytest.mark.parametrize("n,lam", [(0, 0.0), (1, 0.25), (-2, 0.5), (3, 1.3)])
def test_eigenfunctions_solve_stationary_equation(params_alt, n, lam):
    label = EigenLabel.make(n, lam, params_alt)
    assert label.check(params_alt)
    assert stationary_residual(label, params_alt, n_points=20) < 1e-5


def test_opposite_log_sign_is_not_stationary(params):
    """With ``+i lambda ln|z|^2`` the stationary equation fails for ``lambda != 0``."""
    lam, n = 0.5, 1
    E = energy(n, lam, params)
    mo = params.m * params.Omega
    V = velocity_field(params)

    def phi(x, p):
        z = complex(p, mo * x)
        a = (E - params.hbar * params.gamma * lam) / (params.hbar * params.Omega)
        return np.exp(1j * a * np.angle(z) + 1j * lam * np.log(abs(z) ** 2))

    x, p, h = 0.6, 0.9, 1e-5
    dx = (phi(x + h, p) - phi(x - h, p)) / (2 * h)
    dp = (phi(x, p + h) - phi(x, p - h)) / (2 * h)
    vx, vp = V @ np.array([x, p])
    res = abs(1j * params.hbar * (vx * dx + vp * dp) - E * phi(x, p))
    assert res > 0.05


def test_monodromy_quantization(params):
    hO, hg = params.hbar * params.Omega, params.hbar * params.gamma
    for n in range(-3, 4):
        for lam in (0.0, 0.3):
            factor, ok = monodromy_check(n * hO + lam * hg, lam, params)
            assert ok and abs(factor - 1) < 1e-12
    assert not monodromy_check(0.5 * hO, 0.0, params)[1]
    assert not monodromy_check(hO * (1 + 1e-6), 0.0, params)[1]


def test_loop_monodromy_agrees_with_closed_form(params):
    for E in (0.37, 1.0 * params.Omega, 2.6):
        assert abs(loop_monodromy(E, 0.2, params) - monodromy_check(E, 0.2, params)[0]) < 1e-9


def test_energy_scan_accepts_rule_only(params):
    hO = params.hbar * params.Omega
    for lam in (0.0, 0.25, 0.5):
        rep = energy_scan(params, lam, -5 * hO, 5 * hO)
        assert rep["all_rule_points_accepted"]
        assert rep["max_rule_deviation"] < 1e-9
        assert len(rep["accepted"]) == rep["expected_count"]


def test_spectrum_enumerate_certifies_labels(params):
    rows = spectrum_enumerate(range(-2, 3), [0.0, 0.25], params, n_points=10)
    assert len(rows) == 10 and all(r["ok"] for r in rows)
    E = sorted(r["E"] / (params.hbar * params.Omega) for r in rows if r["lambda"] == 0.0)
    np.testing.assert_allclose(E, [-2, -1, 0, 1, 2], atol=1e-14)


def test_origin_and_path_guards(params):
    label = EigenLabel.make(1, 0.0, params)
    with pytest.raises(OriginSingular):
        eigenfunction_eval(label, MixedPoint(0.0, 0.0, 1.0), params)
    with pytest.raises(OriginSingular):
        eigenfunction_on_path(label, [1.0, 0.0], params)
    with pytest.raises(ValueError):
        eigenfunction_on_path(label, [1.0, -1.0], params)


def test_mixed_point_roundtrip(params):
    z = complex(0.3, -1.2)
    pt = MixedPoint.from_z(z, params)
    assert abs(pt.z - z) < 1e-15
    assert abs(pt.m_omega - params.m * params.Omega) < 1e-15
    assert EigenLabel(E=1.0, n=0, lam=0.5).lambda_tilde == 0.5j
    assert math.isclose(energy(2, 0.5, params), 2 * params.Omega + 0.1)
