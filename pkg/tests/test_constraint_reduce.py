import numpy as np
import pytest

from ckbateman.bateman import J4, PhaseState4
from ckbateman.constraint_reduce import (
    ConstraintFamily,
    ReductionChain,
    ReductionMaps,
    bateman_residual,
    branch_checks,
    build_constraints,
    classical_constraint_check,
    constrained_point,
    constraint_row,
    gaussian_chi,
    good_operator_check,
    good_operator_rows,
    good_operator_transport,
    literal_consistency,
    literal_residual,
    reduce_wavefunction,
    verify_reduction_to_ck,
)
from ckbateman.errors import BranchSingularity, OffConstraintSurface, OverdampedUnsupported
from ckbateman.weylalg import PhysParams


def test_good_operators_commute_with_first_constraint(params_alt):
    rep = good_operator_check(params_alt)
    assert rep["G1"]["commutator_zero"] and rep["G2"]["commutator_zero"]
    assert not rep["H_B"]["commutator_zero"]


def test_commutators_from_symplectic_form(params):
    """Independent oracle: ``[a.z, b.z] = i hbar a^T J b`` for linear operators."""
    r1 = constraint_row(params, 1)
    for r in good_operator_rows(params).values():
        assert abs(r1 @ J4 @ r) < 1e-14
    assert abs(constraint_row(params, -1) @ J4 @ good_operator_rows(params)["G1"]) > 0.1


def test_constraints_are_second_class_with_value_two_i_hbar(params_alt):
    """``[C1, C2] = i hbar (1 + omega^2/Omega^2 - gamma^2/(4 Omega^2)) = 2 i hbar``."""
    rep = good_operator_check(params_alt)
    re, im = rep["C1C2"]["value"]
    assert abs(re) < 1e-14 and abs(im - 2 * params_alt.hbar) < 1e-13


def test_classical_constraints_preserved(params):
    rep = classical_constraint_check(constrained_point(0.7, -0.3, params), params, 5.0)
    assert rep["on_surface"] and rep["preserved"] and rep["max_violation"] < 1e-8
    assert rep["plus_exponent_second_relation_max_violation"] > 1.0


def test_off_surface_point_is_detected(params):
    rep = classical_constraint_check(PhaseState4(1.0, 0.0, 0.0, 0.0), params, 1.0)
    assert not rep["on_surface"] and not rep["preserved"]


@pytest.mark.parametrize("sigma", [1, -1])
def test_reduced_equation_residual(params, sigma):
    rep = verify_reduction_to_ck(params, A=1.0, sigma=sigma)
    assert rep["pass"] and rep["max_rel_residual"] < 1e-5
    assert not rep["skipped_times"]


def test_reduction_on_second_parameter_set(params_alt):
    rep = verify_reduction_to_ck(params_alt, A=0.6, sigma=1, t_window=(0.3, 0.9), n_t=4)
    assert rep["max_rel_residual"] < 1e-5


def test_lifted_state_solves_bateman_equation_and_constraint(params):
    """The lift of the reduced solution is an exact Bateman solution annihilated by ``S(t)``."""
    fam = ConstraintFamily(params, 1)
    psi = ReductionChain(fam, 1.0).psi(gaussian_chi(params))

    def phi_t(x, y, t):
        return fam.lift(psi, t)(x, y)

    x = np.array([-0.5, 0.2, 0.6])
    y = np.array([0.3, -0.4, 0.1])
    t = 0.7
    res = bateman_residual(phi_t, x, y, t, params)
    assert res.max() / np.abs(phi_t(x, y, t)).max() < 1e-6
    al, be, de, ep = fam.row(t)
    h, hb = 1e-4, params.hbar
    dphix = (phi_t(x + h, y, t) - phi_t(x - h, y, t)) / (2 * h)
    dphiy = (phi_t(x, y + h, t) - phi_t(x, y - h, t)) / (2 * h)
    C = al * x * phi_t(x, y, t) + be * y * phi_t(x, y, t) - 1j * hb * (de * dphix + ep * dphiy)
    assert np.abs(C).max() < 1e-6


def test_reduce_wavefunction_recovers_reduced_state(params):
    fam = ConstraintFamily(params, 1)
    psi = ReductionChain(fam, 1.0).psi(gaussian_chi(params))
    t = 0.6
    xs = np.linspace(-1, 1, 7)
    got = reduce_wavefunction(fam.lift(psi, t), fam, t, xs)
    np.testing.assert_allclose(got, psi(xs, t), atol=1e-12)
    with pytest.raises(OffConstraintSurface):
        reduce_wavefunction(lambda x, y: np.exp(-(x**2) - y**2), fam, t, xs)


def test_good_operators_act_as_oscillator_invariants(params):
    rep = good_operator_transport(params)
    assert rep["pass"]
    assert rep["G1"]["max_rel_residual"] < 1e-6 and rep["G2"]["max_rel_residual"] < 1e-6


def test_reference_phase_belongs_to_opposite_sign_family(params):
    rep = literal_consistency(params)
    assert rep["matches_sigma_minus_one"]
    fam = ConstraintFamily(params, -1)
    maps = ReductionMaps(params)
    for t in (0.4, 0.9):
        assert abs(maps.mu(t) - fam.mu(t)) < 1e-14


def test_reference_closed_form_maps_do_not_solve_reduced_equation(params):
    """Recorded behaviour: the literal ``f, g, kappa, tau`` leave an O(1) residual."""
    rep = literal_residual(params, n_t=4)
    assert rep["max_rel_residual_derived_drift"] > 1.0
    assert rep["max_rel_residual_reference_drift"] > 1.0


def test_branch_map_properties(params):
    rep = branch_checks(params)
    assert rep["pass"]
    assert rep["chain"]["monotone"]
    lo, hi = rep["chain"]["branch_positive"]
    assert lo < 0.01 and hi >= 1.2 - 1e-12
    maps_p, maps_m = ReductionMaps(params, 1.0), ReductionMaps(params, -1.0)
    assert maps_p.tau(0.0) == 0.0 and maps_p.tau_prime(0.0) == 0.0
    assert maps_p.tau(0.8) > 0 and maps_m.tau(-0.8) < 0


def test_branch_guards(params):
    fam = ConstraintFamily(params, 1)
    with pytest.raises(BranchSingularity):
        fam.guard(1e-5)
    with pytest.raises(BranchSingularity):
        ReductionChain(fam, -1.0).maps(np.array([0.1]), -0.5)
    with pytest.raises(ValueError):
        ReductionChain(fam, 0.0)
    with pytest.raises(ValueError):
        ConstraintFamily(params, 0)
    with pytest.raises(BranchSingularity):
        verify_reduction_to_ck(params, A=1.0, t_window=(-1.0, -0.3))


def test_constraint_set_classical_relations(params):
    cs = build_constraints(params)
    s = constrained_point(0.4, 0.9, params).as_array()
    assert max(abs(v) for v in cs.classical(s, 0.0)) < 1e-14
    assert cs.C1.degree() == 1 and cs.C2.degree() == 1


def test_overdamped_family_rejected():
    with pytest.raises(OverdampedUnsupported):
        ConstraintFamily(PhysParams(gamma=3.0, omega=1.0))
