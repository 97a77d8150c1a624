import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ckbateman.coeffring import ExpPoly
from ckbateman.errors import OverdampedUnsupported
from ckbateman.weylalg import (
    PhysParams,
    WeylOp,
    apply_numeric,
    op_commutator,
    op_deviation,
    op_equal,
    op_mul,
)

coef = st.sampled_from([1.0, -0.5, 2j, 0.3 - 0.4j])
rate = st.sampled_from([0.0, 0.2, -0.1, 0.9j])
mono = st.builds(
    lambda c, r, a, b, cx, dy: WeylOp.monomial(ExpPoly.exp(r, c), xa=a, yb=b, dxc=cx, dyd=dy),
    coef, rate, st.integers(0, 1), st.integers(0, 1), st.integers(0, 1), st.integers(0, 1),
)
ops = st.lists(mono, min_size=1, max_size=3).map(lambda L: sum(L, WeylOp()))
ops_t = st.one_of(ops, st.builds(lambda o, c: o + WeylOp.dt() * c, ops, coef))


def test_canonical_commutators():
    """``[d_x, x] = 1``, ``[x, y] = 0`` and ``[x, -i hbar d_x] = i hbar``."""
    x, dx, y = WeylOp.x(), WeylOp.dx(), WeylOp.y()
    assert op_equal(op_commutator(dx, x), WeylOp.identity())
    assert op_commutator(x, y).is_zero()
    assert op_commutator(WeylOp.dx(), WeylOp.y()).is_zero()
    hb = 0.7
    assert op_equal(op_commutator(x, dx * (-1j * hb)), WeylOp.scalar(1j * hb))


def test_time_derivative_acts_on_coefficients():
    """``d_t f(t) = f'(t) + f(t) d_t`` as a normal-ordered product."""
    f = ExpPoly.cos(1.3, -0.1)
    got = op_mul(WeylOp.dt(), WeylOp.scalar(f))
    expected = WeylOp.scalar(f.diff()) + WeylOp.monomial(f, dte=1)
    assert op_equal(got, expected)


def test_normal_ordering_of_dx_squared_times_x_squared():
    """``d_x^2 x^2 = x^2 d_x^2 + 4 x d_x + 2``."""
    got = WeylOp.dx() * WeylOp.dx() * WeylOp.x() * WeylOp.x()
    expected = WeylOp.monomial(1, xa=2, dxc=2) + WeylOp.monomial(4, xa=1, dxc=1) + WeylOp.scalar(2)
    assert op_equal(got, expected)


@settings(max_examples=40, deadline=None)
@given(ops_t, ops_t, ops_t)
def test_product_associative_and_jacobi(A, B, C):
    assert op_deviation(op_mul(op_mul(A, B), C), op_mul(A, op_mul(B, C))) < 1e-10
    J = (
        op_commutator(A, op_commutator(B, C))
        + op_commutator(B, op_commutator(C, A))
        + op_commutator(C, op_commutator(A, B))
    )
    assert J.scale() < 1e-10


@settings(max_examples=40, deadline=None)
@given(ops, ops)
def test_product_matches_composition_on_polynomials(A, B):
    """Normal-ordered product agrees with composing the differential operators.

    Finite differences are exact (up to rounding) on the low-degree
    polynomials used here, so this is an independent check of the ordering rule.
    """
    def f(x, y, t):
        return 1 + 0.5 * x - 0.3 * y + 0.2 * x * y + 0.1 * x**2

    def Bf(x, y, t):
        return apply_numeric(B, f, x, y, t, h=0.5)

    x = np.array([0.3, -1.1, 0.8])
    y = np.array([0.5, 0.2, -0.9])
    t = 0.4
    direct = apply_numeric(op_mul(A, B), f, x, y, t, h=0.5)
    composed = apply_numeric(A, Bf, x, y, t, h=0.5)
    np.testing.assert_allclose(direct, composed, atol=1e-9)


def test_json_roundtrip():
    A = WeylOp.monomial(ExpPoly.cos(1.0, 0.1), xa=1, dxc=2) + WeylOp.dt() * 1j
    assert op_equal(WeylOp.from_json(A.to_json()), A, tol=0)


def test_params_validation_and_regimes():
    p = PhysParams(gamma=0.2, omega=1.0)
    assert abs(p.Omega - np.sqrt(0.99)) < 1e-15
    with pytest.raises(ValueError):
        PhysParams(m=0.0)
    with pytest.raises(ValueError):
        PhysParams(gamma=-1.0)
    over = PhysParams(gamma=3.0, omega=1.0)
    assert not over.underdamped
    with pytest.raises(OverdampedUnsupported):
        over.Omega
    assert abs(PhysParams(gamma=0.4, omega=0.0).Omega_complex - 0.2j) < 1e-15


def test_apply_numeric_rejects_time_derivative():
    with pytest.raises(ValueError):
        apply_numeric(WeylOp.dt(), lambda x, y, t: x, 0.0, 0.0, 0.0)
