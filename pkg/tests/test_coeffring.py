import cmath

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ckbateman.coeffring import ExpPoly, cf_diff, cf_eval, cf_eval_real

small = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
term = st.tuples(
    st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False),
    st.integers(min_value=0, max_value=2),
    st.sampled_from([0.0, 0.1, -0.1, 0.5j, -0.5j, 0.1 + 0.7j, -0.3 - 0.7j]),
)
polys = st.lists(term, max_size=4).map(ExpPoly)
times = st.floats(min_value=-1.5, max_value=1.5, allow_nan=False)


def _close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


@settings(max_examples=60, deadline=None)
@given(polys, polys, times)
def test_evaluation_is_ring_homomorphism(f, g, t):
    """Sum and product commute with pointwise evaluation."""
    assert _close((f + g)(t), f(t) + g(t))
    assert _close((f * g)(t), f(t) * g(t))


@settings(max_examples=60, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms_in_canonical_form(f, g, h):
    """Commutativity, associativity and distributivity hold exactly after normalization."""
    assert (f + g).close_to(g + f)
    assert (f * g).close_to(g * f)
    assert ((f * g) * h).close_to(f * (g * h), tol=1e-10)
    assert (f * (g + h)).close_to(f * g + f * h, tol=1e-10)
    assert (f - f).is_zero()


@settings(max_examples=60, deadline=None)
@given(polys, polys, times)
def test_derivative_leibniz_and_numeric(f, g, t):
    """``d/dt`` obeys Leibniz and matches a centered difference."""
    assert (cf_diff(f * g)).close_to(cf_diff(f) * g + f * cf_diff(g), tol=1e-10)
    h = 1e-5
    fd = (f(t + h) - f(t - h)) / (2 * h)
    assert abs(cf_diff(f)(t) - fd) <= 1e-5 * max(1.0, f.max_amplitude() * 10)


def test_trig_identity_cancels_exactly():
    """``cos^2 + sin^2`` collapses to the constant 1 in canonical form."""
    w = 1.3
    f = ExpPoly.cos(w) * ExpPoly.cos(w) + ExpPoly.sin(w) * ExpPoly.sin(w)
    assert f.is_constant()
    assert abs(f.constant_value() - 1) < 1e-15


def test_constructors_match_closed_forms():
    """Named constructors evaluate to the functions they describe."""
    t = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(ExpPoly.exp(0.3, 2.0)(t), 2 * np.exp(0.3 * t), rtol=1e-14)
    np.testing.assert_allclose(ExpPoly.cos(1.1, -0.1)(t), np.exp(-0.1 * t) * np.cos(1.1 * t), atol=1e-14)
    np.testing.assert_allclose(ExpPoly.sin(1.1, -0.1)(t), np.exp(-0.1 * t) * np.sin(1.1 * t), atol=1e-14)
    np.testing.assert_allclose(ExpPoly.tpow(2, 3.0)(t), 3 * t**2, atol=1e-14)


def test_complex_frequency_sin_is_sinh():
    """``sin(i a t) = i sinh(a t)``: complex frequencies are supported."""
    f = ExpPoly.sin(0.5j)
    for t in (0.3, 1.7):
        assert abs(f(t) - 1j * np.sinh(0.5 * t)) < 1e-14


def test_second_derivative_of_damped_cosine():
    """``(e^{-g t/2} cos W t)''`` against the analytic expression."""
    g, W = 0.2, 0.99
    f = ExpPoly.cos(W, -g / 2)
    t = 0.77
    expected = np.exp(-g * t / 2) * ((g**2 / 4 - W**2) * np.cos(W * t) + g * W * np.sin(W * t))
    assert abs(f.diff(2)(t) - expected) < 1e-13


def test_json_roundtrip_and_real_evaluation():
    f = ExpPoly.cos(0.7, 0.1, 2.0) + ExpPoly.tpow(1, 1j)
    g = ExpPoly.from_json(f.to_json())
    assert g.close_to(f, tol=0)
    re, im = cf_eval_real(f, 0.4)
    val = cf_eval(f, 0.4)
    assert abs(complex(re, im) - val) < 1e-15
    assert abs(val - (2 * cmath.exp(0.04) * np.cos(0.28) + 0.4j)) < 1e-14


def test_tiny_terms_are_dropped():
    """Coefficients below the zero threshold do not survive normalization."""
    f = ExpPoly([(1e-16, 0, 0.0), (1.0, 0, 0.5)])
    assert len(f.terms) == 1
    assert (ExpPoly.exp(0.5) - ExpPoly.exp(0.5 + 1e-14)).is_zero()
