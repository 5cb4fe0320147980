import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from warpsimons import jets
from warpsimons.errors import JetShapeError, SingularityError

coef = st.floats(-2, 2, allow_nan=False, width=64)


def random_jet(draw_fn, nv, deg):
    size = jets.layout(nv, deg).size
    return jets.Jet(np.array(draw_fn(size)), nv, deg)


@st.composite
def jet_triples(draw):
    nv = draw(st.integers(1, 3))
    deg = draw(st.integers(0, 4))
    size = jets.layout(nv, deg).size
    make = lambda: jets.Jet(np.array(draw(st.lists(coef, min_size=size, max_size=size))), nv, deg)
    return make(), make(), make()


def close(a, b, tol=1e-10):
    return np.allclose(a.coeffs, b.coeffs, atol=tol, rtol=tol)


class TestRingAxioms:
    @given(jet_triples())
    def test_commutative(self, abc):
        a, b, _ = abc
        assert close(a * b, b * a)
        assert close(a + b, b + a)

    @given(jet_triples())
    def test_associative(self, abc):
        a, b, c = abc
        assert close((a * b) * c, a * (b * c), 1e-9)

    @given(jet_triples())
    def test_distributive(self, abc):
        a, b, c = abc
        assert close(a * (b + c), a * b + a * c, 1e-9)

    @given(jet_triples())
    def test_reciprocal(self, abc):
        a, _, _ = abc
        a = a + (3.0 - a.value)
        one = jets.Jet.constant(1.0, a.num_vars, a.degree)
        assert close(a * a.reciprocal(), one, 1e-9)


def test_product_bit_reproducible():
    rng = np.random.default_rng(3)
    a = jets.Jet(rng.normal(size=jets.layout(3, 4).size), 3, 4)
    b = jets.Jet(rng.normal(size=jets.layout(3, 4).size), 3, 4)
    first = (a * b).coeffs.tobytes()
    assert all((a * b).coeffs.tobytes() == first for _ in range(5))


def test_truncation_commutes_with_product():
    rng = np.random.default_rng(4)
    a = jets.Jet(rng.normal(size=jets.layout(2, 4).size), 2, 4)
    b = jets.Jet(rng.normal(size=jets.layout(2, 4).size), 2, 4)
    for d in range(5):
        assert (a * b).truncate(d).coeffs.tobytes() == (a.truncate(d) * b.truncate(d)).coeffs.tobytes()


@pytest.mark.parametrize(
    "fn, ref, x0",
    [
        (jets.sin, lambda x: math.sin(x), 0.3),
        (jets.cos, lambda x: math.cos(x), 0.3),
        (jets.exp, lambda x: math.exp(x), -0.7),
        (jets.log, lambda x: math.log(x), 1.7),
        (jets.sinh, lambda x: math.sinh(x), 0.4),
        (jets.cosh, lambda x: math.cosh(x), 0.4),
        (jets.tanh, lambda x: math.tanh(x), 0.4),
        (jets.sqrt, lambda x: math.sqrt(x), 2.3),
        (jets.arctan, lambda x: math.atan(x), 0.6),
        (jets.arcsin, lambda x: math.asin(x), 0.6),
    ],
)
def test_univariate_derivatives_match_finite_differences(fn, ref, x0):
    j = fn(jets.seed(0, x0, 1, 4))
    h = 1e-3
    assert j.value == pytest.approx(ref(x0), abs=1e-14)
    d1 = (ref(x0 + h) - ref(x0 - h)) / (2 * h)
    d2 = (ref(x0 + h) - 2 * ref(x0) + ref(x0 - h)) / h**2
    assert j.derivative((1,)) == pytest.approx(d1, rel=1e-5)
    assert j.derivative((2,)) == pytest.approx(d2, rel=1e-4, abs=1e-6)


@given(st.floats(0.2, 3.0), st.sampled_from([-2, -1, 0.5, 1 / 3, 2 / 3, 1.5, 3]))
def test_pow_const(x, p):
    from fractions import Fraction

    j = jets.pow_const(jets.seed(0, x, 1, 3), Fraction(p).limit_denominator(3))
    q = float(Fraction(p).limit_denominator(3))
    assert j.value == pytest.approx(x**q, rel=1e-12)
    assert j.derivative((1,)) == pytest.approx(q * x ** (q - 1), rel=1e-10)
    assert j.derivative((3,)) == pytest.approx(q * (q - 1) * (q - 2) * x ** (q - 3), rel=1e-9, abs=1e-12)


def test_chain_rule_through_compose():
    # outer(y) = sin(y0) * y1 expanded at p, inner = polynomials in two parameters
    p = np.array([0.3, 1.2])
    y0 = jets.seed(0, p[0], 2, 4)
    y1 = jets.seed(1, p[1], 2, 4)
    outer = jets.sin(y0) * y1
    u = jets.seed(0, 0.1, 2, 4)
    v = jets.seed(1, -0.2, 2, 4)
    inner0 = 0.3 + (u - 0.1) * (v + 0.2) + 0.5 * (u - 0.1)
    inner1 = 1.2 + (v + 0.2) ** 2
    composed = jets.compose(outer, [inner0 - 0.3, inner1 - 1.2])
    direct = jets.sin(inner0) * inner1
    assert np.allclose(composed.coeffs, direct.coeffs, atol=1e-13)


def test_inverse_matrix():
    rng = np.random.default_rng(0)
    m = jets.Jet(rng.normal(size=(3, 3, jets.layout(2, 3).size)), 2, 3)
    m.coeffs[..., 0] += 4 * np.eye(3)
    prod = jets.matmul(m, jets.inv(m))
    assert np.allclose(prod.coeffs[..., 0], np.eye(3))
    assert np.allclose(prod.coeffs[..., 1:], 0.0, atol=1e-12)


def test_partial_and_gradient():
    x = jets.seed(0, 1.0, 2, 3)
    y = jets.seed(1, 2.0, 2, 3)
    f = x * x * y
    assert np.allclose(f.gradient(), [4.0, 1.0])
    assert np.allclose(f.hessian(), [[4.0, 2.0], [2.0, 0.0]])
    assert f.partial(0).partial(1).value == pytest.approx(2.0)


def test_errors():
    with pytest.raises(JetShapeError):
        jets.seed(0, 0.0, 7, 2)
    with pytest.raises(JetShapeError):
        jets.seed(0, 0.0, 2, 2) + jets.seed(0, 0.0, 2, 3)
    with pytest.raises(SingularityError):
        jets.Jet.constant(0.0, 1, 2).reciprocal()
    with pytest.raises(SingularityError):
        jets.log(jets.seed(0, -1.0, 1, 2))
