import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from funcint.cardinal import (
    LAMBDA,
    OMEGA,
    PI,
    CardinalScalar,
    LambdaRational,
    OmegaLinear,
    cs_mul,
    instantiate,
    limit_lambda,
    parse_scalar,
    sum_pochhammer_series,
)
from funcint.errors import ResidualLambda
from funcint.exact import QI

HALF_OMEGA = OMEGA * Fraction(1, 2)
LAM = LambdaRational.lam()


def two_pi_lambda():
    return CardinalScalar.power_of(2, HALF_OMEGA) * CardinalScalar.pi(HALF_OMEGA) * CardinalScalar.lam(HALF_OMEGA)


def test_omega_linear_arithmetic():
    x = OmegaLinear(Fraction(1, 2), 3)
    assert x + (-x) == OmegaLinear()
    assert (x * 2).render() == "Omega+6"
    assert HALF_OMEGA.render() == "Omega/2"


def test_lambda_rational_reduced_and_monic():
    r = LambdaRational((LAM * 2 + 4).num, (LAM * 4 + 8).num)
    assert r == LambdaRational.of(Fraction(1, 2))
    s = LAM / (LAM * 2 + 1)
    assert s.den.lead == 1
    assert s.limit() == QI(Fraction(1, 2))


def test_cs_mul_keeps_lambda_power_separate():
    product = cs_mul(two_pi_lambda(), CardinalScalar.lam(1))
    assert product.render() == "(2*pi*Lambda)^(Omega/2) * Lambda"


def test_cs_mul_identity_and_cancellation():
    x = two_pi_lambda()
    assert cs_mul(x, CardinalScalar(1)) == x
    base = LambdaRational.of(1) + LAM * 2
    up = CardinalScalar.power_of(base, HALF_OMEGA)
    down = CardinalScalar.power_of(base, -HALF_OMEGA)
    assert cs_mul(up, down) == CardinalScalar(1)


def test_limit_measure_normalization():
    e = two_pi_lambda() * sum_pochhammer_series(HALF_OMEGA, LAM * -2)
    assert e.render() == "(2*pi*Lambda)^(Omega/2) * (1+2*Lambda)^(-Omega/2)"
    res = limit_lambda(e)
    assert res.value == CardinalScalar.pi(HALF_OMEGA)
    assert res.residual_tags == {"Omega"}
    assert not res.finite


def test_limit_constant_is_finite():
    res = limit_lambda(CardinalScalar(7))
    assert res.value == CardinalScalar(7)
    assert res.residual_tags == frozenset()
    assert res.finite


def test_limit_divergent_keeps_both_tags():
    res = limit_lambda(cs_mul(two_pi_lambda(), CardinalScalar.lam(1)))
    assert not res.finite
    assert res.residual_tags == {"Omega", "Lambda"}


def test_pochhammer_examples():
    assert sum_pochhammer_series(HALF_OMEGA, LAM * -2).render() == "(1+2*Lambda)^(-Omega/2)"
    assert sum_pochhammer_series(HALF_OMEGA, 0) == CardinalScalar(1)
    closed = sum_pochhammer_series(3, Fraction(1, 4))
    assert closed == CardinalScalar(Fraction(64, 27))
    total, term = 0.0, 1.0
    for n in range(61):
        total += term
        term *= (3 + n) * 0.25 / (n + 1)
    assert abs(total - 64 / 27) < 1e-12


@pytest.mark.parametrize("a", [0.5, 1.25, 3.0, 4.5])
@pytest.mark.parametrize("x", [Fraction(-1, 3), Fraction(1, 5), Fraction(1, 2)])
def test_pochhammer_against_truncated_series(a, x):
    closed = complex(instantiate(sum_pochhammer_series(Fraction(a), x), 1)).real
    total, term = 0.0, 1.0
    for n in range(80):
        total += term
        term *= (a + n) * float(x) / (n + 1)
    assert abs(total - closed) <= 1e-10 * abs(closed)


def test_instantiate_examples():
    p = CardinalScalar.pi(HALF_OMEGA)
    assert instantiate(p, 2) == pytest.approx(math.pi, rel=1e-15)
    assert instantiate(p, 1) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    q = CardinalScalar.pi(OMEGA) * CardinalScalar.power_of(2, -HALF_OMEGA)
    assert instantiate(q, 4) == pytest.approx(math.pi**4 / 4, rel=1e-15)
    with pytest.raises(ResidualLambda):
        instantiate(CardinalScalar.lam(1), 2)


@pytest.mark.parametrize("D", range(1, 17))
def test_instantiate_measure_limit(D):
    e = two_pi_lambda() * sum_pochhammer_series(HALF_OMEGA, LAM * -2)
    assert instantiate(limit_lambda(e), D) == pytest.approx(math.pi ** (D / 2), rel=1e-14)


def test_render_parse_round_trip():
    for text in [
        "pi^(Omega/2) * (1+2*Lambda)^(-Omega/2)",
        "(2*pi*Lambda)^(Omega/2) * Lambda^2",
        "pi^(Omega)",
        "3/4",
    ]:
        assert parse_scalar(text).render() == text


def test_distinguished_bases_render():
    assert CardinalScalar.power_of(PI, OMEGA).render() == "pi^(Omega)"
    assert CardinalScalar.power_of(LAMBDA, 2).render() == "Lambda^2"


exponents = st.builds(
    OmegaLinear,
    st.fractions(min_value=-2, max_value=2, max_denominator=4),
    st.fractions(min_value=-2, max_value=2, max_denominator=4),
)
bases = st.sampled_from([2, 3, Fraction(1, 2), PI, LAMBDA, LambdaRational.of(1) + LAM * 2])
scalars = st.builds(
    lambda c, items: CardinalScalar(c, items),
    st.sampled_from([1, 2, Fraction(-3, 5), QI(1, 1)]),
    st.lists(st.tuples(bases, exponents), max_size=3).map(tuple),
)


@settings(max_examples=80, deadline=None)
@given(scalars, scalars, scalars)
def test_cs_mul_associative_commutative(a, b, c):
    assert cs_mul(a, b) == cs_mul(b, a)
    assert cs_mul(cs_mul(a, b), c) == cs_mul(a, cs_mul(b, c))


finite_scalars = st.builds(
    lambda c, items: CardinalScalar(c, items),
    st.sampled_from([1, 2, Fraction(-3, 5)]),
    st.lists(st.tuples(st.sampled_from([2, 3, PI, LambdaRational.of(1) / (LAM + 1) * LAM]), exponents), max_size=3).map(tuple),
)


@settings(max_examples=60, deadline=None)
@given(finite_scalars, finite_scalars)
def test_limit_is_multiplicative(a, b):
    la, lb = limit_lambda(a), limit_lambda(b)
    assert "Lambda" not in la.residual_tags and "Lambda" not in lb.residual_tags
    assert limit_lambda(cs_mul(a, b)).value == cs_mul(la.value, lb.value)
