import math
from fractions import Fraction

import numpy as np
import pytest

from funcint.cardinal import OMEGA, CardinalScalar
from funcint.engine import (
    CATALOG,
    ClosedForm,
    canonicalize,
    evaluate,
    evaluate_via_series,
    get_case,
    instantiate_closed_form,
    parse,
    series_closed_form,
    square_trick_expand,
)
from funcint.engine.series import closed_pre_limit_value, partial_sum
from funcint.engine.symbolic import KExpr, VecExpr, make_atom
from funcint.errors import (
    AssumptionUnsatisfied,
    DSLSyntaxError,
    MissingBinding,
    MixedFlavor,
    NotGaussian,
    UnknownToken,
    UnsupportedKernel,
)
from funcint.exact import QI
from funcint.kernelalg import DiscreteKernel, FieldVector, QuadratureGrid
from funcint.oracle import analytic_finite_integral, random_bindings


def cf_of(text, kinds=None):
    return evaluate(canonicalize(text, kinds))


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------
@pytest.mark.parametrize("case", sorted(CATALOG))
def test_catalog_dsl_round_trips(case):
    text = CATALOG[case].dsl
    assert parse(text).render() == text


def test_parse_marks_conjugates():
    ast = parse("int exp(-2*a'.K.a - w1'.a - a'.w2) D[a]")
    assert ast.is_complex("a")
    first = ast.terms[1].chain[0]
    assert first.name == "w1" and first.conj


def test_parse_errors_carry_position():
    with pytest.raises(DSLSyntaxError) as info:
        parse("int exp(-q.q")
    assert "unclosed parenthesis" in str(info.value)
    assert info.value.line == 1
    with pytest.raises(UnknownToken) as info:
        parse("int exp(-q.q)\n  D[q] $")
    assert (info.value.line, info.value.column) == (2, 8)


def test_parse_coefficients_and_measures():
    ast = parse("int exp(-1/2*q.q + 0.25*q.f + i*c) Dc[q]")
    assert ast.measures[0].circle
    assert ast.render() == "int exp(-1/2*q.q + 1/4*q.f + i*c) Dc[q]"


# ---------------------------------------------------------------------------
# canonical form
# ---------------------------------------------------------------------------
def test_canonical_identity():
    qf = canonicalize("int exp(-q.q) D[q]")
    assert qf.flavor == "real"
    assert qf.K == KExpr.identity()
    assert qf.f.is_zero() and qf.constant.is_zero()


def test_canonical_antisymmetric_residue():
    qf = canonicalize("int exp(-q.S.q - q.N.q) D[q]", {"N": "antisymmetric"})
    assert qf == canonicalize("int exp(-q.S.q) D[q]")
    qf = canonicalize("int exp(-q.A.q) D[q]", {"A": "general"})
    assert qf.K.render() == "1/2 * A + 1/2 * A^T"
    assert qf.residue.render() == "1/2 * A - 1/2 * A^T"


def test_canonical_complex_shifts():
    qf = canonicalize(CATALOG["H"].dsl)
    assert qf.flavor == "complex"
    assert qf.K.render() == "K"
    assert qf.L.is_zero()
    assert qf.w1c.render() == "w1'" and qf.w2.render() == "w2"


def test_canonical_normalizes_complex_coefficient():
    qf = canonicalize("int exp(-a'.a) D[a]")
    assert qf.K == KExpr.identity(QI(Fraction(1, 2)))


def test_not_gaussian():
    with pytest.raises(NotGaussian):
        canonicalize("int exp(-q.q.q) D[q]")
    with pytest.raises(NotGaussian):
        canonicalize("int exp(q.f) D[q]")


def test_mixed_flavor():
    with pytest.raises(MixedFlavor):
        canonicalize("int exp(-2*a'.a - a'.L.a') D[a]")


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------
@pytest.mark.parametrize("case", sorted(CATALOG))
def test_catalog_golden_text(case):
    c = get_case(case)
    assert cf_of(c.dsl).render() == c.expected


def test_catalog_assumptions():
    assert cf_of(CATALOG["D"].dsl).render_assumptions() == ["positive_definite(K)", "symmetric(K)"]
    assert cf_of(CATALOG["J"].dsl).render_assumptions() == [
        "positive_definite(K - L . inv(K') . L')",
        "positive_definite(K)",
        "self_adjoint(K)",
        "symmetric(L)",
    ]


def test_unknown_case():
    with pytest.raises(KeyError):
        get_case("Z")


def specialize(case, kernels=None, vectors=None):
    return cf_of(CATALOG[case].dsl).subs(kernels, vectors)


def test_specialization_lattice():
    zero_k, one_k, zero_v = KExpr(), KExpr.identity(), VecExpr()
    assert specialize("J", {"L": zero_k}) == cf_of(CATALOG["H"].dsl)
    assert specialize("H", vectors={"w1": zero_v, "w2": zero_v}) == cf_of(CATALOG["G"].dsl)
    assert specialize("G", {"K": one_k}) == cf_of(CATALOG["E"].dsl)
    assert specialize("D", vectors={"f": zero_v}) == cf_of(CATALOG["C"].dsl)
    assert specialize("D", {"K": one_k}) == cf_of(CATALOG["B"].dsl)
    assert specialize("B", vectors={"f": zero_v}) == cf_of(CATALOG["A"].dsl)
    assert specialize("I", {"L": zero_k}) == cf_of(CATALOG["G"].dsl)


def test_general_formula_reduces_to_isotropic():
    qf = canonicalize(CATALOG["H"].dsl)
    assert evaluate(qf, general=True) == evaluate(qf)


def test_constant_multiplies_through():
    cf = cf_of("int exp(-q.q + c) D[q]")
    assert cf.render() == "pi^(Omega/2) * exp(c)"


def test_shift_invariance_symbolic():
    assert cf_of("int exp(-q.q + q.f - 1/4*f.f) D[q]") == cf_of("int exp(-q.q) D[q]")


def test_measure_jacobian_symbolic():
    left = cf_of("int exp(-q.K.q) D[q]").times_det(make_atom("K", "symmetric"), "1/2")
    right = cf_of("int exp(-q.q) D[q]")
    assert left.value_key() == right.value_key()


def test_unused_variable_gives_measure_normalization():
    cf = cf_of("int exp(-q.q) D[q] D[p]")
    assert cf.render() == "pi^(Omega) * (2*Lambda)^(Omega/2)"
    assert cf.residual_tags() == ["Lambda", "Omega"]


def test_two_variables_sequential():
    cf = cf_of("int exp(-q.q - p.p + q.p) D[q] D[p]")
    # exp(-x.A.x) with A = [[1, -1/2], [-1/2, 1]] per mode: det A = 3/4
    value = instantiate_closed_form(cf, {}, omega_value=3)
    assert value == pytest.approx(math.pi ** 3 * (3 / 4) ** -1.5, rel=1e-12)


def test_circle_measure_divides_by_two_pi():
    cf = cf_of("int exp(-q.q) Dc[q]")
    assert instantiate_closed_form(cf, {}, omega_value=2) == pytest.approx(math.pi / (2 * math.pi) ** 2)


# ---------------------------------------------------------------------------
# series path
# ---------------------------------------------------------------------------
def test_series_pre_limit_forms():
    pre = series_closed_form(canonicalize(CATALOG["A"].dsl))
    assert pre.render() == "(2*pi*Lambda)^(Omega/2) * (1+2*Lambda)^(-Omega/2)"
    pre = series_closed_form(canonicalize(CATALOG["B"].dsl))
    assert pre.render() == (
        "(2*pi*Lambda)^(Omega/2) * (1+2*Lambda)^(-Omega/2) * exp((1/4*Lambda)/(1/2+Lambda) * f . f)"
    )


@pytest.mark.parametrize("case", ["A", "B"])
def test_series_equals_catalog(case):
    qf = canonicalize(CATALOG[case].dsl)
    assert evaluate_via_series(qf) == evaluate(qf)


def test_series_rejects_kernels():
    with pytest.raises(UnsupportedKernel):
        evaluate_via_series(canonicalize(CATALOG["C"].dsl))


@pytest.mark.parametrize("F", [0.0, 0.7, 2.0])
def test_series_truncation(F):
    lam = 0.1
    assert partial_sum(2, lam, F) == pytest.approx(closed_pre_limit_value(2, lam, F), rel=1e-8)


# ---------------------------------------------------------------------------
# square trick
# ---------------------------------------------------------------------------
def test_square_trick_degenerate():
    t = square_trick_expand(canonicalize("int exp(-2*a'.a) D[a]"))
    assert t.square.render() == "pi^(2*Omega)"
    assert t.result == cf_of("int exp(-2*a'.a) D[a]")


def test_square_trick_symbolic():
    qf = canonicalize(CATALOG["I"].dsl)
    t = square_trick_expand(qf)
    assert t.square.render() == "pi^(2*Omega) * det(K)^(-1) * det(K - L . inv(K') . L')^(-1)"
    assert abs(complex(t.jacobian)) == 1
    assert t.result == evaluate(qf)
    assert "rotate" in t.render()


def test_square_trick_numeric():
    qf = canonicalize(CATALOG["I"].dsl)
    b = random_bindings(qf, 2, seed=11)
    t = square_trick_expand(qf)
    via_trace = instantiate_closed_form(t.result, b, 2)
    direct = instantiate_closed_form(evaluate(qf), b, 2)
    assert abs(via_trace - direct) <= 1e-10 * abs(direct)
    # the squared form also matches the square of the finite integral
    assert abs(instantiate_closed_form(t.square, b, 2) - direct ** 2) <= 1e-10 * abs(direct) ** 2


# ---------------------------------------------------------------------------
# instantiation
# ---------------------------------------------------------------------------
def test_instantiate_examples():
    g = QuadratureGrid.uniform(1)
    v = instantiate_closed_form(cf_of(CATALOG["C"].dsl), {"K": DiscreteKernel(g, [[2.0]])}, 1)
    assert v == pytest.approx(math.sqrt(math.pi / 2), rel=1e-14)
    v = instantiate_closed_form(cf_of(CATALOG["E"].dsl), {}, 1)
    assert v == pytest.approx(math.pi, rel=1e-15)


def test_instantiate_against_oracle_d5():
    qf = canonicalize(CATALOG["D"].dsl)
    for seed in range(5):
        b = random_bindings(qf, 5, seed)
        engine = instantiate_closed_form(evaluate(qf), b, 5)
        oracle = analytic_finite_integral(qf, b, 5)
        assert abs(engine - oracle) <= 1e-10 * abs(oracle)


def test_instantiate_errors():
    cf = cf_of(CATALOG["D"].dsl)
    g = QuadratureGrid.uniform(2)
    with pytest.raises(MissingBinding):
        instantiate_closed_form(cf, {"K": DiscreteKernel(g, np.eye(2))}, 2)
    bad = {"K": DiscreteKernel(g, np.diag([1.0, -1.0])), "f": FieldVector(g, [1, 0])}
    with pytest.raises(AssumptionUnsatisfied) as info:
        instantiate_closed_form(cf, bad, 2)
    assert "positive_definite(K)" in str(info.value)


def test_closed_form_is_immutable_and_hashable():
    cf = cf_of(CATALOG["A"].dsl)
    with pytest.raises(AttributeError):
        cf.prefactor = None
    assert {cf: 1}[cf_of(CATALOG["A"].dsl)] == 1
    assert cf.prefactor == CardinalScalar.pi(OMEGA * Fraction(1, 2))
    assert isinstance(cf.power(2), ClosedForm)
