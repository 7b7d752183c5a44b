import json
import math

import numpy as np
import pytest

from funcint.engine import CATALOG, canonicalize
from funcint.errors import CapExceeded, EnvelopeFailure, NotPositiveDefinite
from funcint.kernelalg import DiscreteKernel, FieldVector, QuadratureGrid
from funcint.oracle import (
    GENERATOR_ID,
    VerificationCase,
    analytic_finite_integral,
    mc_integral,
    mc_probability_moment,
    random_bindings,
    run_case,
)
from funcint.wick import probability_moment


def test_analytic_examples():
    g1 = QuadratureGrid.uniform(1)
    qf = canonicalize("int exp(-q.K.q) D[q]")
    assert analytic_finite_integral(qf, {"K": DiscreteKernel(g1, [[2.0]])}, 1) == pytest.approx(math.sqrt(math.pi / 2))
    g2 = QuadratureGrid.uniform(2)
    qf = canonicalize("int exp(-q.q + q.f) D[q]")
    assert analytic_finite_integral(qf, {"f": FieldVector(g2, [2, 0])}, 2) == pytest.approx(math.pi * math.e)


def test_analytic_rejects_indefinite():
    g = QuadratureGrid.uniform(2)
    qf = canonicalize("int exp(-q.K.q) D[q]")
    with pytest.raises(NotPositiveDefinite):
        analytic_finite_integral(qf, {"K": DiscreteKernel(g, np.diag([1.0, -1.0]))}, 2)


def test_analytic_matches_engine_d8():
    report = run_case(VerificationCase.builtin("D", dims=(8,), seed=3))
    assert report.passed
    assert report.rows[0]["rel_err"] < 1e-10


@pytest.mark.parametrize("seed", range(10))
def test_shift_invariance_numeric(seed):
    qf = canonicalize("int exp(-q.q + q.f - 1/4*f.f) D[q]")
    for D in (1, 3, 6):
        rng = np.random.default_rng([seed, D])
        f = FieldVector(QuadratureGrid(rng.uniform(0.5, 2, D)), rng.standard_normal(D))
        value = analytic_finite_integral(qf, {"f": f}, D)
        assert abs(value - math.pi ** (D / 2)) <= 1e-12 * math.pi ** (D / 2)


def test_circle_measure_factor():
    qf = canonicalize("int exp(-q.q) Dc[q]")
    assert analytic_finite_integral(qf, {}, 3) == pytest.approx(math.pi ** 1.5 / (2 * math.pi) ** 3)


def test_mc_case_a():
    qf = canonicalize(CATALOG["A"].dsl)
    est, err = mc_integral(qf, {}, 2, 100_000, seed=1)
    # the sampler is the integrand itself: zero variance
    assert err == 0.0
    assert est == pytest.approx(math.pi, rel=1e-14)


def test_mc_case_f():
    qf = canonicalize(CATALOG["F"].dsl)
    g = QuadratureGrid.uniform(1)
    w = FieldVector(g, [math.sqrt(2) * 0.5])
    est, err = mc_integral(qf, {"w1": w, "w2": w}, 1, 100_000, seed=4)
    exact = math.pi * math.exp(0.25)
    assert err > 0
    assert abs(est - exact) <= 4 * err


def test_mc_deterministic_and_chunked():
    qf = canonicalize(CATALOG["J"].dsl)
    b = random_bindings(qf, 3, seed=2)
    a = mc_integral(qf, b, 3, 25_000, seed=9)
    assert a == mc_integral(qf, b, 3, 25_000, seed=9)
    assert a != mc_integral(qf, b, 3, 25_000, seed=10)


def test_mc_envelope_failure():
    g = QuadratureGrid.uniform(2)
    qf = canonicalize("int exp(-q.K.q) D[q]")
    with pytest.raises(EnvelopeFailure):
        mc_integral(qf, {"K": DiscreteKernel(g, np.diag([1.0, -1.0]))}, 2, 1000, 0)


def unit_vector(D, seed):
    rng = np.random.default_rng(seed)
    g = QuadratureGrid(rng.uniform(0.5, 2, D))
    v = rng.standard_normal(D)
    return FieldVector(g, v / math.sqrt(np.sum(g.w * v * v)))


def test_probability_moment_examples():
    assert mc_probability_moment(0, unit_vector(4, 0), 4, 1000, 1) == (1.0, 0.0)
    est, err = mc_probability_moment(1, unit_vector(4, 0), 4, 100_000, 1)
    assert abs(est - 0.5) <= 4 * err
    est, err = mc_probability_moment(2, unit_vector(4, 0), 4, 100_000, 1)
    assert abs(est - 0.75) <= 4 * err
    with pytest.raises(CapExceeded):
        mc_probability_moment(5, unit_vector(4, 0), 4, 10, 1)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("D", [1, 3, 6])
def test_probability_moment_against_formula(n, D):
    f = unit_vector(D, 10 * n + D)
    f = FieldVector(f.grid, f.values * 1.3)
    est, err = mc_probability_moment(n, f, D, 100_000, seed=n + D)
    assert abs(est - probability_moment(n, 1.3)) <= 4 * err


def test_random_bindings_satisfy_assumptions():
    qf = canonicalize(CATALOG["J"].dsl)
    for D in (1, 2, 4, 8):
        b = random_bindings(qf, D, 5)
        assert b["K"].is_self_adjoint() and b["K"].is_positive_definite()
        assert b["L"].is_symmetric()
        assert not b["w1"].is_real()


def test_run_case_golden():
    report = run_case(VerificationCase.builtin("A", dims=(1, 2, 4)))
    assert report.passed
    assert all(r["rel_err"] < 1e-12 for r in report.rows)
    report = run_case(VerificationCase.builtin("J", dims=(1, 2, 3), tol=1e-8))
    assert report.passed


def test_run_case_reports_failures():
    g = QuadratureGrid.uniform(2)
    vc = VerificationCase("bad", "int exp(-q.K.q) D[q]", dims=(2,), bindings={"K": DiscreteKernel(g, np.diag([1.0, -1.0]))})
    report = run_case(vc)
    assert not report.passed
    assert "NotPositiveDefinite" in report.rows[0]["error"]
    report = run_case(VerificationCase("broken", "int exp(-q.q", dims=(1, 2)))
    assert report.closed_form is None and len(report.rows) == 2 and not report.passed


def test_report_json_deterministic():
    vc = VerificationCase.builtin("H", dims=(1, 2), mc_samples=20_000, seed=8)
    a, b = run_case(vc).to_json(), run_case(vc).to_json()
    assert a == b
    data = json.loads(a)
    assert data["config"]["generator_id"] == GENERATOR_ID
    assert data["rows"][0]["mc"] is not None
