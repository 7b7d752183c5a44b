"""Evaluation of exp(-q.q + q.f) term by term from the moments of the measure.

Expanding both exponentials and integrating each product of fields against
the measure moments gives the double series

    sum_{N,R} (-1)^N/N! * 1/(2R)! * (2 pi Lambda)^(Omega/2) * Lambda^(N+R)
              * T(N, R) * rho(2R) * F^R,         F = f.f

where T(N, R) is the loop-count polynomial from the contraction calculus.
The N-sum is a Pochhammer series and the R-sum an exponential series.
"""
from __future__ import annotations

import math
from fractions import Fraction

from ..cardinal import OMEGA, CardinalScalar, LambdaRational, OmegaLinear, sum_pochhammer_series
from ..errors import UnsupportedKernel
from ..exact import QI
from ..wick import count_pairings, pochhammer_poly, s_polynomial, t_reduction
from .canonical import QuadraticForm
from .closedform import ClosedForm
from .symbolic import Exponent, KExpr

CHECK_WINDOW = 6


def _require_identity_kernel(qf: QuadraticForm) -> None:
    if qf.flavor != "real" or qf.unused or qf.remaining:
        raise UnsupportedKernel("the series path handles a single real variable only")
    if qf.K != KExpr.identity():
        raise UnsupportedKernel(f"the series path needs K = 1, got K = {qf.K.render()}")


def check_series_coefficients(window: int = CHECK_WINDOW) -> None:
    """Confirm the contraction polynomials have the Pochhammer shape used below."""
    for n in range(window):
        if s_polynomial(n) != pochhammer_poly((Fraction(1, 2), 0), n) * (2 ** n):
            raise AssertionError(f"S_{2 * n} is not 2^N (Omega/2)_N")
        for r in range(window):
            if t_reduction(n, r) != pochhammer_poly((Fraction(1, 2), r), n) * (2 ** n):
                raise AssertionError(f"T({n},{r}) is not 2^N (Omega/2+R)_N")
    for r in range(window):
        # rho(2R)/(2R)! = 1/(2^R R!)
        if Fraction(count_pairings(2 * r) if r else 1, math.factorial(2 * r)) != Fraction(1, 2 ** r * math.factorial(r)):
            raise AssertionError("pairing count mismatch")


def inner_sum(r: int) -> CardinalScalar:
    """sum_N (-2 Lambda)^N (Omega/2 + R)_N / N!  =  (1 + 2 Lambda)^(-Omega/2 - R)."""
    return sum_pochhammer_series(OmegaLinear(Fraction(1, 2), r), LambdaRational.lam() * -2)


def series_closed_form(qf: QuadraticForm) -> ClosedForm:
    """Closed form before the Lambda -> infinity limit."""
    _require_identity_kernel(qf)
    check_series_coefficients()
    half = OMEGA * Fraction(1, 2)
    measure = CardinalScalar.power_of(2, half) * CardinalScalar.pi(half) * CardinalScalar.lam(half)
    # ratio of successive R terms: (Lambda/2) * (1+2 Lambda)^-1 / R -> exponential series
    ratio = (inner_sum(1) / inner_sum(0)).as_rational()
    x = LambdaRational.lam() * ratio * QI(Fraction(1, 2))
    for r in range(1, CHECK_WINDOW):
        if (inner_sum(r) / inner_sum(r - 1)).as_rational() != ratio:
            raise AssertionError("R-sum is not geometric in (1+2 Lambda)^-1")
    prefactor = measure * inner_sum(0)
    expo = Exponent.of(qf.constant) + Exponent.quad(x, qf.f, KExpr.identity(), qf.f)
    if qf.circle:
        prefactor = prefactor * CardinalScalar.power_of(2, -OMEGA) * CardinalScalar.pi(-OMEGA)
    return ClosedForm(prefactor, (), expo, ())


def evaluate_via_series(qf: QuadraticForm) -> ClosedForm:
    """Series evaluation followed by the Lambda -> infinity limit."""
    cf, _ = series_closed_form(qf).limit()
    return cf


def partial_sum(omega: int, lam: float, F: float, n_terms: int = 40, r_terms: int = 40) -> float:
    """Numeric truncation of the double series (before any summation identity)."""
    total = 0.0
    for r in range(r_terms):
        rho = count_pairings(2 * r) if r else 1
        outer = lam ** r * rho * F ** r / math.factorial(2 * r)
        t = 1.0  # T(n, r) built up one factor at a time; see check_series_coefficients
        for n in range(n_terms):
            total += outer * (-1) ** n / math.factorial(n) * lam ** n * t
            t *= omega + 2 * r + 2 * n
    return (2 * math.pi * lam) ** (omega / 2) * total


def closed_pre_limit_value(omega: int, lam: float, F: float) -> float:
    """(2 pi Lambda)^(Omega/2) (1+2 Lambda)^(-Omega/2) exp(Lambda F / (2 (1+2 Lambda)))"""
    return (2 * math.pi * lam) ** (omega / 2) * (1 + 2 * lam) ** (-omega / 2) * math.exp(lam * F / (2 * (1 + 2 * lam)))
