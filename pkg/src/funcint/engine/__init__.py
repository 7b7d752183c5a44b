"""Integrand DSL, reduction to Gaussian form and closed-form evaluation."""
from .canonical import QuadraticForm, canonicalize, infer_kinds, reduce_polynomial, source_polynomial
from .catalog import CATALOG, CatalogCase, get_case
from .closedform import Assumption, ClosedForm, evaluate, instantiate_closed_form, schur_complement
from .dsl import IntegrandAST, parse
from .series import evaluate_via_series, series_closed_form
from .squaretrick import SquareTrickTrace, square_trick_expand

__all__ = [
    "Assumption", "CATALOG", "CatalogCase", "ClosedForm", "IntegrandAST", "QuadraticForm",
    "SquareTrickTrace", "canonicalize", "evaluate", "evaluate_via_series", "get_case", "infer_kinds",
    "instantiate_closed_form", "parse", "reduce_polynomial", "schur_complement", "series_closed_form",
    "source_polynomial", "square_trick_expand",
]
