"""Built-in Gaussian integrals A..J with their expected closed-form text."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CatalogCase:
    name: str
    dsl: str
    expected: str
    description: str


_SCHUR = "K - L . inv(K') . L'"

CATALOG = {
    c.name: c
    for c in (
        CatalogCase("A", "int exp(-q.q) D[q]", "pi^(Omega/2)", "basic real Gaussian"),
        CatalogCase("B", "int exp(-q.q + q.f) D[q]", "pi^(Omega/2) * exp(1/4 * f . f)", "real, shifted"),
        CatalogCase("C", "int exp(-q.K.q) D[q]", "pi^(Omega/2) * det(K)^(-1/2)", "real, kernel"),
        CatalogCase(
            "D",
            "int exp(-q.K.q + q.f) D[q]",
            "pi^(Omega/2) * det(K)^(-1/2) * exp(1/4 * f . inv(K) . f)",
            "real, kernel and shift",
        ),
        CatalogCase("E", "int exp(-2*a'.a) D[a]", "pi^(Omega)", "basic complex Gaussian"),
        CatalogCase(
            "F",
            "int exp(-2*a'.a - w1'.a - a'.w2) D[a]",
            "pi^(Omega) * exp(1/2 * w1' . w2)",
            "complex, independent shifts",
        ),
        CatalogCase("G", "int exp(-2*a'.K.a) D[a]", "pi^(Omega) * det(K)^(-1)", "complex, self-adjoint kernel"),
        CatalogCase(
            "H",
            "int exp(-2*a'.K.a - w1'.a - a'.w2) D[a]",
            "pi^(Omega) * det(K)^(-1) * exp(1/2 * w1' . inv(K) . w2)",
            "complex, kernel and shifts",
        ),
        CatalogCase(
            "I",
            "int exp(-2*a'.K.a - a'.L.a' - a.L'.a) D[a]",
            f"pi^(Omega) * det(K)^(-1/2) * det({_SCHUR})^(-1/2)",
            "complex, anisotropic kernels",
        ),
        CatalogCase(
            "J",
            "int exp(-2*a'.K.a - a'.L.a' - a.L'.a - w1'.a - a'.w2) D[a]",
            f"pi^(Omega) * det(K)^(-1/2) * det({_SCHUR})^(-1/2) * exp(1/4 * w1' . inv(K) . w2"
            f" + 1/4 * (w1' - w2 . inv(K') . L') . inv({_SCHUR}) . (w2 - L . inv(K') . w1'))",
            "complex, anisotropic kernels and shifts",
        ),
    )
}


def get_case(name: str) -> CatalogCase:
    try:
        return CATALOG[name.upper()]
    except KeyError:
        raise KeyError(f"unknown catalog case {name!r}; choose one of {', '.join(CATALOG)}") from None
