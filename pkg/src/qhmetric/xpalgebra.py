"""Exact polynomial algebra for the canonical pair (x, p) with [x, p] = i.

Polynomials are stored normal-ordered, every power of x to the left of
every power of p, as a sparse map (x_power, p_power) -> complex
coefficient.  Products are re-ordered with the closed-form swap

    p^m x^n = sum_k (-i)^k k! C(m, k) C(n, k) x^(n-k) p^(m-k),

so commutators and adjoints of operator polynomials are exact up to float
coefficient arithmetic.  This is the independent oracle used to settle
whether the truncated-oscillator checks reflect operator identities or
truncation noise.
"""

from __future__ import annotations

from math import comb, factorial

import numpy as np

_DROP = 1e-300  # coefficients are kept exactly; only true zeros are dropped


def _swap_monomial(m: int, n: int) -> dict[tuple[int, int], complex]:
    """Normal ordering of p^m x^n as {(x_power, p_power): coeff}."""
    out: dict[tuple[int, int], complex] = {}
    for k in range(min(m, n) + 1):
        coeff = (-1j) ** k * factorial(k) * comb(m, k) * comb(n, k)
        out[(n - k, m - k)] = out.get((n - k, m - k), 0.0) + coeff
    return out


class XPPolynomial:
    """A normal-ordered polynomial in the canonical operators x and p."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[tuple[int, int], complex] | None = None):
        self.terms = {}
        if terms:
            for key, coeff in terms.items():
                c = complex(coeff)
                if abs(c) > _DROP:
                    self.terms[(int(key[0]), int(key[1]))] = c

    # -- constructors --------------------------------------------------
    @classmethod
    def x(cls, power: int = 1) -> "XPPolynomial":
        return cls({(power, 0): 1.0})

    @classmethod
    def p(cls, power: int = 1) -> "XPPolynomial":
        return cls({(0, power): 1.0})

    @classmethod
    def one(cls, coeff: complex = 1.0) -> "XPPolynomial":
        return cls({(0, 0): coeff})

    # -- ring operations ------------------------------------------------
    def __add__(self, other: "XPPolynomial") -> "XPPolynomial":
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            out[key] = out.get(key, 0.0) + coeff
        return XPPolynomial(out)

    def __sub__(self, other: "XPPolynomial") -> "XPPolynomial":
        return self + (-other)

    def __neg__(self) -> "XPPolynomial":
        return XPPolynomial({k: -c for k, c in self.terms.items()})

    def scaled(self, factor: complex) -> "XPPolynomial":
        return XPPolynomial({k: factor * c for k, c in self.terms.items()})

    def __rmul__(self, factor) -> "XPPolynomial":
        if isinstance(factor, XPPolynomial):
            return factor * self
        return self.scaled(factor)

    def __mul__(self, other) -> "XPPolynomial":
        if not isinstance(other, XPPolynomial):
            return self.scaled(other)
        out: dict[tuple[int, int], complex] = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                # x^a1 p^b1 x^a2 p^b2: reorder the middle p^b1 x^a2 block.
                for (xs, ps), cs in _swap_monomial(b1, a2).items():
                    key = (a1 + xs, ps + b2)
                    out[key] = out.get(key, 0.0) + c1 * c2 * cs
        return XPPolynomial(out)

    # -- involutions and brackets ----------------------------------------
    def adjoint(self) -> "XPPolynomial":
        """Hermitian adjoint: (c x^a p^b)^dagger = conj(c) p^b x^a, re-ordered."""
        out = XPPolynomial()
        for (a, b), c in self.terms.items():
            out = out + XPPolynomial(
                {(xs, ps): np.conj(c) * cs for (xs, ps), cs in _swap_monomial(b, a).items()}
            )
        return out

    def commutator(self, other: "XPPolynomial") -> "XPPolynomial":
        return self * other - other * self

    # -- queries ---------------------------------------------------------
    def cleaned(self, tol: float = 1e-12) -> "XPPolynomial":
        scale = max((abs(c) for c in self.terms.values()), default=0.0)
        if scale == 0.0:
            return XPPolynomial()
        return XPPolynomial({k: c for k, c in self.terms.items() if abs(c) > tol * scale})

    def is_zero(self, tol: float = 1e-12) -> bool:
        return all(abs(c) <= tol for c in self.terms.values())

    def max_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def leading_term(self) -> tuple[tuple[int, int], complex] | None:
        """The monomial with the largest |coefficient|, or None if zero."""
        if not self.terms:
            return None
        key = max(self.terms, key=lambda k: abs(self.terms[k]))
        return key, self.terms[key]

    def to_matrix(self, x_mat: np.ndarray, p_mat: np.ndarray) -> np.ndarray:
        """Evaluate on concrete matrices (monomials as x^a @ p^b)."""
        n = x_mat.shape[0]
        out = np.zeros((n, n), dtype=complex)
        x_pows = {0: np.eye(n, dtype=complex)}
        p_pows = {0: np.eye(n, dtype=complex)}
        for (a, b), c in self.terms.items():
            for power, base, cache in ((a, x_mat, x_pows), (b, p_mat, p_pows)):
                if power not in cache:
                    q = max(k for k in cache if k <= power)
                    acc = cache[q]
                    for k in range(q, power):
                        acc = acc @ base
                        cache[k + 1] = acc
            out += c * (x_pows[a] @ p_pows[b])
        return out

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (a, b) in sorted(self.terms, key=lambda k: (k[0] + k[1], k[0], k[1])):
            c = self.terms[(a, b)]
            mono = "*".join(
                ([f"x^{a}" if a > 1 else "x"] if a else [])
                + ([f"p^{b}" if b > 1 else "p"] if b else [])
            ) or "1"
            parts.append(f"({c:.6g})*{mono}")
        return " + ".join(parts)


def monomial_label(key: tuple[int, int]) -> str:
    a, b = key
    parts = ([f"x^{a}" if a > 1 else "x"] if a else []) + (
        [f"p^{b}" if b > 1 else "p"] if b else []
    )
    return "*".join(parts) or "1"
