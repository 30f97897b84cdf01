"""Symbol of the conformally rescaled Laplacian and its parametrix.

The operator acts on the torus algebra as

    sum_a p d_a( q d_a( p . ) )  +  (1/2) sum_a (T_a d_a + d_a T_a)  +  X,

with conformal factors p = h^(-d/2) and q = h^(d-2).  Expanding the outer
derivations by the Leibniz rule gives a polynomial symbol of degree two:

    degree 2:  (p q p) |xi|^2
    degree 1:  sum_a ( 2 p q d_a(p) + p d_a(q) p + T_a ) xi_a
    degree 0:  sum_a ( p d_a(q) d_a(p) + p q d_aa(p) + (1/2) d_a(T_a) ) + X

All three lines come straight from the expansion; in particular the
degree-1 coefficient keeps its factors in operator order, which matters:
its commutative limit must match the classical conformal Laplacian, and
it does (h^(-2) gets -2 h'/h^3 at d=4).

The parametrix recursion inverts the symbol degree by degree from the
top.  The leading coefficient is a power of h, so its pointwise two-sided
inverse is exact and the recursion stays inside the free algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ncalg import Algebra, Letter, NCPoly, Scalar
from .symcalc import (
    Symbol,
    XiMonomial,
    _gamma_factorial,
    multi_indices,
    symbol_product,
)


@dataclass(frozen=True)
class OperatorSpec:
    """Configuration of the operator: dimension, torsion, potential,
    and the flat (h = 1) degeneration."""

    d: int = 4
    include_t: bool = True
    include_x: bool = False
    flat: bool = False

    def __post_init__(self):
        if self.d < 2 or self.d % 2:
            raise ValueError("dimension must be even and at least 2")


def laplace_symbol(spec: OperatorSpec) -> Symbol:
    alg = Algebra(spec.d)
    d = spec.d
    zero = (0,) * d
    if spec.flat:
        p = alg.one()
        q = alg.one()
    else:
        p = alg.h_power(-(d // 2))
        q = alg.h_power(d - 2)
    terms = {XiMonomial(zero, 1): p * q * p}
    phi = alg.zero()
    for a in range(1, d + 1):
        y = p * q * p.derive(a) * 2 + p * q.derive(a) * p
        if spec.include_t:
            y = y + alg.t(a)
        if not y.is_zero():
            e_a = tuple(1 if i == a - 1 else 0 for i in range(d))
            terms[XiMonomial(e_a, 0)] = y
        phi = phi + p * q.derive(a) * p.derive(a) + p * q * p.derive(a).derive(a)
        if spec.include_t:
            phi = phi + alg.t(a).derive(a).scale(Fraction(1, 2))
    if spec.include_x:
        phi = phi + alg.x()
    if not phi.is_zero():
        terms[XiMonomial(zero, 0)] = phi
    return Symbol(d, terms)


def invert_leading(a: Symbol) -> Symbol:
    """Two-sided pointwise inverse of the leading term.

    Requires the top part to be a single |xi|^2 monomial whose coefficient
    is a scalar multiple of a power of h.
    """
    d = a.d
    top = a.homogeneous_part(a.max_degree())
    key = XiMonomial((0,) * d, 1)
    if list(top.terms) != [key]:
        raise ValueError("leading term is not a single |xi|^2 monomial")
    coef = top.terms[key]
    if len(coef.terms) != 1:
        raise ValueError("leading coefficient is not a monomial")
    ((word, sc),) = coef.terms.items()
    if any(let.order or let.kind not in ("H", "Hinv") for let in word):
        raise ValueError("leading coefficient is not a power of h")
    flipped = tuple(
        Letter("Hinv" if let.kind == "H" else "H", (0,) * d) for let in reversed(word)
    )
    inv = NCPoly.from_word(d, flipped, Scalar(1 / sc.q, -sc.pi))
    return Symbol(d, {XiMonomial((0,) * d, -1): inv})


def _apply_gamma(s: Symbol, gamma: tuple[int, ...], xi_side: bool) -> Symbol:
    for axis, reps in enumerate(gamma, start=1):
        for _ in range(reps):
            s = s.partial_xi(axis) if xi_side else s.derive(axis)
    return s


@dataclass
class ParametrixResult:
    side: str
    terms: list[Symbol]
    defect: Symbol

    def total(self) -> Symbol:
        out = Symbol.zero(self.terms[0].d)
        for t in self.terms:
            out = out + t
        return out


def parametrix_terms(a: Symbol, n: int, side: str = "left") -> ParametrixResult:
    """Terms b_0 .. b_n of the parametrix, plus the composition defect.

    For the left parametrix, degree -2-m of B # A vanishing gives

        b_m = -[ sum_{j<m, i, |gamma| = m-j+i-2 >= 0}
                 (1/gamma!) d_xi^gamma(b_j) . delta^gamma(a_i) ] . b_0,

    and the right parametrix mirrors the factors.  The defect is the
    composition minus 1, truncated at degree -n, and is identically zero
    there when the recursion is correct.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if n < 0:
        raise ValueError("need at least the leading term")
    d = a.d
    b0 = invert_leading(a)
    parts = {i: a.homogeneous_part(i) for i in (0, 1, 2)}
    bs = [b0]
    for m in range(1, n + 1):
        acc = Symbol.zero(d)
        for j in range(m):
            for i in (0, 1, 2):
                g = m - j + i - 2
                if g < 0 or parts[i].is_zero():
                    continue
                for gamma in multi_indices(d, g):
                    inv = Scalar(Fraction(1, _gamma_factorial(gamma)))
                    if side == "left":
                        piece = _apply_gamma(bs[j], gamma, xi_side=True).pointwise_mul(
                            _apply_gamma(parts[i], gamma, xi_side=False)
                        )
                    else:
                        piece = _apply_gamma(
                            parts[i], gamma, xi_side=True
                        ).pointwise_mul(_apply_gamma(bs[j], gamma, xi_side=False))
                    acc = acc + piece.scale(inv)
        bs.append(
            -(acc.pointwise_mul(b0)) if side == "left" else -(b0.pointwise_mul(acc))
        )
    total = Symbol.zero(d)
    for b in bs:
        total = total + b
    if side == "left":
        defect = symbol_product(total, a, -n) - Symbol.one(d)
    else:
        defect = symbol_product(a, total, -n) - Symbol.one(d)
    return ParametrixResult(side, bs, defect)


def closed_form_b1(spec: OperatorSpec) -> Symbol:
    """First subleading parametrix term, assembled directly."""
    a = laplace_symbol(spec)
    b0 = invert_leading(a)
    a1, a2 = a.homogeneous_part(1), a.homogeneous_part(2)
    acc = b0.pointwise_mul(a1)
    for k in range(1, spec.d + 1):
        acc = acc + b0.partial_xi(k).pointwise_mul(a2.derive(k))
    return -(acc.pointwise_mul(b0))


def closed_form_b2(spec: OperatorSpec) -> Symbol:
    """Second subleading parametrix term, assembled directly.

    Every term carries a trailing b_0, including the second-order
    gamma sum over the leading part.
    """
    a = laplace_symbol(spec)
    b0 = invert_leading(a)
    b1 = closed_form_b1(spec)
    a0, a1, a2 = (a.homogeneous_part(i) for i in (0, 1, 2))
    acc = b0.pointwise_mul(a0) + b1.pointwise_mul(a1)
    for j in range(1, spec.d + 1):
        acc = acc + b0.partial_xi(j).pointwise_mul(a1.derive(j))
        acc = acc + b1.partial_xi(j).pointwise_mul(a2.derive(j))
    for gamma in multi_indices(spec.d, 2):
        inv = Scalar(Fraction(1, _gamma_factorial(gamma)))
        acc = acc + _apply_gamma(b0, gamma, xi_side=True).pointwise_mul(
            _apply_gamma(a2, gamma, xi_side=False)
        ).scale(inv)
    return -(acc.pointwise_mul(b0))
