"""Numerical oracle: concrete torus elements as twisted Fourier series.

Symbolic identities produced by the exact engine are checked here against
floating-point computations in a concrete representation.  An element is
a finite series sum_alpha c_alpha U^alpha indexed by integer vectors,
where the ordered monomials multiply by the twisted convolution rule

    U^alpha U^beta = exp(2 pi i sum_{j>k} theta_jk alpha_j beta_k)
                     U^(alpha+beta).

The trace reads off the zero mode, derivations scale mode alpha by
alpha_a, and the adjoint is

    (U^alpha)^* = exp(2 pi i sum_{j>k} theta_jk alpha_j alpha_k) U^(-alpha).

Inverses come from a Neumann series around the zero mode, with an
explicit 1-norm tail bound.  Products prune entries far below the
working tolerance; the pruning threshold sits several orders below the
certification tolerance, so the discarded mass never threatens a check.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .ncalg import Letter, NCPoly
from .symcalc import Symbol
from .trace import TraceExpression

# entries this far below a certification tolerance cannot add up to harm it
PRUNE_FACTOR = 1e-4


class ThetaMatrix:
    """Deformation matrix, antisymmetric modulo 1."""

    def __init__(self, mat):
        m = np.asarray(mat, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("theta must be square")
        sym = m + m.T
        if not np.allclose(sym, np.round(sym), atol=1e-9):
            raise ValueError("theta must be antisymmetric modulo 1")
        self.mat = m
        self.d = m.shape[0]
        # strictly lower triangle: only j > k pairs enter phases; kept as
        # plain tuples because the product loop calls this per coefficient
        # pair and numpy dispatch would dominate the runtime
        self._lower = tuple(tuple(m[j, :j]) for j in range(self.d))

    @classmethod
    def zero(cls, d: int) -> "ThetaMatrix":
        return cls(np.zeros((d, d)))

    def phase(self, alpha, beta) -> complex:
        s = 0.0
        for j in range(1, self.d):
            aj = alpha[j]
            if aj:
                row = self._lower[j]
                s += aj * sum(row[k] * beta[k] for k in range(j) if beta[k])
        return cmath.exp(2j * cmath.pi * s)


Index = tuple[int, ...]


class FourierElement:
    """Finite twisted Fourier series over a fixed theta."""

    __slots__ = ("theta", "coeffs")

    def __init__(self, theta: ThetaMatrix, coeffs: dict[Index, complex] | None = None):
        self.theta = theta
        self.coeffs: dict[Index, complex] = {}
        if coeffs:
            for idx, c in coeffs.items():
                if c != 0:
                    self.coeffs[tuple(idx)] = complex(c)

    @classmethod
    def one(cls, theta: ThetaMatrix) -> "FourierElement":
        return cls(theta, {(0,) * theta.d: 1.0})

    @classmethod
    def monomial(cls, theta: ThetaMatrix, index: Index, c: complex = 1.0) -> "FourierElement":
        return cls(theta, {tuple(index): c})

    def copy(self) -> "FourierElement":
        return FourierElement(self.theta, dict(self.coeffs))

    def __add__(self, other: "FourierElement") -> "FourierElement":
        out = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            out[idx] = out.get(idx, 0.0) + c
        return FourierElement(self.theta, out)

    def __sub__(self, other: "FourierElement") -> "FourierElement":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "FourierElement":
        return FourierElement(self.theta, {i: v * c for i, v in self.coeffs.items()})

    def __mul__(self, other: "FourierElement") -> "FourierElement":
        out: dict[Index, complex] = {}
        d = self.theta.d
        lower = self.theta._lower
        twopi = 2j * cmath.pi
        exp = cmath.exp
        get = out.get
        for b, cb in other.coeffs.items():
            # contract theta against b once per right-hand mode
            lb = tuple(
                sum(lower[j][k] * b[k] for k in range(j)) for j in range(d)
            )
            if any(lb):
                for a, ca in self.coeffs.items():
                    s = 0.0
                    for j in range(1, d):
                        if a[j]:
                            s += a[j] * lb[j]
                    idx = tuple(x + y for x, y in zip(a, b))
                    out[idx] = get(idx, 0.0) + ca * cb * exp(twopi * s)
            else:
                for a, ca in self.coeffs.items():
                    idx = tuple(x + y for x, y in zip(a, b))
                    out[idx] = get(idx, 0.0) + ca * cb
        return FourierElement(self.theta, out)

    def adjoint(self) -> "FourierElement":
        out: dict[Index, complex] = {}
        phase = self.theta.phase
        for a, c in self.coeffs.items():
            neg = tuple(-x for x in a)
            out[neg] = out.get(neg, 0.0) + c.conjugate() * phase(a, a)
        return FourierElement(self.theta, out)

    def derive(self, axis: int) -> "FourierElement":
        return FourierElement(
            self.theta,
            {a: c * a[axis - 1] for a, c in self.coeffs.items() if a[axis - 1]},
        )

    def trace(self) -> complex:
        return self.coeffs.get((0,) * self.theta.d, 0.0)

    def norm1(self) -> float:
        return sum(abs(c) for c in self.coeffs.values())

    def prune(self, eps: float) -> "FourierElement":
        return FourierElement(
            self.theta, {a: c for a, c in self.coeffs.items() if abs(c) > eps}
        )

    def is_self_adjoint(self, tol: float = 1e-12) -> bool:
        return (self - self.adjoint()).norm1() <= tol


@dataclass
class NeumannResult:
    element: FourierElement
    tail_bound: float
    terms: int


def nc_invert_neumann(x: FourierElement, tol: float = 1e-12) -> NeumannResult:
    """Inverse via the Neumann series around the zero mode.

    Writing x = lam (1 + u) with lam the zero mode, the series
    sum (-u)^k / lam converges when ||u||_1 < 1; enough terms are taken
    for the 1-norm tail r^(K+1) / ((1 - r) |lam|) to drop below tol.
    """
    d = x.theta.d
    lam = x.coeffs.get((0,) * d, 0.0)
    if lam == 0:
        raise ValueError("zero mode vanishes; Neumann series does not apply")
    u = x.scale(1.0 / lam) - FourierElement.one(x.theta)
    r = u.norm1()
    if r >= 1.0:
        raise ValueError(f"series does not converge: off-mode mass {r:.3f} >= 1")
    k = 0
    tail = r / (1.0 - r)
    while tail > tol * abs(lam) and r > 0:
        k += 1
        tail *= r
    prune_eps = tol * PRUNE_FACTOR
    # Horner form: s = 1 - u (1 - u (... ))
    s = FourierElement.one(x.theta)
    for _ in range(k):
        s = (FourierElement.one(x.theta) - (u * s)).prune(prune_eps)
    return NeumannResult(s.scale(1.0 / lam), tail / abs(lam), k + 1)


class Assignment:
    """Concrete values for the letters, with an evaluation cache.

    ``atoms`` maps "h", "t1".."td", "x" to elements; the inverse of h is
    produced on demand by the Neumann series at the assignment tolerance.
    """

    def __init__(self, theta: ThetaMatrix, atoms: dict[str, FourierElement], tol: float = 1e-10):
        self.theta = theta
        self.d = theta.d
        self.atoms = atoms
        self.tol = tol
        self._letters: dict[Letter, FourierElement] = {}
        self._words: dict[tuple[Letter, ...], FourierElement] = {}
        self._h_inverse: NeumannResult | None = None

    def h_inverse(self) -> NeumannResult:
        if self._h_inverse is None:
            self._h_inverse = nc_invert_neumann(self.atoms["h"], self.tol)
        return self._h_inverse

    def _letter(self, let: Letter) -> FourierElement:
        hit = self._letters.get(let)
        if hit is not None:
            return hit
        if let.kind == "H":
            el = self.atoms["h"]
        elif let.kind == "Hinv":
            el = self.h_inverse().element
        elif let.kind == "T":
            el = self.atoms[f"t{let.axis}"]
        else:
            el = self.atoms["x"]
        for axis, reps in enumerate(let.deriv, start=1):
            for _ in range(reps):
                el = el.derive(axis)
        self._letters[let] = el
        return el

    def evaluate_word(self, word: tuple[Letter, ...]) -> FourierElement:
        word = tuple(word)
        hit = self._words.get(word)
        if hit is not None:
            return hit
        eps = self.tol * PRUNE_FACTOR
        if word:
            # reuse the longest cached prefix; expressions share many
            out = self.evaluate_word(word[:-1]) * self._letter(word[-1])
            out = out.prune(eps)
        else:
            out = FourierElement.one(self.theta)
        self._words[word] = out
        return out

    def evaluate_poly(self, p: NCPoly) -> FourierElement:
        out = FourierElement(self.theta)
        for word, sc in p.terms.items():
            out = out + self.evaluate_word(word).scale(float(sc))
        return out

    def evaluate_trace_expression(self, e: TraceExpression) -> complex:
        total = 0.0 + 0.0j
        for tw, sc in e.terms.items():
            total += float(sc) * self.evaluate_word(tw.word).trace()
        return total

    def evaluate_symbol(self, s: Symbol, xi) -> FourierElement:
        out = FourierElement(self.theta)
        for mono, coef in s.terms.items():
            out = out + self.evaluate_poly(coef).scale(mono.eval(xi))
        return out


def gamma_sum_evaluation(
    asg: Assignment, p: Symbol, q: Symbol, min_degree: int, xi
) -> FourierElement:
    """Composition evaluated numerically, bypassing symbol arithmetic.

    Runs the same finite gamma sum as the symbolic composition, but each
    piece is evaluated to a concrete element first and the pieces are
    combined by twisted convolution; only monomial pairs at or above
    min_degree contribute, mirroring the symbolic truncation.  Agreement
    with the evaluated symbolic product cross-checks the polynomial
    multiplication against the convolution it represents.
    """
    from math import factorial

    from .symcalc import multi_indices

    d = p.d
    total = FourierElement(asg.theta)
    gamma_max = p.max_degree() + q.max_degree() - min_degree
    for order in range(gamma_max + 1):
        for gamma in multi_indices(d, order):
            weight = 1.0
            dp, dq = p, q
            for axis, reps in enumerate(gamma, start=1):
                weight /= factorial(reps)
                for _ in range(reps):
                    dp = dp.partial_xi(axis)
                    dq = dq.derive(axis)
            for mono1, coef1 in dp.terms.items():
                for mono2, coef2 in dq.terms.items():
                    if mono1.degree + mono2.degree < min_degree:
                        continue
                    scal = weight * mono1.eval(xi) * mono2.eval(xi)
                    piece = asg.evaluate_poly(coef1) * asg.evaluate_poly(coef2)
                    total = total + piece.scale(scal)
    return total
