"""Canonical trace expressions and integration-by-parts reduction.

The trace is the normalized zero-mode functional: it is cyclic, kills
every derivation (``t(d_a(p)) = 0``), and sends 1 to 1.  Two consequences
drive this module:

* cyclicity lets every trace word be rotated to a canonical representative,
  with wrap-around h/h^-1 cancellation applied first;
* the vanishing of traced derivations generates linear relations among
  trace words (integration by parts), which we put into reduced row form
  and use to rewrite expressions canonically.

Relations are generated by need rather than by blind enumeration: starting
from the words of the expression, every word obtained by lowering one
derivative exponent is used as a generator g, contributing the relations
t(d_b(g)) = 0 for every direction b.  New words met inside those relations
are explored in turn while they stay within the order and length caps.
Rows are kept fully back-substituted, so reduction is a single pass and
the canonical form does not depend on exploration order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

from .ncalg import (
    Letter,
    NCPoly,
    Scalar,
    Word,
    _cancels,
    format_word,
    normalize_word,
    word_sort_key,
)


def canonical_cycle(word: Iterable[Letter]) -> Word:
    """Canonical representative of a word under cyclic equivalence.

    Linear normalization first, then wrap-around cancellation of underived
    h/h^-1 pairs (the word is a cycle, so first and last letters are
    adjacent), then the lexicographically minimal rotation.
    """
    w = list(normalize_word(tuple(word)))
    while len(w) >= 2 and _cancels(w[-1], w[0]):
        w = w[1:-1]
    if not w:
        return ()
    keys = [let.sort_key() for let in w]
    n = len(w)
    best = min(range(n), key=lambda i: keys[i:] + keys[:i])
    return tuple(w[best:] + w[:best])


@dataclass(frozen=True)
class TraceWord:
    word: Word

    @classmethod
    def make(cls, word: Iterable[Letter]) -> "TraceWord":
        return cls(canonical_cycle(word))

    @property
    def order(self) -> int:
        return sum(let.order for let in self.word)

    def __len__(self) -> int:
        return len(self.word)


def pivot_key(tw: TraceWord):
    """Elimination order: reduce total order first, then the highest
    single-letter order, then length, then an arbitrary stable key."""
    word = tw.word
    peak = max((let.order for let in word), default=0)
    return (tw.order, peak, len(word), tuple(let.sort_key() for let in word))


class TraceExpression:
    """Finite scalar combination of canonical trace words.

    Each word carries a single exact scalar; summing terms whose pi powers
    differ on the same word is rejected rather than approximated.
    """

    __slots__ = ("d", "terms")

    def __init__(self, d: int, terms: dict[TraceWord, Scalar] | None = None):
        self.d = d
        self.terms: dict[TraceWord, Scalar] = {}
        if terms:
            for tw, sc in terms.items():
                if sc:
                    self.terms[tw] = sc

    @classmethod
    def zero(cls, d: int) -> "TraceExpression":
        return cls(d)

    @classmethod
    def from_poly(cls, p: NCPoly) -> "TraceExpression":
        out: dict[TraceWord, Scalar] = {}
        for word, sc in p.terms.items():
            tw = TraceWord.make(word)
            cur = out.get(tw)
            out[tw] = sc if cur is None else cur + sc
        return cls(p.d, out)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, TraceExpression):
            return NotImplemented
        return self.d == other.d and self.terms == other.terms

    def __hash__(self):
        raise TypeError("TraceExpression is not hashable")

    def __add__(self, other: "TraceExpression") -> "TraceExpression":
        if self.d != other.d:
            raise ValueError("dimension mismatch")
        out = dict(self.terms)
        for tw, sc in other.terms.items():
            cur = out.get(tw)
            total = sc if cur is None else cur + sc
            if total:
                out[tw] = total
            else:
                out.pop(tw, None)
        return TraceExpression(self.d, out)

    def __neg__(self) -> "TraceExpression":
        return TraceExpression(self.d, {tw: -sc for tw, sc in self.terms.items()})

    def __sub__(self, other: "TraceExpression") -> "TraceExpression":
        return self + (-other)

    def scale(self, c) -> "TraceExpression":
        from .ncalg import as_scalar

        c = as_scalar(c)
        if not c:
            return TraceExpression.zero(self.d)
        return TraceExpression(self.d, {tw: sc * c for tw, sc in self.terms.items()})

    def max_order(self) -> int:
        return max((tw.order for tw in self.terms), default=0)

    def max_len(self) -> int:
        return max((len(tw) for tw in self.terms), default=0)

    def __repr__(self) -> str:
        return f"TraceExpression({self.d}, {format_trace_expression(self)!r})"


def trace(p: NCPoly) -> TraceExpression:
    return TraceExpression.from_poly(p)


def commutative_image_expr(e: TraceExpression) -> TraceExpression:
    out: dict[TraceWord, Scalar] = {}
    for tw, sc in e.terms.items():
        img = NCPoly.from_word(e.d, tw.word).commutative_image()
        # the image of one word is one word with coefficient 1
        (word,) = img.terms
        key = TraceWord.make(word)
        cur = out.get(key)
        out[key] = sc if cur is None else cur + sc
    return TraceExpression(e.d, out)


# ---------------------------------------------------------------------------
# relation system


class ReductionSystem:
    """Reduced row form of the integration-by-parts relations reachable
    from a set of seed words."""

    def __init__(
        self,
        d: int,
        seeds: Iterable[TraceWord],
        max_order: int | None = None,
        commutative: bool = False,
    ):
        self.d = d
        self.commutative = commutative
        seed_list = sorted(set(seeds), key=pivot_key)
        self.cap_ord = (
            max_order
            if max_order is not None
            else max((tw.order for tw in seed_list), default=0)
        )
        self.cap_len = max((len(tw) for tw in seed_list), default=0) + 1
        # pivot word -> row (pivot coefficient 1, no other pivot appears)
        self.rows: dict[TraceWord, dict[TraceWord, Fraction]] = {}
        self._seen_words = set(seed_list)
        self._seen_gens: set[TraceWord] = set()
        queue = deque(seed_list)
        while queue:
            self._explore(queue.popleft(), queue)

    def _canon(self, word: Word) -> TraceWord:
        if self.commutative:
            img = NCPoly.from_word(self.d, word).commutative_image()
            (word,) = img.terms
        return TraceWord.make(word)

    def _relation(self, gen: TraceWord, axis: int) -> dict[TraceWord, Fraction]:
        """Row for t(d_axis(gen)) = 0."""
        dp = NCPoly.from_word(self.d, gen.word).derive(axis)
        if self.commutative:
            dp = dp.commutative_image()
        row: dict[TraceWord, Fraction] = {}
        for word, sc in dp.terms.items():
            tw = TraceWord.make(word)
            row[tw] = row.get(tw, Fraction(0)) + sc.q
        return {tw: q for tw, q in row.items() if q}

    def _lowerings(self, tw: TraceWord) -> list[TraceWord]:
        out = set()
        word = tw.word
        for i, let in enumerate(word):
            if let.order == 0:
                continue
            for b in range(1, self.d + 1):
                if let.deriv[b - 1] == 0:
                    continue
                lowered = Letter(
                    let.kind,
                    let.deriv[: b - 1] + (let.deriv[b - 1] - 1,) + let.deriv[b:],
                    let.axis,
                )
                out.add(self._canon(word[:i] + (lowered,) + word[i + 1:]))
        return sorted(out, key=pivot_key)

    def _explore(self, tw: TraceWord, queue: deque):
        for gen in self._lowerings(tw):
            if gen in self._seen_gens:
                continue
            self._seen_gens.add(gen)
            for axis in range(1, self.d + 1):
                row = self._relation(gen, axis)
                for u in sorted(row, key=pivot_key):
                    if (
                        u not in self._seen_words
                        and u.order <= self.cap_ord
                        and len(u) <= self.cap_len
                    ):
                        self._seen_words.add(u)
                        queue.append(u)
                self._insert(row)

    def _insert(self, row: dict[TraceWord, Fraction]):
        # eliminate every existing pivot from the incoming row
        while True:
            hit = next((w for w in row if w in self.rows), None)
            if hit is None:
                break
            coef = row.pop(hit)
            for u, c in self.rows[hit].items():
                if u == hit:
                    continue
                q = row.get(u, Fraction(0)) - coef * c
                if q:
                    row[u] = q
                else:
                    row.pop(u, None)
        if not row:
            return
        pivot = max(row, key=pivot_key)
        inv = Fraction(1) / row[pivot]
        row = {u: c * inv for u, c in row.items()}
        # back-substitute into rows that mention the new pivot; their own
        # pivots are safe because the incoming row contains no existing pivot
        for other in self.rows.values():
            coef = other.get(pivot)
            if coef is None:
                continue
            del other[pivot]
            for u, c in row.items():
                if u == pivot:
                    continue
                q = other.get(u, Fraction(0)) + coef * (-c)
                if q:
                    other[u] = q
                else:
                    other.pop(u, None)
        self.rows[pivot] = row

    def reduce_vector(
        self, terms: dict[TraceWord, Fraction]
    ) -> dict[TraceWord, Fraction]:
        out: dict[TraceWord, Fraction] = {}
        for tw, q in terms.items():
            row = self.rows.get(tw)
            if row is None:
                out[tw] = out.get(tw, Fraction(0)) + q
                continue
            for u, c in row.items():
                if u == tw:
                    continue
                out[u] = out.get(u, Fraction(0)) - q * c
        return {tw: q for tw, q in out.items() if q}


def _pi_sectors(e: TraceExpression) -> dict[int, dict[TraceWord, Fraction]]:
    out: dict[int, dict[TraceWord, Fraction]] = {}
    for tw, sc in e.terms.items():
        out.setdefault(sc.pi, {})[tw] = sc.q
    return out


def ibp_reduce(
    e: TraceExpression,
    max_order: int | None = None,
    commutative: bool = False,
) -> TraceExpression:
    """Canonical form of ``e`` modulo cyclicity and integration by parts."""
    if commutative:
        e = commutative_image_expr(e)
    system = ReductionSystem(e.d, e.terms.keys(), max_order, commutative)
    out: dict[TraceWord, Scalar] = {}
    for pi, vec in sorted(_pi_sectors(e).items()):
        for tw, q in system.reduce_vector(vec).items():
            if tw in out:
                raise ValueError("reduction mixed distinct pi powers on one word")
            out[tw] = Scalar(q, pi)
    return TraceExpression(e.d, out)


def trace_equal(
    a: TraceExpression,
    b: TraceExpression,
    max_order: int | None = None,
    commutative: bool = False,
) -> bool:
    """Whether a and b agree modulo cyclicity and integration by parts."""
    if a.d != b.d:
        return False
    if commutative:
        a = commutative_image_expr(a)
        b = commutative_image_expr(b)
    diff: dict[int, dict[TraceWord, Fraction]] = {}
    for sign, e in ((Fraction(1), a), (Fraction(-1), b)):
        for pi, vec in _pi_sectors(e).items():
            sector = diff.setdefault(pi, {})
            for tw, q in vec.items():
                sector[tw] = sector.get(tw, Fraction(0)) + sign * q
    seeds = [tw for vec in diff.values() for tw in vec]
    system = ReductionSystem(a.d, seeds, max_order, commutative)
    return all(not system.reduce_vector(vec) for vec in diff.values())


def _uniform_pi(e: TraceExpression) -> int:
    pis = {sc.pi for sc in e.terms.values()}
    if len(pis) > 1:
        raise ValueError("expression mixes pi powers; cannot span-solve")
    return pis.pop() if pis else 0


def express_in_span(
    target: TraceExpression,
    shapes: Sequence[TraceExpression],
    max_order: int | None = None,
    commutative: bool = False,
) -> list[Scalar] | None:
    """Exact coefficients writing ``target`` as a combination of ``shapes``
    modulo integration by parts, or None if no combination exists.

    Raises if a combination exists but is not unique (the shapes are
    dependent over the reduced basis).
    """
    exprs = [target] + list(shapes)
    if commutative:
        exprs = [commutative_image_expr(e) for e in exprs]
    pi_t = _uniform_pi(exprs[0])
    pi_s = [_uniform_pi(e) for e in exprs[1:]]
    seeds = [tw for e in exprs for tw in e.terms]
    system = ReductionSystem(target.d, seeds, max_order, commutative)
    reduced = [
        system.reduce_vector({tw: sc.q for tw, sc in e.terms.items()}) for e in exprs
    ]
    basis = sorted({tw for vec in reduced for tw in vec}, key=pivot_key)
    index = {tw: i for i, tw in enumerate(basis)}
    n = len(reduced) - 1
    # solve A x = b over the rationals by elimination on the augmented rows
    aug = [[Fraction(0)] * (n + 1) for _ in basis]
    for j, vec in enumerate(reduced[1:]):
        for tw, q in vec.items():
            aug[index[tw]][j] = q
    for tw, q in reduced[0].items():
        aug[index[tw]][n] = q
    rank = 0
    for col in range(n):
        piv = next((r for r in range(rank, len(aug)) if aug[r][col]), None)
        if piv is None:
            continue
        aug[rank], aug[piv] = aug[piv], aug[rank]
        lead = aug[rank][col]
        aug[rank] = [v / lead for v in aug[rank]]
        for r in range(len(aug)):
            if r != rank and aug[r][col]:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[rank])]
        rank += 1
    for r in range(rank, len(aug)):
        if aug[r][n]:
            return None  # inconsistent: target leaves the span
    if rank < n:
        raise ValueError("shapes are linearly dependent modulo the relations")
    # rank == n, so column i was pivoted at row i
    sol = [aug[i][n] for i in range(n)]
    return [Scalar(sol[i], pi_t - pi_s[i] if sol[i] else 0) for i in range(n)]


# ---------------------------------------------------------------------------
# rendering


def format_trace_word(tw: TraceWord) -> str:
    return f"t[{format_word(tw.word)}]"


def _fraction_gcd(values: Iterable[Fraction]) -> Fraction:
    nums = 0
    dens = 1
    for v in values:
        nums = gcd(nums, abs(v.numerator))
        dens = lcm(dens, v.denominator)
    return Fraction(nums, dens)


def format_trace_expression(e: TraceExpression) -> str:
    """Render with a common pi factor pulled out when one exists.

    A uniform nonzero pi power (with the rational gcd) is shown as a
    prefix, e.g. ``2*pi^2 * t[h^4]``; otherwise terms are joined plainly.
    """
    from .ncalg import format_scalar

    if e.is_zero():
        return "0"
    ordered = sorted(e.terms, key=lambda tw: word_sort_key(tw.word))
    pis = {sc.pi for sc in e.terms.values()}
    prefix = ""
    coeffs = {tw: e.terms[tw] for tw in ordered}
    if pis != {0} and len(pis) == 1:
        k = pis.pop()
        g = _fraction_gcd(sc.q for sc in e.terms.values())
        if all(sc.q < 0 for sc in e.terms.values()):
            g = -g
        prefix = format_scalar(Scalar(g, k))
        coeffs = {tw: Scalar(sc.q / g) for tw, sc in e.terms.items()}
    chunks = []
    for tw in ordered:
        sc = coeffs[tw]
        mag = format_scalar(sc if sc.q > 0 else -sc)
        body = format_trace_word(tw)
        text = body if mag == "1" else f"{mag}*{body}"
        if not chunks:
            chunks.append(("-" if sc.q < 0 else "") + text)
        else:
            chunks.append((" - " if sc.q < 0 else " + ") + text)
    joined = "".join(chunks)
    if not prefix:
        return joined
    if len(ordered) == 1 and not joined.startswith("-") and "*" not in joined:
        return f"{prefix} * {joined}"
    return f"{prefix} * ( {joined} )"
