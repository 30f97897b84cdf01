"""JSON forms for expressions, symbols, and oracle assignments.

Every emitter sorts its output, so equal values serialize to equal
structures, and every parser rebuilds the exact value: rationals travel
as integer pairs and floats as JSON numbers, which round-trip bit for
bit through Python's json module.
"""

from __future__ import annotations

from fractions import Fraction

from .fourier_oracle import Assignment, FourierElement, ThetaMatrix
from .ncalg import Letter, NCPoly, Scalar, Word, word_sort_key
from .symcalc import Symbol, XiMonomial
from .trace import TraceExpression, TraceWord


def scalar_to_json(sc: Scalar) -> dict:
    return {"num": sc.q.numerator, "den": sc.q.denominator, "pi": sc.pi}


def scalar_from_json(obj: dict) -> Scalar:
    return Scalar(Fraction(obj["num"], obj["den"]), obj["pi"])


def letter_to_json(let: Letter) -> dict:
    out: dict = {"base": let.kind, "deriv": list(let.deriv)}
    if let.axis is not None:
        out["axis"] = let.axis
    return out


def letter_from_json(obj: dict) -> Letter:
    return Letter(obj["base"], tuple(obj["deriv"]), obj.get("axis"))


def _word_to_json(word: Word) -> list:
    return [letter_to_json(let) for let in word]


def _word_from_json(items: list) -> tuple[Letter, ...]:
    return tuple(letter_from_json(it) for it in items)


def poly_to_json(p: NCPoly) -> dict:
    terms = []
    for word in sorted(p.terms, key=word_sort_key):
        terms.append({"coef": scalar_to_json(p.terms[word]), "word": _word_to_json(word)})
    return {"terms": terms}


def poly_from_json(obj: dict, d: int) -> NCPoly:
    out = NCPoly.zero(d)
    for term in obj["terms"]:
        out = out + NCPoly.from_word(
            d, _word_from_json(term["word"]), scalar_from_json(term["coef"])
        )
    return out


def trace_expression_to_json(e: TraceExpression) -> dict:
    terms = []
    for tw in sorted(e.terms, key=lambda t: word_sort_key(t.word)):
        terms.append(
            {
                "coef": scalar_to_json(e.terms[tw]),
                "word": _word_to_json(tw.word),
                "trace": True,
            }
        )
    return {"terms": terms}


def trace_expression_from_json(obj: dict, d: int) -> TraceExpression:
    out = TraceExpression.zero(d)
    for term in obj["terms"]:
        if not term.get("trace"):
            raise ValueError("trace expression term lacks the trace marker")
        tw = TraceWord.make(_word_from_json(term["word"]))
        out = out + TraceExpression(d, {tw: scalar_from_json(term["coef"])})
    return out


def symbol_to_json(s: Symbol) -> dict:
    by_degree: dict[int, list] = {}
    for mono in sorted(s.terms, key=lambda m: (m.degree, m.alpha, m.m)):
        by_degree.setdefault(mono.degree, []).append(
            {"coef": poly_to_json(s.terms[mono]), "alpha": list(mono.alpha), "m": mono.m}
        )
    return {"components": {str(k): by_degree[k] for k in sorted(by_degree)}}


def symbol_from_json(obj: dict, d: int) -> Symbol:
    terms: dict[XiMonomial, NCPoly] = {}
    for key, items in obj["components"].items():
        for it in items:
            mono = XiMonomial(tuple(it["alpha"]), it["m"])
            if mono.degree != int(key):
                raise ValueError(f"term of degree {mono.degree} filed under {key}")
            coef = poly_from_json(it["coef"], d)
            terms[mono] = terms[mono] + coef if mono in terms else coef
    return Symbol(d, terms)


def _element_to_json(el: FourierElement) -> dict:
    coeffs = []
    for idx in sorted(el.coeffs):
        c = el.coeffs[idx]
        coeffs.append({"index": list(idx), "re": c.real, "im": c.imag})
    return {"coeffs": coeffs}


def _element_from_json(obj: dict, theta: ThetaMatrix) -> FourierElement:
    return FourierElement(
        theta,
        {tuple(it["index"]): complex(it["re"], it["im"]) for it in obj["coeffs"]},
    )


def _atom_json_key(name: str) -> str:
    if name == "h":
        return "h"
    if name == "x":
        return "X"
    return "T" + name[1:]


def _atom_internal_key(name: str) -> str:
    if name == "h":
        return "h"
    if name == "X":
        return "x"
    if name.startswith("T"):
        return "t" + name[1:]
    raise ValueError(f"unknown atom {name!r}")


def assignment_to_json(asg: Assignment) -> dict:
    atoms = {
        _atom_json_key(name): _element_to_json(asg.atoms[name])
        for name in sorted(asg.atoms)
    }
    return {
        "theta": [list(row) for row in asg.theta.mat],
        "atoms": atoms,
        "tol": asg.tol,
    }


def assignment_from_json(obj: dict) -> Assignment:
    theta = ThetaMatrix(obj["theta"])
    atoms = {
        _atom_internal_key(name): _element_from_json(sub, theta)
        for name, sub in obj["atoms"].items()
    }
    return Assignment(theta, atoms, tol=obj["tol"])
