"""JSON interchange for polynomials and Poisson structures.

A polynomial is a list of ``[exponents, re, im]`` triples, exponents indexed
by the document's ``symbols`` list and ``re``/``im`` written as ``"p/q"``.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .poisson import SYMBOLIC, CoordinateChart, PoissonStructure
from .poly import PolyExpr
from .scalars import CRational

FORMAT = "qdeform.structure/1"


def poly_to_terms(p: PolyExpr, symbols: list) -> list:
    index = {s: k for k, s in enumerate(symbols)}
    out = []
    for mono, c in p.items():
        exps = [0] * len(symbols)
        for s, e in mono:
            exps[index[s]] = e
        out.append([exps, str(c.re), str(c.im)])
    return out


def poly_from_terms(terms: list, symbols: list) -> PolyExpr:
    out = {}
    for exps, re, im in terms:
        if len(exps) != len(symbols):
            raise ValueError("exponent vector length does not match the symbol list")
        mono = tuple(sorted((s, int(e)) for s, e in zip(symbols, exps) if e))
        out[mono] = CRational(Fraction(re), Fraction(im))
    return PolyExpr(out)


def _symbols_of(P: PoissonStructure) -> list:
    extra = set()
    for row in P.bivector:
        for e in row:
            extra |= e.symbols()
    for c in P.casimirs:
        extra |= c.symbols()
    return list(P.names) + sorted(extra - set(P.names))


def structure_to_dict(P: PoissonStructure) -> dict:
    symbols = _symbols_of(P)
    if P.beta is None:
        beta = None
    elif P.beta == SYMBOLIC:
        beta = "symbolic"
    else:
        beta = str(P.beta)
    return {
        "format": FORMAT,
        "name": P.name,
        "chart": {
            "names": list(P.names),
            "pairing": [list(p) for p in P.chart.pairing],
            "kind": P.chart.kind,
        },
        "symbols": symbols,
        "bivector": [[poly_to_terms(e, symbols) for e in row] for row in P.bivector],
        "casimirs": [poly_to_terms(c, symbols) for c in P.casimirs],
        "beta": beta,
    }


def structure_from_dict(doc: dict) -> PoissonStructure:
    chart = CoordinateChart(
        tuple(doc["chart"]["names"]),
        tuple(tuple(p) for p in doc["chart"]["pairing"]),
        doc["chart"].get("kind", "real"),
    )
    symbols = doc["symbols"]
    beta = doc.get("beta")
    if beta == "symbolic":
        beta = SYMBOLIC
    elif beta is not None:
        beta = Fraction(beta)
    return PoissonStructure(
        chart,
        tuple(tuple(poly_from_terms(t, symbols) for t in row) for row in doc["bivector"]),
        tuple(poly_from_terms(t, symbols) for t in doc.get("casimirs", [])),
        beta,
        doc.get("name", "custom"),
    )


def dumps_structure(P: PoissonStructure) -> str:
    return json.dumps(structure_to_dict(P), indent=2, sort_keys=True)


def loads_structure(text: str) -> PoissonStructure:
    return structure_from_dict(json.loads(text))
