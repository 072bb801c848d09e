"""Normal ordering of noncommutative polynomials by directed rewrite rules.

Words are tuples of generator names. A :class:`RewriteSystem` fixes a total
order on the generators and, for each adjacent pair ``g h`` with ``g`` ranked
above ``h``, a rule rewriting it into better-ordered words. Allowed rule
right-hand sides contain only ``h g``, ``g``, ``h`` or the empty word, which
guarantees that every rewrite step strictly lowers the inversion count.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import ParameterError, SymbolError
from .scalars import CRational, as_crational

__all__ = [
    "NCPoly",
    "RewriteSystem",
    "normal_form",
    "commutator",
    "jacobi_check",
    "verify_relation",
    "dagger",
    "builtin_system",
    "SYSTEMS",
    "inversions",
    "random_ncpoly",
]

I = CRational(0, 1)


class NCPoly:
    """Finite sum of ``coefficient * word``; words are stored verbatim."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple, object] | None = None):
        clean = {}
        for word, c in (terms or {}).items():
            c = as_crational(c)
            if c:
                clean[tuple(word)] = c
        self._terms = clean

    @classmethod
    def word(cls, *letters, coef=1) -> "NCPoly":
        return cls({tuple(letters): coef})

    @classmethod
    def const(cls, c) -> "NCPoly":
        return cls({(): c})

    @classmethod
    def coerce(cls, value) -> "NCPoly":
        return value if isinstance(value, NCPoly) else cls.const(value)

    def items(self):
        return self._terms.items()

    def words(self) -> set:
        return set(self._terms)

    def generators(self) -> set:
        return {g for w in self._terms for g in w}

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def coefficient(self, word) -> CRational:
        return self._terms.get(tuple(word), CRational(0))

    def __add__(self, other):
        other = NCPoly.coerce(other)
        out = dict(self._terms)
        for w, c in other._terms.items():
            out[w] = out[w] + c if w in out else c
        return NCPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return NCPoly({w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-NCPoly.coerce(other))

    def __rsub__(self, other):
        return NCPoly.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, NCPoly):
            c = as_crational(other)
            return NCPoly({w: v * c for w, v in self._terms.items()})
        out = {}
        for wa, ca in self._terms.items():
            for wb, cb in other._terms.items():
                w = wa + wb
                out[w] = out[w] + ca * cb if w in out else ca * cb
        return NCPoly(out)

    def __rmul__(self, other):
        if isinstance(other, NCPoly):
            return other.__mul__(self)
        c = as_crational(other)
        return NCPoly({w: c * v for w, v in self._terms.items()})

    def __eq__(self, other):
        if not isinstance(other, NCPoly):
            try:
                other = NCPoly.coerce(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def evaluate(self, assignment: Mapping[str, object], identity):
        """Substitute generators by objects supporting ``@`` (e.g. matrices)."""
        total = 0 * identity
        for w, c in self._terms.items():
            term = identity
            for g in w:
                if g not in assignment:
                    raise SymbolError(g)
                term = term @ assignment[g]
            total = total + complex(c) * term
        return total

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for w, c in sorted(self._terms.items(), key=lambda kv: (len(kv[0]), kv[0])):
            body = " ".join(w)
            if c == 1 and body:
                parts.append(body)
            elif c == -1 and body:
                parts.append(f"-{body}")
            else:
                parts.append(f"({c}) {body}".rstrip())
        return " + ".join(parts)

    __repr__ = __str__


def inversions(word, rank: Mapping[str, int]) -> int:
    r = [rank[g] for g in word]
    return sum(1 for i in range(len(r)) for j in range(i + 1, len(r)) if r[i] > r[j])


def _rank_key(word, rank):
    return (len(word), inversions(word, rank), tuple(rank[g] for g in word))


class RewriteSystem:
    """Generator order plus rules ``(g, h) -> NCPoly`` for wrong-order pairs.

    ``adjoint`` optionally maps each generator to its Hermitian conjugate.
    """

    def __init__(self, order: Iterable[str], rules: Mapping[tuple, NCPoly], name: str = "custom",
                 adjoint: Mapping[str, str] | None = None, params: Mapping | None = None):
        self.order = tuple(order)
        self.rank = {g: k for k, g in enumerate(self.order)}
        self.name = name
        self.adjoint = dict(adjoint) if adjoint else {}
        self.params = dict(params or {})
        self.rules = {}
        for (g, h), rhs in rules.items():
            for s in (g, h):
                if s not in self.rank:
                    raise SymbolError(s, f"rule uses unknown generator {s!r}")
            if self.rank[g] <= self.rank[h]:
                raise ParameterError(f"rule {g} {h} is not a wrong-order pair")
            rhs = NCPoly.coerce(rhs)
            for w in rhs.words():
                if w not in ((h, g), (g,), (h,), ()):
                    raise ParameterError(f"rule {g} {h} -> {w} does not decrease the inversion count")
            self.rules[(g, h)] = rhs
        self._memo = {"leftmost": {}, "rightmost": {}}

    # -- construction from relations --------------------------------------------------
    @classmethod
    def from_relations(cls, order, relations: Iterable[NCPoly], **kwargs) -> "RewriteSystem":
        """Orient each relation ``r = 0`` by isolating its leading (wrong-order) word."""
        rank = {g: k for k, g in enumerate(order)}
        rules = {}
        for rel in relations:
            lead = max(rel.words(), key=lambda w: _rank_key(w, rank))
            if len(lead) != 2 or rank[lead[0]] <= rank[lead[1]]:
                raise ParameterError(f"relation {rel} has no wrong-order leading pair")
            c = rel.coefficient(lead)
            rest = rel - NCPoly.word(*lead, coef=c)
            rules[lead] = rest * (CRational(-1) / c)
        return cls(order, rules, **kwargs)

    def rescaled(self, factor) -> "RewriteSystem":
        """System for generators ``G = g / factor`` (i.e. ``g = factor * G``).

        A rule ``g h -> sum c w`` becomes ``G H -> sum c factor^(|w| - 2) W``.
        """
        factor = as_crational(factor)
        rules = {}
        for pair, rhs in self.rules.items():
            rules[pair] = NCPoly({w: c * factor ** (len(w) - 2) for w, c in rhs.items()})
        return RewriteSystem(self.order, rules, f"{self.name}/scaled", self.adjoint, self.params)

    # -- serialization -----------------------------------------------------------------
    def to_json(self) -> str:
        doc = {
            "name": self.name,
            "order": list(self.order),
            "adjoint": self.adjoint,
            "rules": [
                {
                    "lhs": list(pair),
                    "rhs": [[str(c.re), str(c.im), list(w)] for w, c in rhs.items()],
                }
                for pair, rhs in self.rules.items()
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RewriteSystem":
        doc = json.loads(text)
        rules = {}
        for r in doc["rules"]:
            rules[tuple(r["lhs"])] = NCPoly(
                {tuple(w): CRational(Fraction(re), Fraction(im)) for re, im, w in r["rhs"]}
            )
        return cls(doc["order"], rules, doc.get("name", "custom"), doc.get("adjoint"))

    # -- reduction -----------------------------------------------------------------------
    def _find(self, word, strategy):
        positions = range(len(word) - 1)
        if strategy == "rightmost":
            positions = reversed(positions)
        for k in positions:
            if (word[k], word[k + 1]) in self.rules:
                return k
            if self.rank[word[k]] > self.rank[word[k + 1]]:
                raise ParameterError(f"no rule for wrong-order pair {word[k]} {word[k + 1]}")
        return None

    def step(self, word, position: int) -> NCPoly:
        """Apply the rule at ``position`` once."""
        rhs = self.rules[(word[position], word[position + 1])]
        prefix, suffix = word[:position], word[position + 2:]
        return NCPoly({prefix + w + suffix: c for w, c in rhs.items()})

    def reduce_word(self, word: tuple, strategy: str = "leftmost") -> NCPoly:
        memo = self._memo[strategy]
        if word in memo:
            return memo[word]
        k = self._find(word, strategy)
        if k is None:
            result = NCPoly.word(*word)
        else:
            result = NCPoly()
            for w, c in self.step(word, k).items():
                result = result + self.reduce_word(w, strategy) * c
        memo[word] = result
        return result

    def check_generators(self, f: NCPoly):
        for g in f.generators():
            if g not in self.rank:
                raise SymbolError(g, f"generator {g!r} is not in the alphabet of {self.name}")

    def is_normal(self, word) -> bool:
        return all(self.rank[a] <= self.rank[b] for a, b in zip(word, word[1:]))


def normal_form(f, R: RewriteSystem, strategy: str = "leftmost") -> NCPoly:
    """Rewrite ``f`` until no wrong-order adjacent pair remains."""
    f = NCPoly.coerce(f)
    R.check_generators(f)
    out = NCPoly()
    for w, c in f.items():
        out = out + R.reduce_word(w, strategy) * c
    return out


def commutator(A, B, R: RewriteSystem) -> NCPoly:
    A, B = NCPoly.coerce(A), NCPoly.coerce(B)
    return normal_form(A * B - B * A, R)


def jacobi_check(R: RewriteSystem, g1: str, g2: str, g3: str) -> NCPoly:
    """Normal form of ``[g1,[g2,g3]] + [g2,[g3,g1]] + [g3,[g1,g2]]``.

    Inner commutators are normalised first, so a non-zero result exposes an
    ordering that is inconsistent with associativity.
    """
    a, b, c = (NCPoly.word(g) for g in (g1, g2, g3))
    return normal_form(
        commutator(a, commutator(b, c, R), R)
        + commutator(b, commutator(c, a, R), R)
        + commutator(c, commutator(a, b, R), R),
        R,
    )


def verify_relation(lhs, rhs, R: RewriteSystem) -> bool:
    return normal_form(NCPoly.coerce(lhs) - NCPoly.coerce(rhs), R).is_zero()


def dagger(f: NCPoly, adjoint: Mapping[str, str]) -> NCPoly:
    """Hermitian conjugation: reverse words, conjugate coefficients, dagger letters."""
    return NCPoly(
        {tuple(adjoint.get(g, g) for g in reversed(w)): c.conjugate() for w, c in f.items()}
    )


# ----------------------------------------------------------------------------- shipped systems

SYSTEMS = ("eq1", "eq5", "eq5-wrong", "canonical", "qparticle")


def _frac(value) -> Fraction:
    return Fraction(value) if not isinstance(value, str) else Fraction(value.strip())


def builtin_system(name: str, hbar=Fraction(1, 10), beta=Fraction(1)) -> RewriteSystem:
    """Rule systems built from the postulated commutators.

    * ``eq1``: ``b b+ - q^2 b+ b = hbar`` with ``1 - q^2 = hbar/beta``;
    * ``eq5``: ``[x,p] = i hbar (1 - i x p / beta)``, its Hermitian conjugate,
      and ``[p+,p] = -hbar p p+ / beta``;
    * ``eq5-wrong``: as ``eq5`` but ``[p+,p] = -hbar p+ p / beta``;
    * ``canonical``: ``[x,p] = i hbar``;
    * ``qparticle``: ``[x,p] = i hbar (1 + (x p + p x)/(2 beta))``.
    """
    hbar, beta = _frac(hbar), _frac(beta)
    if hbar <= 0 or beta == 0:
        raise ParameterError("need hbar > 0 and beta != 0")
    params = {"hbar": hbar, "beta": beta}
    W = NCPoly.word
    if name == "eq1":
        q2 = 1 - hbar / beta
        rel = W("b", "b+") - W("b+", "b", coef=q2) - NCPoly.const(hbar)
        return RewriteSystem.from_relations(
            ("b+", "b"), [rel], name="eq1", adjoint={"b": "b+", "b+": "b"}, params={**params, "q2": q2}
        )
    if name in ("eq5", "eq5-wrong"):
        adjoint = {"x": "x", "p": "p+", "p+": "p"}
        first = (W("x", "p") - W("p", "x")) - (NCPoly.const(I * hbar) + W("x", "p", coef=hbar / beta))
        second = dagger(first, adjoint)
        ordered = ("p", "p+") if name == "eq5" else ("p+", "p")
        third = (W("p+", "p") - W("p", "p+")) + W(*ordered, coef=hbar / beta)
        return RewriteSystem.from_relations(
            ("x", "p+", "p"), [first, second, third], name=name, adjoint=adjoint,
            params={**params, "q": 1 - hbar / beta},
        )
    if name == "canonical":
        rel = W("x", "p") - W("p", "x") - NCPoly.const(I * hbar)
        return RewriteSystem.from_relations(("x", "p"), [rel], name="canonical", adjoint={"x": "x", "p": "p"},
                                            params=params)
    if name == "qparticle":
        eps = I * hbar / (2 * beta)
        rel = (W("x", "p") - W("p", "x")) - (NCPoly.const(I * hbar) + (W("x", "p") + W("p", "x")) * (I * hbar / (2 * beta)))
        q = (1 - eps) / (1 + eps)
        return RewriteSystem.from_relations(("x", "p"), [rel], name="qparticle", adjoint={"x": "x", "p": "p"},
                                            params={**params, "q": q})
    raise ParameterError(f"unknown rule system {name!r}; choose from {', '.join(SYSTEMS)}")


def random_ncpoly(R: RewriteSystem, rng: random.Random, max_len: int = 6, max_terms: int = 3) -> NCPoly:
    """Random polynomial over ``R``'s alphabet with small Gaussian-rational coefficients."""
    out = NCPoly()
    for _ in range(rng.randint(1, max_terms)):
        word = tuple(rng.choice(R.order) for _ in range(rng.randint(0, max_len)))
        coef = CRational(Fraction(rng.randint(-5, 5), rng.randint(1, 4)), Fraction(rng.randint(-3, 3), rng.randint(1, 4)))
        out = out + NCPoly.word(*word, coef=coef)
    return out
