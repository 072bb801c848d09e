"""Exact sparse multivariate polynomials over Gaussian rationals.

A :class:`PolyExpr` maps monomials to :class:`~qdeform.scalars.CRational`
coefficients. A monomial is a sorted tuple of ``(symbol, exponent)`` pairs.
Exponents are positive for phase-space coordinates; the reserved parameter
symbols (``beta``, ``hbar``, ``q``) may also carry negative exponents so that
``1/beta`` is a monomial and identities can be proved with a symbolic
deformation parameter.
"""

from __future__ import annotations

import numbers
from collections import defaultdict
from typing import Iterable, Mapping

import numpy as np

from .errors import SymbolError
from .scalars import CRational, as_crational

__all__ = ["PolyExpr", "PARAMETERS", "Monomial"]

PARAMETERS = frozenset({"beta", "hbar", "q"})

Monomial = tuple  # tuple[tuple[str, int], ...]


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for s, e in b:
        k = exps.get(s, 0) + e
        if k:
            exps[s] = k
        else:
            exps.pop(s, None)
    return tuple(sorted(exps.items()))


class PolyExpr:
    """Immutable exact polynomial. Zero coefficients are never stored."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        clean = {}
        for mono, coef in (terms or {}).items():
            c = coef if isinstance(coef, CRational) else as_crational(coef)
            if c:
                for s, e in mono:
                    if e < 0 and s not in PARAMETERS:
                        raise ValueError(f"negative power of non-parameter symbol {s!r}")
                clean[tuple(sorted(mono))] = c
        self._terms = dict(sorted(clean.items()))
        self._hash = None

    # -- constructors -----------------------------------------------------------
    @classmethod
    def const(cls, value) -> "PolyExpr":
        return cls({(): value})

    @classmethod
    def symbol(cls, name: str, power: int = 1) -> "PolyExpr":
        if power == 0:
            return cls.const(1)
        return cls({((name, power),): 1})

    @classmethod
    def coerce(cls, value) -> "PolyExpr":
        if isinstance(value, PolyExpr):
            return value
        return cls.const(value)

    # -- introspection ----------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def symbols(self) -> set:
        return {s for mono in self._terms for s, _ in mono}

    def is_constant(self) -> bool:
        return all(not mono for mono in self._terms)

    def constant_term(self) -> CRational:
        return self._terms.get((), CRational(0))

    def degree(self, variables: Iterable[str] | None = None) -> int:
        """Total degree, counted over ``variables`` only when given."""
        if not self._terms:
            return -1
        var = None if variables is None else set(variables)
        return max(
            sum(e for s, e in mono if var is None or s in var) for mono in self._terms
        )

    def homogeneous_parts(self, variables: Iterable[str]) -> dict:
        """Split into components homogeneous in ``variables``: ``{degree: PolyExpr}``."""
        var = set(variables)
        parts = defaultdict(dict)
        for mono, c in self._terms.items():
            parts[sum(e for s, e in mono if s in var)][mono] = c
        return {d: PolyExpr(t) for d, t in sorted(parts.items())}

    # -- arithmetic ---------------------------------------------------------------
    def __add__(self, other):
        other = PolyExpr.coerce(other)
        out = dict(self._terms)
        for mono, c in other._terms.items():
            out[mono] = out[mono] + c if mono in out else c
        return PolyExpr(out)

    __radd__ = __add__

    def __neg__(self):
        return PolyExpr({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-PolyExpr.coerce(other))

    def __rsub__(self, other):
        return PolyExpr.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, PolyExpr):
            c = as_crational(other)
            return PolyExpr({m: v * c for m, v in self._terms.items()})
        out = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                m = _mono_mul(ma, mb)
                out[m] = out[m] + ca * cb if m in out else ca * cb
        return PolyExpr(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PolyExpr):
            if len(other) != 1:
                raise ValueError("can only divide by a single monomial")
            (mono, c), = other.items()
            if any(s not in PARAMETERS for s, _ in mono):
                raise ValueError("division by a coordinate is not polynomial")
            inv = PolyExpr({tuple((s, -e) for s, e in mono): CRational(1) / c})
            return self * inv
        c = as_crational(other)
        return self * (CRational(1) / c)

    def __pow__(self, k: int):
        if not isinstance(k, numbers.Integral) or k < 0:
            if len(self) == 1 and isinstance(k, numbers.Integral):
                (mono, c), = self.items()
                if all(s in PARAMETERS for s, _ in mono):
                    return PolyExpr({tuple((s, e * k) for s, e in mono): c ** k})
            raise ValueError("polynomial powers must be non-negative integers")
        result, base = PolyExpr.const(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, PolyExpr):
            try:
                other = PolyExpr.coerce(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(tuple(self._terms.items())))
        return self._hash

    # -- calculus / substitution -------------------------------------------------
    def diff(self, symbol: str) -> "PolyExpr":
        out = {}
        for mono, c in self._terms.items():
            exps = dict(mono)
            e = exps.get(symbol, 0)
            if e == 0:
                continue
            if e == 1:
                del exps[symbol]
            else:
                exps[symbol] = e - 1
            out[tuple(sorted(exps.items()))] = c * e
        return PolyExpr(out)

    def subs(self, mapping: Mapping[str, object]) -> "PolyExpr":
        """Substitute symbols by numbers or polynomials (exactly)."""
        images = {k: PolyExpr.coerce(v) for k, v in mapping.items()}
        out = PolyExpr()
        for mono, c in self._terms.items():
            term = PolyExpr({tuple((s, e) for s, e in mono if s not in images): c})
            for s, e in mono:
                if s in images:
                    term = term * (images[s] ** e)
            out = out + term
        return out

    def rename(self, mapping: Mapping[str, str]) -> "PolyExpr":
        out = {}
        for mono, c in self._terms.items():
            m = tuple(sorted((mapping.get(s, s), e) for s, e in mono))
            out[m] = out[m] + c if m in out else c
        return PolyExpr(out)

    def conjugate(self, involution: Mapping[str, str] | None = None) -> "PolyExpr":
        """Complex-conjugate coefficients and swap symbols through ``involution``."""
        swapped = self.rename(involution or {})
        return PolyExpr({m: c.conjugate() for m, c in swapped.items()})

    def scale_by_degree(self, variables: Iterable[str], factor_of_degree) -> "PolyExpr":
        var = set(variables)
        return PolyExpr(
            {
                m: c * as_crational(factor_of_degree(sum(e for s, e in m if s in var)))
                for m, c in self._terms.items()
            }
        )

    # -- evaluation ---------------------------------------------------------------
    def evaluate(self, point: Mapping[str, object]):
        """Evaluate at ``point``; exact when every bound value is exact."""
        exact = all(isinstance(v, (CRational, numbers.Rational)) for v in point.values())
        total = CRational(0) if exact else 0j
        for mono, c in self._terms.items():
            val = c if exact else complex(c)
            for s, e in mono:
                if s not in point:
                    raise SymbolError(s, f"symbol {s!r} is not bound in the evaluation point")
                x = point[s]
                if exact:
                    val = val * (as_crational(x) ** e)
                else:
                    val = val * complex(x) ** e
            total = total + val
        return total

    def compile(self, variables: list[str]) -> "CompiledPoly":
        return CompiledPoly([self], variables)

    # -- printing -------------------------------------------------------------------
    def __str__(self):
        if not self._terms:
            return "0"
        pieces = []
        for mono, c in self._terms.items():
            factors = []
            for s, e in mono:
                factors.append(s if e == 1 else f"{s}^{e}")
            body = " * ".join(factors)
            if c == 1 and body:
                piece, sign = body, "+"
            elif c == -1 and body:
                piece, sign = body, "-"
            else:
                if c.im == 0:
                    sign = "-" if c.re < 0 else "+"
                    cstr = str(abs(c.re))
                    if "/" in cstr:
                        cstr = f"({cstr})"
                elif c.re == 0:
                    sign = "-" if c.im < 0 else "+"
                    cstr = "i" if abs(c.im) == 1 else f"({CRational(0, abs(c.im))})"
                else:
                    sign, cstr = "+", f"({c})"
                piece = f"{cstr} * {body}" if body else cstr
            pieces.append((sign, piece))
        first_sign, first = pieces[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, piece in pieces[1:]:
            text += f" {sign} {piece}"
        return text

    def __repr__(self):
        return f"PolyExpr({str(self)!r})"


class CompiledPoly:
    """Vectorised complex-float evaluator for a list of polynomials.

    Only symbols listed in ``variables`` may appear (parameters must have been
    substituted beforehand).
    """

    def __init__(self, polys: list[PolyExpr], variables: list[str]):
        index = {s: k for k, s in enumerate(variables)}
        self.variables = list(variables)
        self._blocks = []
        for p in polys:
            exps = np.zeros((max(len(p), 1), len(variables)), dtype=int)
            coefs = np.zeros(max(len(p), 1), dtype=complex)
            for row, (mono, c) in enumerate(p.items()):
                coefs[row] = complex(c)
                for s, e in mono:
                    if s not in index:
                        raise SymbolError(s, f"symbol {s!r} is not a compiled variable")
                    exps[row, index[s]] = e
            self._blocks.append((exps, coefs))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        out = np.empty(len(self._blocks), dtype=complex)
        for k, (exps, coefs) in enumerate(self._blocks):
            out[k] = coefs @ np.prod(x[None, :] ** exps, axis=1)
        return out
