"""Expression grammar for observables, Hamiltonians and Casimirs.

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | power
    power := atom ('^' unary)?          # right associative
    atom  := NUMBER | NAME | NAME'*' | 'i' | '(' expr ')'

``i`` is the imaginary unit and a number written directly before it
(``2i``, ``1/2i``) multiplies it. ``beta``, ``hbar`` and ``q`` are parameter
symbols. A trailing ``*`` belongs to the name (conjugate partner, ``b*``)
unless an operand follows it, in which case it is multiplication: ``b* * b``
and ``b*^2`` use the conjugate, ``p*x`` is a product.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError
from .poly import PARAMETERS, PolyExpr
from .scalars import CRational

__all__ = ["Num", "Sym", "Neg", "BinOp", "Pow", "parse_expr", "lower", "parse_poly", "unparse"]


@dataclass(frozen=True)
class Num:
    value: CRational
    pos: tuple = (1, 1)


@dataclass(frozen=True)
class Sym:
    name: str
    pos: tuple = (1, 1)


@dataclass(frozen=True)
class Neg:
    operand: object
    pos: tuple = (1, 1)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    pos: tuple = (1, 1)


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: object
    pos: tuple = (1, 1)


def _structural(node):
    """AST without positions, for equality tests."""
    if isinstance(node, Num):
        return ("num", node.value)
    if isinstance(node, Sym):
        return ("sym", node.name)
    if isinstance(node, Neg):
        return ("neg", _structural(node.operand))
    if isinstance(node, BinOp):
        return (node.op, _structural(node.left), _structural(node.right))
    return ("^", _structural(node.base), _structural(node.exponent))


# ----------------------------------------------------------------------------- lexer

def _is_operand_start(ch: str) -> bool:
    return ch.isalnum() or ch in "(._"


def _tokenize(text: str):
    tokens = []
    k, line, col = 0, 1, 1
    n = len(text)

    def advance(count):
        nonlocal k, line, col
        for _ in range(count):
            if text[k] == "\n":
                line, col = line + 1, 1
            else:
                col += 1
            k += 1

    while k < n:
        ch = text[k]
        pos = (line, col)
        if ch.isspace():
            advance(1)
            continue
        if ch.isdigit() or (ch == "." and k + 1 < n and text[k + 1].isdigit()):
            j = k
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            literal = text[k:j]
            if literal.count(".") > 1:
                raise ParseError(f"malformed number {literal!r}", *pos)
            tokens.append(("NUM", Fraction(literal), pos))
            advance(j - k)
            # a number glued to 'i' is an imaginary literal: 2i == 2*i
            if k < n and text[k] == "i" and not (k + 1 < n and (text[k + 1].isalnum() or text[k + 1] == "_")):
                tokens.append(("OP", "*", (line, col)))
                tokens.append(("I", None, (line, col)))
                advance(1)
            continue
        if ch.isalpha() or ch == "_":
            j = k
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            name = text[k:j]
            if j < n and text[j] == "*":
                m = j + 1
                while m < n and text[m].isspace():
                    m += 1
                if m >= n or not _is_operand_start(text[m]):
                    j += 1
                    name += "*"
            if name == "i":
                tokens.append(("I", None, pos))
            elif name == "i*":
                raise ParseError("the imaginary unit has no conjugate symbol", *pos)
            else:
                tokens.append(("NAME", name, pos))
            advance(j - k)
            continue
        if ch in "+-*/^()":
            tokens.append(("OP", ch, pos))
            advance(1)
            continue
        raise ParseError(f"unexpected character {ch!r}", *pos)
    tokens.append(("END", None, (line, col)))
    return tokens


# ----------------------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def accept(self, *ops):
        kind, val, _ = self.peek()
        if kind == "OP" and val in ops:
            return self.take()
        return None

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "END":
            raise ParseError(f"unexpected {val if val is not None else kind!r}", *pos)
        return node

    def expr(self):
        node = self.term()
        while True:
            tok = self.accept("+", "-")
            if not tok:
                return node
            node = BinOp(tok[1], node, self.term(), tok[2])

    def term(self):
        node = self.unary()
        while True:
            tok = self.accept("*", "/")
            if not tok:
                return node
            node = BinOp(tok[1], node, self.unary(), tok[2])

    def unary(self):
        tok = self.accept("-", "+")
        if tok:
            operand = self.unary()
            return Neg(operand, tok[2]) if tok[1] == "-" else operand
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.accept("^")
        if tok:
            return Pow(base, self.unary(), tok[2])
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "NUM":
            return Num(CRational(val), pos)
        if kind == "I":
            return Num(CRational(0, 1), pos)
        if kind == "NAME":
            return Sym(val, pos)
        if kind == "OP" and val == "(":
            node = self.expr()
            close = self.take()
            if close[0] != "OP" or close[1] != ")":
                raise ParseError("expected ')'", *close[2])
            return node
        if kind == "END":
            raise ParseError("unexpected end of input", *pos)
        raise ParseError(f"unexpected {val!r}", *pos)


def parse_expr(text: str):
    """Parse ``text`` into an AST; raises :class:`ParseError` with line/column."""
    if not text or not text.strip():
        raise ParseError("empty expression")
    return _Parser(text).parse()


# ----------------------------------------------------------------------------- lowering

def lower(node, bindings: dict | None = None) -> PolyExpr:
    """Lower an AST to an exact polynomial.

    ``bindings`` substitutes parameter symbols (e.g. ``{"beta": 2}``).
    Division is only allowed by non-zero constants or parameter monomials, and
    powers must be integer constants (negative only on parameters).
    """
    out = _lower(node)
    if bindings:
        out = out.subs({k: Fraction(v) if not isinstance(v, PolyExpr) else v for k, v in bindings.items()})
    return out


def _lower(node) -> PolyExpr:
    if isinstance(node, Num):
        return PolyExpr.const(node.value)
    if isinstance(node, Sym):
        return PolyExpr.symbol(node.name)
    if isinstance(node, Neg):
        return -_lower(node.operand)
    if isinstance(node, BinOp):
        left, right = _lower(node.left), _lower(node.right)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if right.is_zero():
            raise ParseError("division by zero", *node.pos)
        if len(right) != 1 or any(s not in PARAMETERS for s in right.symbols()):
            raise ParseError("division by a non-constant is not polynomial", *node.pos)
        return left / right
    if isinstance(node, Pow):
        base, exponent = _lower(node.base), _lower(node.exponent)
        c = exponent.constant_term()
        if not exponent.is_constant() or c.im != 0 or c.re.denominator != 1:
            raise ParseError("exponent must be an integer constant", *node.pos)
        k = int(c.re)
        if k < 0 and not (len(base) == 1 and base.symbols() <= PARAMETERS):
            raise ParseError("negative powers are only allowed on parameters", *node.pos)
        return base ** k
    raise TypeError(f"not an AST node: {node!r}")


def parse_poly(text: str, bindings: dict | None = None) -> PolyExpr:
    return lower(parse_expr(text), bindings)


def unparse(node) -> str:
    """Fully parenthesised text that parses back to the same AST."""
    if isinstance(node, Num):
        v = node.value
        if v == CRational(0, 1):
            return "i"
        if v.im == 0:
            return f"({v.re})" if v.re < 0 or v.re.denominator != 1 else str(v.re)
        return f"({v.re} + ({v.im})*i)"
    if isinstance(node, Sym):
        return node.name + (" " if node.name.endswith("*") else "")
    if isinstance(node, Neg):
        return f"(-{unparse(node.operand)})"
    if isinstance(node, BinOp):
        return f"({unparse(node.left)} {node.op} {unparse(node.right)})"
    return f"({unparse(node.base)}^{unparse(node.exponent)})"
