"""Quadratic Poisson structures on polynomial phase spaces.

The bracket of two observables is ``{f, g} = w^{jk} d_j f d_k g`` where the
bivector entries ``w^{jk}`` are exact polynomials in the chart coordinates
(and possibly the symbolic parameter ``beta``). Everything here is exact; the
numeric helpers at the bottom (Darboux map, covariant Jacobi check) work in
floating point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ParameterError, SymbolError
from .poly import PARAMETERS, PolyExpr
from .scalars import CRational, as_crational

__all__ = [
    "CoordinateChart",
    "PoissonStructure",
    "bracket",
    "jacobi_residual",
    "satisfies_jacobi",
    "covariant_jacobi_residual",
    "builtin",
    "BUILTINS",
    "casimir_check",
    "lattice_casimir",
    "darboux_map_qosc1",
    "DarbouxMap",
    "evaluate",
    "real_form",
    "SYMBOLIC",
]

SYMBOLIC = "beta"
I = CRational(0, 1)


@dataclass(frozen=True)
class CoordinateChart:
    """Ordered coordinate names plus the conjugation involution.

    ``pairing`` maps every name to its conjugate partner; real coordinates are
    paired with themselves.
    """

    names: tuple
    pairing: tuple  # tuple of (name, partner) for every name
    kind: str = "real"

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        pairing = dict(self.pairing) if self.pairing else {n: n for n in names}
        if set(pairing) != set(names):
            raise ValueError("every chart symbol needs exactly one conjugation partner")
        for a, b in pairing.items():
            if pairing.get(b) != a:
                raise ValueError(f"conjugation is not an involution at {a!r}")
        if len(set(names)) != len(names):
            raise ValueError("duplicate chart symbol")
        if self.kind not in ("real", "holomorphic"):
            raise ValueError("kind must be 'real' or 'holomorphic'")
        if self.kind == "real" and any(a != b for a, b in pairing.items()):
            raise ValueError("real charts must pair every symbol with itself")
        object.__setattr__(self, "pairing", tuple((n, pairing[n]) for n in names))

    @classmethod
    def real(cls, names: Sequence[str]) -> "CoordinateChart":
        return cls(tuple(names), tuple((n, n) for n in names), "real")

    @classmethod
    def holomorphic(cls, names: Sequence[str], pairing: dict | None = None) -> "CoordinateChart":
        """Chart whose starred symbols (``b*``) are partners of the plain ones.

        ``pairing`` may be given explicitly to mix in self-conjugate symbols.
        """
        if pairing is None:
            pairing = {}
            for n in names:
                partner = n[:-1] if n.endswith("*") else n + "*"
                pairing[n] = partner if partner in names else n
        return cls(tuple(names), tuple(pairing.items()), "holomorphic")

    @property
    def involution(self) -> dict:
        return dict(self.pairing)

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SymbolError(name) from None


@dataclass(frozen=True)
class PoissonStructure:
    """A chart, an antisymmetric polynomial bivector and optional Casimirs."""

    chart: CoordinateChart
    bivector: tuple  # n x n tuple of PolyExpr
    casimirs: tuple = ()
    beta: object = None  # Fraction, or SYMBOLIC, or None for beta-free structures
    name: str = "custom"

    def __post_init__(self):
        n = self.chart.dim
        rows = tuple(tuple(PolyExpr.coerce(e) for e in row) for row in self.bivector)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ValueError(f"bivector must be {n}x{n}")
        for j in range(n):
            for k in range(j, n):
                if not (rows[j][k] + rows[k][j]).is_zero():
                    raise ValueError(
                        f"bivector is not antisymmetric at ({self.chart.names[j]}, {self.chart.names[k]})"
                    )
        object.__setattr__(self, "bivector", rows)
        object.__setattr__(self, "casimirs", tuple(PolyExpr.coerce(c) for c in self.casimirs))
        allowed = set(self.chart.names) | PARAMETERS
        for row in rows:
            for e in row:
                _check_symbols(e, allowed)

    @property
    def names(self) -> tuple:
        return self.chart.names

    @property
    def dim(self) -> int:
        return self.chart.dim

    def entry(self, a: str, b: str) -> PolyExpr:
        return self.bivector[self.chart.index(a)][self.chart.index(b)]

    def bind_beta(self, value=None) -> "PoissonStructure":
        """Replace a symbolic ``beta`` by an exact value (or return self)."""
        if self.beta != SYMBOLIC:
            return self
        if value is None:
            raise ParameterError("structure has symbolic beta; a value is required")
        value = _check_beta(value)
        sub = {"beta": value}
        return PoissonStructure(
            self.chart,
            tuple(tuple(e.subs(sub) for e in row) for row in self.bivector),
            tuple(c.subs(sub) for c in self.casimirs),
            value,
            self.name,
        )

    def bivector_at(self, point: dict) -> np.ndarray:
        """Complex matrix of the bivector evaluated at a (float) point."""
        n = self.dim
        out = np.empty((n, n), dtype=complex)
        for j in range(n):
            for k in range(n):
                out[j, k] = complex(self.bivector[j][k].evaluate(point))
        return out


def _check_symbols(expr: PolyExpr, allowed: set):
    for s in expr.symbols():
        if s not in allowed:
            raise SymbolError(s, f"symbol {s!r} is not a coordinate of the chart")


def _check_beta(beta):
    if beta == SYMBOLIC:
        return SYMBOLIC
    if isinstance(beta, float):
        if not math.isfinite(beta):
            raise ParameterError("beta must be finite")
    beta = Fraction(beta)
    if beta == 0:
        raise ParameterError("beta must be non-zero")
    return beta


def _inv_beta(beta) -> PolyExpr:
    if beta == SYMBOLIC:
        return PolyExpr.symbol("beta", -1)
    return PolyExpr.const(Fraction(1) / beta)


# ----------------------------------------------------------------------------- brackets

def bracket(f, g, P: PoissonStructure) -> PolyExpr:
    """Exact Poisson bracket ``{f, g}`` under the bivector of ``P``."""
    f, g = PolyExpr.coerce(f), PolyExpr.coerce(g)
    allowed = set(P.names) | PARAMETERS
    _check_symbols(f, allowed)
    _check_symbols(g, allowed)
    df = [f.diff(s) for s in P.names]
    dg = [g.diff(s) for s in P.names]
    out = PolyExpr()
    for j, fj in enumerate(df):
        if fj.is_zero():
            continue
        for k, gk in enumerate(dg):
            w = P.bivector[j][k]
            if gk.is_zero() or w.is_zero():
                continue
            out = out + w * fj * gk
    return out


def evaluate(f: PolyExpr, point: dict):
    """Evaluate ``f`` at ``point`` (exact for rational inputs)."""
    return PolyExpr.coerce(f).evaluate(point)


def jacobi_residual(P: PoissonStructure) -> list:
    """Contravariant Jacobiator ``S^{ijk} = w^{il} d_l w^{jk} + cyclic``.

    Returned for every index triple ``i <= j <= k`` (triples with repeats vanish
    by antisymmetry alone but are kept so two-dimensional charts still report).
    All entries are the zero polynomial iff the Jacobi identity holds.
    """
    n = P.dim
    names = P.names
    grads = [[[P.bivector[j][k].diff(s) for s in names] for k in range(n)] for j in range(n)]

    def term(i, j, k):
        out = PolyExpr()
        for l in range(n):
            w, d = P.bivector[i][l], grads[j][k][l]
            if not w.is_zero() and not d.is_zero():
                out = out + w * d
        return out

    return [
        term(i, j, k) + term(j, k, i) + term(k, i, j)
        for i, j, k in itertools.combinations_with_replacement(range(n), 3)
    ]


def satisfies_jacobi(P: PoissonStructure) -> bool:
    return all(r.is_zero() for r in jacobi_residual(P))


def casimir_check(P: PoissonStructure, C) -> bool:
    """True iff ``{C, theta}`` vanishes identically for every chart coordinate."""
    C = PolyExpr.coerce(C)
    return all(bracket(C, PolyExpr.symbol(s), P).is_zero() for s in P.names)


def covariant_jacobi_residual(P: PoissonStructure, point: dict) -> float:
    """Max-norm of ``d_k w_ij + cycle(k, i, j)`` for the inverse (symplectic) form.

    Uses ``d_k W^{-1} = -W^{-1} (d_k W) W^{-1}`` with exact polynomial
    derivatives of the bivector, so no finite differences are involved.
    """
    n = P.dim
    W = P.bivector_at(point)
    L = np.linalg.inv(W)
    dL = np.empty((n, n, n), dtype=complex)  # dL[k] = d_k L
    for k, s in enumerate(P.names):
        dW = np.array(
            [[complex(P.bivector[a][b].diff(s).evaluate(point)) for b in range(n)] for a in range(n)]
        )
        dL[k] = -L @ dW @ L
    worst = 0.0
    for i, j, k in itertools.combinations(range(n), 3):
        worst = max(worst, abs(dL[k][i, j] + dL[i][j, k] + dL[j][k, i]))
    return worst


# ----------------------------------------------------------------------------- built-ins

def _antisym(n, entries: dict) -> tuple:
    rows = [[PolyExpr() for _ in range(n)] for _ in range(n)]
    for (j, k), e in entries.items():
        rows[j][k] = e
        rows[k][j] = -e
    return tuple(tuple(r) for r in rows)


def _canonical(n: int, beta=None) -> PoissonStructure:
    names = ("x", "p") if n == 1 else tuple(f"x{i}" for i in range(1, n + 1)) + tuple(
        f"p{i}" for i in range(1, n + 1)
    )
    entries = {(i, n + i): PolyExpr.const(1) for i in range(n)}
    return PoissonStructure(CoordinateChart.real(names), _antisym(2 * n, entries), (), None, f"canonical({n})")


def _qosc1(beta) -> PoissonStructure:
    b, bs = PolyExpr.symbol("b"), PolyExpr.symbol("b*")
    entry = -I * (1 - bs * b * _inv_beta(beta))
    chart = CoordinateChart.holomorphic(("b", "b*"))
    return PoissonStructure(chart, _antisym(2, {(0, 1): entry}), (), beta, "qosc1")


def _qparticle(beta) -> PoissonStructure:
    x, p = PolyExpr.symbol("x"), PolyExpr.symbol("p")
    entry = 1 + x * p * _inv_beta(beta)
    return PoissonStructure(CoordinateChart.real(("x", "p")), _antisym(2, {(0, 1): entry}), (), beta, "qparticle")


def lattice_casimir(beta) -> PolyExpr:
    x, p, ps = PolyExpr.symbol("x"), PolyExpr.symbol("p"), PolyExpr.symbol("p*")
    return p * ps * x * _inv_beta(beta) - I * (p - ps)


def _lattice(beta) -> PoissonStructure:
    x, p, ps = PolyExpr.symbol("x"), PolyExpr.symbol("p"), PolyExpr.symbol("p*")
    ib = _inv_beta(beta)
    names = ("x", "p", "p*")
    chart = CoordinateChart.holomorphic(names, {"x": "x", "p": "p*", "p*": "p"})
    entries = {
        (0, 1): 1 - I * x * p * ib,
        (0, 2): 1 + I * x * ps * ib,
        (2, 1): I * p * ps * ib,
    }
    return PoissonStructure(chart, _antisym(3, entries), (lattice_casimir(beta),), beta, "lattice")


def _mode_names(prefix: str, n: int) -> tuple:
    plain = tuple(f"{prefix}{i}" for i in range(1, n + 1))
    return plain + tuple(s + "*" for s in plain)


def _suqn(n: int, beta) -> PoissonStructure:
    names = _mode_names("a", n)
    a = [PolyExpr.symbol(s) for s in names[:n]]
    ac = [PolyExpr.symbol(s) for s in names[n:]]
    ib = _inv_beta(beta)
    entries = {}
    for k in range(n):
        for j in range(n):
            if k < j:
                entries[(k, j)] = I * a[k] * a[j] * ib
                entries[(n + k, n + j)] = -I * ac[k] * ac[j] * ib
            if k != j:
                entries[(k, n + j)] = I * a[k] * ac[j] * ib
        occupation = PolyExpr()
        for m in range(k + 1):
            occupation = occupation + ac[m] * a[m]
        entries[(k, n + k)] = -I * (1 - 2 * ib * occupation)
    chart = CoordinateChart.holomorphic(names)
    return PoissonStructure(chart, _antisym(2 * n, entries), (), beta, f"suqn({n})")


def _diag(n: int, beta) -> PoissonStructure:
    names = _mode_names("z", n)
    ib = _inv_beta(beta)
    entries = {}
    for j in range(n):
        z, zc = PolyExpr.symbol(names[j]), PolyExpr.symbol(names[n + j])
        entries[(j, n + j)] = -I * (1 - 2 * z * zc * ib)
    chart = CoordinateChart.holomorphic(names)
    return PoissonStructure(chart, _antisym(2 * n, entries), (), beta, f"diag({n})")


BUILTINS = ("canonical", "qosc1", "qparticle", "lattice", "suqn", "diag")


def builtin(name: str, beta=1, n: int = 1) -> PoissonStructure:
    """Construct a shipped structure.

    ``beta`` is an exact rational (ints, Fractions, ``"p/q"`` strings) or
    :data:`SYMBOLIC` to keep ``1/beta`` as a formal symbol. ``n`` is the mode
    count for ``canonical``, ``suqn`` and ``diag``.
    """
    if n < 1:
        raise ParameterError("mode count n must be >= 1")
    if isinstance(beta, str) and beta != SYMBOLIC:
        beta = Fraction(beta)
    if name == "canonical":
        return _canonical(n)
    beta = _check_beta(beta)
    if name == "qosc1":
        return _qosc1(beta)
    if name == "qparticle":
        return _qparticle(beta)
    if name == "lattice":
        return _lattice(beta)
    if name == "suqn":
        return _suqn(n, beta)
    if name == "diag":
        return _diag(n, beta)
    raise ParameterError(f"unknown built-in structure {name!r}; choose from {', '.join(BUILTINS)}")


# ----------------------------------------------------------------------------- real form

def real_form(P: PoissonStructure) -> PoissonStructure:
    """Rewrite a holomorphic structure in real coordinates ``z = (u + i v)/sqrt(2)``.

    Every conjugate pair ``(z, z*)`` becomes ``(u, v)`` (``u1, v1, ...`` for
    several pairs); self-conjugate symbols are kept. Works for bivectors whose
    entries have only even total degree, which covers every quadratic
    structure, since the ``sqrt(2)`` factors then cancel exactly.
    """
    if P.chart.kind == "real":
        return P
    inv = P.chart.involution
    pairs = []
    selfconj = []
    for s in P.names:
        if inv[s] == s:
            selfconj.append(s)
        elif not s.endswith("*"):
            pairs.append((s, inv[s]))
    multi = len(pairs) > 1
    u_names = [f"u{k + 1}" if multi else "u" for k in range(len(pairs))]
    v_names = [f"v{k + 1}" if multi else "v" for k in range(len(pairs))]
    # sqrt(2)*u = z + z*, sqrt(2)*v = -i (z - z*)
    scaled = {}
    for (z, zc), u, v in zip(pairs, u_names, v_names):
        Z, Zc = PolyExpr.symbol(z), PolyExpr.symbol(zc)
        scaled[u] = (Z + Zc, 1)
        scaled[v] = (-I * (Z - Zc), 1)
    for s in selfconj:
        scaled[s] = (PolyExpr.symbol(s), 0)
    # z -> u + i v, z* -> u - i v (still scaled by sqrt(2))
    back = {}
    for (z, zc), u, v in zip(pairs, u_names, v_names):
        U, V = PolyExpr.symbol(u), PolyExpr.symbol(v)
        back[z] = U + I * V
        back[zc] = U - I * V
    new_names = []
    for s in P.names:
        if inv[s] == s:
            new_names.append(s)
        elif not s.endswith("*"):
            k = [p[0] for p in pairs].index(s)
            new_names.extend([u_names[k], v_names[k]])
    pair_vars = set(u_names) | set(v_names)

    def convert(expr: PolyExpr, sqrt2_power: int) -> PolyExpr:
        # expr is expressed via sqrt(2)-scaled coordinates; undo the scaling
        sub = expr.subs(back)
        out = {}
        for mono, c in sub.items():
            d = sum(e for s, e in mono if s in pair_vars) + sqrt2_power
            if d % 2:
                raise ValueError("real_form needs bivector entries of even degree")
            out[mono] = c * Fraction(1, 2 ** (d // 2))
        return PolyExpr(out)

    n = len(new_names)
    rows = [[PolyExpr() for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            ea, pa = scaled[new_names[a]]
            eb, pb = scaled[new_names[b]]
            entry = convert(bracket(ea, eb, P), pa + pb)
            if any(c.im != 0 for _, c in entry.items()):
                raise ValueError("real form has complex entries; structure is not real")
            rows[a][b] = entry
            rows[b][a] = -entry
    try:
        casimirs = tuple(convert(c, 0) for c in P.casimirs)
    except ValueError:
        casimirs = ()
    return PoissonStructure(
        CoordinateChart.real(new_names),
        tuple(tuple(r) for r in rows),
        casimirs,
        P.beta,
        f"{P.name}-real",
    )


# ----------------------------------------------------------------------------- Darboux map

@dataclass(frozen=True)
class DarbouxMap:
    """Action-angle chart ``(I, phi) -> (b, b*)`` for the one-mode structure.

    ``b = g(I) exp(-i phi)`` with ``g(I)^2 = beta (1 - exp(-I/beta))``; the
    canonical bracket ``{phi, I} = 1`` pushes forward to
    ``{b, b*} = -i (1 - b* b / beta)``.
    """

    beta: float

    def profile(self, action) -> np.ndarray:
        """``|b|^2`` as a function of the action ``I``."""
        action = np.asarray(action, dtype=float)
        if np.any(action < 0):
            raise DomainError("action I must be non-negative")
        return -self.beta * np.expm1(-action / self.beta)

    def __call__(self, action, angle):
        g = np.sqrt(self.profile(action))
        b = g * np.exp(-1j * np.asarray(angle, dtype=float))
        return b, np.conj(b)

    def jacobian(self, action, angle) -> np.ndarray:
        """``d(b, b*)/d(phi, I)`` as a 2x2 complex matrix."""
        if action < 0:
            raise DomainError("action I must be non-negative")
        g2 = float(self.profile(action))
        if g2 == 0.0:
            raise DomainError("the Darboux chart is singular at I = 0")
        g = math.sqrt(g2)
        dg = math.exp(-action / self.beta) / (2.0 * g)
        phase = np.exp(-1j * angle)
        return np.array(
            [
                [-1j * g * phase, dg * phase],
                [1j * g * np.conj(phase), dg * np.conj(phase)],
            ]
        )

    def pushforward_bracket(self, action, angle) -> complex:
        """``{b, b*}`` induced by ``{phi, I} = 1``."""
        J = self.jacobian(action, angle)
        canon = np.array([[0.0, 1.0], [-1.0, 0.0]])
        return complex((J @ canon @ J.T)[0, 1])


def darboux_map_qosc1(beta) -> DarbouxMap:
    beta = float(beta)
    if not beta > 0:
        raise ParameterError("the action-angle map needs beta > 0")
    return DarbouxMap(beta)
