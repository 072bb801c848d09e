"""Deformed brackets as Dirac brackets of second-class constraints.

Given an invertible bivector ``w^{ij}(theta)`` with inverse ``w_ij`` (so that
``w_ij w^{jk} = delta_i^k``), double the phase space with momenta ``pi_i``
(canonical ``{theta^j, pi_k} = delta^j_k``) and impose

    phi_i = pi_i + wbar_ij(theta) theta^j,   wbar_ij(theta) = int_0^1 a w_ij(a theta) da.

The constraint matrix ``{phi_a, phi_b}`` then equals ``w_ab`` and the Dirac
bracket of the coordinates reproduces ``w^{ij}``.

Two routes compute ``wbar`` and its gradient:

* ``"closed"``: exact formulas for constant bivectors and for two-dimensional
  bivectors ``w^{12} = c + Q(theta)`` with ``Q`` homogeneous quadratic;
* ``"quadrature"``: adaptive Gauss-Legendre on the ray integral, with the
  gradient differentiated under the integral sign
  (``d_k w_lower = -w_lower (d_k W) w_lower`` uses exact polynomial derivatives).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import DegeneracyError, ParameterError, QuadratureError
from .poisson import PoissonStructure, builtin, real_form
from .poly import PolyExpr

__all__ = [
    "adaptive_gauss_legendre",
    "OmegaBar",
    "omega_bar",
    "invert_bivector",
    "ConstraintSet",
    "build_constraints",
    "ExtendedFunction",
    "coordinate",
    "momentum",
    "constraint",
    "from_poly",
    "dirac_bracket",
    "ReductionReport",
    "verify_reduction",
    "sample_points",
    "structure_for",
]

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(12)
DET_THRESHOLD = 1e-12


def adaptive_gauss_legendre(f: Callable, a: float, b: float, tol: float = 1e-13, max_depth: int = 40):
    """Integrate an array-valued ``f`` on ``[a, b]`` by bisection until the
    12-point rule and its two-panel refinement agree to ``tol`` (max norm).

    Returns ``(value, error_estimate)``.
    """

    def rule(lo, hi):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        vals = [f(mid + half * x) for x in _NODES]
        return half * sum(w * v for w, v in zip(_WEIGHTS, vals))

    def recurse(lo, hi, whole, depth, budget):
        mid = 0.5 * (lo + hi)
        left, right = rule(lo, mid), rule(mid, hi)
        err = np.max(np.abs(left + right - whole))
        if err <= max(budget, floor):
            return left + right, err
        if depth >= max_depth:
            raise QuadratureError(f"no convergence on [{lo}, {hi}] (error {err:.3e})")
        lv, le = recurse(lo, mid, left, depth + 1, budget / 2)
        rv, re_ = recurse(mid, hi, right, depth + 1, budget / 2)
        return lv + rv, le + re_

    whole = rule(a, b)
    # below this the panel estimates only see rounding noise
    floor = 4 * np.finfo(float).eps * float(np.max(np.abs(whole)))
    value, err = recurse(a, b, whole, 0, tol)
    if not np.all(np.isfinite(value)):
        raise QuadratureError("integrand is not finite on the segment")
    return value, err


@dataclass(frozen=True)
class OmegaBar:
    quadrature: np.ndarray
    error_estimate: float
    closed_form: np.ndarray | None = None


def omega_bar(omega_lower, point, quad_tol: float = 1e-12) -> OmegaBar:
    """Ray average ``int_0^1 a w_ij(a theta) da`` of a lower (symplectic) form.

    ``omega_lower`` is either a callable ``theta -> matrix`` or a square
    nested sequence of :class:`PolyExpr` in variables ``theta0, theta1, ...``
    or any names listed by ``variables`` attribute. For polynomial input the
    exact value is also returned: a component homogeneous of degree ``k``
    scales by ``1/(k+2)``.
    """
    point = np.asarray(point, dtype=float)
    closed = None
    if callable(omega_lower):
        func = omega_lower
    else:
        rows = [[PolyExpr.coerce(e) for e in row] for row in omega_lower]
        names = getattr(omega_lower, "variables", None) or [f"theta{i}" for i in range(len(point))]
        env = dict(zip(names, point))

        def func(theta):
            pt = dict(zip(names, theta))
            return np.array([[complex(e.evaluate(pt)) for e in row] for row in rows])

        closed = np.array(
            [
                [complex(e.scale_by_degree(names, lambda k: 1.0 / (k + 2)).evaluate(env)) for e in row]
                for row in rows
            ]
        )
        if np.all(closed.imag == 0):
            closed = closed.real
    value, err = adaptive_gauss_legendre(lambda a: a * np.asarray(func(a * point)), 0.0, 1.0, quad_tol)
    value = np.asarray(value)
    if np.iscomplexobj(value) and np.all(value.imag == 0):
        value = value.real
    return OmegaBar(value, float(err), closed)


def invert_bivector(W: np.ndarray, scale: float | None = None) -> np.ndarray:
    """LU inverse with a determinant-based degeneracy check."""
    W = np.asarray(W)
    lu, piv = scipy.linalg.lu_factor(W)
    det = np.prod(np.diag(lu))
    ref = scale if scale is not None else max(1.0, float(np.max(np.abs(W)))) ** W.shape[0]
    if abs(det) <= DET_THRESHOLD * ref:
        raise DegeneracyError(f"bivector is degenerate (|det| = {abs(det):.3e})")
    return scipy.linalg.lu_solve((lu, piv), np.eye(W.shape[0], dtype=W.dtype))


def _closed_form_kind(P: PoissonStructure):
    if all(e.is_constant() for row in P.bivector for e in row):
        return "constant"
    if P.dim == 2:
        parts = P.bivector[0][1].homogeneous_parts(P.names)
        if set(parts) <= {0, 2} and 0 in parts:
            return "quadratic2"
    return None


@dataclass
class ConstraintSet:
    """Constraints ``phi_i = pi_i + wbar_ij(theta) theta^j`` for a structure."""

    structure: PoissonStructure
    method: str = "closed"
    quad_tol: float = 1e-13
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        P = self.structure
        if P.chart.kind != "real":
            raise ParameterError("constraints need a real chart; use real_form() first")
        if self.method not in ("closed", "quadrature"):
            raise ParameterError("method must be 'closed' or 'quadrature'")
        self._kind = _closed_form_kind(P)
        if self.method == "closed" and self._kind is None:
            raise ParameterError(f"no closed form for {P.name}; use method='quadrature'")
        beta = P.beta
        if beta == "beta":
            raise ParameterError("bind a numeric beta first")
        self._upper = [[e for e in row] for row in P.bivector]
        self._grad_upper = [[[e.diff(s) for s in P.names] for e in row] for row in P.bivector]

    @property
    def n(self) -> int:
        return self.structure.dim

    # -- bivector pieces ---------------------------------------------------------
    def _env(self, theta):
        return dict(zip(self.structure.names, theta))

    def upper(self, theta) -> np.ndarray:
        env = self._env(theta)
        return np.array([[complex(e.evaluate(env)) for e in row] for row in self._upper]).real

    def lower(self, theta) -> np.ndarray:
        return invert_bivector(self.upper(theta))

    def _lower_and_grad(self, theta):
        env = self._env(theta)
        L = self.lower(theta)
        dL = np.empty((self.n, self.n, self.n))
        for k in range(self.n):
            dW = np.array([[complex(g[k].evaluate(env)).real for g in row] for row in self._grad_upper])
            dL[k] = -L @ dW @ L
        return L, dL

    # -- wbar ----------------------------------------------------------------------
    def omega_bar(self, theta) -> tuple:
        """``(wbar, d wbar)`` at ``theta``; ``d wbar[k] = d_k wbar``."""
        theta = np.asarray(theta, dtype=float)
        key = tuple(theta)
        if key in self._cache:
            return self._cache[key]
        if self.method == "closed":
            result = self._closed(theta)
        else:
            result = self._quadrature(theta)
        self._cache[key] = result
        return result

    def _quadrature(self, theta):
        n = self.n

        def integrand(a):
            L, dL = self._lower_and_grad(a * theta)
            # wbar gets weight a, its gradient a^2 (chain rule on w(a theta))
            return np.concatenate([a * L[None], a * a * dL])

        value, _ = adaptive_gauss_legendre(integrand, 0.0, 1.0, self.quad_tol)
        return value[0], value[1:]

    def _closed(self, theta):
        n = self.n
        if self._kind == "constant":
            return 0.5 * self.lower(theta), np.zeros((n, n, n))
        # w^{12} = c + Q(theta): w_12 = -1/(c + Q); wbar_12 = -h(Q/c)/(2c), h(t) = log1p(t)/t
        parts = self._upper[0][1].homogeneous_parts(self.structure.names)
        c = complex(parts[0].evaluate({})).real
        quad = parts.get(2, PolyExpr())
        env = self._env(theta)
        Q = complex(quad.evaluate(env)).real
        dQ = np.array([complex(quad.diff(s).evaluate(env)).real for s in self.structure.names])
        t = Q / c
        if t <= -1.0:
            raise DegeneracyError("ray from the origin crosses a degenerate point of the bivector")
        h, dh = _log1p_ratio(t)
        w12 = -h / (2.0 * c)
        dw12 = -dh / (2.0 * c) * dQ / c
        wbar = np.array([[0.0, w12], [-w12, 0.0]])
        grad = np.zeros((2, 2, 2))
        grad[:, 0, 1] = dw12
        grad[:, 1, 0] = -dw12
        return wbar, grad

    # -- constraint data -------------------------------------------------------------
    def theta_jacobian(self, theta) -> np.ndarray:
        """``M[a, j] = d phi_a / d theta^j = wbar_aj + theta^c d_j wbar_ac``."""
        theta = np.asarray(theta, dtype=float)
        wbar, grad = self.omega_bar(theta)
        return wbar + np.einsum("jac,c->aj", grad, theta)

    def momenta_on_surface(self, theta) -> np.ndarray:
        wbar, _ = self.omega_bar(theta)
        return -wbar @ np.asarray(theta, dtype=float)

    def values(self, theta, pi) -> np.ndarray:
        wbar, _ = self.omega_bar(theta)
        return np.asarray(pi) + wbar @ np.asarray(theta, dtype=float)

    def delta(self, theta) -> np.ndarray:
        """Constraint matrix ``{phi_a, phi_b} = M_ab - M_ba``."""
        M = self.theta_jacobian(theta)
        return M - M.T


def _log1p_ratio(t: float):
    """``h(t) = log(1+t)/t`` and ``h'(t)``, with series near ``t = 0``."""
    if abs(t) < 1e-3:
        h = sum((-t) ** k / (k + 1) for k in range(12))
        dh = sum((-1) ** k * k * t ** (k - 1) / (k + 1) for k in range(1, 12))
        return h, dh
    lg = np.log1p(t)
    return lg / t, (t / (1.0 + t) - lg) / (t * t)


def build_constraints(P: PoissonStructure, method: str = "closed", quad_tol: float = 1e-13) -> ConstraintSet:
    """Constraint set for ``P`` (holomorphic structures are converted to real form)."""
    if P.chart.kind != "real":
        P = real_form(P)
    return ConstraintSet(P, method, quad_tol)


# ----------------------------------------------------------------------------- functions

@dataclass(frozen=True)
class ExtendedFunction:
    """Function on the extended space given by its gradient ``(d/dtheta, d/dpi)``."""

    gradient: Callable
    label: str = "f"

    def __call__(self, theta, pi):
        return self.gradient(theta, pi)


def coordinate(i: int) -> ExtendedFunction:
    def grad(theta, pi):
        g = np.zeros(len(theta))
        g[i] = 1.0
        return g, np.zeros(len(theta))

    return ExtendedFunction(grad, f"theta{i}")


def momentum(i: int) -> ExtendedFunction:
    def grad(theta, pi):
        g = np.zeros(len(theta))
        g[i] = 1.0
        return np.zeros(len(theta)), g

    return ExtendedFunction(grad, f"pi{i}")


def constraint(S: ConstraintSet, a: int) -> ExtendedFunction:
    def grad(theta, pi):
        e = np.zeros(S.n)
        e[a] = 1.0
        return S.theta_jacobian(theta)[a], e

    return ExtendedFunction(grad, f"phi{a}")


def from_poly(f: PolyExpr, theta_names: Sequence[str], pi_names: Sequence[str]) -> ExtendedFunction:
    """Wrap a polynomial in ``theta`` and ``pi`` symbols."""
    f = PolyExpr.coerce(f)
    d_theta = [f.diff(s) for s in theta_names]
    d_pi = [f.diff(s) for s in pi_names]

    def grad(theta, pi):
        env = dict(zip(theta_names, theta))
        env.update(zip(pi_names, pi))
        return (
            np.array([complex(d.evaluate(env)) for d in d_theta]),
            np.array([complex(d.evaluate(env)) for d in d_pi]),
        )

    return ExtendedFunction(grad, str(f))


def _canonical(gA, gB) -> complex:
    (at, ap), (bt, bp) = gA, gB
    return complex(np.dot(at, bp) - np.dot(ap, bt))


def dirac_bracket(A: ExtendedFunction, B: ExtendedFunction, S: ConstraintSet, theta, pi=None) -> complex:
    """``{A,B}_D = {A,B} - {A,phi_a} Delta^{ab} {phi_b,B}`` at ``(theta, pi)``.

    ``pi`` defaults to the point on the constraint surface above ``theta``.
    """
    theta = np.asarray(theta, dtype=float)
    if pi is None:
        pi = S.momenta_on_surface(theta)
    M = S.theta_jacobian(theta)
    Delta = M - M.T
    Dinv = invert_bivector(Delta)
    gA, gB = A(theta, pi), B(theta, pi)
    eye = np.eye(S.n)
    phis = [(M[a], eye[a]) for a in range(S.n)]
    A_phi = np.array([_canonical(gA, g) for g in phis])
    phi_B = np.array([_canonical(g, gB) for g in phis])
    return _canonical(gA, gB) - A_phi @ Dinv @ phi_B


# ----------------------------------------------------------------------------- verification

@dataclass
class ReductionReport:
    structure: str
    method: str
    max_error: float
    tol: float
    rows: list

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol

    def to_dict(self) -> dict:
        return {
            "structure": self.structure,
            "method": self.method,
            "max_error": self.max_error,
            "tol": self.tol,
            "pass": self.passed,
            "points": self.rows,
        }


def verify_reduction(P: PoissonStructure, samples, tol: float = 1e-10, method: str = "closed") -> ReductionReport:
    """Max over samples of ``|{theta^i, theta^j}_D - w^{ij}(theta)|``."""
    S = build_constraints(P, method)
    n = S.n
    coords = [coordinate(i) for i in range(n)]
    rows, worst = [], 0.0
    for theta in samples:
        theta = np.asarray(theta, dtype=float)
        W = S.upper(theta)
        err = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                err = max(err, abs(dirac_bracket(coords[i], coords[j], S, theta) - W[i, j]))
        worst = max(worst, err)
        rows.append({"theta": theta.tolist(), "error": err})
    return ReductionReport(S.structure.name, method, worst, tol, rows)


def structure_for(name: str, beta=1, n: int = 1) -> PoissonStructure:
    """Real-chart structure used by the Dirac pipeline (``qosc1`` -> real form)."""
    P = builtin(name, beta, n)
    return real_form(P) if P.chart.kind != "real" else P


def sample_points(P: PoissonStructure, count: int, rng: np.random.Generator, max_s: float = 0.9) -> list:
    """Random points where ``P`` stays safely invertible along the ray from 0.

    For two-dimensional ``c + Q`` bivectors the ratio ``|Q/c|`` is kept below
    ``max_s``; other structures sample the unit box.
    """
    n = P.dim
    kind = _closed_form_kind(P)
    pts = []
    while len(pts) < count:
        theta = rng.uniform(-1.5, 1.5, n)
        if kind == "quadratic2":
            parts = P.bivector[0][1].homogeneous_parts(P.names)
            c = complex(parts[0].evaluate({})).real
            Q = complex(parts.get(2, PolyExpr()).evaluate(dict(zip(P.names, theta)))).real
            if abs(Q / c) >= max_s:
                continue
        pts.append(theta)
    return pts
