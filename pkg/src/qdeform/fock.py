"""Truncated Fock-space matrices for q-deformed oscillator algebras.

One mode: ``b|n> = sqrt(hbar [n]) |n-1>`` with ``[n] = (1 - q^{2n})/(1 - q^2)``.
Several modes: ``a_i = b_i prod_{k<i} q^{N_k}`` on the mode-major tensor
product. Hard truncation breaks the ladder relations on the top level, so all
residuals are measured on interior states (every occupation ``<= N-2``): the
residual matrix is restricted to those columns (and all rows).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConstructionError, ParameterError, SizeError
from .poisson import darboux_map_qosc1

__all__ = [
    "FockOperator",
    "q_number",
    "qoscillator_ops",
    "multimode_ops",
    "ResidualReport",
    "relation_residuals",
    "interior_indices",
    "classical_limit_scan",
    "LimitScan",
]

TOL = 1e-12


def q_number(n, q):
    """``[n] = (1 - q^{2n})/(1 - q^2)``, equal to ``n`` at ``q = 1``."""
    n = np.asarray(n, dtype=float)
    q2 = q * q
    if q2 == 1.0:
        return n
    # -expm1(n log q^2) / -expm1(log q^2) keeps precision when q^2 is near 1
    lq = math.log(q2)
    return np.expm1(n * lq) / math.expm1(lq)


@dataclass(frozen=True)
class FockOperator:
    """Dense operator on a truncated (tensor-product) number basis."""

    matrix: np.ndarray
    trunc: int
    modes: int = 1
    params: dict = field(default_factory=dict)

    @property
    def dag(self) -> "FockOperator":
        return FockOperator(self.matrix.conj().T, self.trunc, self.modes, self.params)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return self.matrix @ other.matrix
        return self.matrix @ other


def _check(N, hbar, q):
    if N < 2:
        raise SizeError("truncation N must be at least 2")
    if not hbar > 0:
        raise ParameterError("hbar must be positive")
    if q <= 0:
        raise ParameterError("q must be positive")


def _ladder(N, hbar, q) -> np.ndarray:
    b = np.zeros((N, N))
    n = np.arange(1, N)
    b[n - 1, n] = np.sqrt(hbar * q_number(n, q))
    return b


def qoscillator_ops(N: int, hbar: float, q: float) -> tuple:
    """Destruction/creation pair satisfying ``b b+ - q^2 b+ b = hbar`` on the interior."""
    _check(N, hbar, q)
    b = _ladder(N, hbar, q).astype(complex)
    params = {"hbar": hbar, "q": q}
    op = FockOperator(b, N, 1, params)
    return op, op.dag


def _embed(op: np.ndarray, mode: int, n: int, N: int) -> np.ndarray:
    out = np.ones((1, 1))
    for k in range(n):
        out = np.kron(out, op if k == mode else np.eye(N))
    return out


def interior_indices(N: int, modes: int = 1) -> np.ndarray:
    """Flat indices of basis states with every occupation ``<= N - 2``."""
    idx = [
        int(np.ravel_multi_index(occ, (N,) * modes))
        for occ in itertools.product(range(N - 1), repeat=modes)
    ]
    return np.array(idx)


def multimode_ops(n: int, N: int, hbar: float, q: float, dressing: str = "q^N", check: bool = True) -> tuple:
    """Operators ``(a, a+)`` for the SU_q(n)-covariant algebra.

    ``dressing="q^N"`` uses ``D_i = prod_{k<i} q^{N_k}``; ``dressing="none"``
    gives independent oscillators (useful as a negative control, pass
    ``check=False``). With ``check`` the residual suite runs and a
    :class:`ConstructionError` names the first failing relation.
    """
    if n < 1:
        raise SizeError("mode count must be >= 1")
    _check(N, hbar, q)
    b1 = _ladder(N, hbar, q)
    number = np.diag(np.arange(N, dtype=float))
    qN = np.diag(q ** np.arange(N, dtype=float))
    dim = N**n
    a_list = []
    for i in range(n):
        a = _embed(b1, i, n, N)
        if dressing == "q^N":
            for k in range(i):
                a = a @ _embed(qN, k, n, N)
        elif dressing != "none":
            raise ParameterError(f"unknown dressing {dressing!r}")
        a_list.append(a.astype(complex))
    params = {"hbar": hbar, "q": q, "dressing": dressing}
    ops = [FockOperator(a, N, n, params) for a in a_list]
    pairs = ([op for op in ops], [op.dag for op in ops])
    if check:
        report = relation_residuals(pairs, "suqn")
        bad = report.failing(TOL)
        if bad:
            raise ConstructionError(
                f"dressing {dressing!r} fails relation {bad[0]} (residual {report.residuals[bad[0]]:.3e})"
            )
    return pairs


@dataclass
class ResidualReport:
    algebra: str
    residuals: dict
    interior: str = "columns with every occupation <= N-2"

    def failing(self, tol: float) -> list:
        return [k for k, v in self.residuals.items() if v > tol]

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    def to_dict(self) -> dict:
        return {"algebra": self.algebra, "interior": self.interior, "residuals": self.residuals}


def _norm_on(R: np.ndarray, cols: np.ndarray) -> float:
    return float(np.max(np.abs(R[:, cols]))) if R.size else 0.0


def relation_residuals(ops, algebra: str) -> ResidualReport:
    """Interior max-norm residuals of ``eq1`` or the ``suqn`` family."""
    if algebra == "eq1":
        b, bd = ops
        if b.matrix.shape != bd.matrix.shape or b.matrix.shape[0] != b.trunc:
            raise SizeError("eq1 needs a single-mode pair")
        hbar, q = b.params["hbar"], b.params["q"]
        cols = interior_indices(b.trunc)
        R = b @ bd - q * q * (bd @ b) - hbar * np.eye(b.trunc)
        return ResidualReport("eq1", {"eq1": _norm_on(R, cols)})
    if algebra != "suqn":
        raise ParameterError(f"unknown algebra {algebra!r}")
    a, ad = ops
    if len(a) != len(ad) or not a:
        raise SizeError("need matching lists of destruction and creation operators")
    n, N = len(a), a[0].trunc
    if any(op.matrix.shape != (N**n, N**n) for op in list(a) + list(ad)):
        raise SizeError("operator shape does not match the mode count")
    hbar, q = a[0].params["hbar"], a[0].params["q"]
    cols = interior_indices(N, n)
    eye = np.eye(N**n)
    res = {"annihilators": 0.0, "creators": 0.0, "mixed_below": 0.0, "mixed_above": 0.0, "diagonal": 0.0}
    for i in range(n):
        for j in range(n):
            if i < j:
                res["annihilators"] = max(res["annihilators"], _norm_on(a[i] @ a[j] - q * (a[j] @ a[i]), cols))
                res["creators"] = max(res["creators"], _norm_on(ad[i] @ ad[j] - (ad[j] @ ad[i]) / q, cols))
            if i != j:
                key = "mixed_below" if i < j else "mixed_above"
                res[key] = max(res[key], _norm_on(a[i] @ ad[j] - q * (ad[j] @ a[i]), cols))
        rhs = hbar * eye
        for k in range(i):
            rhs = rhs + (q * q - 1) * (ad[k] @ a[k])
        res["diagonal"] = max(res["diagonal"], _norm_on(a[i] @ ad[i] - q * q * (ad[i] @ a[i]) - rhs, cols))
    return ResidualReport("suqn", res)


@dataclass
class LimitScan:
    beta: float
    action: float
    rows: list  # (hbar, n, expectation, target, error)
    target: float
    slope: float
    extrapolated: float
    operator_residual: float

    def to_csv(self) -> str:
        lines = ["hbar,n,expectation,target,error"]
        for h, n, e, t, err in self.rows:
            lines.append(f"{h!r},{n},{e!r},{t!r},{err!r}")
        return "\n".join(lines) + "\n"


def classical_limit_scan(beta: float, action: float, hbar_sequence: Sequence[float], check_trunc: int = 12) -> LimitScan:
    """Compare ``<n|b+ b|n>`` with the classical profile as ``hbar -> 0``.

    ``q`` is tied to ``hbar`` by ``1 - q^2 = hbar/beta`` and ``n = round(I/hbar)``.
    The target ``beta (1 - exp(-I/beta))`` comes from the action-angle map.
    The expectation is the squared ladder coefficient, i.e. the diagonal of
    ``b+ b``. Also reports the Richardson-extrapolated ``hbar -> 0`` value and
    the interior residual of ``[b, b+] = hbar (1 - b+ b/beta)`` at a small
    truncation.
    """
    if action < 0:
        raise ParameterError("action must be non-negative")
    hbars = [float(h) for h in hbar_sequence]
    if any(h <= 0 or h >= beta for h in hbars):
        raise ParameterError("need 0 < hbar < beta")
    target = float(darboux_map_qosc1(beta).profile(action))
    rows = []
    for h in hbars:
        q = math.sqrt(1.0 - h / beta)
        n = int(round(action / h))
        expectation = float(h * q_number(n, q))  # |<n-1|b|n>|^2
        rows.append((h, n, expectation, target, abs(expectation - target)))

    errs = np.array([r[4] for r in rows])
    mask = errs > 0
    slope = float(np.polyfit(np.log(np.array(hbars)[mask]), np.log(errs[mask]), 1)[0]) if mask.sum() >= 2 else float("nan")

    # Neville/Richardson extrapolation in hbar towards 0
    xs, ys = list(hbars), [r[2] for r in rows]
    table = list(ys)
    for level in range(1, len(xs)):
        for k in range(len(xs) - level):
            x0, x1 = xs[k], xs[k + level]
            table[k] = (x1 * table[k] - x0 * table[k + 1]) / (x1 - x0)
    extrapolated = table[0]

    h0 = hbars[0]
    b, bd = qoscillator_ops(check_trunc, h0, math.sqrt(1.0 - h0 / beta))
    cols = interior_indices(check_trunc)
    R = (b @ bd - bd @ b) - h0 * (np.eye(check_trunc) - (bd @ b) / beta)
    return LimitScan(beta, action, rows, target, slope, float(extrapolated), _norm_on(R, cols))
