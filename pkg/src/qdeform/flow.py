"""Hamiltonian flows under non-canonical Poisson structures.

Equations of motion are ``theta_dot^i = {theta^i, H}``. The vector field is
computed exactly and then integrated with an adaptive Dormand-Prince 5(4)
scheme. Holomorphic pairs ``(z, z*)`` are carried as independent complex
components; reality (``z* == conj(z)``) is monitored, not imposed, and so are
energy and Casimir conservation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, ParameterError, SymbolError
from .poisson import SYMBOLIC, PoissonStructure, bracket
from .poly import PolyExpr, CompiledPoly

__all__ = [
    "FlowConfig",
    "Trajectory",
    "hamiltonian_vector_field",
    "integrate",
    "analytic_qoscillator",
    "analytic_qparticle",
    "measure_frequency",
]


@dataclass(frozen=True)
class FlowConfig:
    t_end: float
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_step: float = math.inf
    sample_count: int = 501

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ParameterError("tolerances must be positive")
        if not self.t_end > 0:
            raise ParameterError("t_end must be positive")
        if self.sample_count < 2:
            raise ParameterError("sample_count must be at least 2")


@dataclass
class Trajectory:
    """Sampled solution of a Hamiltonian flow plus invariant monitors."""

    names: tuple
    times: np.ndarray
    points: np.ndarray  # shape (len(times), len(names)), complex
    monitors: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.points.shape[0] != self.times.shape[0]:
            raise ValueError("points and times disagree in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        for key, series in self.monitors.items():
            if len(series) != len(self.times):
                raise ValueError(f"monitor {key!r} has the wrong length")

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.points[:, self.names.index(name)]
        except ValueError:
            raise SymbolError(name) from None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["time"]
        for s in self.names:
            header += [f"re({s})", f"im({s})"]
        header += list(self.monitors)
        writer.writerow(header)
        for k, t in enumerate(self.times):
            row = [repr(float(t))]
            for z in self.points[k]:
                row += [repr(float(z.real)), repr(float(z.imag))]
            row += [repr(float(self.monitors[m][k])) for m in self.monitors]
            writer.writerow(row)
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "meta": self.meta,
            "names": list(self.names),
            "times": [float(t) for t in self.times],
            "points": {
                s: {"re": self.points[:, j].real.tolist(), "im": self.points[:, j].imag.tolist()}
                for j, s in enumerate(self.names)
            },
            "monitors": {m: np.asarray(v, dtype=float).tolist() for m, v in self.monitors.items()},
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def hamiltonian_vector_field(P: PoissonStructure, H) -> list:
    """Exact components ``{theta^i, H}`` in chart order."""
    H = PolyExpr.coerce(H)
    return [bracket(PolyExpr.symbol(s), H, P) for s in P.names]


def _numeric(expr: PolyExpr, P: PoissonStructure) -> PolyExpr:
    if "beta" in expr.symbols():
        if P.beta is None or P.beta == SYMBOLIC:
            raise ParameterError("bind a numeric beta before integrating")
        expr = expr.subs({"beta": P.beta})
    return expr


def _relative_drift(values: np.ndarray) -> np.ndarray:
    ref = values[0]
    scale = abs(ref) if abs(ref) > 0 else 1.0
    return np.abs(values - ref) / scale


def integrate(P: PoissonStructure, H, start: dict, cfg: FlowConfig) -> Trajectory:
    """Integrate the flow of ``H`` from ``start`` and sample it uniformly.

    Raises :class:`IntegrationError` (carrying the last good sample) when the
    step size underflows, e.g. near a singular point of the bivector.
    """
    H = PolyExpr.coerce(H)
    names = list(P.names)
    missing = [s for s in names if s not in start]
    if missing:
        raise SymbolError(missing[0], f"start point does not bind {missing[0]!r}")
    y0 = np.array([complex(start[s]) for s in names])
    inv = P.chart.involution
    pairs = [(names.index(a), names.index(b)) for a, b in inv.items() if a != b and a < b]
    selfconj = [names.index(a) for a, b in inv.items() if a == b and P.chart.kind == "holomorphic"]
    for a, b in pairs:
        if abs(y0[b] - np.conj(y0[a])) > 1e-12 * (1 + abs(y0[a])):
            raise ParameterError(f"start point violates {names[b]} = conj({names[a]})")

    field_polys = [_numeric(f, P) for f in hamiltonian_vector_field(P, H)]
    rhs = CompiledPoly(field_polys, names)
    energy = CompiledPoly([_numeric(H, P)], names)
    casimirs = CompiledPoly([_numeric(c, P) for c in P.casimirs], names) if P.casimirs else None

    t_eval = np.linspace(0.0, cfg.t_end, cfg.sample_count)
    sol = solve_ivp(
        lambda t, y: rhs(y),
        (0.0, cfg.t_end),
        y0,
        method="RK45",
        t_eval=t_eval,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.max_step,
    )
    if sol.status != 0:
        if sol.t.size:
            last_t, last_y = float(sol.t[-1]), sol.y[:, -1].copy()
        else:
            last_t, last_y = 0.0, y0
        raise IntegrationError(f"integration failed: {sol.message}", last_t, last_y)

    points = sol.y.T.copy()
    monitors = {}
    E = np.array([energy(p)[0] for p in points])
    monitors["energy_drift"] = _relative_drift(E)
    if casimirs is not None:
        C = np.array([casimirs(p) for p in points])
        for k in range(C.shape[1]):
            monitors[f"casimir{k}_drift"] = _relative_drift(C[:, k])
    defect = np.zeros(len(points))
    for a, b in pairs:
        defect = np.maximum(defect, np.abs(points[:, b] - np.conj(points[:, a])))
    for a in selfconj:
        defect = np.maximum(defect, np.abs(points[:, a].imag))
    monitors["conjugation_defect"] = defect
    meta = {
        "structure": P.name,
        "beta": str(P.beta),
        "hamiltonian": str(H),
        "rel_tol": cfg.rel_tol,
        "abs_tol": cfg.abs_tol,
        "t_end": cfg.t_end,
        "sample_count": cfg.sample_count,
    }
    return Trajectory(tuple(names), sol.t.copy(), points, monitors, meta)


def analytic_qoscillator(b0, omega, beta, t):
    """``b(t) = b0 exp(-i omega (1 - E/(omega beta)) t)`` with ``E = omega |b0|^2``.

    ``beta = inf`` gives the undeformed oscillator.
    """
    t = np.asarray(t, dtype=float)
    energy = omega * abs(b0) ** 2
    freq = omega - energy / beta
    return b0 * np.exp(-1j * freq * t)


def analytic_qparticle(x0, p0, beta, t):
    """Free q-particle: ``x(t) = (x0 + p0/g) e^{g t} - p0/g`` with ``g = p0^2/beta``."""
    t = np.asarray(t, dtype=float)
    gamma = 0.0 if math.isinf(beta) else p0 * p0 / beta
    if gamma == 0.0:
        return x0 + p0 * t
    return (x0 + p0 / gamma) * np.exp(gamma * t) - p0 / gamma


def measure_frequency(traj: Trajectory, symbol: str) -> float:
    """Angular frequency of ``z(t) ~ exp(-i w t)`` from the unwrapped phase slope."""
    z = traj[symbol]
    phase = np.unwrap(np.angle(z))
    slope = np.polyfit(traj.times, phase, 1)[0]
    return float(-slope)
