"""Kähler geometry of the diagonal deformed bracket.

The potential is ``phi = (beta/2) * sum_i -Li2(u_i)`` with ``u_i = 2 |z_i|^2 / beta``.
Its mixed second derivatives give the diagonal metric ``g_i = -1/(1 - u_i)``,
whose inverse reproduces ``{z_j, z_k*} = -i (1 - u_j) delta_jk``. The mode
coupling map ``a_i = z_i prod_{k<i} sqrt(1 - u_k)`` carries that bracket to the
SU_q(n)-covariant one.

Curvature convention: ``R = g^{i k*} Ric_{i k*}`` with
``Ric_{i k*} = -d_i d_k* ln|det g|``. For this metric it is exactly one
quarter of ``sum_i (8/beta)/(1 - u_i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import mpmath
import numpy as np

from .errors import DomainError, ParameterError, SingularityError

__all__ = [
    "KahlerModel",
    "dilog",
    "potential",
    "metric",
    "metric_fd",
    "bracket_kahler",
    "Curvature",
    "scalar_curvature",
    "reference_curvature",
    "mode_coupling",
    "mode_coupling_jacobian",
    "pushforward_brackets",
    "CURVATURE_RATIO",
]

PI2_6 = math.pi**2 / 6.0
CURVATURE_RATIO = 0.25


def dilog(x: float, tol: float = 1e-16) -> float:
    """Real Euler dilogarithm ``Li2(x) = sum_k x^k / k^2`` for ``x <= 1``.

    The power series is only summed on ``[0, 1/2]``; other arguments are mapped
    there with the reflection ``Li2(x) + Li2(1-x) = pi^2/6 - ln(x) ln(1-x)``
    and the Landen identity ``Li2(x) = -Li2(x/(x-1)) - ln(1-x)^2 / 2``.
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    x = float(x)
    if x > 1.0:
        raise DomainError("dilog is only implemented on the real branch x <= 1")
    if x == 1.0:
        return PI2_6
    if x < 0.0:
        y = x / (x - 1.0)
        return -dilog(y, tol) - 0.5 * math.log1p(-x) ** 2
    if x > 0.5:
        return PI2_6 - math.log(x) * math.log1p(-x) - dilog(1.0 - x, tol)
    total, power, k = 0.0, x, 1
    while True:
        term = power / (k * k)
        total += term
        # remaining tail is bounded by term * x / (1 - x) <= term
        if term <= tol * 0.5:
            return total
        k += 1
        power *= x


@dataclass(frozen=True)
class KahlerModel:
    n: int
    beta: float

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("n must be >= 1")
        if self.beta == 0 or not math.isfinite(self.beta):
            raise ParameterError("beta must be finite and non-zero")

    def u(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.n,):
            raise ParameterError(f"expected {self.n} complex coordinates")
        return 2.0 * (z * np.conj(z)).real / self.beta

    def check(self, z) -> np.ndarray:
        u = self.u(z)
        if self.beta > 0 and np.any(u >= 1.0):
            if np.any(u == 1.0):
                raise SingularityError("metric is singular on |z|^2 = beta/2")
            raise DomainError("point outside the disc |z|^2 < beta/2")
        return u


def potential(z, model: KahlerModel) -> float:
    u = model.check(z)
    return float(model.beta / 2.0 * sum(-dilog(ui) for ui in u))


def _metric_diag(z, zc, beta):
    # closed form from the mixed second derivative of the potential
    return [-1 / (1 - 2 * a * b / beta) for a, b in zip(z, zc)]


def metric(z, model: KahlerModel) -> np.ndarray:
    """Diagonal of ``g_{i k*}``; closed form ``-(1 - u_i)^{-1}``."""
    u = model.check(z)
    if np.any(u == 1.0):
        raise SingularityError("metric is singular on |z|^2 = beta/2")
    return -1.0 / (1.0 - u)


def metric_fd(z, model: KahlerModel, h: float | None = None) -> np.ndarray:
    """Metric from a fourth-order finite-difference Laplacian of the potential.

    ``d^2/(dz dz*) = (1/4)(d_xx + d_yy)`` for ``z = x + i y``. The default step
    shrinks with the distance to the singular circle.
    """
    z = np.asarray(z, dtype=complex)
    u = model.check(z)
    weights = {-2: -1.0 / 12, -1: 16.0 / 12, 0: -30.0 / 12, 1: 16.0 / 12, 2: -1.0 / 12}
    out = np.empty(model.n)
    for i in range(model.n):
        step = h
        if step is None:
            step = 1e-3 * math.sqrt(abs(model.beta) / 2.0)
            if model.beta > 0:
                step *= min(1.0, 1.0 - u[i])
        lap = 0.0
        for direction in (1.0, 1j):
            for k, w in weights.items():
                zz = z.copy()
                zz[i] += k * step * direction
                lap += w * potential(zz, model)
        out[i] = lap / (step * step) / 4.0
    return out


def bracket_kahler(gradA, gradB, z, model: KahlerModel) -> complex:
    """``{A,B} = i g^{j* k} (dA/dz^k dB/dz^{j*} - dA/dz^{j*} dB/dz^k)``.

    Gradients are pairs ``(d/dz, d/dz*)`` of length-``n`` arrays at ``z``.
    """
    g = metric(z, model)
    dA, dAc = (np.asarray(v, dtype=complex) for v in gradA)
    dB, dBc = (np.asarray(v, dtype=complex) for v in gradB)
    ginv = 1.0 / g
    return complex(1j * np.sum(ginv * (dA * dBc - dAc * dB)))


class Curvature(NamedTuple):
    impl: float
    reference: float

    @property
    def ratio(self) -> float:
        return self.impl / self.reference


def reference_curvature(z, model: KahlerModel) -> float:
    """``sum_i (8/beta) (1 - u_i)^{-1}``."""
    u = model.check(z)
    if np.any(u == 1.0):
        raise SingularityError("curvature diverges on |z|^2 = beta/2")
    return float(np.sum(8.0 / model.beta / (1.0 - u)))


def scalar_curvature(z, model: KahlerModel, dps: int = 30) -> Curvature:
    """Scalar curvature computed from the metric, alongside the closed form.

    The Ricci form ``-d d* ln|det g|`` is differentiated numerically at
    ``dps`` decimal digits (mpmath), so the result does not reuse the closed
    form of the curvature.
    """
    z = np.asarray(z, dtype=complex)
    reference = reference_curvature(z, model)
    g = metric(z, model)
    with mpmath.workdps(dps):
        beta = mpmath.mpf(model.beta)
        base = [mpmath.mpc(complex(v)) for v in z]

        def log_det(i, x, y):
            pts = list(base)
            pts[i] = mpmath.mpc(x, y)
            diag = _metric_diag(pts, [mpmath.conj(p) for p in pts], beta)
            return mpmath.fsum(mpmath.log(abs(d)) for d in diag)

        total = mpmath.mpf(0)
        for i in range(model.n):
            x0, y0 = base[i].real, base[i].imag
            f = lambda x, y, i=i: log_det(i, x, y)
            lap = mpmath.diff(f, (x0, y0), (2, 0)) + mpmath.diff(f, (x0, y0), (0, 2))
            ricci = -lap / 4
            total += ricci / mpmath.mpf(g[i])
        impl = float(total)
    return Curvature(impl, reference)


def _factors(z, zc, model):
    s = [1 - 2 * a * b / model.beta for a, b in zip(z, zc)]
    for v in s:
        if model.beta > 0 and (complex(v).real <= 0):
            raise DomainError("negative radicand in the mode-coupling map")
    return s


def mode_coupling(z, model: KahlerModel) -> np.ndarray:
    """``a_i = z_i prod_{k<i} (1 - 2 z_k z_k*/beta)^{1/2}``."""
    z = np.asarray(z, dtype=complex)
    s = np.array(_factors(z, np.conj(z), model), dtype=complex).real
    if np.any(s < 0):
        raise DomainError("negative radicand in the mode-coupling map")
    prefix = np.concatenate(([1.0], np.cumprod(np.sqrt(s))[:-1]))
    return z * prefix


def mode_coupling_jacobian(z, model: KahlerModel) -> np.ndarray:
    """``d(a, a*)/d(z, z*)`` as a ``2n x 2n`` matrix, with ``z, z*`` independent."""
    z = np.asarray(z, dtype=complex)
    zc = np.conj(z)
    n = model.n
    s = np.array(_factors(z, zc, model), dtype=complex).real
    root = np.sqrt(s)
    J = np.zeros((2 * n, 2 * n), dtype=complex)
    for i in range(n):
        F = np.prod(root[:i]) if i else 1.0
        for row, own in ((i, z[i]), (n + i, zc[i])):
            J[row, row] = F  # d a_i/d z_i and d a*_i/d z*_i
            for k in range(i):
                common = -own * F / (model.beta * s[k])
                J[row, k] = common * zc[k]
                J[row, n + k] = common * z[k]
    return J


def diag_bivector(z, model: KahlerModel) -> np.ndarray:
    """Bivector ``{z_j, z_k*} = -i (1 - u_j) delta_jk`` in ``(z, z*)`` order."""
    u = model.u(z)
    n = model.n
    W = np.zeros((2 * n, 2 * n), dtype=complex)
    for j in range(n):
        W[j, n + j] = -1j * (1.0 - u[j])
        W[n + j, j] = -W[j, n + j]
    return W


def pushforward_brackets(z, model: KahlerModel) -> np.ndarray:
    """Brackets of ``(a, a*)`` induced from the diagonal structure at ``z``."""
    J = mode_coupling_jacobian(z, model)
    return J @ diag_bivector(z, model) @ J.T
