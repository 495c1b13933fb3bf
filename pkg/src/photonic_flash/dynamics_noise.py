"""Transient mean-field dynamics and thermal-noise corrections.

Noise convention
----------------
The intensity of cavity ``i`` with reservoirs at thermal occupations ``n_j`` is

    I_i(t) = |<a_i>|^2 + sum_j n_j * integral_0^t |D_ij(s)|^2 ds,   D(s) = exp(M s).

Written with the integration variable ``tau = t - s``, the propagator argument
is ``t - tau >= 0`` and the integrand decays. Taking the argument as ``tau - t``
(negative over the range) would make it grow without bound for a Hurwitz
``M``, so that reading is not implemented. No ``gamma_j`` prefactor multiplies
``n_j`` unless ``rate_weighted=True``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.polynomial.legendre import leggauss
from numpy.typing import NDArray
from scipy.integrate import trapezoid

from .errors import NumericalError, SingularMatrix, Unstable, ValidationError
from .model import LinearSystem, is_stable
from .steady_state import lu_determinant, solve_steady_state

__all__ = [
    "propagator",
    "propagator_series",
    "Trajectory",
    "integrate_dynamics",
    "NoiseConfig",
    "NoiseResult",
    "noise_corrected_intensities",
]

EIGVEC_COND_LIMIT = 1e8


def _eigensystem(matrix: NDArray) -> tuple[NDArray, NDArray, NDArray, float] | None:
    try:
        w, v = np.linalg.eig(matrix)
        cond = float(np.linalg.cond(v))
    except np.linalg.LinAlgError:
        return None
    if not math.isfinite(cond) or cond > EIGVEC_COND_LIMIT:
        return None
    return w, v, np.linalg.inv(v), cond


def propagator_series(matrix: NDArray, times: NDArray) -> NDArray[np.complex128]:
    """``exp(M t)`` for every ``t`` in ``times``; shape ``(len(times), N, N)``.

    Uses the eigendecomposition of ``M`` while its eigenvector matrix is
    well conditioned, scaling-and-squaring Pade otherwise (near-defective
    ``M`` close to an exceptional point).
    """
    matrix = np.asarray(matrix, dtype=complex)
    times = np.asarray(times, dtype=float)
    eig = _eigensystem(matrix)
    if eig is not None:
        w, v, v_inv, _ = eig
        out = (v[None, :, :] * np.exp(np.outer(times, w))[:, None, :]) @ v_inv
    else:
        out = scipy.linalg.expm(times[:, None, None] * matrix[None, :, :])
    if not np.all(np.isfinite(out)):
        cond = np.linalg.cond(np.linalg.eig(matrix)[1])
        raise NumericalError(f"matrix exponential is not finite (eigenvector condition number {cond:.3e})")
    return out


def propagator(system: LinearSystem, t: float) -> NDArray[np.complex128]:
    """``D(t) = exp(M t)`` for ``t >= 0``. ``D(0)`` is the exact identity."""
    if not t >= 0:
        raise ValidationError(f"t must be >= 0, got {t}", field="t")
    if t == 0:
        return np.eye(system.n, dtype=complex)
    return propagator_series(system.matrix, np.array([t]))[0]


@dataclass(frozen=True)
class Trajectory:
    times: NDArray[np.float64]
    states: NDArray[np.complex128]  # (len(times), N)

    @property
    def intensities(self) -> NDArray[np.float64]:
        return np.abs(self.states) ** 2


def integrate_dynamics(system: LinearSystem, a0: NDArray, t_end: float, dt: float) -> Trajectory:
    """Sample ``A(t)`` of ``dA/dt = M A + B`` on a uniform grid over ``[0, t_end]``.

    Steps are exact for the affine flow: ``A <- D(h) A + F`` with
    ``F = M^{-1} (D(h) - I) B``. The grid has ``ceil(t_end / dt)`` equal steps, so
    the step actually used may be slightly shorter than ``dt``. A singular ``M``
    gets ``F`` by 32-point Gauss-Legendre quadrature of ``D(s) B``.
    """
    if not t_end > 0:
        raise ValidationError(f"t_end must be > 0, got {t_end}", field="t_end")
    if not dt > 0:
        raise ValidationError(f"dt must be > 0, got {dt}", field="dt")
    a0 = np.asarray(a0, dtype=complex)
    if a0.shape != (system.n,):
        raise ValidationError(f"a0 must have {system.n} entries", field="a0")

    steps = max(1, math.ceil(t_end / dt - 1e-12))
    h = t_end / steps
    step = propagator(system, h)
    try:
        factors, _ = lu_determinant(system.matrix)
        forcing = scipy.linalg.lu_solve(factors, (step - np.eye(system.n)) @ system.drive)
    except SingularMatrix:
        x, w = leggauss(32)
        nodes = 0.5 * h * (x + 1)
        forcing = 0.5 * h * np.einsum("k,kij,j->i", w, propagator_series(system.matrix, nodes), system.drive)

    states = np.empty((steps + 1, system.n), dtype=complex)
    states[0] = a0
    for k in range(steps):
        states[k + 1] = step @ states[k] + forcing
    return Trajectory(np.linspace(0.0, t_end, steps + 1), states)


@dataclass(frozen=True)
class NoiseConfig:
    """Thermal occupations per cavity reservoir and the time quadrature setup."""

    thermal_occupations: tuple[float, ...]
    horizon: float
    quadrature_step: float

    def __post_init__(self) -> None:
        occ = tuple(float(x) for x in self.thermal_occupations)
        if not all(math.isfinite(x) and x >= 0 for x in occ):
            raise ValidationError("thermal occupations must be finite and >= 0", field="thermal_occupations")
        object.__setattr__(self, "thermal_occupations", occ)
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ValidationError(f"horizon must be > 0, got {self.horizon}", field="horizon")
        if not (math.isfinite(self.quadrature_step) and 0 < self.quadrature_step <= self.horizon):
            raise ValidationError("quadrature_step must be in (0, horizon]", field="quadrature_step")

    @classmethod
    def default(cls, system: LinearSystem, thermal_occupations) -> NoiseConfig:
        """Horizon ``20 / |spectral abscissa|``; step ``horizon / 2000``, capped at a tenth of
        the fastest eigenvalue's time scale so oscillations stay resolved."""
        report = is_stable(system)
        if not report.stable:
            raise Unstable("noise integral needs a Hurwitz drift matrix", abscissa=report.abscissa)
        horizon = 20.0 / abs(report.abscissa)
        step = min(horizon / 2000, 0.1 / float(np.max(np.abs(report.spectrum))))
        return cls(tuple(thermal_occupations), horizon, step)


@dataclass(frozen=True)
class NoiseResult:
    coherent_intensities: NDArray[np.float64]
    noise_corrected: NDArray[np.float64]
    correction: NDArray[np.float64] = field(repr=False)
    converged: bool = True
    relative_change: float = 0.0  # between horizon/2 and horizon


def _richardson_trapezoid(values: NDArray, h: float) -> NDArray:
    """Trapezoid on step ``h`` refined with the ``2h`` rule; needs an even interval count."""
    fine = trapezoid(values, dx=h, axis=0)
    coarse = trapezoid(values[::2], dx=2 * h, axis=0)
    return fine + (fine - coarse) / 3


def noise_corrected_intensities(
    system: LinearSystem,
    noise: NoiseConfig,
    *,
    rate_weighted: bool = False,
    tol: float = 1e-8,
) -> NoiseResult:
    """Steady-state intensities plus the thermal-noise term.

    ``converged`` is False when the correction at ``horizon`` differs from
    the one at ``horizon / 2`` by more than ``tol`` (relative). That is reported,
    never raised.
    """
    if len(noise.thermal_occupations) != system.n:
        raise ValidationError(f"need {system.n} thermal occupations", field="thermal_occupations")
    coherent = solve_steady_state(system).intensities
    weights = np.asarray(noise.thermal_occupations)
    if rate_weighted:
        weights = weights * (-2.0 * np.real(np.diag(system.matrix)))

    intervals = 4 * math.ceil(noise.horizon / noise.quadrature_step / 4)
    h = noise.horizon / intervals
    times = np.linspace(0.0, noise.horizon, intervals + 1)
    series = propagator_series(system.matrix, times)
    integrand = (np.abs(series) ** 2) @ weights  # (T, N): sum_j w_j |D_ij(s)|^2

    correction = _richardson_trapezoid(integrand, h)
    half = _richardson_trapezoid(integrand[: intervals // 2 + 1], h)
    scale = float(np.max(np.abs(correction)))
    change = 0.0 if scale == 0.0 else float(np.max(np.abs(correction - half)) / scale)
    return NoiseResult(
        coherent_intensities=coherent,
        noise_corrected=coherent + correction,
        correction=correction,
        converged=change <= tol,
        relative_change=change,
    )
