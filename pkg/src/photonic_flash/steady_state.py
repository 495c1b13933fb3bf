"""Steady-state amplitudes of the driven chain.

Three routes are provided and cross-checked in the tests:

* :func:`solve_steady_state`: generic LU solve of ``M A = -B``, any N.
* :func:`trimer_closed_form` / :func:`trimer_compact_intensities`: explicit
  three-cavity expressions.
* :func:`chain_closed_form`: resonant chains that lose photons only through the
  two end cavities, where the bulk equations collapse to ``a_i + a_{i+2} = 0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .errors import (
    ConstraintViolated,
    DomainError,
    NumericalError,
    PreconditionViolated,
    SingularMatrix,
    Unstable,
)
from .model import ChainConfig, LinearSystem, build_linear_system, is_stable

__all__ = [
    "SteadyState",
    "TrimerDerived",
    "solve_steady_state",
    "trimer_derived",
    "trimer_closed_form",
    "trimer_compact_intensities",
    "chain_closed_form",
    "sublattice_intensities",
    "lu_determinant",
    "phase_scan",
]


@dataclass(frozen=True)
class SteadyState:
    """Complex mean amplitudes ``<a_i>`` (0-based array) and derived intensities."""

    amplitudes: NDArray[np.complex128] = field(repr=False)
    residual: float = 0.0
    method: str = "linear_solve"
    closed_form: bool = False

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def intensities(self) -> NDArray[np.float64]:
        return np.abs(self.amplitudes) ** 2

    def __repr__(self) -> str:
        return f"SteadyState(method={self.method!r}, intensities={np.round(self.intensities, 12).tolist()})"


def _relative_residual(system: LinearSystem, amplitudes: NDArray) -> float:
    r = system.matrix @ amplitudes + system.drive
    scale = np.linalg.norm(system.matrix, 2) * np.linalg.norm(amplitudes) + np.linalg.norm(system.drive)
    if scale == 0.0:
        return float(np.linalg.norm(r))
    return float(np.linalg.norm(r) / scale)


def lu_determinant(matrix: NDArray) -> tuple[tuple[NDArray, NDArray], complex]:
    """Partial-pivoting LU of ``matrix`` and the determinant read off its diagonal.

    Raises :class:`SingularMatrix` when ``|det| < 1e-12 * max|M_ij| ** N``.
    """
    matrix = np.asarray(matrix, dtype=complex)
    n = matrix.shape[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(matrix, check_finite=True)
    swaps = int(np.count_nonzero(piv != np.arange(n)))
    det = complex(np.prod(np.diag(lu)) * (-1) ** swaps)
    scale = float(np.max(np.abs(matrix)))
    if scale == 0.0 or abs(det) < 1e-12 * scale**n:
        raise SingularMatrix(f"drift matrix is numerically singular (|det|={abs(det):.3e}, scale={scale:.3e})")
    return (lu, piv), det


def solve_steady_state(
    system: LinearSystem,
    tol: float = 1e-10,
    *,
    allow_unstable: bool = False,
    stability_tol: float = 1e-9,
) -> SteadyState:
    """Fixed point ``A = -M^{-1} B`` of the mean-field equation.

    Parameters
    ----------
    system:
        The linear system ``(M, B)``.
    tol:
        Bound on the relative residual ``|M A + B| / (|M| |A| + |B|)``.
    allow_unstable:
        Skip the Hurwitz check. The fixed point then exists but does not
        attract the dynamics; useful only for exploration.
    """
    if not allow_unstable:
        report = is_stable(system, stability_tol)
        if not report.stable:
            raise Unstable(
                f"drift matrix is not Hurwitz (spectral abscissa {report.abscissa:.3e})",
                abscissa=report.abscissa,
            )
    factors, _ = lu_determinant(system.matrix)
    amplitudes = scipy.linalg.lu_solve(factors, -system.drive)
    residual = _relative_residual(system, amplitudes)
    if not residual <= tol:
        raise NumericalError(f"steady-state residual {residual:.3e} exceeds tolerance {tol:.1e}")
    return SteadyState(amplitudes, residual=residual, method="linear_solve")


def phase_scan(config: ChainConfig, phases: NDArray | list[float], *, allow_unstable: bool = False) -> NDArray:
    """Intensities at many drive phases, shape ``(len(phases), N)``.

    Only ``B`` depends on the phase, so ``M`` is checked and factored once.
    """
    phases = np.asarray(phases, dtype=float)
    system = build_linear_system(config)
    if not allow_unstable:
        report = is_stable(system)
        if not report.stable:
            raise Unstable(
                f"drift matrix is not Hurwitz (spectral abscissa {report.abscissa:.3e})",
                abscissa=report.abscissa,
            )
    factors, _ = lu_determinant(system.matrix)
    rhs = np.zeros((config.n, phases.size), dtype=complex)
    rhs[0] = 1j * config.drive_left * np.exp(-1j * phases)
    rhs[-1] += 1j * config.drive_right
    amplitudes = scipy.linalg.lu_solve(factors, rhs)
    return (np.abs(amplitudes) ** 2).T


# --------------------------------------------------------------------------
# Trimer
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TrimerDerived:
    """Auxiliary trimer quantities.

    ``k1``/``k3`` are ``(i D_2 + g_2/2)(i D_m + g_m/2) / J^2``. ``delta_amp`` and
    ``theta`` only exist for the symmetric trimer and are ``nan`` otherwise.
    ``cos_theta``/``sin_theta`` are the raw expressions that define ``theta``;
    they lie on the unit circle only when the dark-cavity constraint holds.
    """

    k1: complex
    k3: complex
    delta_amp: float = math.nan
    theta: float = math.nan
    cos_theta: float = math.nan
    sin_theta: float = math.nan


def _require_n(config: ChainConfig, n: int, op: str) -> None:
    if config.n != n:
        raise PreconditionViolated(f"{op} needs n={n}, got n={config.n}", field="n")


def trimer_derived(config: ChainConfig) -> TrimerDerived:
    _require_n(config, 3, "trimer_derived")
    d, g, j = config.detunings, config.decays, config.hopping
    side2 = 1j * d[1] + g[1] / 2
    k1 = side2 * (1j * d[0] + g[0] / 2) / j**2
    k3 = side2 * (1j * d[2] + g[2] / 2) / j**2
    return TrimerDerived(k1=complex(k1), k3=complex(k3))


def trimer_closed_form(config: ChainConfig) -> SteadyState:
    """Explicit determinant formulas for the three amplitudes.

    Any three-cavity config is accepted (detunings, decays and drives may all
    differ). Singular ``M`` raises :class:`SingularMatrix`.
    """
    _require_n(config, 3, "trimer_closed_form")
    system = build_linear_system(config)
    _, det = lu_determinant(system.matrix)
    k = trimer_derived(config)
    d, g, j = config.detunings, config.decays, config.hopping
    l1 = config.drive_left * np.exp(-1j * config.phase)
    l3 = config.drive_right

    # Overall sign is fixed by A = -M^{-1} B.
    a1 = -1j * j**2 * (l3 - l1 * (1 + k.k3)) / det
    a2 = j * (l1 * (1j * d[2] + g[2] / 2) + l3 * (1j * d[0] + g[0] / 2)) / det
    a3 = -1j * j**2 * (l1 - l3 * (1 + k.k1)) / det
    amplitudes = np.array([a1, a2, a3])
    return SteadyState(
        amplitudes,
        residual=_relative_residual(system, amplitudes),
        method="trimer_closed_form",
        closed_form=True,
    )


def _symmetric_trimer(config: ChainConfig) -> tuple[float, float, float, float, float]:
    """Return ``(detuning, gamma, gamma_mid, hopping, drive)`` or raise."""
    _require_n(config, 3, "symmetric trimer")
    d, g = config.detunings, config.decays
    scale = max(1.0, *map(abs, d), *g, config.drive_left, config.drive_right)
    if not (abs(d[0] - d[1]) <= 1e-12 * scale and abs(d[1] - d[2]) <= 1e-12 * scale):
        raise PreconditionViolated("symmetric trimer needs equal detunings", field="detunings")
    if abs(g[0] - g[2]) > 1e-12 * scale:
        raise PreconditionViolated("symmetric trimer needs equal side decays", field="decays")
    if abs(config.drive_left - config.drive_right) > 1e-12 * scale:
        raise PreconditionViolated("symmetric trimer needs equal drives", field="drive_right")
    return d[1], g[0], g[1], config.hopping, config.drive_left


def trimer_compact_intensities(
    config: ChainConfig, constraint_tol: float = 1e-2
) -> tuple[NDArray[np.float64], TrimerDerived]:
    """Phase-lobe form of the symmetric-trimer intensities.

    Valid only when the dark-cavity constraint holds; ``constraint_tol`` bounds
    its residual relative to ``16 J^4``. Returns ``(intensities, derived)``.
    """
    from .flash_analysis import condition_residual

    detuning, gamma, gamma_mid, j, lam = _symmetric_trimer(config)
    cond = condition_residual(j, gamma, gamma_mid, detuning)
    if abs(cond.relative_residual) > constraint_tol:
        raise ConstraintViolated(
            f"dark-cavity constraint violated: relative residual {cond.relative_residual:.3e} "
            f"> {constraint_tol:.1e}",
            residual=cond.residual,
        )
    denom = 4 * j**2 - 2 * detuning**2 + gamma * gamma_mid / 2
    if denom <= 0:
        raise DomainError(f"compact amplitude undefined: 4J^2 - 2D^2 + g g'/2 = {denom:.3e} <= 0", field="detunings")
    delta2 = 2 * lam**2 * j**2 / denom
    cos_t, sin_t = -cond.cos_rhs, cond.sin_rhs
    theta = math.atan2(sin_t, cos_t)
    phi = config.phase
    side = delta2 / (detuning**2 + gamma**2 / 4)
    intensities = np.array(
        [
            side * (1 + math.cos(phi + theta)),
            delta2 / j**2 * (1 + math.cos(phi)),
            side * (1 + math.cos(phi - theta)),
        ]
    )
    base = trimer_derived(config)
    derived = TrimerDerived(
        k1=base.k1,
        k3=base.k3,
        delta_amp=math.sqrt(delta2),
        theta=theta,
        cos_theta=cos_t,
        sin_theta=sin_t,
    )
    return intensities, derived


# --------------------------------------------------------------------------
# Resonant chain with lossless bulk
# --------------------------------------------------------------------------


def _lossless_bulk_gamma(config: ChainConfig, op: str) -> float:
    """Check the resonant / lossy-ends-only pattern and return the end decay."""
    if config.n < 3:
        raise PreconditionViolated(f"{op} needs n >= 3, got n={config.n}", field="n")
    d, g = config.detunings, config.decays
    scale = max(config.hopping, *g)
    if any(abs(x) > 1e-12 * scale for x in d):
        raise PreconditionViolated(f"{op} needs zero detunings", field="detunings")
    if any(abs(x) > 1e-12 * scale for x in g[1:-1]):
        raise PreconditionViolated(f"{op} needs lossless middle cavities", field="decays")
    if g[0] <= 0 or abs(g[0] - g[-1]) > 1e-12 * scale:
        raise PreconditionViolated(f"{op} needs equal, positive end decays", field="decays")
    return g[0]


def _even_closed_form_applies(config: ChainConfig, gamma: float) -> bool:
    return abs(gamma - 2 * config.hopping) <= 1e-12 * config.hopping


def chain_closed_form(config: ChainConfig) -> SteadyState:
    """Amplitudes of a resonant chain that loses photons only at its ends.

    The bulk rows force ``a_{i+2} = -a_i``, so only ``a_1`` and ``a_2`` are
    unknown; they follow from the two boundary rows. Odd N: always closed form.
    Even N: closed form when ``gamma = 2 J``; otherwise the generic solver is
    used and the result carries ``closed_form=False``.
    """
    gamma = _lossless_bulk_gamma(config, "chain_closed_form")
    n, j = config.n, config.hopping
    system = build_linear_system(config)
    e = np.exp(-1j * config.phase)
    r1 = 1j * config.drive_left * e
    r_n = 1j * config.drive_right

    if n % 2 == 1:
        s = (-1) ** ((n - 1) // 2)
        a1 = -(r1 + s * r_n) / gamma
        a2 = 1j * (r1 - s * r_n) / (2 * j)
    else:
        if not _even_closed_form_applies(config, gamma):
            state = solve_steady_state(system)
            return SteadyState(
                state.amplitudes, residual=state.residual, method="linear_solve_fallback", closed_form=False
            )
        s = (-1) ** (n // 2 - 1)
        det2 = gamma**2 / 4 + j**2
        a1 = (-gamma / 2 * r1 + 1j * j * s * r_n) / det2
        a2 = (1j * j * r1 - gamma / 2 * s * r_n) / det2

    amplitudes = np.empty(n, dtype=complex)
    amplitudes[0], amplitudes[1] = a1, a2
    for i in range(2, n):
        amplitudes[i] = -amplitudes[i - 2]
    return SteadyState(
        amplitudes,
        residual=_relative_residual(system, amplitudes),
        method="chain_closed_form",
        closed_form=True,
    )


def sublattice_intensities(config: ChainConfig) -> tuple[float, float]:
    """Intensity shared by all odd-numbered cavities and by all even-numbered ones.

    Equal drives ``lambda`` are required. With ``N = 2m + 1``::

        odd  = 2 lambda^2 / gamma^2 * (1 + (-1)^m cos phi)
        even = lambda^2 / (2 J^2) * (1 - (-1)^m cos phi)

    and with ``N = 2m``, ``gamma = 2 J``::

        odd  = lambda^2 / (2 J^2) * (1 - (-1)^m sin phi)
        even = lambda^2 / (2 J^2) * (1 + (-1)^m sin phi)
    """
    gamma = _lossless_bulk_gamma(config, "sublattice_intensities")
    lam, j, phi = config.drive_left, config.hopping, config.phase
    if abs(config.drive_left - config.drive_right) > 1e-12 * max(1.0, lam):
        raise PreconditionViolated("sublattice_intensities needs equal drives", field="drive_right")
    if config.n % 2 == 1:
        s = (-1) ** ((config.n - 1) // 2)
        return (
            2 * lam**2 / gamma**2 * (1 + s * math.cos(phi)),
            lam**2 / (2 * j**2) * (1 - s * math.cos(phi)),
        )
    if not _even_closed_form_applies(config, gamma):
        raise PreconditionViolated("even-N closed form needs gamma = 2 J", field="decays")
    s = (-1) ** (config.n // 2)
    return (
        lam**2 * (1 - s * math.sin(phi)) / (2 * j**2),
        lam**2 * (1 + s * math.sin(phi)) / (2 * j**2),
    )
