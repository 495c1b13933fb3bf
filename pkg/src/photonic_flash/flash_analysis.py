"""Dark-cavity conditions, dark phases and bright/dark patterns.

For the symmetric trimer (common detuning ``D``, side decay ``g``, middle decay
``g'``, equal drives) cavity 1 is dark at the phase ``phi`` with

    cos phi = (4 J^2 + g g' - 4 D^2) / (4 J^2),   sin phi = D (g + g') / (2 J^2),

and cavity 3 at the mirrored phase. Both exist only if those right-hand sides
lie on the unit circle; :func:`condition_residual` measures how far they miss.
Cavity 2 is dark at ``phi = pi`` for any symmetric trimer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .errors import (
    ConstraintViolated,
    PreconditionViolated,
    ValidationError,
    VerificationFailed,
)
from .model import ChainConfig, build_linear_system
from .steady_state import (
    _lossless_bulk_gamma,
    _symmetric_trimer,
    chain_closed_form,
    phase_scan,
    solve_steady_state,
)

__all__ = [
    "FlashCondition",
    "DarkPhase",
    "FlashPattern",
    "FlashReport",
    "condition_residual",
    "enabling_quadratic",
    "solve_enabling_detuning",
    "solve_dark_phase",
    "find_intensity_minimum",
    "predict_flash_pattern",
    "flash_report",
]

TWO_PI = 2 * math.pi
BRIGHT, DARK = "bright", "dark"


@dataclass(frozen=True)
class FlashCondition:
    cos_rhs: float
    sin_rhs: float
    residual: float
    scale: float  # 16 J^4

    @property
    def relative_residual(self) -> float:
        return self.residual / self.scale


def condition_residual(hopping: float, gamma: float, gamma_mid: float, detuning: float) -> FlashCondition:
    """Evaluate the symmetric-trimer dark-cavity constraint.

    ``residual = (4J^2 + g g' - 4D^2)^2 + 4 (D g + D g')^2 - 16 J^4``; it vanishes
    exactly when a dark phase exists for cavities 1 and 3.
    """
    if not hopping > 0:
        raise ValidationError(f"hopping must be > 0, got {hopping}", field="hopping")
    j2 = hopping**2
    p = 4 * j2 + gamma * gamma_mid - 4 * detuning**2
    q = detuning * gamma + detuning * gamma_mid
    return FlashCondition(
        cos_rhs=p / (4 * j2),
        sin_rhs=q / (2 * j2),
        residual=p**2 + 4 * q**2 - 16 * j2**2,
        scale=16 * j2**2,
    )


def enabling_quadratic(hopping: float, gamma: float, gamma_mid: float) -> tuple[float, float, float]:
    """Coefficients ``(a, b, c)`` of the constraint as ``a x^2 + b x + c`` in ``x = D^2``."""
    gg = gamma * gamma_mid
    return (
        16.0,
        4 * (gamma + gamma_mid) ** 2 - 32 * hopping**2 - 8 * gg,
        gg**2 + 8 * hopping**2 * gg,
    )


def solve_enabling_detuning(hopping: float, gamma: float, gamma_mid: float) -> list[float]:
    """All detunings ``D >= 0`` that make the dark-cavity constraint exact.

    Sorted ascending, duplicates (within 1e-9 relative) merged. Empty when the
    quadratic in ``D^2`` has no non-negative real root.
    """
    if not hopping > 0:
        raise ValidationError(f"hopping must be > 0, got {hopping}", field="hopping")
    if gamma < 0 or gamma_mid < 0:
        raise ValidationError("decays must be non-negative", field="gamma" if gamma < 0 else "gamma_mid")
    a, b, c = enabling_quadratic(hopping, gamma, gamma_mid)
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    # cancellation-free pair of roots
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    xs = [q / a] if q == 0 else [q / a, c / q]
    roots = sorted(math.sqrt(x) for x in xs if x >= 0)

    unique: list[float] = []
    for r in roots:
        if unique and abs(r - unique[-1]) <= 1e-9 * max(abs(r), 1e-300):
            continue
        unique.append(r)
    for r in unique:
        rel = condition_residual(hopping, gamma, gamma_mid, r).relative_residual
        if abs(rel) > 1e-10:
            raise VerificationFailed(f"detuning root {r!r} leaves relative residual {rel:.3e}")
    return unique


@dataclass(frozen=True)
class DarkPhase:
    """Phase in ``[0, 2 pi)`` at which ``cavity`` (1-based) is dark.

    ``relative_intensity`` is the re-solved intensity of that cavity divided by
    the brightest cavity at the same phase. ``approximate`` marks a numerical
    minimum rather than an exact zero.
    """

    cavity: int
    phase: float
    relative_intensity: float
    approximate: bool = False


def _wrap(phi: float) -> float:
    phi = phi % TWO_PI
    return 0.0 if phi == TWO_PI else phi


def _relative_intensity(config: ChainConfig, cavity: int, phi: float) -> float:
    intensities = solve_steady_state(build_linear_system(config.with_phase(phi))).intensities
    peak = float(np.max(intensities))
    return 0.0 if peak == 0.0 else float(intensities[cavity - 1] / peak)


def _check_cavity(config: ChainConfig, cavity: int) -> None:
    if not 1 <= cavity <= config.n:
        raise ValidationError(f"target cavity must be in 1..{config.n}, got {cavity}", field="target_cavity")


def find_intensity_minimum(config: ChainConfig, cavity: int, grid_points: int = 720) -> DarkPhase:
    """Phase minimising the directly solved intensity of ``cavity``.

    A coarse periodic scan picks the best grid cell, then a golden-section
    search refines inside its two neighbours.
    """
    _check_cavity(config, cavity)
    grid = np.linspace(0.0, TWO_PI, grid_points, endpoint=False)
    values = phase_scan(config, grid)[:, cavity - 1]
    k = int(np.argmin(values))
    h = TWO_PI / grid_points

    def objective(phi: float) -> float:
        return float(phase_scan(config, [phi])[0, cavity - 1])

    centre = grid[k]
    res = scipy.optimize.minimize_scalar(
        objective, bracket=(centre - h, centre, centre + h), method="golden", options={"xtol": 1e-12}
    )
    phi = _wrap(float(res.x))
    return DarkPhase(cavity, phi, _relative_intensity(config, cavity, phi), approximate=True)


def solve_dark_phase(
    config: ChainConfig,
    target_cavity: int,
    *,
    constraint_tol: float = 1e-2,
    dark_tol: float = 1e-8,
    approximate: bool = False,
) -> list[DarkPhase]:
    """Exact dark phases of one cavity of a symmetric trimer.

    Each phase is re-verified by a direct solve; the target intensity relative
    to the brightest cavity must not exceed ``dark_tol`` plus the constraint's
    relative residual (an inexact constraint leaves a small floor).

    With ``approximate=True`` an asymmetric trimer or a violated constraint
    falls back to :func:`find_intensity_minimum` instead of raising.
    """
    _check_cavity(config, target_cavity)
    try:
        detuning, gamma, gamma_mid, hopping, _ = _symmetric_trimer(config)
    except PreconditionViolated:
        if approximate:
            return [find_intensity_minimum(config, target_cavity)]
        raise
    cond = condition_residual(hopping, gamma, gamma_mid, detuning)
    rel = abs(cond.relative_residual)
    if rel > constraint_tol:
        if approximate:
            return [find_intensity_minimum(config, target_cavity)]
        raise ConstraintViolated(
            f"no exact dark phase: relative constraint residual {rel:.3e} > {constraint_tol:.1e}",
            residual=cond.residual,
        )

    if target_cavity == 1:
        phi = math.atan2(cond.sin_rhs, cond.cos_rhs)
    elif target_cavity == 3:
        phi = math.atan2(-cond.sin_rhs, cond.cos_rhs)
    else:
        phi = math.pi
    phi = _wrap(phi)
    ratio = _relative_intensity(config, target_cavity, phi)
    if ratio > dark_tol + rel:
        raise VerificationFailed(
            f"cavity {target_cavity} not dark at phi={phi:.12g}: relative intensity {ratio:.3e}"
        )
    return [DarkPhase(target_cavity, phi, ratio)]


@dataclass(frozen=True)
class FlashPattern:
    phase: float
    labels: tuple[str, ...]
    intensities: tuple[float, ...]
    discrepancy: float  # closed form vs direct solve, relative to the peak


def _labels(intensities: np.ndarray, dark_tol: float) -> tuple[str, ...]:
    peak = float(np.max(intensities))
    return tuple(DARK if x <= dark_tol * peak else BRIGHT for x in intensities)


def predict_flash_pattern(config: ChainConfig, phase: float | None = None, *, dark_tol: float = 1e-8) -> FlashPattern:
    """Bright/dark labels of a resonant chain with lossless bulk at ``phase``.

    Labels come from the closed-form amplitudes; a cavity is dark when its
    intensity is at most ``dark_tol`` times the brightest one. The direct solve
    must agree to 1e-9 of the peak.
    """
    if phase is not None:
        config = config.with_phase(phase)
    closed = chain_closed_form(config).intensities
    direct = solve_steady_state(build_linear_system(config)).intensities
    peak = float(np.max(direct))
    discrepancy = 0.0 if peak == 0.0 else float(np.max(np.abs(closed - direct)) / peak)
    if discrepancy > 1e-9:
        raise VerificationFailed(f"closed form and direct solve disagree by {discrepancy:.3e}")
    return FlashPattern(config.phase, _labels(closed, dark_tol), tuple(float(x) for x in closed), discrepancy)


@dataclass(frozen=True)
class FlashReport:
    dark_phases: dict[int, list[DarkPhase]]
    pattern_at: dict[float, tuple[str, ...]]
    constraint_satisfied: bool
    condition: FlashCondition | None = None
    notes: list[str] = field(default_factory=list)


def _chain_dark_phases(config: ChainConfig, gamma: float) -> dict[int, float] | None:
    """Exact dark phase of every cavity of a lossless-bulk chain, or None."""
    n = config.n
    if abs(config.drive_left - config.drive_right) > 1e-12 * max(1.0, config.drive_left):
        return None
    if n % 2 == 1:
        s = (-1) ** ((n - 1) // 2)
        odd, even = (math.pi, 0.0) if s == 1 else (0.0, math.pi)
    elif abs(gamma - 2 * config.hopping) <= 1e-12 * config.hopping:
        s = (-1) ** (n // 2)
        odd, even = (math.pi / 2, 3 * math.pi / 2) if s == 1 else (3 * math.pi / 2, math.pi / 2)
    else:
        return None
    return {i: (odd if i % 2 == 1 else even) for i in range(1, n + 1)}


def flash_report(
    config: ChainConfig,
    phases: list[float] | None = None,
    *,
    constraint_tol: float = 1e-2,
    dark_tol: float = 1e-8,
    approximate: bool = True,
) -> FlashReport:
    """Dark phases of every cavity plus the bright/dark pattern at selected phases.

    Symmetric trimers use the analytic dark conditions, lossless-bulk chains
    their sublattice closed forms, and anything else (with ``approximate``) a
    numerical minimum search per cavity. ``phases`` defaults to the distinct
    dark phases found.
    """
    notes: list[str] = []
    condition = None
    dark: dict[int, list[DarkPhase]] = {}
    satisfied = False

    symmetric = True
    if config.n == 3:
        try:
            detuning, gamma, gamma_mid, hopping, _ = _symmetric_trimer(config)
        except PreconditionViolated:
            symmetric = False
    try:
        chain_gamma = _lossless_bulk_gamma(config, "flash_report")
    except PreconditionViolated:
        chain_gamma = None

    if config.n == 3 and symmetric:
        condition = condition_residual(hopping, gamma, gamma_mid, detuning)
        satisfied = abs(condition.relative_residual) <= constraint_tol
        for cavity in (1, 2, 3):
            dark[cavity] = solve_dark_phase(
                config, cavity, constraint_tol=constraint_tol, dark_tol=dark_tol, approximate=approximate
            )
        if not satisfied:
            notes.append("constraint violated: cavity 1/3 phases are numerical minima")
    elif chain_gamma is not None and (exact := _chain_dark_phases(config, chain_gamma)) is not None:
        satisfied = True
        for cavity, phi in exact.items():
            ratio = _relative_intensity(config, cavity, phi)
            if ratio > dark_tol:
                raise VerificationFailed(f"cavity {cavity} not dark at phi={phi:.12g}: relative intensity {ratio:.3e}")
            dark[cavity] = [DarkPhase(cavity, phi, ratio)]
    elif approximate:
        notes.append("no exact dark conditions known for this configuration: numerical minima")
        for cavity in range(1, config.n + 1):
            dark[cavity] = [find_intensity_minimum(config, cavity)]
    else:
        raise PreconditionViolated(
            "flash_report needs a symmetric trimer or a resonant chain with lossless bulk", field="decays"
        )

    if phases is None:
        distinct: dict[float, float] = {}
        for found in dark.values():
            for d in found:
                distinct.setdefault(round(d.phase, 12), d.phase)
        phases = sorted(distinct.values())
    label_tol = dark_tol
    if condition is not None and satisfied:
        label_tol += abs(condition.relative_residual)
    pattern_at: dict[float, tuple[str, ...]] = {}
    for phi in phases:
        cfg = config.with_phase(phi)
        if chain_gamma is not None:
            pattern_at[phi] = predict_flash_pattern(cfg, dark_tol=label_tol).labels
        else:
            pattern_at[phi] = _labels(solve_steady_state(build_linear_system(cfg)).intensities, label_tol)
    return FlashReport(dark, pattern_at, satisfied, condition, notes)
