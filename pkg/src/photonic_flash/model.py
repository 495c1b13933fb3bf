"""Chain parameters and the mean-field linear system.

The mean field of an N-cavity chain with nearest-neighbour hopping J, whose
two end cavities are driven coherently, obeys

    dA/dt = M A + B,

with ``M_ii = -i Delta_i - gamma_i / 2``, ``M_{i,i+1} = M_{i+1,i} = -i J`` and
``B = (-i lambda_1 exp(-i phi), 0, ..., 0, -i lambda_N)``.

Units: every rate (detunings, decays, hopping, drives) is expressed in units of
a reference rate ``gamma_ref`` chosen by the caller; times are then in units of
``1 / gamma_ref``. Nothing in the library depends on that choice.

Indexing: cavities are numbered 1..N in everything a user sees (CLI output,
``target_cavity`` arguments, labels); arrays are 0-based internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import NumericalError, ValidationError

__all__ = [
    "ChainConfig",
    "LinearSystem",
    "StabilityReport",
    "build_linear_system",
    "is_stable",
    "trimer",
    "resonant_chain",
]


def _finite(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a real number, got {value!r}", field=name) from None
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value}", field=name)
    return value


@dataclass(frozen=True)
class ChainConfig:
    """Physical description of a driven cavity chain.

    ``detunings`` and ``decays`` hold one entry per cavity; ``drive_left`` acts
    on cavity 1 with phase factor ``exp(-i phase)``, ``drive_right`` on cavity N.
    """

    n: int
    detunings: tuple[float, ...]
    decays: tuple[float, ...]
    hopping: float
    drive_left: float
    drive_right: float
    phase: float = 0.0

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise ValidationError(f"n must be an integer, got {self.n!r}", field="n")
        if self.n < 2:
            raise ValidationError(f"n must be >= 2, got {self.n}", field="n")
        object.__setattr__(self, "n", int(self.n))
        for name in ("detunings", "decays"):
            values = getattr(self, name)
            if np.ndim(values) != 1 or len(values) != self.n:
                raise ValidationError(f"{name} must have exactly n={self.n} entries", field=name)
            object.__setattr__(self, name, tuple(_finite(name, v) for v in values))
        if any(g < 0 for g in self.decays):
            raise ValidationError("decays must be non-negative", field="decays")
        for name in ("hopping", "drive_left", "drive_right", "phase"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.hopping <= 0:
            raise ValidationError(f"hopping must be > 0, got {self.hopping}", field="hopping")
        for name in ("drive_left", "drive_right"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0", field=name)

    def with_phase(self, phase: float) -> ChainConfig:
        return replace(self, phase=phase)

    def with_drives(self, left: float, right: float) -> ChainConfig:
        return replace(self, drive_left=left, drive_right=right)

    def reversed(self) -> ChainConfig:
        """Same chain read from cavity N to cavity 1 (drive amplitudes swap, phase kept)."""
        return replace(
            self,
            detunings=self.detunings[::-1],
            decays=self.decays[::-1],
            drive_left=self.drive_right,
            drive_right=self.drive_left,
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "detunings": list(self.detunings),
            "decays": list(self.decays),
            "hopping": self.hopping,
            "drive_left": self.drive_left,
            "drive_right": self.drive_right,
            "phase": self.phase,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ChainConfig:
        known = {"n", "detunings", "decays", "hopping", "drive_left", "drive_right", "phase"}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}", field=sorted(unknown)[0])
        missing = known - {"phase"} - set(data)
        if missing:
            raise ValidationError(f"missing config keys: {sorted(missing)}", field=sorted(missing)[0])
        return cls(**data)


def trimer(
    detuning: float,
    gamma: float,
    gamma_mid: float,
    hopping: float,
    drive: float,
    phase: float = 0.0,
) -> ChainConfig:
    """Symmetric three-cavity chain: equal detunings and drives, side decay ``gamma``."""
    return ChainConfig(
        n=3,
        detunings=(detuning,) * 3,
        decays=(gamma, gamma_mid, gamma),
        hopping=hopping,
        drive_left=drive,
        drive_right=drive,
        phase=phase,
    )


def resonant_chain(n: int, gamma: float, hopping: float, drive: float, phase: float = 0.0) -> ChainConfig:
    """Resonantly driven chain whose only losses sit on the two end cavities."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise ValidationError(f"n must be an integer >= 2, got {n!r}", field="n")
    return ChainConfig(
        n=n,
        detunings=(0.0,) * n,
        decays=(gamma,) + (0.0,) * (n - 2) + (gamma,),
        hopping=hopping,
        drive_left=drive,
        drive_right=drive,
        phase=phase,
    )


@dataclass(frozen=True)
class LinearSystem:
    """Drift matrix ``matrix`` (N x N) and drive vector ``drive`` (N)."""

    matrix: NDArray[np.complex128] = field(repr=False)
    drive: NDArray[np.complex128] = field(repr=False)

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=complex)
        drive = np.array(self.drive, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError("matrix must be square", field="matrix")
        if drive.shape != (matrix.shape[0],):
            raise ValidationError("drive length must match matrix size", field="drive")
        matrix.setflags(write=False)
        drive.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "drive", drive)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def with_drive(self, drive: Sequence[complex]) -> LinearSystem:
        return LinearSystem(self.matrix, np.asarray(drive, dtype=complex))


def build_linear_system(config: ChainConfig) -> LinearSystem:
    """Assemble ``(M, B)`` for ``config``."""
    if not isinstance(config, ChainConfig):
        raise ValidationError(f"expected ChainConfig, got {type(config).__name__}", field="config")
    n = config.n
    diag = -1j * np.asarray(config.detunings) - 0.5 * np.asarray(config.decays)
    off = np.full(n - 1, -1j * config.hopping)
    matrix = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)

    drive = np.zeros(n, dtype=complex)
    drive[0] = -1j * config.drive_left * np.exp(-1j * config.phase)
    drive[-1] += -1j * config.drive_right
    return LinearSystem(matrix, drive)


class StabilityReport(NamedTuple):
    stable: bool
    spectrum: NDArray[np.complex128]
    abscissa: float


def is_stable(system: LinearSystem | NDArray, tol: float = 1e-9) -> StabilityReport:
    """Hurwitz test on the drift matrix.

    Stable means every eigenvalue has real part below ``-tol * max|eigenvalue|``.
    Unpacks as ``(stable, spectrum, abscissa)``; ``abscissa`` is the largest
    real part of the spectrum.
    """
    if tol <= 0:
        raise ValidationError("tol must be > 0", field="tol")
    matrix = system.matrix if isinstance(system, LinearSystem) else np.asarray(system, dtype=complex)
    try:
        spectrum = np.linalg.eigvals(matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue solver failed: {exc}") from exc
    if not np.all(np.isfinite(spectrum)):
        raise NumericalError("eigenvalue solver returned non-finite values")
    abscissa = float(np.max(spectrum.real))
    scale = float(np.max(np.abs(spectrum)))
    return StabilityReport(abscissa < -tol * scale, spectrum, abscissa)
