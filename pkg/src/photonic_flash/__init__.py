"""Mean-field steady states and phase-controlled dark/bright patterns of driven cavity chains."""

from .dynamics_noise import (
    NoiseConfig,
    NoiseResult,
    Trajectory,
    integrate_dynamics,
    noise_corrected_intensities,
    propagator,
)
from .errors import (
    ConstraintViolated,
    DomainError,
    FlashError,
    NumericalError,
    PreconditionViolated,
    SingularMatrix,
    Unstable,
    ValidationError,
    VerificationFailed,
)
from .flash_analysis import (
    DarkPhase,
    FlashCondition,
    FlashPattern,
    FlashReport,
    condition_residual,
    find_intensity_minimum,
    flash_report,
    predict_flash_pattern,
    solve_dark_phase,
    solve_enabling_detuning,
)
from .model import ChainConfig, LinearSystem, build_linear_system, is_stable, resonant_chain, trimer
from .steady_state import (
    SteadyState,
    TrimerDerived,
    chain_closed_form,
    phase_scan,
    solve_steady_state,
    sublattice_intensities,
    trimer_closed_form,
    trimer_compact_intensities,
)

__version__ = "0.1.0"
