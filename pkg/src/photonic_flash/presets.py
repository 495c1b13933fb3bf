"""Reference parameter sets for the phase-scan figures (rates in units of gamma)."""

from __future__ import annotations

from .model import ChainConfig, resonant_chain, trimer


def fig2(phase: float = 0.0) -> ChainConfig:
    """Off-resonant trimer: J = 2, lambda = 2, Delta = 2.773, gamma' = 0.2."""
    return trimer(detuning=2.773, gamma=1.0, gamma_mid=0.2, hopping=2.0, drive=2.0, phase=phase)


def fig3(phase: float = 0.0) -> ChainConfig:
    """Resonant trimer with lossless centre: J = 0.5, lambda = 2."""
    return trimer(detuning=0.0, gamma=1.0, gamma_mid=0.0, hopping=0.5, drive=2.0, phase=phase)


def fig4a(phase: float = 0.0) -> ChainConfig:
    """Five-cavity resonant chain, lossy ends only, same rates as :func:`fig3`."""
    return resonant_chain(5, gamma=1.0, hopping=0.5, drive=2.0, phase=phase)


def fig4b(phase: float = 0.0) -> ChainConfig:
    """Six-cavity resonant chain with gamma = 2 J."""
    return resonant_chain(6, gamma=1.0, hopping=0.5, drive=2.0, phase=phase)


FIGURES = {"fig2": fig2, "fig3": fig3, "fig4a": fig4a, "fig4b": fig4b}
