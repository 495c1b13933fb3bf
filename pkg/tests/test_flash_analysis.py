import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, settings
from hypothesis import strategies as st

from photonic_flash import (
    ChainConfig,
    ConstraintViolated,
    PreconditionViolated,
    ValidationError,
    build_linear_system,
    condition_residual,
    find_intensity_minimum,
    flash_report,
    phase_scan,
    predict_flash_pattern,
    presets,
    resonant_chain,
    solve_dark_phase,
    solve_enabling_detuning,
    solve_steady_state,
    sublattice_intensities,
    trimer,
)
from photonic_flash.flash_analysis import enabling_quadratic

from .conftest import lossless_bulk_chains


def exact_residual(j, g, gp, d):
    j, g, gp, d = map(Fraction, (j, g, gp, d))
    return (4 * j**2 + g * gp - 4 * d**2) ** 2 + 4 * (d * g + d * gp) ** 2 - 16 * j**4


def test_fig2_residual_against_exact_arithmetic():
    cond = condition_residual(2.0, 1.0, 0.2, 2.773)
    ref = exact_residual("2", "1", "0.2", "2.773")
    assert cond.residual == pytest.approx(float(ref), rel=1e-9)
    assert cond.residual == pytest.approx(0.2304285, rel=1e-6)
    assert cond.relative_residual == pytest.approx(float(ref) / 256, rel=1e-9)
    assert cond.cos_rhs == pytest.approx(-0.90988225)
    assert cond.sin_rhs == pytest.approx(0.41595)


def test_resonant_lossless_middle_residual_vanishes():
    assert condition_residual(0.7, 1.3, 0.0, 0.0).residual == 0.0
    assert condition_residual(0.7, 0.0, 0.0, 0.0).residual == 0.0


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 5), st.floats(0, 3), st.floats(0, 3), st.floats(-5, 5))
def test_residual_identity(j, g, gp, d):
    c = condition_residual(j, g, gp, d)
    assert c.residual == pytest.approx(16 * j**4 * (c.cos_rhs**2 + c.sin_rhs**2 - 1), rel=1e-12, abs=1e-12 * c.scale)


def test_condition_rejects_bad_hopping():
    with pytest.raises(ValidationError):
        condition_residual(0.0, 1, 0, 0)


def test_quadratic_expansion_against_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(50):
        j, g, gp = rng.uniform(0.1, 4), rng.uniform(0, 3), rng.uniform(0, 3)
        a, b, c = enabling_quadratic(j, g, gp)
        for x in np.linspace(0, 4 * j**2 + 4, 41):
            brute = condition_residual(j, g, gp, math.sqrt(x)).residual
            assert a * x * x + b * x + c == pytest.approx(brute, rel=1e-9, abs=1e-9 * 16 * j**4)


def test_fig2_quadratic_coefficients():
    a, b, c = enabling_quadratic(2.0, 1.0, 0.2)
    assert (a, b, c) == pytest.approx((16.0, -123.84, 6.44))


def test_enabling_detuning_fig2():
    roots = solve_enabling_detuning(2.0, 1.0, 0.2)

    def f(d):
        return condition_residual(2.0, 1.0, 0.2, d).residual

    expected = [scipy.optimize.brentq(f, 0.0, 1.0, xtol=1e-14), scipy.optimize.brentq(f, 2.0, 3.0, xtol=1e-14)]
    assert roots == pytest.approx(expected, rel=1e-12)
    assert roots[1] == pytest.approx(2.773, abs=1e-3)
    for r in roots:
        assert abs(condition_residual(2.0, 1.0, 0.2, r).relative_residual) <= 1e-10


def test_enabling_detuning_resonant_root():
    roots = solve_enabling_detuning(0.8, 1.3, 0.0)
    assert roots[0] == 0.0
    assert roots == sorted(roots)


def test_enabling_detuning_large_hopping():
    for j in (10.0, 100.0, 1000.0):
        top = solve_enabling_detuning(j, 1.0, 0.2)[-1]
        assert top / (math.sqrt(2) * j) == pytest.approx(1, abs=1 / j)


def test_enabling_detuning_no_root():
    # strong middle loss: discriminant negative
    assert solve_enabling_detuning(0.1, 1.0, 5.0) == []


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 5), st.floats(0, 3), st.floats(0, 3))
def test_enabling_roots_reverify(j, g, gp):
    for r in solve_enabling_detuning(j, g, gp):
        assert r >= 0
        assert abs(condition_residual(j, g, gp, r).relative_residual) <= 1e-10


# ---- dark phases -------------------------------------------------------------


def test_fig2_dark_phases():
    cfg = presets.fig2()
    (p1,) = solve_dark_phase(cfg, 1)
    (p2,) = solve_dark_phase(cfg, 2)
    (p3,) = solve_dark_phase(cfg, 3)
    assert p1.phase / math.pi == pytest.approx(math.atan2(0.41595, -0.90988225) / math.pi, abs=1e-9)
    assert p1.phase / math.pi == pytest.approx(0.8635, abs=1e-4)
    assert p2.phase == math.pi
    assert (p1.phase + p3.phase) % (2 * math.pi) == pytest.approx(0, abs=1e-12)
    assert not p1.approximate
    # inexact constraint: a small floor remains
    assert 0 < p1.relative_intensity < 1e-6


def test_dark_phases_exact_constraint():
    detuning = solve_enabling_detuning(2.0, 1.0, 0.2)[-1]
    cfg = trimer(detuning, 1.0, 0.2, 2.0, 2.0)
    for cavity in (1, 2, 3):
        (d,) = solve_dark_phase(cfg, cavity)
        intensities = solve_steady_state(build_linear_system(cfg.with_phase(d.phase))).intensities
        assert intensities[cavity - 1] <= 1e-10 * intensities.max()


def test_dark_phase_constraint_violation():
    cfg = trimer(1.0, 1.0, 0.2, 2.0, 2.0)
    with pytest.raises(ConstraintViolated):
        solve_dark_phase(cfg, 1)
    (approx,) = solve_dark_phase(cfg, 1, approximate=True)
    assert approx.approximate
    grid = np.linspace(0, 2 * np.pi, 20001)
    scan = phase_scan(cfg, grid)[:, 0]
    assert approx.phase == pytest.approx(grid[np.argmin(scan)], abs=2 * np.pi / 20000)


def test_dark_phase_asymmetric_needs_approximate():
    cfg = ChainConfig(3, (0, 0, 0), (1, 0, 0.5), 0.5, 2, 1.5)
    with pytest.raises(PreconditionViolated):
        solve_dark_phase(cfg, 1)
    (approx,) = solve_dark_phase(cfg, 1, approximate=True)
    assert approx.approximate


def test_dark_phase_bad_cavity():
    with pytest.raises(ValidationError):
        solve_dark_phase(presets.fig2(), 4)


def test_minimum_search_on_fig2():
    d = find_intensity_minimum(presets.fig2(), 2)
    assert d.phase == pytest.approx(math.pi, abs=1e-7)


# ---- patterns ---------------------------------------------------------------


B, D = "bright", "dark"


def test_n5_patterns():
    assert predict_flash_pattern(presets.fig4a(), 0.0).labels == (B, D, B, D, B)
    assert predict_flash_pattern(presets.fig4a(), math.pi).labels == (D, B, D, B, D)


def test_n6_patterns_follow_direct_solve():
    assert predict_flash_pattern(presets.fig4b(), math.pi / 2).labels == (B, D) * 3
    assert predict_flash_pattern(presets.fig4b(), 3 * math.pi / 2).labels == (D, B) * 3


def test_pattern_rejects_non_chain():
    with pytest.raises(PreconditionViolated):
        predict_flash_pattern(presets.fig2(), 0.0)


@settings(max_examples=100, deadline=None)
@given(lossless_bulk_chains())
def test_flash_complementarity(cfg):
    cfg = cfg.with_drives(cfg.drive_left, cfg.drive_left)
    grid = np.linspace(0, 2 * np.pi, 721)
    curves = np.array([sublattice_intensities(cfg.with_phase(p)) for p in grid])
    report = flash_report(cfg)
    odd_dark = report.dark_phases[1][0].phase
    even_dark = report.dark_phases[2][0].phase
    odd_at, even_at = sublattice_intensities(cfg.with_phase(even_dark))
    assert odd_at == pytest.approx(curves[:, 0].max(), rel=1e-6)
    assert even_at <= 1e-12 * odd_at
    odd_at, even_at = sublattice_intensities(cfg.with_phase(odd_dark))
    assert even_at == pytest.approx(curves[:, 1].max(), rel=1e-6)
    assert odd_at <= 1e-12 * even_at


def test_flash_report_fig2():
    report = flash_report(presets.fig2())
    assert report.constraint_satisfied
    assert report.condition.relative_residual == pytest.approx(9.0011e-4, rel=1e-4)
    phases = [report.dark_phases[c][0].phase / math.pi for c in (1, 2, 3)]
    assert phases == pytest.approx([0.86351, 1.0, 1.13649], abs=1e-5)
    labels = list(report.pattern_at.values())
    assert labels == [(D, B, B), (B, D, B), (B, B, D)]


def test_flash_report_generic_chain_uses_minima():
    cfg = ChainConfig(4, (0.2, 0, 0, -0.1), (1, 0.1, 0.2, 1), 0.6, 1, 1)
    report = flash_report(cfg)
    assert not report.constraint_satisfied
    assert all(d[0].approximate for d in report.dark_phases.values())
    with pytest.raises(PreconditionViolated):
        flash_report(cfg, approximate=False)


def test_flash_report_dark_phases_reverify():
    for cfg in (presets.fig3(), presets.fig4a(), presets.fig4b(), resonant_chain(7, 0.6, 1.1, 1.0)):
        report = flash_report(cfg)
        for found in report.dark_phases.values():
            for d in found:
                intensities = solve_steady_state(build_linear_system(cfg.with_phase(d.phase))).intensities
                assert intensities[d.cavity - 1] <= 1e-10 * intensities.max()
