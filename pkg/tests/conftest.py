from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from photonic_flash import ChainConfig

ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion, reported in the terminal summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and rep.when == "call":
        ACCEPTANCE_RESULTS.append((marker.args[0], "PASS" if rep.passed else "FAIL", item.name))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, status, name in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{status}] {label}  ({name})")


def random_trimer(rng: np.random.Generator) -> ChainConfig:
    """Arbitrary (asymmetric) trimer; every cavity lossy so M is Hurwitz."""
    return ChainConfig(
        n=3,
        detunings=tuple(rng.uniform(-3, 3, 3)),
        decays=tuple(rng.uniform(0.05, 2.0, 3)),
        hopping=float(rng.uniform(0.1, 3.0)),
        drive_left=float(rng.uniform(0.0, 3.0)),
        drive_right=float(rng.uniform(0.0, 3.0)),
        phase=float(rng.uniform(-np.pi, 3 * np.pi)),
    )


def random_chain(rng: np.random.Generator, n: int | None = None, palindromic: bool = False) -> ChainConfig:
    n = int(rng.integers(2, 13)) if n is None else n
    det = rng.uniform(-3, 3, n)
    dec = rng.uniform(0.05, 2.0, n)
    if palindromic:
        det = (det + det[::-1]) / 2
        dec = (dec + dec[::-1]) / 2
    return ChainConfig(
        n=n,
        detunings=tuple(det),
        decays=tuple(dec),
        hopping=float(rng.uniform(0.1, 3.0)),
        drive_left=float(rng.uniform(0.1, 3.0)),
        drive_right=float(rng.uniform(0.1, 3.0)),
        phase=float(rng.uniform(0, 2 * np.pi)),
    )


rates = st.floats(0.05, 2.0)
detunings = st.floats(-3.0, 3.0)


@st.composite
def chain_configs(draw, min_n=2, max_n=12):
    n = draw(st.integers(min_n, max_n))
    return ChainConfig(
        n=n,
        detunings=tuple(draw(st.lists(detunings, min_size=n, max_size=n))),
        decays=tuple(draw(st.lists(rates, min_size=n, max_size=n))),
        hopping=draw(st.floats(0.1, 3.0)),
        drive_left=draw(st.floats(0.0, 3.0)),
        drive_right=draw(st.floats(0.0, 3.0)),
        phase=draw(st.floats(0.0, 2 * np.pi)),
    )


@st.composite
def lossless_bulk_chains(draw, min_n=3, max_n=12):
    """Resonant chains whose only losses sit on the two end cavities."""
    n = draw(st.integers(min_n, max_n))
    gamma = draw(st.floats(0.1, 3.0))
    hopping = gamma / 2 if n % 2 == 0 else draw(st.floats(0.1, 3.0))
    return ChainConfig(
        n=n,
        detunings=(0.0,) * n,
        decays=(gamma,) + (0.0,) * (n - 2) + (gamma,),
        hopping=hopping,
        drive_left=draw(st.floats(0.1, 3.0)),
        drive_right=draw(st.floats(0.1, 3.0)),
        phase=draw(st.floats(0.0, 2 * np.pi)),
    )
