"""Command-line front end.

Subcommands: ``steady``, ``sweep``, ``flash``, ``dynamics``, ``noise`` and
``figures``. Chain parameters come from ``--preset`` or a TOML ``--config`` file
whose keys are the :class:`~photonic_flash.model.ChainConfig` field names::

    units = "gamma_ref"      # all rates below in units of gamma_ref
    n = 3
    detunings = [0.0, 0.0, 0.0]
    decays = [1.0, 0.0, 1.0]
    hopping = 0.5
    drive_left = 2.0
    drive_right = 2.0
    phase = 0.0

Exit status is 0 on success, 1 on invalid input, 2 on numerical failure; on
error a single JSON line is written to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__, presets
from .dynamics_noise import NoiseConfig, integrate_dynamics, noise_corrected_intensities
from .errors import FlashError, NumericalError, ValidationError, VerificationFailed
from .flash_analysis import flash_report
from .model import ChainConfig, build_linear_system, is_stable
from .steady_state import (
    chain_closed_form,
    solve_steady_state,
    trimer_closed_form,
    trimer_compact_intensities,
)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SWEEP_PARAMETERS = ("phase", "detuning", "hopping")

_PI_RE = re.compile(
    r"""^\s*(?P<coef>[+-]?(?:\d+\.?\d*|\.\d+)(?:e[+-]?\d+)?|[+-])?\s*\*?\s*pi
        \s*(?:/\s*(?P<den>\d+\.?\d*|\.\d+))?\s*$""",
    re.IGNORECASE | re.VERBOSE,
)


def parse_phase(text: str) -> float:
    """Radians from ``"1.3"``, ``"pi"``, ``"0.8pi"``, ``"-pi/2"`` or ``"3pi/2"``."""
    m = _PI_RE.match(text)
    if m:
        coef = m.group("coef")
        value = math.pi * (float(coef + "1") if coef in ("+", "-") else float(coef) if coef else 1.0)
        if m.group("den"):
            value /= float(m.group("den"))
        return value
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(f"cannot parse phase {text!r}", field="phi") from None
    if not math.isfinite(value):
        raise ValidationError(f"phase must be finite, got {text!r}", field="phi")
    return value


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def load_config(path: str | Path) -> ChainConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}", field="config") from None
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"malformed config {path}: {exc}", field="config") from None
    units = data.pop("units", "gamma_ref")
    if not isinstance(units, str):
        raise ValidationError("units must be a string", field="units")
    return ChainConfig.from_dict(data)


def config_comment_lines(config: ChainConfig) -> list[str]:
    lines = [f"# photonic_flash {__version__}", "# units = gamma_ref"]
    for key, value in config.to_dict().items():
        if isinstance(value, list):
            value = "[" + ", ".join(fmt(v) for v in value) + "]"
        elif isinstance(value, float):
            value = fmt(value)
        lines.append(f"# {key} = {value}")
    return lines


def write_csv(path: str | Path | None, comments: list[str], header: list[str], rows: list[list[float]]) -> None:
    buf = io.StringIO()
    for line in comments:
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    if path is None:
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def emit_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    end: float
    count: int
    base_config: ChainConfig

    def __post_init__(self) -> None:
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValidationError(f"parameter must be one of {SWEEP_PARAMETERS}", field="parameter")
        if self.count < 2:
            raise ValidationError("sweep needs at least 2 points", field="points")
        if not self.start < self.end:
            raise ValidationError("sweep needs start < end", field="start")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.end, self.count)

    def config_at(self, value: float) -> ChainConfig:
        if self.parameter == "phase":
            return self.base_config.with_phase(value)
        if self.parameter == "detuning":
            return replace(self.base_config, detunings=(value,) * self.base_config.n)
        return replace(self.base_config, hopping=value)


def _point(spec: SweepSpec, value: float) -> list[float]:
    state = solve_steady_state(build_linear_system(spec.config_at(value)))
    return [value, *state.intensities]


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[list[float]]:
    """Rows ``[value, I1, ..., IN]`` in grid order, whatever the completion order."""
    grid = [float(x) for x in spec.grid()]
    if jobs <= 1:
        return [_point(spec, v) for v in grid]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda v: _point(spec, v), grid))


def _closed_form(config: ChainConfig):
    if config.n == 3:
        return trimer_closed_form(config)
    return chain_closed_form(config)


def figure_dataset(name: str, points: int = 1001) -> tuple[ChainConfig, list[list[float]]]:
    """Phase scan over ``[0, 2 pi]`` for a named preset, checked against its closed form."""
    if name not in presets.FIGURES:
        raise ValidationError(f"unknown figure {name!r}; choose from {sorted(presets.FIGURES)}", field="figure")
    base = presets.FIGURES[name]()
    rows = run_sweep(SweepSpec("phase", 0.0, 2 * math.pi, points, base))
    peak = max(max(r[1:]) for r in rows)
    for row in rows[:: max(1, points // 50)]:
        closed = _closed_form(base.with_phase(row[0])).intensities
        err = float(np.max(np.abs(closed - np.asarray(row[1:])))) / peak
        if err > 1e-9:
            raise VerificationFailed(f"{name}: closed form and direct solve differ by {err:.3e} at phi={row[0]}")
    return base, rows


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def _config_from_args(args) -> ChainConfig:
    if args.config and args.preset:
        raise ValidationError("give either --config or --preset, not both", field="config")
    if args.config:
        config = load_config(args.config)
    elif args.preset:
        config = presets.FIGURES[args.preset]()
    else:
        raise ValidationError("a chain is required: use --config PATH or --preset NAME", field="config")
    if getattr(args, "phi", None) is not None and not isinstance(args.phi, list):
        config = config.with_phase(parse_phase(args.phi))
    return config


def _cavities(amplitudes, intensities) -> list[dict]:
    return [
        {"cavity": i + 1, "amplitude": [float(a.real), float(a.imag)], "intensity": float(x)}
        for i, (a, x) in enumerate(zip(amplitudes, intensities))
    ]


def cmd_steady(args) -> None:
    config = _config_from_args(args)
    system = build_linear_system(config)
    report = is_stable(system)
    payload = {"config": config.to_dict(), "method": args.method}
    if args.method == "solve":
        state = solve_steady_state(system, args.tolerance)
        payload.update(residual=state.residual, cavities=_cavities(state.amplitudes, state.intensities))
    elif args.method == "trimer":
        state = trimer_closed_form(config)
        payload.update(residual=state.residual, cavities=_cavities(state.amplitudes, state.intensities))
    elif args.method == "chain":
        state = chain_closed_form(config)
        payload.update(
            residual=state.residual,
            closed_form=state.closed_form,
            cavities=_cavities(state.amplitudes, state.intensities),
        )
    else:
        intensities, derived = trimer_compact_intensities(config)
        payload.update(
            delta=derived.delta_amp,
            theta=derived.theta,
            cavities=[{"cavity": i + 1, "intensity": float(x)} for i, x in enumerate(intensities)],
        )
    payload.update(stable=bool(report.stable), spectral_abscissa=report.abscissa)
    emit_json(payload, args.output)


def cmd_sweep(args) -> None:
    config = _config_from_args(args)
    conv = parse_phase if args.parameter == "phase" else float
    try:
        start, end = conv(args.start), conv(args.end)
    except ValueError:
        raise ValidationError("sweep bounds must be numbers", field="start") from None
    spec = SweepSpec(args.parameter, start, end, args.points, config)
    rows = run_sweep(spec, args.jobs)
    comments = config_comment_lines(config) + [f"# sweep {spec.parameter} {fmt(start)} {fmt(end)} {spec.count}"]
    header = [spec.parameter] + [f"I{i}" for i in range(1, config.n + 1)]
    write_csv(args.output, comments, header, rows)


def cmd_flash(args) -> None:
    config = _config_from_args(args)
    phases = [parse_phase(p) for p in args.phi] if args.phi else None
    report = flash_report(config, phases, dark_tol=args.tolerance)
    cond = report.condition
    payload = {
        "config": config.to_dict(),
        "constraint_satisfied": report.constraint_satisfied,
        "constraint": None
        if cond is None
        else {
            "cos_rhs": cond.cos_rhs,
            "sin_rhs": cond.sin_rhs,
            "residual": cond.residual,
            "relative_residual": cond.relative_residual,
        },
        "dark_phases": [
            {
                "cavity": d.cavity,
                "phase": d.phase,
                "phase_over_pi": d.phase / math.pi,
                "relative_intensity": d.relative_intensity,
                "approximate": d.approximate,
            }
            for found in report.dark_phases.values()
            for d in found
        ],
        "patterns": [
            {"phase": phi, "phase_over_pi": phi / math.pi, "labels": list(labels)}
            for phi, labels in report.pattern_at.items()
        ],
        "notes": report.notes,
    }
    emit_json(payload, args.output)


def cmd_dynamics(args) -> None:
    config = _config_from_args(args)
    system = build_linear_system(config)
    traj = integrate_dynamics(system, np.zeros(config.n, dtype=complex), args.t_end, args.dt)
    n = config.n
    header = ["t"] + [f"I{i}" for i in range(1, n + 1)]
    header += [f"{part}_a{i}" for i in range(1, n + 1) for part in ("re", "im")]
    rows = []
    for t, state in zip(traj.times, traj.states):
        parts = [x for a in state for x in (a.real, a.imag)]
        rows.append([t, *(np.abs(state) ** 2), *parts])
    write_csv(args.output, config_comment_lines(config), header, rows)


def cmd_noise(args) -> None:
    config = _config_from_args(args)
    system = build_linear_system(config)
    try:
        occupations = [float(x) for x in args.thermal.split(",")]
    except ValueError:
        raise ValidationError(f"cannot parse thermal occupations {args.thermal!r}", field="thermal") from None
    noise = NoiseConfig.default(system, occupations)
    if args.horizon is not None or args.step is not None:
        horizon = args.horizon if args.horizon is not None else noise.horizon
        step = args.step if args.step is not None else horizon / 2000
        noise = NoiseConfig(noise.thermal_occupations, horizon, step)
    result = noise_corrected_intensities(system, noise, rate_weighted=args.rate_weighted, tol=args.tolerance)
    payload = {
        "config": config.to_dict(),
        "thermal_occupations": list(noise.thermal_occupations),
        "horizon": noise.horizon,
        "quadrature_step": noise.quadrature_step,
        "rate_weighted": args.rate_weighted,
        "coherent_intensities": result.coherent_intensities.tolist(),
        "correction": result.correction.tolist(),
        "noise_corrected": result.noise_corrected.tolist(),
        "converged": result.converged,
        "relative_change": result.relative_change,
    }
    emit_json(payload, args.output)


def cmd_figures(args) -> None:
    names = sorted(presets.FIGURES) if "all" in args.names else args.names
    outdir = Path(args.output or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    for name in names:
        config, rows = figure_dataset(name, args.points)
        header = ["phi"] + [f"I{i}" for i in range(1, config.n + 1)]
        comments = config_comment_lines(config) + [f"# figure {name}: phase scan over [0, 2pi]"]
        write_csv(outdir / f"{name}.csv", comments, header, rows)
        print(outdir / f"{name}.csv")


# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message, field="arguments")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="photonic-flash", description="Driven cavity chain steady states and phase-controlled flashes.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def chain_args(sp, phi=True):
        sp.add_argument("--config", help="TOML chain configuration.")
        sp.add_argument("--preset", choices=sorted(presets.FIGURES), help="Built-in figure configuration.")
        if phi:
            sp.add_argument("--phi", help='Drive phase: radians or multiples of pi, e.g. "0.8pi".')
        sp.add_argument("--output", help="Output file (default: stdout).")

    sp = sub.add_parser("steady", help="Steady state of one configuration.")
    chain_args(sp)
    sp.add_argument("--method", choices=["solve", "trimer", "chain", "compact"], default="solve")
    sp.add_argument("--tolerance", type=float, default=1e-10, help="Relative residual bound (default: 1e-10).")
    sp.set_defaults(func=cmd_steady)

    sp = sub.add_parser("sweep", help="CSV of intensities against one swept parameter.")
    chain_args(sp)
    sp.add_argument("--parameter", choices=SWEEP_PARAMETERS, default="phase")
    sp.add_argument("--start", default="0")
    sp.add_argument("--end", default="2pi")
    sp.add_argument("--points", type=int, default=1001)
    sp.add_argument("--jobs", type=int, default=1, help="Worker threads (default: 1).")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("flash", help="Dark phases, constraint residual and bright/dark patterns.")
    chain_args(sp, phi=False)
    sp.add_argument("--phi", action="append", help="Phase at which to report the pattern (repeatable).")
    sp.add_argument("--tolerance", type=float, default=1e-8, help="Darkness threshold relative to the brightest cavity.")
    sp.set_defaults(func=cmd_flash)

    sp = sub.add_parser("dynamics", help="Trajectory CSV from the empty chain.")
    chain_args(sp)
    sp.add_argument("--t-end", type=float, default=50.0)
    sp.add_argument("--dt", type=float, default=0.1)
    sp.set_defaults(func=cmd_dynamics)

    sp = sub.add_parser("noise", help="Thermal-noise corrected intensities.")
    chain_args(sp)
    sp.add_argument("--thermal", required=True, help="Comma-separated occupations, one per cavity.")
    sp.add_argument("--horizon", type=float)
    sp.add_argument("--step", type=float)
    sp.add_argument("--rate-weighted", action="store_true", help="Multiply each occupation by its decay rate.")
    sp.add_argument("--tolerance", type=float, default=1e-8, help="Convergence threshold (relative).")
    sp.set_defaults(func=cmd_noise)

    sp = sub.add_parser("figures", help="Phase-scan datasets of the preset figures.")
    sp.add_argument("names", nargs="+", choices=sorted(presets.FIGURES) + ["all"])
    sp.add_argument("--output", help="Output directory (default: current directory).")
    sp.add_argument("--points", type=int, default=1001)
    sp.set_defaults(func=cmd_figures)
    return p


def _report_error(exc: FlashError) -> None:
    line = {"error": type(exc).__name__, "message": str(exc)}
    if getattr(exc, "field", None):
        line["field"] = exc.field
    sys.stderr.write(json.dumps(line) + "\n")


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except ValidationError as exc:
        _report_error(exc)
        return 1
    except NumericalError as exc:
        _report_error(exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
