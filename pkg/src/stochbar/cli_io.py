"""Configuration files, command dispatch, and bit-stable CSV emission.

The configuration is one flat JSON object; every run writes its outputs
plus a manifest that records the resolved configuration, seed, and
duration.  Floats are printed with Python's shortest round-trip repr so
identical runs produce byte-identical CSV files on every platform.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .core_model import (
    ConfigBundle,
    NumericsConfig,
    PhysicalConfig,
    StochasticConfig,
    validate_config,
)
from .modal_basis import solve_basis
from .rom_assembly import assemble_system
from .time_integration import NewtonFailureError, integrate
from .uncertainty import (
    EnsembleFailureError,
    mean_envelope,
    pdf_estimate,
    phase_mean,
    run_ensemble,
)

_ENVELOPE_COVERAGE = 0.98
_PDF_GRID_POINTS = 512

_PHYS_KEYS = (
    "rho", "area", "length", "damping", "k_lin", "k_cub",
    "lumped_mass", "sigma", "alpha1", "alpha2", "t_final",
)
_STOCH_FLOAT_KEYS = ("e_mean", "e_dispersion")
_STOCH_INT_KEYS = ("n_samples", "master_seed")
_NUMERIC_OPTIONAL_KEYS = ("n_modes", "dt")
_ALL_KEYS = frozenset(
    _PHYS_KEYS + _STOCH_FLOAT_KEYS + _STOCH_INT_KEYS + _NUMERIC_OPTIONAL_KEYS
)


class ConfigError(Exception):
    """Configuration could not be parsed or validated."""

    def __init__(self, messages: Sequence[str]):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record written next to every command's outputs."""

    command: str
    tool_version: str
    output_dir: str
    master_seed: int
    duration_s: float
    config: dict
    n_failed: int | None = None

    def write(self, directory: Path) -> Path:
        path = directory / "manifest.json"
        payload = dataclasses.asdict(self)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _coerce_float(errors: list[str], key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{key} must be a number, got {value!r}")
        return 0.0
    return float(value)


def _coerce_int(errors: list[str], key: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        errors.append(f"{key} must be an integer, got {value!r}")
        return 0
    return value


def parse_config(path: str | Path) -> ConfigBundle:
    """Load and validate a flat JSON configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read config file {path}: {exc}"]) from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            [f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError([f"{path}: top level must be a JSON object"])

    errors: list[str] = []
    unknown = sorted(set(raw) - _ALL_KEYS)
    for key in unknown:
        errors.append(f"unknown config key: {key}")
    required = _PHYS_KEYS + _STOCH_FLOAT_KEYS + _STOCH_INT_KEYS
    for key in required:
        if key not in raw:
            errors.append(f"missing config key: {key}")
    if errors:
        raise ConfigError(errors)

    phys = PhysicalConfig(
        **{key: _coerce_float(errors, key, raw[key]) for key in _PHYS_KEYS}
    )
    stoch = StochasticConfig(
        e_mean=_coerce_float(errors, "e_mean", raw["e_mean"]),
        e_dispersion=_coerce_float(errors, "e_dispersion", raw["e_dispersion"]),
        n_samples=_coerce_int(errors, "n_samples", raw["n_samples"]),
        master_seed=_coerce_int(errors, "master_seed", raw["master_seed"]),
    )
    numeric_overrides = {}
    if "n_modes" in raw:
        numeric_overrides["n_modes"] = _coerce_int(errors, "n_modes", raw["n_modes"])
    if "dt" in raw:
        numeric_overrides["dt"] = _coerce_float(errors, "dt", raw["dt"])
    num = NumericsConfig(**numeric_overrides)
    if errors:
        raise ConfigError(errors)

    validated = validate_config(phys, stoch, num)
    if isinstance(validated, list):
        raise ConfigError(validated)
    return validated


def _format_cell(value: Any) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path: Path, header: str, rows: Iterable[Sequence[Any]]) -> Path:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(cell) for cell in row) + "\n")
    return path


def _config_dict(bundle: ConfigBundle) -> dict:
    return {
        "physical": dataclasses.asdict(bundle.phys),
        "stochastic": dataclasses.asdict(bundle.stoch),
        "numerics": dataclasses.asdict(bundle.num),
    }


def _manifest(
    command: str,
    bundle: ConfigBundle,
    out_dir: Path,
    started: float,
    n_failed: int | None = None,
) -> RunManifest:
    return RunManifest(
        command=command,
        tool_version=__version__,
        output_dir=str(out_dir),
        master_seed=bundle.stoch.master_seed,
        duration_s=time.perf_counter() - started,
        config=_config_dict(bundle),
        n_failed=n_failed,
    )


def cmd_modes(bundle: ConfigBundle, out_dir: Path, n: int | None = None) -> int:
    """Write modes.csv with the first n eigenvalues and frequencies at E = e_mean."""
    started = time.perf_counter()
    count = bundle.num.n_modes if n is None else n
    if count < 1:
        raise ConfigError([f"--modes must be >= 1, got {count}"])
    basis = solve_basis(bundle.phys, bundle.stoch.e_mean, count)
    rows = [
        (i + 1, basis.lambdas[i], basis.frequencies[i]) for i in range(count)
    ]
    _write_csv(out_dir / "modes.csv", "n,lambda,frequency_rad_s", rows)
    _manifest("modes", bundle, out_dir, started).write(out_dir)
    return 0


def cmd_simulate(bundle: ConfigBundle, out_dir: Path) -> int:
    """Deterministic run at the mean modulus; writes trajectory.csv."""
    started = time.perf_counter()
    phys, stoch, num = bundle.phys, bundle.stoch, bundle.num
    nominal = solve_basis(phys, stoch.e_mean, num.n_modes)
    sys_nominal = assemble_system(nominal, phys, stoch.e_mean, nominal)
    try:
        traj = integrate(sys_nominal, num, phys.t_final)
    except NewtonFailureError as exc:
        print(f"simulate failed: {exc}", file=sys.stderr)
        return 2
    rows = zip(traj.times, traj.u_end, traj.v_end)
    _write_csv(out_dir / "trajectory.csv", "t,u_L,v_L", rows)
    _manifest("simulate", bundle, out_dir, started).write(out_dir)
    return 0


def cmd_mc(bundle: ConfigBundle, out_dir: Path, workers: int = 1) -> int:
    """Monte Carlo run; writes envelope, phase, pdf, and samples CSV files."""
    started = time.perf_counter()
    phys, stoch, num = bundle.phys, bundle.stoch, bundle.num
    try:
        ens = run_ensemble(phys, stoch, num, workers=workers)
    except EnsembleFailureError as exc:
        _manifest("mc", bundle, out_dir, started, len(exc.result.failed)).write(
            out_dir
        )
        print(f"mc failed: {exc}", file=sys.stderr)
        return 2

    summary = mean_envelope(ens, _ENVELOPE_COVERAGE)
    mean_u, mean_v = phase_mean(ens)
    _write_csv(
        out_dir / "envelope.csv",
        "t,mean_u,q01,q99",
        zip(ens.times, summary.mean_u, summary.q_low, summary.q_high),
    )
    _write_csv(
        out_dir / "phase.csv",
        "t,mean_u,mean_v",
        zip(ens.times, mean_u, mean_v),
    )
    completed_end = ens.end_values[ens.completed_rows()]
    pdf_rows: list[tuple[float, float]] = []
    # The kernel density needs at least 8 samples with spread; smaller or
    # degenerate ensembles still succeed but publish an empty curve.
    if completed_end.size >= 8 and completed_end.std(ddof=1) > 0.0:
        grid, density = pdf_estimate(completed_end, _PDF_GRID_POINTS)
        pdf_rows = list(zip(grid, density))
    _write_csv(out_dir / "pdf.csv", "x_normalized,density", pdf_rows)
    _write_csv(
        out_dir / "samples.csv",
        "realization,E,u_L_at_T",
        (
            (i, ens.moduli[i], ens.end_values[i])
            for i in range(ens.n_samples)
        ),
    )
    _manifest("mc", bundle, out_dir, started, len(ens.failed)).write(out_dir)
    return 0


def _apply_overrides(bundle: ConfigBundle, args: argparse.Namespace) -> ConfigBundle:
    phys, stoch = bundle.phys, bundle.stoch
    if getattr(args, "mass", None) is not None:
        phys = dataclasses.replace(phys, lumped_mass=args.mass)
    if getattr(args, "seed", None) is not None:
        stoch = dataclasses.replace(stoch, master_seed=args.seed)
    if getattr(args, "samples", None) is not None:
        stoch = dataclasses.replace(stoch, n_samples=args.samples)
    validated = validate_config(phys, stoch, bundle.num)
    if isinstance(validated, list):
        raise ConfigError(validated)
    return validated


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochbar",
        description=(
            "Monte Carlo simulation of an elastic bar with lumped mass, linear "
            "and cubic end springs, and a random elastic modulus"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument(
            "--output-dir", default=".", help="directory for the output files"
        )
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--samples", type=int, help="override n_samples")
        p.add_argument("--mass", type=float, help="override lumped_mass (kg)")

    p_modes = sub.add_parser("modes", help="write eigenvalues and frequencies")
    add_common(p_modes)
    p_modes.add_argument(
        "--modes", type=int, default=None, help="number of modes to write"
    )

    p_sim = sub.add_parser("simulate", help="deterministic run at the mean modulus")
    add_common(p_sim)

    p_mc = sub.add_parser("mc", help="Monte Carlo ensemble run")
    add_common(p_mc)
    p_mc.add_argument(
        "--workers", type=int, default=1, help="thread count for the ensemble"
    )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        bundle = _apply_overrides(parse_config(args.config), args)
        out_dir = Path(args.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "modes":
            return cmd_modes(bundle, out_dir, args.modes)
        if args.command == "simulate":
            return cmd_simulate(bundle, out_dir)
        return cmd_mc(bundle, out_dir, workers=args.workers)
    except ConfigError as exc:
        for message in exc.messages:
            print(f"config error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
