"""Command-line harness: reproducible experiment runs from a config file.

Usage:
    sorkin-lab <ideal|simulate|rwa-check|schedule|sensitivity>
               --config <path> [--out <dir>] [--seed <u64>] [--measurement M1|M2]

Subcommands:
    ideal        exact seven-experiment report (no detection noise)
    simulate     M noisy batches; per-batch CSV plus JSON summary
    rwa-check    per-pulse rotating-wave fidelities for the solved schedules
    schedule     solved pulse schedules with durations at omega_1
    sensitivity  deformation-strength detection scan

Config files are UTF-8 ``key = value`` lines (``#`` comments); dotted keys
address sections, e.g. ``detection.shots = 2000000``.  Missing keys take
the documented defaults; unknown keys are rejected.  Exit codes: 0 ok,
1 simulate-under-born rejected the null at 5 sigma, 2 config file missing,
3 schema violation or domain error.  The env var SORKIN_LAB_THREADS caps
batch parallelism.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

from . import __version__
from .born import ProbabilityRule, parse_rule
from .detection import (
    BATCH_CSV_SCHEMA,
    SUMMARY_JSON_SCHEMA,
    DetectionParams,
    estimate_kappa,
    run_batches,
    run_protocol_batch,
    sensitivity_scan,
    write_batch_csv,
    write_json,
)
from .dynamics import HamiltonianParams, PulseSegment, rwa_fidelity
from .errors import ConfigError, SorkinLabError
from .protocol import (
    MEASUREMENT_M1,
    MEASUREMENT_M2,
    MeasurementSpec,
    TargetAmplitudes,
    solve_schedule,
)

EXIT_OK = 0
EXIT_NULL_REJECTED = 1
EXIT_MISSING_FILE = 2
EXIT_BAD_CONFIG = 3

_SQRT3 = math.sqrt(3.0)

_MEASUREMENT_PRESETS = {
    "M1": MEASUREMENT_M1,
    "M2": MEASUREMENT_M2,
}

# key -> (type tag, default); "floats" is a comma-separated float list
_SCHEMA: dict[str, tuple[str, object]] = {
    "hamiltonian.D_hz": ("float", 2.87e9),
    "hamiltonian.gamma_e_hz_per_G": ("float", 2.80e6),
    "hamiltonian.B_G": ("float", 510.0),
    "hamiltonian.omega1_hz": ("float", 5.0e6),
    "hamiltonian.T2star_s": ("float", 1.5e-6),
    "amplitudes.a": ("float", 1.0 / _SQRT3),
    "amplitudes.b": ("float", -1.0 / _SQRT3),
    "amplitudes.c": ("float", -1.0 / _SQRT3),
    "measurement.theta1": ("float", math.pi / 2),
    "measurement.theta2": ("float", math.pi / 2),
    "measurement.preset": ("str", None),
    "rule": ("str", "born"),
    "detection.mode": ("str", "simulated"),
    "detection.mu_bright": ("float", 0.12),
    "detection.contrast": ("float", 0.30),
    "detection.mu_bg": ("float", 0.0015),
    "detection.shots": ("int", 2_000_000),
    "detection.readout_window_s": ("float", 300e-9),
    "batches": ("int", 50),
    "master_seed": ("int", 42),
    "sensitivity.rule_family": ("str", "triple"),
    "sensitivity.eps_grid": (
        "floats",
        tuple(round(0.01 * i, 10) for i in range(13)),
    ),
}


@dataclass(frozen=True)
class ExperimentConfig:
    hamiltonian: HamiltonianParams
    amplitudes: TargetAmplitudes
    measurement: MeasurementSpec
    measurement_preset: str | None
    rule: ProbabilityRule
    detection_mode: str
    detection_params: DetectionParams
    batches: int
    master_seed: int
    sensitivity_family: str
    eps_grid: tuple[float, ...]

    @property
    def detection(self) -> DetectionParams | None:
        """What the batch runner consumes: None selects exact probabilities."""
        return None if self.detection_mode == "exact" else self.detection_params

    def echo(self) -> dict:
        """Fully resolved configuration, embedded in every report."""
        det = self.detection_params
        return {
            "hamiltonian": {
                "D_hz": self.hamiltonian.D_hz,
                "gamma_e_hz_per_G": self.hamiltonian.gamma_e_hz_per_G,
                "B_G": self.hamiltonian.B_G,
                "omega1_hz": self.hamiltonian.omega1_hz,
                "T2star_s": self.hamiltonian.T2star_s,
            },
            "amplitudes": {
                "a": self.amplitudes.a,
                "b": self.amplitudes.b,
                "c": self.amplitudes.c,
            },
            "measurement": {
                "theta1": self.measurement.theta1,
                "theta2": self.measurement.theta2,
                "preset": self.measurement_preset,
            },
            "rule": self.rule.label(),
            "detection": {
                "mode": self.detection_mode,
                "mu_bright": det.mu_bright,
                "contrast": det.contrast,
                "mu_bg": det.mu_bg,
                "shots": det.shots,
                "readout_window_s": det.readout_window_s,
            },
            "batches": self.batches,
            "master_seed": self.master_seed,
            "sensitivity": {
                "rule_family": self.sensitivity_family,
                "eps_grid": list(self.eps_grid),
            },
        }


def _parse_value(key: str, raw: str):
    tag, _ = _SCHEMA[key]
    try:
        if tag == "float":
            return float(raw)
        if tag == "int":
            return int(raw)
        if tag == "floats":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        return raw
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {raw!r} as {tag}", key=key) from None


def _read_pairs(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(
                    f"line {lineno}: expected 'key = value', got {line.rstrip()!r}"
                )
            key, raw = (part.strip() for part in stripped.split("=", 1))
            if key not in _SCHEMA:
                raise ConfigError(f"unknown config key {key!r}", key=key)
            if key in values:
                raise ConfigError(f"duplicate config key {key!r}", key=key)
            values[key] = _parse_value(key, raw)
    return values


def parse_config(path: str) -> ExperimentConfig:
    """Load a config file; missing keys take the documented defaults."""
    values = _read_pairs(path)

    def get(key: str):
        return values.get(key, _SCHEMA[key][1])

    preset = get("measurement.preset")
    if preset is not None:
        if "measurement.theta1" in values or "measurement.theta2" in values:
            raise ConfigError(
                "measurement.preset conflicts with explicit measurement angles",
                key="measurement.preset",
            )
        if preset not in _MEASUREMENT_PRESETS:
            raise ConfigError(
                f"measurement.preset must be M1 or M2, got {preset!r}",
                key="measurement.preset",
            )
        measurement = _MEASUREMENT_PRESETS[preset]
    else:
        measurement = MeasurementSpec(
            get("measurement.theta1"), get("measurement.theta2")
        )

    mode = get("detection.mode")
    if mode not in ("simulated", "exact"):
        raise ConfigError(
            f"detection.mode must be 'simulated' or 'exact', got {mode!r}",
            key="detection.mode",
        )

    master_seed = get("master_seed")
    if master_seed < 0:
        raise ConfigError("master_seed must be a non-negative integer", key="master_seed")
    batches = get("batches")
    if batches < 1:
        raise ConfigError("batches must be >= 1", key="batches")

    family = get("sensitivity.rule_family")
    if family not in ("triple", "exponent"):
        raise ConfigError(
            f"sensitivity.rule_family must be 'triple' or 'exponent', got {family!r}",
            key="sensitivity.rule_family",
        )

    try:
        hamiltonian = HamiltonianParams(
            D_hz=get("hamiltonian.D_hz"),
            gamma_e_hz_per_G=get("hamiltonian.gamma_e_hz_per_G"),
            B_G=get("hamiltonian.B_G"),
            omega1_hz=get("hamiltonian.omega1_hz"),
            T2star_s=get("hamiltonian.T2star_s"),
        )
        amplitudes = TargetAmplitudes(
            get("amplitudes.a"), get("amplitudes.b"), get("amplitudes.c")
        )
        rule = parse_rule(get("rule"))
        detection = (
            None
            if mode == "exact"
            else DetectionParams(
                mu_bright=get("detection.mu_bright"),
                contrast=get("detection.contrast"),
                mu_bg=get("detection.mu_bg"),
                shots=get("detection.shots"),
                readout_window_s=get("detection.readout_window_s"),
            )
        )
    except (ValueError, SorkinLabError) as exc:
        raise ConfigError(str(exc)) from exc

    return ExperimentConfig(
        hamiltonian=hamiltonian,
        amplitudes=amplitudes,
        measurement=measurement,
        measurement_preset=preset,
        rule=rule,
        detection=detection,
        batches=batches,
        master_seed=master_seed,
        sensitivity_family=family,
        eps_grid=tuple(get("sensitivity.eps_grid")),
    )


def _max_workers() -> int | None:
    raw = os.environ.get("SORKIN_LAB_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"SORKIN_LAB_THREADS must be an integer, got {raw!r}")
    return max(1, n)


def _payload(command: str, config: ExperimentConfig) -> dict:
    return {
        "schema": SUMMARY_JSON_SCHEMA,
        "version": __version__,
        "command": command,
        "config": config.echo(),
        "master_seed": config.master_seed,
    }


def _report_dict(report) -> dict:
    return {
        "p": list(report.p),
        "q": {"q_a": report.q_a, "q_b": report.q_b, "q_c": report.q_c},
        "second_order": {
            "I_ab": report.I_ab,
            "I_ac": report.I_ac,
            "I_bc": report.I_bc,
        },
        "I2": report.I2,
        "I3": report.I3,
        "kappa": report.kappa,
        "provenance": report.provenance.label(),
    }


def cmd_ideal(config: ExperimentConfig, out_dir: str) -> int:
    report = run_protocol_batch(
        config.amplitudes, config.measurement, config.rule, None, config.master_seed
    )
    payload = _payload("ideal", config)
    payload["report"] = _report_dict(report)
    write_json(os.path.join(out_dir, "ideal_report.json"), payload)
    print(f"kappa = {report.kappa!r}")
    print(f"I2 = {report.I2!r}   I3 = {report.I3!r}")
    print("p =", " ".join(f"{x:.9f}" for x in report.p))
    return EXIT_OK


def cmd_simulate(config: ExperimentConfig, out_dir: str) -> int:
    reports = run_batches(
        config.amplitudes,
        config.measurement,
        config.rule,
        config.detection,
        config.batches,
        config.master_seed,
        max_workers=_max_workers(),
    )
    est = estimate_kappa(reports, seed=config.master_seed)
    rejected = born_null_rejected(est) if config.rule.kind == "born" else False
    write_batch_csv(os.path.join(out_dir, "simulate_batches.csv"), reports)
    payload = _payload("simulate", config)
    payload["csv_schema"] = BATCH_CSV_SCHEMA
    payload["kappa"] = {
        "mean": est.mean,
        "std": est.std,
        "stderr": est.stderr,
        "ci95": list(est.ci95),
    }
    payload["born_null_rejected_5sigma"] = rejected
    write_json(os.path.join(out_dir, "simulate_summary.json"), payload)
    print(
        f"kappa = {est.mean:.6g} +/- {est.std:.3g} "
        f"(stderr {est.stderr:.3g}, {config.batches} batches)"
    )
    if rejected:
        print("born null REJECTED at 5 sigma", file=sys.stderr)
        return EXIT_NULL_REJECTED
    return EXIT_OK


def born_null_rejected(est) -> bool:
    """True when |mean kappa| exceeds 5 standard errors (plus a float floor)."""
    return abs(est.mean) > 5.0 * est.stderr + 1e-12


def cmd_schedule(config: ExperimentConfig, out_dir: str) -> int:
    schedules = solve_schedule(config.amplitudes, config.hamiltonian.omega1_hz)
    rows = []
    print("state  phi1(rad)   phi2(rad)   duration(ns)")
    for i, sched in enumerate(schedules, start=1):
        phi1, phi2 = sched.angle_pair()
        dur_ns = sched.total_duration_s(config.hamiltonian.omega1_hz) * 1e9
        print(f"psi{i}   {phi1:<11.8f} {phi2:<11.8f} {dur_ns:.3f}")
        rows.append(
            {
                "state": f"psi{i}",
                "phi1": phi1,
                "phi2": phi2,
                "segments": [
                    {
                        "channel": seg.channel,
                        "angle_rad": seg.angle,
                        "duration_ns": seg.duration_s(config.hamiltonian.omega1_hz) * 1e9,
                    }
                    for seg in sched
                ],
            }
        )
    payload = _payload("schedule", config)
    payload["schedules"] = rows
    write_json(os.path.join(out_dir, "schedule.json"), payload)
    return EXIT_OK


def cmd_rwa_check(config: ExperimentConfig, out_dir: str) -> int:
    schedules = solve_schedule(config.amplitudes, config.hamiltonian.omega1_hz)
    pulses = []
    for i, sched in enumerate(schedules, start=1):
        for seg in sched:
            pulses.append((f"psi{i}", seg))
    from .dynamics import PulseSegment

    pulses.append(("measurement", PulseSegment("MW2", config.measurement.theta2)))
    pulses.append(("measurement", PulseSegment("MW1", config.measurement.theta1)))
    rows = []
    print("pulse          channel  angle(rad)  fidelity")
    for label, seg in pulses:
        if seg.angle == 0.0:
            continue
        fid = rwa_fidelity(config.hamiltonian, seg)
        print(f"{label:<14} {seg.channel:<8} {seg.angle:<11.8f} {fid:.9f}")
        rows.append(
            {
                "pulse": label,
                "channel": seg.channel,
                "angle_rad": seg.angle,
                "duration_ns": seg.duration_s(config.hamiltonian.omega1_hz) * 1e9,
                "fidelity": fid,
            }
        )
    payload = _payload("rwa-check", config)
    payload["pulses"] = rows
    write_json(os.path.join(out_dir, "rwa_check.json"), payload)
    return EXIT_OK


def cmd_sensitivity(config: ExperimentConfig, out_dir: str) -> int:
    scan = sensitivity_scan(
        config.amplitudes,
        config.measurement,
        config.sensitivity_family,
        config.eps_grid,
        config.detection,
        config.batches,
        config.master_seed,
        max_workers=_max_workers(),
    )
    lines = ["eps,kappa_mean,kappa_std,detected"]
    print("eps      kappa_mean    kappa_std     detected")
    for row in scan.rows:
        print(
            f"{row.epsilon:<8.4g} {row.kappa_mean:<13.6g} "
            f"{row.kappa_std:<13.6g} {row.detected}"
        )
        lines.append(
            f"{row.epsilon!r},{row.kappa_mean!r},{row.kappa_std!r},"
            f"{str(row.detected).lower()}"
        )
    with open(os.path.join(out_dir, "sensitivity.csv"), "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    payload = _payload("sensitivity", config)
    payload["rows"] = [
        {
            "eps": r.epsilon,
            "kappa_mean": r.kappa_mean,
            "kappa_std": r.kappa_std,
            "detected": r.detected,
        }
        for r in scan.rows
    ]
    payload["smallest_detected_eps"] = scan.smallest_detected_eps
    write_json(os.path.join(out_dir, "sensitivity.json"), payload)
    print(f"smallest detected eps: {scan.smallest_detected_eps}")
    return EXIT_OK


_COMMANDS = {
    "ideal": cmd_ideal,
    "simulate": cmd_simulate,
    "rwa-check": cmd_rwa_check,
    "schedule": cmd_schedule,
    "sensitivity": cmd_sensitivity,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sorkin-lab",
        description="Seven-experiment interference test laboratory",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to the config file")
    parser.add_argument("--out", default=".", help="output directory (created)")
    parser.add_argument("--seed", type=int, default=None, help="override master_seed")
    parser.add_argument(
        "--measurement",
        choices=sorted(_MEASUREMENT_PRESETS),
        default=None,
        help="override the measurement with a named preset",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if not os.path.isfile(args.config):
        print(f"config file not found: {args.config}", file=sys.stderr)
        return EXIT_MISSING_FILE
    try:
        config = parse_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            config = _replace_config(config, master_seed=args.seed)
        if args.measurement is not None:
            config = _replace_config(
                config,
                measurement=_MEASUREMENT_PRESETS[args.measurement],
                measurement_preset=args.measurement,
            )
        os.makedirs(args.out, exist_ok=True)
        return _COMMANDS[args.command](config, args.out)
    except SorkinLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG


def _replace_config(config: ExperimentConfig, **updates) -> ExperimentConfig:
    from dataclasses import replace

    return replace(config, **updates)


if __name__ == "__main__":
    sys.exit(main())
