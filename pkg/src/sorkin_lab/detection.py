"""Photon-counting readout simulation and batch statistics.

Readout model, per probability estimate of N shots: the number of bright
shots is Binomial(N, p); total signal photons are Poisson with mean

    B*mu_bright + (N - B)*mu_dark + N*mu_bg

and the estimate is the ratio of signal photons to an independent
bright-reference Poisson draw with mean N*(mu_bright + mu_bg).  In
expectation the ratio is an affine map of p with coefficients common to
all seven experiments, exactly the setting in which kappa is invariant.
Sampling aggregate counts instead of per-shot loops is distributionally
identical for this model and O(1) per estimate.

Within one batch the seven signals share a single reference draw (the
normalization is one bright reference trace), so common reference noise
cancels from kappa exactly.

Seeding is splittable and documented: the RNG stream for experiment k of
batch b under master seed s is numpy's SeedSequence([s, b, k]); the shared
batch reference uses k = 7 and the bootstrap resampler k = 8.  Batches are
therefore independent of execution order and thread count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .born import ProbabilityRule, probability
from .errors import InsufficientBatchesError, UnphysicalParameterError
from .protocol import (
    MeasurementSpec,
    Provenance,
    SorkinReport,
    TargetAmplitudes,
    kappa,
    measurement_ket,
    prepare_states,
    second_order_terms,
    third_order_term,
)

REFERENCE_STREAM = 7
BOOTSTRAP_STREAM = 8

BATCH_CSV_SCHEMA = "sorkin-lab.batches/1"
SUMMARY_JSON_SCHEMA = "sorkin-lab.summary/1"

_CSV_COLUMNS = (
    "batch,p1,p2,p3,p4,p5,p6,p7,I_ab,I_ac,I_bc,I2,I3,kappa"
)


@dataclass(frozen=True)
class DetectionParams:
    """Photon-rate model for state-selective readout.

    mu_* are mean photons per shot per readout window; mu_dark is derived
    from the bright/dark contrast.  readout_window_s is documentation of
    the window the rates were integrated over.
    """

    mu_bright: float = 0.12
    contrast: float = 0.30
    mu_bg: float = 0.0015
    shots: int = 2_000_000
    readout_window_s: float = 300e-9

    def __post_init__(self):
        if not (math.isfinite(self.mu_bright) and self.mu_bright > 0):
            raise ValueError(f"mu_bright must be positive, got {self.mu_bright!r}")
        if not 0.0 < self.contrast <= 1.0:
            raise ValueError(f"contrast must be in (0, 1], got {self.contrast!r}")
        if not (math.isfinite(self.mu_bg) and self.mu_bg >= 0):
            raise ValueError(f"mu_bg must be non-negative, got {self.mu_bg!r}")
        if int(self.shots) < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots!r}")
        object.__setattr__(self, "shots", int(self.shots))

    @property
    def mu_dark(self) -> float:
        return self.mu_bright * (1.0 - self.contrast)


@dataclass(frozen=True)
class KappaEstimate:
    """Mean, spread and bootstrap CI of kappa over a set of batches."""

    per_batch_kappa: tuple[float, ...]
    mean: float
    std: float
    stderr: float
    ci95: tuple[float, float]


def _entropy(seed) -> list[int]:
    if isinstance(seed, (int, np.integer)):
        return [int(seed)]
    return [int(x) for x in seed]


def _rng(*entropy) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(entropy)))


def _sample_signal(p_true: float, det: DetectionParams, rng) -> int:
    if not 0.0 <= p_true <= 1.0:
        raise UnphysicalParameterError(
            f"true probability {p_true!r} is outside [0, 1]; "
            "the counting model cannot simulate it"
        )
    bright = rng.binomial(det.shots, p_true)
    lam = (
        bright * det.mu_bright
        + (det.shots - bright) * det.mu_dark
        + det.shots * det.mu_bg
    )
    return int(rng.poisson(lam))


def _sample_reference(det: DetectionParams, rng) -> int:
    lam = det.shots * (det.mu_bright + det.mu_bg)
    while True:
        r = int(rng.poisson(lam))
        if r > 0:  # zero reference is astronomically unlikely at N >= 1e3
            return r


def simulate_probability_estimate(p_true: float, det: DetectionParams, seed) -> float:
    """One signal/reference count ratio for a single probability estimate."""
    rng = _rng(*_entropy(seed))
    s = _sample_signal(p_true, det, rng)
    return s / _sample_reference(det, rng)


def run_protocol_batch(
    t: TargetAmplitudes,
    spec: MeasurementSpec,
    rule: ProbabilityRule,
    det: DetectionParams | None,
    seed,
) -> SorkinReport:
    """One seven-experiment batch; det=None runs on exact probabilities.

    In simulated mode each experiment's photon counts come from its own
    seed stream and the batch's seven estimates share one reference draw.
    """
    m = measurement_ket(spec)
    states = prepare_states(t)
    p_true = [probability(rule, m, psi) for psi in states]
    prefix = _entropy(seed)
    if det is None:
        p = tuple(p_true)
        prov = Provenance("exact")
    else:
        signals = [
            _sample_signal(p_true[k], det, _rng(*prefix, k)) for k in range(7)
        ]
        ref = _sample_reference(det, _rng(*prefix, REFERENCE_STREAM))
        p = tuple(s / ref for s in signals)
        prov = Provenance("simulated", seed=tuple(prefix), shots=det.shots)
    terms = second_order_terms(p, t)
    i3 = third_order_term(p, t)
    kap = kappa(i3, terms)
    a2, b2, c2 = t.a**2, t.b**2, t.c**2
    return SorkinReport(
        p=p,
        q_a=a2 * p[4],
        q_b=b2 * p[5],
        q_c=c2 * p[6],
        I_ab=terms[0],
        I_ac=terms[1],
        I_bc=terms[2],
        I2=abs(terms[0]) + abs(terms[1]) + abs(terms[2]),
        I3=i3,
        kappa=kap,
        provenance=prov,
    )


def run_batches(
    t: TargetAmplitudes,
    spec: MeasurementSpec,
    rule: ProbabilityRule,
    det: DetectionParams | None,
    n_batches: int,
    master_seed,
    max_workers: int | None = None,
) -> list[SorkinReport]:
    """n_batches independent batches, ordered by batch index.

    Batch b uses seed prefix [*master_seed, b]; results are bit-identical
    for a given (config, master_seed) regardless of worker count.
    """
    prefix = _entropy(master_seed)

    def one(b: int) -> SorkinReport:
        return run_protocol_batch(t, spec, rule, det, (*prefix, b))

    if max_workers is not None and max_workers > 1 and n_batches > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(one, range(n_batches)))
    return [one(b) for b in range(n_batches)]


def estimate_kappa(
    reports, *, n_boot: int = 10_000, seed=0
) -> KappaEstimate:
    """Mean, sample std, stderr and bootstrap percentile CI of batch kappas."""
    k = np.array([r.kappa for r in reports], dtype=float)
    m = k.size
    if m < 2:
        raise InsufficientBatchesError(
            f"need at least 2 batches for a spread estimate, got {m}"
        )
    mean = float(k.mean())
    std = float(k.std(ddof=1))
    rng = _rng(*_entropy(seed), BOOTSTRAP_STREAM)
    idx = rng.integers(0, m, size=(n_boot, m))
    boot_means = k[idx].mean(axis=1)
    lo, hi = np.percentile(boot_means, [2.5, 97.5])
    return KappaEstimate(
        per_batch_kappa=tuple(k.tolist()),
        mean=mean,
        std=std,
        stderr=std / math.sqrt(m),
        ci95=(float(lo), float(hi)),
    )


@dataclass(frozen=True)
class SensitivityRow:
    epsilon: float
    kappa_mean: float
    kappa_std: float
    detected: bool


@dataclass(frozen=True)
class SensitivityScan:
    rows: tuple[SensitivityRow, ...]
    smallest_detected_eps: float | None


_RULE_FAMILIES = {
    "triple": ProbabilityRule.additive_triple,
    "exponent": ProbabilityRule.exponent_deformed,
}


def sensitivity_scan(
    t: TargetAmplitudes,
    spec: MeasurementSpec,
    rule_family: str,
    eps_grid,
    det: DetectionParams | None,
    n_batches: int,
    master_seed,
    max_workers: int | None = None,
) -> SensitivityScan:
    """kappa statistics per deformation strength, with a 3-sigma detection flag.

    A grid point is detected when |mean kappa| exceeds 3 * std / sqrt(M).
    Grid row j draws from seed prefix [*master_seed, j].
    """
    if rule_family not in _RULE_FAMILIES:
        raise ValueError(
            f"rule_family must be one of {sorted(_RULE_FAMILIES)}, got {rule_family!r}"
        )
    make_rule = _RULE_FAMILIES[rule_family]
    prefix = _entropy(master_seed)
    rows = []
    smallest = None
    for j, eps in enumerate(eps_grid):
        rule = ProbabilityRule.born() if eps == 0 else make_rule(eps)
        reports = run_batches(
            t, spec, rule, det, n_batches, (*prefix, j), max_workers=max_workers
        )
        k = np.array([r.kappa for r in reports], dtype=float)
        k_mean = float(k.mean())
        k_std = float(k.std(ddof=1)) if k.size > 1 else 0.0
        threshold = max(3.0 * k_std / math.sqrt(k.size), 1e-12)
        detected = abs(k_mean) > threshold
        rows.append(SensitivityRow(float(eps), k_mean, k_std, detected))
        if detected and smallest is None:
            smallest = float(eps)
    return SensitivityScan(tuple(rows), smallest)


def scaling_check(
    t: TargetAmplitudes,
    spec: MeasurementSpec,
    det: DetectionParams | None,
    shots_list,
    n_batches: int,
    master_seed,
    max_workers: int | None = None,
) -> list[tuple[int, float]]:
    """Empirical kappa std per shot count N, for shot-noise scaling checks."""
    shots_list = [int(n) for n in shots_list]
    if shots_list != sorted(shots_list):
        raise ValueError("shots_list must be ascending")
    prefix = _entropy(master_seed)
    rows = []
    for j, n in enumerate(shots_list):
        det_n = None if det is None else replace(det, shots=n)
        reports = run_batches(
            t,
            spec,
            ProbabilityRule.born(),
            det_n,
            n_batches,
            (*prefix, j),
            max_workers=max_workers,
        )
        k = np.array([r.kappa for r in reports], dtype=float)
        rows.append((n, float(k.std(ddof=1))))
    return rows


def batch_csv_text(reports) -> str:
    """Per-batch CSV series; floats use repr so reruns are byte-identical."""
    lines = [_CSV_COLUMNS]
    for b, r in enumerate(reports):
        fields = [str(b)]
        fields += [repr(float(x)) for x in r.p]
        fields += [
            repr(float(x))
            for x in (r.I_ab, r.I_ac, r.I_bc, r.I2, r.I3, r.kappa)
        ]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def write_batch_csv(path, reports) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(batch_csv_text(reports))


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
