import math
from dataclasses import replace

import numpy as np
import pytest

from sorkin_lab import (
    DetectionParams,
    InsufficientBatchesError,
    MEASUREMENT_M1,
    MEASUREMENT_M2,
    ProbabilityRule,
    TargetAmplitudes,
    UnphysicalParameterError,
    estimate_kappa,
    run_batches,
    run_protocol_batch,
    scaling_check,
    sensitivity_scan,
    simulate_probability_estimate,
)
from sorkin_lab.detection import batch_csv_text
from conftest import I2_EXPECTED, M1_VECTOR, PAPER_ABC, oracle_born_probabilities

BORN = ProbabilityRule.born()


def _target():
    return TargetAmplitudes(*PAPER_ABC)


def _ratio_moments(p, det):
    """Closed-form mean/variance of the two-stage count ratio (delta method)."""
    n = det.shots
    dmu = det.mu_bright - det.mu_dark
    e_s = n * (det.mu_dark + det.mu_bg + p * dmu)
    var_s = e_s + dmu**2 * n * p * (1 - p)
    e_r = n * (det.mu_bright + det.mu_bg)
    mean = e_s / e_r
    var = var_s / e_r**2 + e_s**2 / e_r**3
    return mean, var


def test_detection_params_validation():
    det = DetectionParams()
    assert det.mu_dark == pytest.approx(0.084)
    with pytest.raises(ValueError):
        DetectionParams(contrast=0.0)
    with pytest.raises(ValueError):
        DetectionParams(shots=0)
    with pytest.raises(ValueError):
        DetectionParams(mu_bg=-1.0)


def test_estimate_replay_is_bit_identical():
    det = DetectionParams()
    a = simulate_probability_estimate(0.4, det, 123)
    b = simulate_probability_estimate(0.4, det, 123)
    assert a == b


def test_estimate_consistency_perfect_contrast():
    det = DetectionParams(contrast=1.0, mu_bg=0.0, shots=10_000_000)
    p = 0.5
    est = simulate_probability_estimate(p, det, 17)
    _, var = _ratio_moments(p, det)
    assert abs(est - p) < 5 * math.sqrt(var)


def test_estimate_matches_affine_expectation_at_defaults():
    det = DetectionParams()
    p = 0.5
    est = simulate_probability_estimate(p, det, 31)
    mean, var = _ratio_moments(p, det)
    assert abs(est - mean) < 5 * math.sqrt(var)


def test_estimate_rejects_bad_probability():
    with pytest.raises(UnphysicalParameterError):
        simulate_probability_estimate(1.5, DetectionParams(), 0)


def test_exact_batch_matches_oracle():
    a, b, c = PAPER_ABC
    report = run_protocol_batch(_target(), MEASUREMENT_M1, BORN, None, 0)
    p_oracle = oracle_born_probabilities(M1_VECTOR, a, b, c)
    assert report.p == pytest.approx(p_oracle, abs=1e-12)
    assert report.I2 == pytest.approx(I2_EXPECTED, abs=1e-12)
    assert abs(report.kappa) < 1e-12
    assert report.provenance.label() == "exact"
    assert report.p[0] == pytest.approx(
        report.q_a + report.q_b + report.q_c + report.I_ab + report.I_ac + report.I_bc,
        abs=1e-12,
    )


def test_simulated_batch_determinism_and_provenance():
    det = DetectionParams(shots=100_000)
    r1 = run_protocol_batch(_target(), MEASUREMENT_M1, BORN, det, (42, 0))
    r2 = run_protocol_batch(_target(), MEASUREMENT_M1, BORN, det, (42, 0))
    assert r1.p == r2.p
    assert r1.kappa == r2.kappa
    assert r1.provenance.mode == "simulated"
    assert r1.provenance.shots == 100_000
    assert "simulated" in r1.provenance.label()


def test_run_batches_thread_invariance():
    det = DetectionParams(shots=50_000)
    serial = run_batches(_target(), MEASUREMENT_M1, BORN, det, 8, 5)
    threaded = run_batches(_target(), MEASUREMENT_M1, BORN, det, 8, 5, max_workers=4)
    assert [r.kappa for r in serial] == [r.kappa for r in threaded]


def test_estimate_kappa_exact_batches():
    reports = run_batches(_target(), MEASUREMENT_M1, BORN, None, 5, 0)
    est = estimate_kappa(reports)
    assert est.mean == pytest.approx(0.0, abs=1e-12)
    assert est.std == 0.0
    assert est.ci95[0] <= est.mean <= est.ci95[1]


def test_estimate_kappa_needs_two_batches():
    reports = run_batches(_target(), MEASUREMENT_M1, BORN, None, 1, 0)
    with pytest.raises(InsufficientBatchesError):
        estimate_kappa(reports)


def test_estimate_kappa_ci_contains_mean():
    det = DetectionParams(shots=20_000)
    reports = run_batches(_target(), MEASUREMENT_M1, BORN, det, 25, 3)
    est = estimate_kappa(reports, seed=3)
    assert est.ci95[0] <= est.mean <= est.ci95[1]
    assert est.stderr == pytest.approx(est.std / 5.0)


def test_single_batch_kappa_sanity_envelope():
    det = DetectionParams()
    for seed in range(100):
        r = run_protocol_batch(_target(), MEASUREMENT_M1, BORN, det, (seed, 0))
        assert abs(r.kappa) < 0.1


def test_kappa_estimator_unbiased_at_large_shots():
    # consistent with zero at high shot count; stderr ~ 3e-4 at M=200
    det = DetectionParams(shots=20_000_000)
    reports = run_batches(_target(), MEASUREMENT_M1, BORN, det, 200, 314)
    est = estimate_kappa(reports, seed=314)
    assert abs(est.mean) <= 3 * est.stderr
    assert abs(est.mean) < 2e-3


def test_m2_batch_swaps_p3_p4():
    r1 = run_protocol_batch(_target(), MEASUREMENT_M1, BORN, None, 0)
    r2 = run_protocol_batch(_target(), MEASUREMENT_M2, BORN, None, 0)
    assert r2.p[2] == pytest.approx(r1.p[3], abs=1e-12)
    assert r2.p[3] == pytest.approx(r1.p[2], abs=1e-12)
    assert r2.I2 == pytest.approx(r1.I2, abs=1e-12)
    assert abs(r2.kappa) < 1e-12


def test_sensitivity_scan_exact_mode():
    scan = sensitivity_scan(
        _target(), MEASUREMENT_M1, "triple", [0.0, 0.05, 0.1], None, 2, 0
    )
    assert not scan.rows[0].detected
    assert scan.rows[1].detected and scan.rows[2].detected
    assert scan.smallest_detected_eps == 0.05
    ratio = scan.rows[2].kappa_mean / scan.rows[1].kappa_mean
    assert ratio == pytest.approx(2.0, abs=1e-9)


def test_sensitivity_scan_propagates_unphysical_epsilon():
    with pytest.raises(UnphysicalParameterError):
        sensitivity_scan(
            _target(), MEASUREMENT_M1, "triple", [-5.0], None, 2, 0
        )
    with pytest.raises(ValueError):
        sensitivity_scan(_target(), MEASUREMENT_M1, "gauss", [0.1], None, 2, 0)


def test_detection_power_monotone_in_epsilon():
    det = DetectionParams()
    grid = [0.0, 0.1, 0.2, 0.4]
    counts = [0] * len(grid)
    for seed in range(30):
        scan = sensitivity_scan(
            _target(), MEASUREMENT_M1, "triple", grid, det, 12, seed
        )
        for j, row in enumerate(scan.rows):
            counts[j] += row.detected
    assert all(c2 >= c1 for c1, c2 in zip(counts, counts[1:]))
    assert counts[-1] == 30


def test_scaling_check_exact_and_validation():
    rows = scaling_check(_target(), MEASUREMENT_M1, None, [100, 1000], 4, 0)
    assert [r[1] for r in rows] == [0.0, 0.0]
    with pytest.raises(ValueError):
        scaling_check(_target(), MEASUREMENT_M1, None, [1000, 100], 4, 0)


def test_scaling_check_noise_shrinks_with_brightness():
    det = DetectionParams(shots=100_000)
    reports_dim = run_batches(_target(), MEASUREMENT_M1, BORN, det, 60, 9)
    bright = replace(det, mu_bright=0.24, mu_bg=0.003)
    reports_bright = run_batches(_target(), MEASUREMENT_M1, BORN, bright, 60, 9)
    std_dim = np.std([r.kappa for r in reports_dim], ddof=1)
    std_bright = np.std([r.kappa for r in reports_bright], ddof=1)
    assert std_bright < std_dim


def test_batch_csv_layout():
    reports = run_batches(_target(), MEASUREMENT_M1, BORN, None, 2, 0)
    text = batch_csv_text(reports)
    lines = text.strip().split("\n")
    assert lines[0] == "batch,p1,p2,p3,p4,p5,p6,p7,I_ab,I_ac,I_bc,I2,I3,kappa"
    assert len(lines) == 3
    assert lines[1].startswith("0,")
    assert batch_csv_text(reports) == text
