"""Desk-scale laboratory for a seven-experiment third-order interference
(Sorkin) test of squared-modulus outcome probabilities on a driven
three-level spin, including shot-noise Monte Carlo and pulse-level
rotating-wave validation."""

__version__ = "0.1.0"

from .born import ProbabilityRule, parse_rule, probability
from .detection import (
    DetectionParams,
    KappaEstimate,
    SensitivityRow,
    SensitivityScan,
    estimate_kappa,
    run_batches,
    run_protocol_batch,
    scaling_check,
    sensitivity_scan,
    simulate_probability_estimate,
)
from .dynamics import (
    HamiltonianParams,
    PulseSchedule,
    PulseSegment,
    lab_frame_propagator,
    rotation_r1,
    rotation_r2,
    rwa_fidelity,
    sample_detuning,
)
from .errors import (
    ConfigError,
    DegenerateProtocolError,
    InsufficientBatchesError,
    NormalizationError,
    QuantumRegimeError,
    SorkinLabError,
    StepResolutionError,
    UnitarityError,
    UnphysicalParameterError,
    UnreachableStateError,
)
from .protocol import (
    KAPPA_FLOOR,
    MEASUREMENT_M1,
    MEASUREMENT_M2,
    MeasurementSpec,
    Provenance,
    SorkinReport,
    TargetAmplitudes,
    apply_schedule,
    kappa,
    measurement_ket,
    preparation_angle_table,
    prepare_states,
    second_order_terms,
    solve_schedule,
    sorkin_term,
    third_order_term,
)
from .qutrit import (
    Projector,
    QutritState,
    Unitary3,
    apply_unitary,
    compose,
    inner_product,
    spin1_matrices,
)
