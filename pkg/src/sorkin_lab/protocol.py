"""The seven-experiment interference protocol.

A target state a|0> + b|+1> + c|-1> (real amplitudes) defines seven
preparations: the full superposition, the three pairwise superpositions,
and the three single basis states.  Measuring the same rank-1 projector on
each yields probabilities p1..p7 from which the pairwise (second-order)
interference terms, the third-order term

    I3 = p1 - (a^2+b^2) p2 - (a^2+c^2) p3 - (b^2+c^2) p4
            + a^2 p5 + b^2 p6 + c^2 p7

and the normalized ratio kappa = I3 / (|I_ab| + |I_ac| + |I_bc|) are
extracted.  Under Born's rule I3 vanishes identically, so kappa is a
violation figure of merit.  Everything here is pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .dynamics import PulseSchedule, PulseSegment, rotation_r1, rotation_r2
from .errors import DegenerateProtocolError, QuantumRegimeError, UnreachableStateError
from .qutrit import QutritState, apply_unitary

# Below this, second-order interference is treated as absent and kappa is
# refused (the ratio would not probe a quantum-mechanical regime).
KAPPA_FLOOR = 1e-6

_DEGENERATE_ATOL = 1e-12


@dataclass(frozen=True)
class TargetAmplitudes:
    """Real amplitudes (a, b, c) of the full superposition, a^2+b^2+c^2 = 1."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        n2 = self.a**2 + self.b**2 + self.c**2
        if not math.isfinite(n2):
            raise ValueError("amplitudes must be finite")
        if abs(n2 - 1.0) > 1e-9:
            raise ValueError(f"amplitudes must be normalized, got |t|^2 = {n2!r}")


@dataclass(frozen=True)
class MeasurementSpec:
    """Angles defining the measured ket |m> = R2(theta2)^dag R1(theta1)^dag |0>."""

    theta1: float
    theta2: float

    def __post_init__(self):
        if not (math.isfinite(self.theta1) and math.isfinite(self.theta2)):
            raise ValueError("measurement angles must be finite")


MEASUREMENT_M1 = MeasurementSpec(math.pi / 2, math.pi / 2)
MEASUREMENT_M2 = MeasurementSpec(3 * math.pi / 2, math.pi / 2)


@dataclass(frozen=True)
class Provenance:
    """Where a report's probabilities came from."""

    mode: str  # "exact" or "simulated"
    seed: tuple | None = None
    shots: int | None = None

    def label(self) -> str:
        if self.mode == "exact":
            return "exact"
        return f"simulated(seed={list(self.seed)}, N={self.shots})"


@dataclass(frozen=True)
class SorkinReport:
    """Outcome of one seven-experiment batch."""

    p: tuple[float, ...]
    q_a: float
    q_b: float
    q_c: float
    I_ab: float
    I_ac: float
    I_bc: float
    I2: float
    I3: float
    kappa: float
    provenance: Provenance


def preparation_angle_table() -> tuple[tuple[float, float], ...]:
    """Reference (phi1, phi2) rotation-angle pairs for the seven preparations
    at the standard working point a = 1/sqrt(3), b = c = -1/sqrt(3)."""
    pi = math.pi
    return (
        (math.acos(1.0 / 3.0), pi / 2),
        (pi / 2, 0.0),
        (0.0, pi / 2),
        (pi / 2, pi),
        (0.0, 0.0),
        (0.0, pi),
        (pi, 0.0),
    )


def _pair_norms(t: TargetAmplitudes) -> tuple[float, float, float]:
    ab = math.hypot(t.a, t.b)
    ac = math.hypot(t.a, t.c)
    bc = math.hypot(t.b, t.c)
    for name, n in (("a,b", ab), ("a,c", ac), ("b,c", bc)):
        if n <= _DEGENERATE_ATOL:
            raise DegenerateProtocolError(
                f"amplitude pair ({name}) has zero norm; the protocol is degenerate"
            )
    return ab, ac, bc


def prepare_states(t: TargetAmplitudes) -> tuple[QutritState, ...]:
    """The seven protocol states for target amplitudes (a, b, c).

    psi1 is the full superposition, psi2/psi3/psi4 the normalized (a,b),
    (a,c), (b,c) pairs, psi5/psi6/psi7 the single basis states carrying the
    sign of the corresponding amplitude.
    """
    ab, ac, bc = _pair_norms(t)
    a, b, c = t.a, t.b, t.c
    return (
        QutritState(b, a, c),
        QutritState(b / ab, a / ab, 0.0),
        QutritState(0.0, a / ac, c / ac),
        QutritState(b / bc, 0.0, c / bc),
        QutritState(0.0, math.copysign(1.0, a), 0.0),
        QutritState(math.copysign(1.0, b), 0.0, 0.0),
        QutritState(0.0, 0.0, math.copysign(1.0, c)),
    )


def measurement_ket(spec: MeasurementSpec) -> QutritState:
    """|m> = R2(theta2)^dag R1(theta1)^dag |0>."""
    m = (
        rotation_r2(spec.theta2).matrix.conj().T
        @ rotation_r1(spec.theta1).matrix.conj().T
        @ QutritState.ket_zero().vector
    )
    return QutritState.from_vector(m)


def second_order_terms(p, t: TargetAmplitudes) -> tuple[float, float, float]:
    """(I_ab, I_ac, I_bc) extracted from the seven measured probabilities.

    Each term combines one pairwise experiment with the two single-path
    experiments, e.g. I_ab = (a^2+b^2) p2 - a^2 p5 - b^2 p6.  The
    coefficients of each combination sum to zero, so a common affine map
    p -> C*p + d rescales the terms by C and cancels d.
    """
    a2, b2, c2 = t.a**2, t.b**2, t.c**2
    i_ab = (a2 + b2) * p[1] - a2 * p[4] - b2 * p[5]
    i_ac = (a2 + c2) * p[2] - a2 * p[4] - c2 * p[6]
    i_bc = (b2 + c2) * p[3] - b2 * p[5] - c2 * p[6]
    return (i_ab, i_ac, i_bc)


def third_order_term(p, t: TargetAmplitudes) -> float:
    """Third-order interference from the seven measured probabilities."""
    a2, b2, c2 = t.a**2, t.b**2, t.c**2
    return (
        p[0]
        - (a2 + b2) * p[1]
        - (a2 + c2) * p[2]
        - (b2 + c2) * p[3]
        + a2 * p[4]
        + b2 * p[5]
        + c2 * p[6]
    )


def kappa(i3: float, terms, *, floor: float = KAPPA_FLOOR) -> float:
    """Normalized ratio I3 / (|I_ab| + |I_ac| + |I_bc|)."""
    i2 = abs(terms[0]) + abs(terms[1]) + abs(terms[2])
    if i2 <= floor:
        raise QuantumRegimeError(
            f"second-order interference {i2!r} is at or below the floor {floor:g}; "
            "the normalized ratio is undefined outside the interference regime"
        )
    return i3 / i2


def _sign(x: float) -> float:
    return math.copysign(1.0, x)


def _solve_psi1(a: float, b: float, c: float) -> tuple[float, float]:
    """Half-angle pair (theta1, theta1') preparing the full superposition
    (up to a global sign) as R2(theta1') R1(theta1) |0>."""
    if c != 0.0:
        sigma = -_sign(c)
    elif b != 0.0:
        sigma = -_sign(b)
    else:
        sigma = _sign(a)
    rho = math.hypot(a, b)
    if rho <= _DEGENERATE_ATOL:
        return (2.0 * math.atan2(abs(c), 0.0), 0.0)
    if (-sigma * b > 0.0) or (b == 0.0 and sigma * a > 0.0):
        u = math.atan2(-sigma * c, rho)
        v = math.atan2(-sigma * b, sigma * a)
    else:
        u = math.atan2(-sigma * c, -rho)
        v = math.atan2(sigma * b, -sigma * a)
    return (2.0 * u, 2.0 * v)


def solve_schedule(t: TargetAmplitudes, omega1_hz: float) -> tuple[PulseSchedule, ...]:
    """Pulse schedules reproducing the seven states from |0>.

    Angles are exact solutions of the amplitude conditions, canonicalized
    to the smallest non-negative value; each prepared state equals its
    target up to a physically irrelevant global sign (exactly, for sign
    patterns reachable by y-rotations, such as the standard working point).
    Durations follow from theta / omega_1 via PulseSegment.duration_s.
    """
    if omega1_hz <= 0:
        raise ValueError("omega1_hz must be positive")
    _pair_norms(t)  # degenerate targets are rejected up front
    a, b, c = t.a, t.b, t.c
    if abs(a) <= _DEGENERATE_ATOL:
        raise UnreachableStateError(
            "a = 0 makes the psi2 and psi3 pulse conditions singular; "
            "those states cannot be scheduled"
        )

    th1, th1p = _solve_psi1(a, b, c)

    s2 = -_sign(b) if b != 0.0 else _sign(a)
    th2p = 2.0 * math.atan2(-s2 * b, s2 * a)

    s3 = -_sign(c) if c != 0.0 else _sign(a)
    th3 = 2.0 * math.atan2(-s3 * c, s3 * a)

    s4 = -_sign(c) if c != 0.0 else -_sign(b)
    th4 = 2.0 * math.atan2(-s4 * c, -s4 * b)

    pi = math.pi

    def sched(*pairs) -> PulseSchedule:
        segs = [
            PulseSegment(channel, angle)
            for channel, angle in pairs
            if angle != 0.0
        ]
        return PulseSchedule(tuple(segs))

    return (
        sched(("MW1", th1), ("MW2", th1p)),
        sched(("MW2", th2p)),
        sched(("MW1", th3)),
        sched(("MW1", th4), ("MW2", pi)),
        sched(),
        sched(("MW2", pi)),
        sched(("MW1", pi)),
    )


def apply_schedule(schedule: PulseSchedule) -> QutritState:
    """Run a schedule's rotations on |0> and return the prepared state."""
    state = QutritState.ket_zero()
    for seg in schedule:
        rot = rotation_r1(seg.angle) if seg.channel == "MW1" else rotation_r2(seg.angle)
        state = apply_unitary(rot, state)
    return state


def sorkin_term(k: int, path_weights) -> float:
    """Order-k interference of per-path detection amplitudes.

    Inclusion-exclusion over the first k paths: sum over subsets S of
    (-1)^(k-|S|) |sum_{j in S} w_j|^2, with squared-modulus probabilities.
    Order 2 reduces to the pairwise cross term 2 Re(w1 conj(w2)); all
    orders >= 3 vanish identically under the squared-modulus rule.
    """
    weights = list(path_weights)
    n = len(weights)
    if not 2 <= k <= n:
        raise ValueError(f"order k={k} must satisfy 2 <= k <= n={n}")
    total = 0.0
    for size in range(1, k + 1):
        sign = (-1.0) ** (k - size)
        for subset in combinations(range(k), size):
            amp = sum(weights[j] for j in subset)
            total += sign * abs(amp) ** 2
    return total
