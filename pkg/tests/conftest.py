"""Shared fixtures and independent brute-force oracles.

The oracle helpers below deliberately duplicate the physics with plain
numpy (no package imports) so the tests check the implementation against
an independent computation path.
"""

import math

import numpy as np
import pytest

SQRT3 = math.sqrt(3.0)
PAPER_ABC = (1.0 / SQRT3, -1.0 / SQRT3, -1.0 / SQRT3)

# Closed-form measurement vectors (components ordered |+1>, |0>, |-1>).
M1_VECTOR = np.array([0.5, 0.5, 1.0 / math.sqrt(2.0)])
M2_VECTOR = np.array([-0.5, -0.5, 1.0 / math.sqrt(2.0)])

I2_EXPECTED = (1.0 + 2.0 * math.sqrt(2.0)) / 6.0


def oracle_state_vectors(a, b, c):
    """Seven protocol state vectors, built directly from the definitions."""
    ab = math.hypot(a, b)
    ac = math.hypot(a, c)
    bc = math.hypot(b, c)
    return [
        np.array([b, a, c], dtype=complex),
        np.array([b, a, 0.0], dtype=complex) / ab,
        np.array([0.0, a, c], dtype=complex) / ac,
        np.array([b, 0.0, c], dtype=complex) / bc,
        np.array([0.0, math.copysign(1.0, a), 0.0], dtype=complex),
        np.array([math.copysign(1.0, b), 0.0, 0.0], dtype=complex),
        np.array([0.0, 0.0, math.copysign(1.0, c)], dtype=complex),
    ]


def oracle_born_probabilities(m_vec, a, b, c):
    """Direct |<m|psi_i>|^2 for the seven states."""
    return [
        abs(np.vdot(m_vec, s)) ** 2 for s in oracle_state_vectors(a, b, c)
    ]


def oracle_third_order(p, a, b, c):
    a2, b2, c2 = a * a, b * b, c * c
    return (
        p[0]
        - (a2 + b2) * p[1]
        - (a2 + c2) * p[2]
        - (b2 + c2) * p[3]
        + a2 * p[4]
        + b2 * p[5]
        + c2 * p[6]
    )


def oracle_second_order(p, a, b, c):
    a2, b2, c2 = a * a, b * b, c * c
    return (
        (a2 + b2) * p[1] - a2 * p[4] - b2 * p[5],
        (a2 + c2) * p[2] - a2 * p[4] - c2 * p[6],
        (b2 + c2) * p[3] - b2 * p[5] - c2 * p[6],
    )


def random_target_triple(rng, min_component=1e-3):
    """Uniform direction on the sphere, rejecting near-degenerate triples."""
    while True:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        b, a, c = v
        if min(abs(a), abs(b), abs(c)) >= min_component:
            return a, b, c


def random_complex_unit(rng, n=3):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


@pytest.fixture
def paper_target():
    from sorkin_lab import TargetAmplitudes

    return TargetAmplitudes(*PAPER_ABC)
