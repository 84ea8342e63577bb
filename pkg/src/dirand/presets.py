"""Built-in qubit strategies: the two local-randomness constructions and the
global-randomness (fork) construction.

All three share the maximally entangled two-qubit state and use four-outcome
rank-one POVMs as the randomness-generating measurement.  Bloch vectors are
fixed explicitly so tests are deterministic; any rotation of the stated
frames produces equivalent correlations.
"""

from __future__ import annotations

import math

import numpy as np

from .model import (
    PHI_PLUS,
    BellFunctional,
    GuessTarget,
    QubitMeasurement,
    Setup,
    add_probability_terms,
    correlator_functional,
)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)

#: Tetrahedron used for the four-outcome measurement of construction one.
TETRAHEDRON = (
    (1, 1, 1),
    (1, -1, -1),
    (-1, 1, -1),
    (-1, -1, 1),
)

#: Bob's four measurement directions in the elegant-functional setup.
ELEGANT_TETRAHEDRON = (
    (1, -1, 1),
    (1, 1, -1),
    (-1, -1, -1),
    (-1, 1, 1),
)


def _unit(v) -> tuple[float, float, float]:
    arr = np.asarray(v, dtype=float)
    arr = arr / np.linalg.norm(arr)
    return tuple(arr)


def chsh_block(i: int, j: int, k: int, l: int, name: str = "") -> BellFunctional:
    """CHSH combination E_ik + E_il + E_jk - E_jl (0-based settings)."""
    return correlator_functional(
        {(i, k): 1.0, (i, l): 1.0, (j, k): 1.0, (j, l): -1.0},
        name=name or f"chsh({i + 1},{j + 1};{k + 1},{l + 1})",
        quantum_bound=2 * SQRT2,
        classical_bound=2.0,
    )


def elegant_functional() -> BellFunctional:
    """Three-by-four correlator functional with quantum maximum 4 sqrt(3)."""
    signs = (
        (1, 1, -1, -1),
        (1, -1, 1, -1),
        (1, -1, -1, 1),
    )
    terms = {(x, y): float(signs[x][y]) for x in range(3) for y in range(4)}
    return correlator_functional(
        terms, name="elegant", quantum_bound=4 * SQRT3, classical_bound=6.0
    )


def elegant_modified_functional(k: float = 1.0) -> BellFunctional:
    """Elegant functional minus k times the four alignment-penalty probabilities.

    The penalties reference the four-outcome measurement x=4 against Bob's
    settings: outcome a=i with Bob outcome +1 under y=i.  They vanish on the
    honest setup, so the quantum maximum stays 4 sqrt(3) for any k > 0.
    """
    if k <= 0:
        raise ValueError(f"penalty weight k must be positive, got {k}")
    penalties = {(3, i, i, 0): -k for i in range(4)}
    return add_probability_terms(
        elegant_functional(),
        penalties,
        name="elegant-modified",
        quantum_bound=4 * SQRT3,
    )


def fork_functional(delta: float) -> BellFunctional:
    """Seven-setting correlator functional with quantum maximum 3 + 8 sqrt(1 + delta^2).

    Three perfect-correlation terms force matched axes; four tilted
    two-setting blocks (each bounded by 2 sqrt(1 + delta^2)) steer the
    remaining settings to the fixed Bloch frames.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    d = float(delta)
    terms = {
        (0, 0): 1.0, (1, 1): 1.0, (2, 2): 1.0,
        (0, 3): 1.0, (1, 3): d,
        (0, 4): 1.0, (1, 4): -d,
        (0, 5): -1.0, (2, 5): d,
        (0, 6): -1.0, (2, 6): -d,
        (3, 0): d, (3, 2): 1.0,
        (4, 0): -d, (4, 2): 1.0,
        (5, 1): d, (5, 2): -1.0,
        (6, 1): -d, (6, 2): -1.0,
    }
    return correlator_functional(
        terms,
        name="fork",
        quantum_bound=3 + 8 * math.sqrt(1 + d * d),
        classical_bound=11.0,
    )


def fork_modified_functional(delta: float, k: float = 1.0) -> BellFunctional:
    """Fork functional minus k times the eight POVM-alignment penalties."""
    if k <= 0:
        raise ValueError(f"penalty weight k must be positive, got {k}")
    penalties: dict[tuple[int, int, int, int], float] = {}
    for i in range(4):
        penalties[(7, i + 3, i, 0)] = -k  # Alice outcome i vs Bob setting i+4
        penalties[(i + 3, 7, 0, i)] = -k  # Bob outcome i vs Alice setting i+4
    return add_probability_terms(
        fork_functional(delta),
        penalties,
        name="fork-modified",
        quantum_bound=3 + 8 * math.sqrt(1 + delta * delta),
    )


def construction_one() -> Setup:
    """Three Pauli settings against six half-angle settings plus a tetrahedral POVM.

    The six two-outcome settings are paired so that each pair of Alice's
    Pauli measurements maximally violates a CHSH combination; the
    four-outcome seventh setting on Bob's side is the randomness source.
    """
    alice = (
        QubitMeasurement.projective((1, 0, 0)),
        QubitMeasurement.projective((0, 1, 0)),
        QubitMeasurement.projective((0, 0, 1)),
    )
    bob_vectors = [
        (1, -1, 0),
        (1, 1, 0),
        (1, 0, 1),
        (1, 0, -1),
        (0, -1, 1),
        (0, -1, -1),
    ]
    bob = tuple(QubitMeasurement.projective(_unit(v)) for v in bob_vectors) + (
        QubitMeasurement.rank_one_povm([_unit(v) for v in TETRAHEDRON]),
    )
    functionals = (
        chsh_block(0, 1, 0, 1),
        chsh_block(0, 2, 2, 3),
        chsh_block(1, 2, 4, 5),
    )
    return Setup(
        state=PHI_PLUS.copy(),
        alice_measurements=alice,
        bob_measurements=bob,
        functionals=functionals,
        default_target=GuessTarget.local("B", 6),
        name="construction-one",
        default_mode="behavior",
    )


def construction_two(k: float = 1.0) -> Setup:
    """Pauli triad plus a four-outcome POVM on Alice, tetrad settings on Bob.

    The POVM Bloch vectors are the y-reflected antipodes of Bob's tetrad,
    which is the alignment that zeroes every penalty probability of the
    modified functional on the maximally entangled state.
    """
    alice_povm_vectors = [
        _unit((-bx, by, -bz)) for (bx, by, bz) in ELEGANT_TETRAHEDRON
    ]
    alice = (
        QubitMeasurement.projective((1, 0, 0)),
        QubitMeasurement.projective((0, 1, 0)),
        QubitMeasurement.projective((0, 0, 1)),
        QubitMeasurement.rank_one_povm(alice_povm_vectors),
    )
    bob = tuple(
        QubitMeasurement.projective(_unit(v)) for v in ELEGANT_TETRAHEDRON
    )
    return Setup(
        state=PHI_PLUS.copy(),
        alice_measurements=alice,
        bob_measurements=bob,
        functionals=(elegant_functional(), elegant_modified_functional(k)),
        default_target=GuessTarget.local("A", 3),
        name="construction-two",
        params={"k": float(k)},
        default_mode="bell-value",
        certify_functional="elegant-modified",
    )


DEFAULT_FORK_DELTA = 0.0676946


def fork(delta: float = DEFAULT_FORK_DELTA, k: float = 1.0) -> Setup:
    """Two four-outcome POVMs certifying global randomness.

    Both parties measure seven two-outcome settings plus one four-outcome
    POVM (setting 8).  The POVM Bloch vectors span all three axes and
    approach mutual unbiasedness as delta tends to zero, where the joint
    distribution P(ab|88) approaches 1/16.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if k <= 0:
        raise ValueError(f"penalty weight k must be positive, got {k}")
    c = 1.0 / math.sqrt(1.0 + delta * delta)
    u = [
        (-c, c * delta, 0.0),
        (-c, -c * delta, 0.0),
        (c, 0.0, -c * delta),
        (c, 0.0, c * delta),
    ]
    v = [
        (-c * delta, 0.0, -c),
        (c * delta, 0.0, -c),
        (0.0, -c * delta, c),
        (0.0, c * delta, c),
    ]
    alice = (
        QubitMeasurement.projective((1, 0, 0)),
        QubitMeasurement.projective((0, 1, 0)),
        QubitMeasurement.projective((0, 0, 1)),
    ) + tuple(
        QubitMeasurement.projective(tuple(-z for z in vec)) for vec in v
    ) + (QubitMeasurement.rank_one_povm(u),)
    bob = (
        QubitMeasurement.projective((1, 0, 0)),
        QubitMeasurement.projective((0, -1, 0)),
        QubitMeasurement.projective((0, 0, 1)),
    ) + tuple(
        QubitMeasurement.projective(tuple(-z for z in vec)) for vec in u
    ) + (QubitMeasurement.rank_one_povm(v),)
    return Setup(
        state=PHI_PLUS.copy(),
        alice_measurements=alice,
        bob_measurements=bob,
        functionals=(fork_functional(delta), fork_modified_functional(delta, k)),
        default_target=GuessTarget.global_(7, 7),
        name="fork",
        params={"delta": float(delta), "k": float(k)},
        default_mode="bell-value",
        certify_functional="fork-modified",
    )


PRESET_NAMES = ("construction-one", "construction-two", "fork")


def preset(name: str, delta: float | None = None, k: float | None = None) -> Setup:
    """Look up a built-in setup by name.

    ``delta`` applies only to the fork preset; ``k`` to the fork and
    construction-two presets (weight of the alignment penalties).
    """
    if name == "construction-one":
        if delta is not None or k is not None:
            raise ValueError("construction-one takes no parameters")
        return construction_one()
    if name == "construction-two":
        if delta is not None:
            raise ValueError("construction-two takes no delta parameter")
        return construction_two(k=1.0 if k is None else k)
    if name == "fork":
        return fork(
            delta=DEFAULT_FORK_DELTA if delta is None else delta,
            k=1.0 if k is None else k,
        )
    raise ValueError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
