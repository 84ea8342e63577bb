"""Moment vectors of honest quantum setups, via projective dilation.

The hierarchy's letters are projectors, but a setup may use general POVM
elements.  To evaluate moments of projector words directly we dilate each
party once: every element is split into rank-one pieces, the pieces of
each setting become orthogonal projectors on an enlarged space through
its Naimark isometry, and a common embedding carries the state.  Products
of the dilated projectors then have well-defined expectations that
reproduce the behavior and satisfy every entry identification, giving an
independent feasibility oracle for the assembled programs.
"""

from __future__ import annotations

import numpy as np

from ..model import QubitMeasurement, Setup
from .moments import MomentStructure

_EIG_TOL = 1e-12


def _rank_one_pieces(measurement: QubitMeasurement) -> list[list[np.ndarray]]:
    """Split each element into rank-one vectors w with sum |w><w| = element."""
    pieces = []
    for el in measurement.elements:
        w, v = np.linalg.eigh(el)
        vecs = [v[:, i] * np.sqrt(w[i]) for i in range(len(w)) if w[i] > _EIG_TOL]
        pieces.append(vecs)
    return pieces


def _dilated_projectors(
    measurements: tuple[QubitMeasurement, ...]
) -> tuple[int, list[list[np.ndarray]]]:
    """Projective extensions of all settings on one enlarged party space.

    Returns the space dimension and, per setting, one projector per
    outcome such that V0' P V0 equals the POVM element, where V0 embeds
    the qubit as the first two coordinates.
    """
    split = [_rank_one_pieces(m) for m in measurements]
    dim = max(2, max(sum(len(p) for p in setting) for setting in split))
    projectors: list[list[np.ndarray]] = []
    for setting in split:
        flat = [w for outcome in setting for w in outcome]
        r = len(flat)
        iso = np.zeros((dim, 2), dtype=complex)
        for i, w in enumerate(flat):
            iso[i] += w.conj()
        # Unitary U whose first two columns are the Naimark isometry; the
        # projector for piece i is then the outer product of U's i-th row
        # conjugated, because V0' (U' e_i e_i' U) V0 = |w_i><w_i|.
        u = _extend_to_unitary(iso)
        frame = u.conj().T
        outcome_projs = []
        index = 0
        for outcome in setting:
            proj = np.zeros((dim, dim), dtype=complex)
            for _ in outcome:
                col = frame[:, index]
                proj += np.outer(col, col.conj())
                index += 1
            outcome_projs.append(proj)
        # Leftover dilation directions join the last outcome so the
        # projectors resolve the identity on the whole space.
        for extra in range(r, dim):
            col = frame[:, extra]
            outcome_projs[-1] += np.outer(col, col.conj())
        projectors.append(outcome_projs)
    return dim, projectors


def _extend_to_unitary(iso: np.ndarray) -> np.ndarray:
    """Complete an isometry's columns to a full orthonormal basis."""
    dim, k = iso.shape
    q, _ = np.linalg.qr(np.hstack([iso, np.eye(dim, dtype=complex)]))
    # QR may flip phases of the leading columns; restore them exactly.
    out = np.array(q)
    for i in range(k):
        overlap = out[:, i].conj() @ iso[:, i]
        if abs(overlap) > 1e-12:
            out[:, i] *= overlap / abs(overlap)
    return out


def honest_moment_vector(setup: Setup, structure: MomentStructure) -> np.ndarray:
    """Expectation of every entry class under the dilated honest strategy.

    The result is a feasible point of the behavior-mode program built from
    the setup's Born behavior: it matches every pinned probability and its
    assembled moment matrix is positive semidefinite.
    """
    dim_a, projs_a = _dilated_projectors(setup.alice_measurements)
    dim_b, projs_b = _dilated_projectors(setup.bob_measurements)
    v0 = np.kron(
        np.eye(dim_a, 2, dtype=complex), np.eye(dim_b, 2, dtype=complex)
    )
    # Embedded two-qubit state on the dilated pair of spaces.
    rho = v0 @ setup.state @ v0.conj().T

    word_cache: dict[tuple, np.ndarray] = {}

    def word_operator(party, word, projs, dim) -> np.ndarray:
        key = (party, word)
        if key in word_cache:
            return word_cache[key]
        op = np.eye(dim, dtype=complex)
        for (setting, outcome) in word:
            op = op @ projs[setting][outcome]
        word_cache[key] = op
        return op

    # The real parts form a feasible assignment: the conjugate strategy is
    # equally valid, and averaging the two moment matrices keeps positive
    # semidefiniteness while fixing all (real) probabilities.
    values = np.empty(structure.num_classes)
    for cls, monomial in enumerate(structure.class_reps):
        op_a = word_operator("A", monomial.alice, projs_a, dim_a)
        op_b = word_operator("B", monomial.bob, projs_b, dim_b)
        values[cls] = np.trace(np.kron(op_a, op_b) @ rho).real
    return values
