"""Entry identification for moment matrices.

The matrix entry at (i, j) carries the expectation of adjoint(m_i) m_j.
Entries whose canonical products are equal or mutually adjoint share one
real unknown (a feasible complex moment matrix can always be replaced by
its real part), products that annihilate are pinned to zero, and every
behavior probability of the scenario maps to exactly one unknown.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..model import Behavior, BellFunctional, Scenario
from .words import IDENTITY, LevelSpec, Monomial, ZERO, adjoint, monomial_basis, product


@dataclass(frozen=True)
class MomentStructure:
    """Canonical basis plus the entry-identification data of the moment matrix.

    ``entry_row/entry_col/entry_class`` list the upper-triangle positions
    (row <= col) that carry an unknown, grouped by nothing in particular;
    ``zero_entries`` are the positions annihilated by orthogonality.  Class
    0 is always the normalisation moment (expectation of the identity).
    """

    scenario: Scenario
    level: LevelSpec
    basis: tuple[Monomial, ...]
    class_reps: tuple[Monomial, ...]
    entry_row: np.ndarray
    entry_col: np.ndarray
    entry_class: np.ndarray
    zero_entries: tuple[tuple[int, int], ...]
    prob_index: Mapping[tuple, int]

    def __post_init__(self) -> None:
        for arr in (self.entry_row, self.entry_col, self.entry_class):
            arr.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def num_classes(self) -> int:
        return len(self.class_reps)

    @property
    def identity_class(self) -> int:
        return 0

    def class_of(self, monomial: Monomial) -> int:
        key = min(monomial, adjoint(monomial), key=Monomial.sort_key)
        try:
            return self._rep_ids[key]
        except AttributeError:
            object.__setattr__(
                self, "_rep_ids", {rep: i for i, rep in enumerate(self.class_reps)}
            )
            return self._rep_ids[key]

    def assemble(self, values: np.ndarray) -> np.ndarray:
        """Dense symmetric moment matrix from a vector of class values."""
        out = np.zeros((self.size, self.size))
        out[self.entry_row, self.entry_col] = values[self.entry_class]
        out[self.entry_col, self.entry_row] = values[self.entry_class]
        return out


def moment_structure(scenario: Scenario, level: LevelSpec) -> MomentStructure:
    basis = monomial_basis(scenario, level)
    n = len(basis)
    adjoints = [adjoint(m) for m in basis]

    raw: list[tuple[int, int, Monomial]] = []
    zero: list[tuple[int, int]] = []
    reps: set[Monomial] = set()
    for i in range(n):
        left = adjoints[i]
        for j in range(i, n):
            prod = product(left, basis[j])
            if prod is ZERO:
                zero.append((i, j))
                continue
            rep = min(prod, adjoint(prod), key=Monomial.sort_key)
            reps.add(rep)
            raw.append((i, j, rep))

    ordered = sorted(reps, key=Monomial.sort_key)
    if ordered[0] != IDENTITY:
        raise AssertionError("normalisation moment missing from structure")
    rep_ids = {rep: c for c, rep in enumerate(ordered)}

    entry_row = np.fromiter((i for i, _, _ in raw), dtype=np.int64, count=len(raw))
    entry_col = np.fromiter((j for _, j, _ in raw), dtype=np.int64, count=len(raw))
    entry_class = np.fromiter(
        (rep_ids[r] for _, _, r in raw), dtype=np.int64, count=len(raw)
    )

    prob_index: dict[tuple, int] = {}
    missing: list[tuple] = []
    for x, ra in enumerate(scenario.alice_outcomes):
        for a in range(ra - 1):
            key = Monomial(((x, a),), ())
            if key in rep_ids:
                prob_index[("A", x, a)] = rep_ids[key]
            else:
                missing.append(("A", x, a))
    for y, rb in enumerate(scenario.bob_outcomes):
        for b in range(rb - 1):
            key = Monomial((), ((y, b),))
            if key in rep_ids:
                prob_index[("B", y, b)] = rep_ids[key]
            else:
                missing.append(("B", y, b))
    for x, ra in enumerate(scenario.alice_outcomes):
        for y, rb in enumerate(scenario.bob_outcomes):
            for a in range(ra - 1):
                for b in range(rb - 1):
                    key = Monomial(((x, a),), ((y, b),))
                    if key in rep_ids:
                        prob_index[("AB", x, y, a, b)] = rep_ids[key]
                    else:
                        missing.append(("AB", x, y, a, b))
    if missing:
        raise ValueError(
            f"level {level} does not expose all behavior probabilities "
            f"(missing {missing[:3]}...); use base level >= 1"
        )

    return MomentStructure(
        scenario=scenario,
        level=level,
        basis=tuple(basis),
        class_reps=tuple(ordered),
        entry_row=entry_row,
        entry_col=entry_col,
        entry_class=entry_class,
        zero_entries=tuple(zero),
        prob_index=prob_index,
    )


def probability_on_classes(
    structure: MomentStructure, x: int, y: int, a: int, b: int
) -> dict[int, float]:
    """Expand P(ab|xy) over moment classes, last outcomes via completeness.

    The expansion is homogeneous: the normalisation moment appears instead
    of the constant 1, so it remains valid for subnormalised branches.
    """
    sc = structure.scenario
    ra, rb = sc.alice_outcomes[x], sc.bob_outcomes[y]
    idx = structure.prob_index
    out: dict[int, float] = {}

    def add(cls: int, w: float) -> None:
        out[cls] = out.get(cls, 0.0) + w

    a_last, b_last = a == ra - 1, b == rb - 1
    if not a_last and not b_last:
        add(idx[("AB", x, y, a, b)], 1.0)
    elif a_last and not b_last:
        add(idx[("B", y, b)], 1.0)
        for ap in range(ra - 1):
            add(idx[("AB", x, y, ap, b)], -1.0)
    elif not a_last and b_last:
        add(idx[("A", x, a)], 1.0)
        for bp in range(rb - 1):
            add(idx[("AB", x, y, a, bp)], -1.0)
    else:
        add(structure.identity_class, 1.0)
        for ap in range(ra - 1):
            add(idx[("A", x, ap)], -1.0)
        for bp in range(rb - 1):
            add(idx[("B", y, bp)], -1.0)
        for ap in range(ra - 1):
            for bp in range(rb - 1):
                add(idx[("AB", x, y, ap, bp)], 1.0)
    return out


def marginal_on_classes(
    structure: MomentStructure, party: str, setting: int, outcome: int
) -> dict[int, float]:
    """Expand a single-party marginal probability over moment classes."""
    sc = structure.scenario
    r = sc.outcomes(party, setting)
    if outcome < r - 1:
        return {structure.prob_index[(party, setting, outcome)]: 1.0}
    out = {structure.identity_class: 1.0}
    for o in range(r - 1):
        out[structure.prob_index[(party, setting, o)]] = -1.0
    return out


def compile_functional(
    functional: BellFunctional, structure: MomentStructure
) -> np.ndarray:
    """Coefficient vector over moment classes computing the functional.

    The constant term lands on the normalisation class, so the dot product
    with a moment vector evaluates the functional on the (sub)normalised
    behavior the moments encode.
    """
    functional.check_scenario(structure.scenario)
    coeffs = np.zeros(structure.num_classes)
    coeffs[structure.identity_class] += functional.constant
    for (x, y, a, b), w in functional.coefficients.items():
        for cls, factor in probability_on_classes(structure, x, y, a, b).items():
            coeffs[cls] += w * factor
    return coeffs


def behavior_class_values(
    structure: MomentStructure, behavior: Behavior
) -> list[tuple[int, float]]:
    """Pinned (class, value) pairs fixing the full behavior, marginals included.

    Together with the normalisation moment these determine every
    probability of the scenario; values come straight from the table.
    """
    pins: list[tuple[int, float]] = []
    for key, cls in sorted(structure.prob_index.items(), key=lambda kv: kv[1]):
        if key[0] == "A":
            _, x, a = key
            pins.append((cls, float(behavior.alice_marginal(x)[a])))
        elif key[0] == "B":
            _, y, b = key
            pins.append((cls, float(behavior.bob_marginal(y)[b])))
        else:
            _, x, y, a, b = key
            pins.append((cls, behavior.prob(x, y, a, b)))
    return pins
