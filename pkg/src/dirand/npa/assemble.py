"""Assembly of Bell-maximization and guessing-probability programs.

Both programs share the moment-matrix block built from a
:class:`MomentStructure`: one indicator coefficient matrix per entry
class, zero entries carrying no unknown.  The guessing program has one
subnormalised block per guess branch, coupled only through the pinning
equalities, so its interior-point Schur complement stays block diagonal
over branches.

Every variable is a moment of products of projectors evaluated on a
(sub)normalised state, hence bounded by one in magnitude; the assembled
problems declare that bound, which is what makes the solver's dual
certificate rigorous.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..model import Behavior, BellFunctional, GuessTarget, Scenario
from ..sdp.problem import BlockSpec, SDPProblem
from .moments import (
    MomentStructure,
    behavior_class_values,
    compile_functional,
    marginal_on_classes,
    moment_structure,
    probability_on_classes,
)
from .words import LevelSpec


def _moment_block(structure: MomentStructure, var_offset: int) -> BlockSpec:
    return BlockSpec(
        size=structure.size,
        var=structure.entry_class + var_offset,
        row=structure.entry_row,
        col=structure.entry_col,
        val=np.ones(len(structure.entry_class)),
        f0=None,
    )


def bell_max_sdp(
    scenario: Scenario,
    functional: BellFunctional,
    level: LevelSpec,
    structure: MomentStructure | None = None,
) -> SDPProblem:
    """Relaxation upper-bounding the quantum value of a Bell functional.

    One moment-matrix block, the normalisation moment pinned to one, and
    the functional compiled onto entry classes as the objective.
    """
    functional.check_scenario(scenario)
    st = structure if structure is not None else moment_structure(scenario, level)
    objective = compile_functional(functional, st)
    eq = np.zeros((1, st.num_classes))
    eq[0, st.identity_class] = 1.0
    return SDPProblem(
        num_vars=st.num_classes,
        blocks=(_moment_block(st, 0),),
        objective=objective,
        eq_lhs=eq,
        eq_rhs=np.ones(1),
        var_bound=np.ones(st.num_classes),
        metadata={
            "kind": "bell-max",
            "description": f"quantum bound for {functional.name!r} at level {st.level}",
            "level": str(st.level),
            "functional": functional.name,
            "moment_size": st.size,
        },
    )


def _branch_objective(
    structure: MomentStructure, target: GuessTarget, branch: int
) -> dict[int, float]:
    """Class expansion of the branch's guessed-outcome probability."""
    if target.kind == "local":
        return marginal_on_classes(structure, target.party, target.x, branch)
    rb = structure.scenario.bob_outcomes[target.y]
    return probability_on_classes(
        structure, target.x, target.y, branch // rb, branch % rb
    )


def guessing_sdp(
    constraint: Behavior | tuple[BellFunctional, float],
    target: GuessTarget,
    level: LevelSpec,
    scenario: Scenario | None = None,
    structure: MomentStructure | None = None,
) -> SDPProblem:
    """Program upper-bounding the adversary's guessing probability.

    One subnormalised moment block per guess branch e; the adversary's
    side-information is modelled by the branch decomposition and the
    objective sums each branch's probability of the guessed outcome.  The
    constraint either pins the whole behavior entrywise (behavior mode) or
    only the value of a Bell functional (Bell-value mode); total
    normalisation is imposed in both.
    """
    if isinstance(constraint, Behavior):
        behavior, functional, value = constraint, None, None
        scenario = behavior.scenario
    else:
        functional, value = constraint
        behavior = None
        if scenario is None:
            raise ValueError("Bell-value mode needs an explicit scenario")
        functional.check_scenario(scenario)

    target.validate(scenario)
    branches = target.outcome_count(scenario)
    if branches < 2:
        raise ValueError("guessing target must have at least two outcomes")

    st = structure if structure is not None else moment_structure(scenario, level)
    K = st.num_classes
    num_vars = branches * K

    blocks = tuple(_moment_block(st, e * K) for e in range(branches))

    objective = np.zeros(num_vars)
    for e in range(branches):
        for cls, w in _branch_objective(st, target, e).items():
            objective[e * K + cls] += w

    rows: list[np.ndarray] = []
    rhs: list[float] = []
    norm_row = np.zeros(num_vars)
    for e in range(branches):
        norm_row[e * K + st.identity_class] = 1.0
    rows.append(norm_row)
    rhs.append(1.0)

    if behavior is not None:
        for cls, val in behavior_class_values(st, behavior):
            row = np.zeros(num_vars)
            for e in range(branches):
                row[e * K + cls] = 1.0
            rows.append(row)
            rhs.append(val)
        description = f"guessing {target.label()} pinned to full behavior at level {st.level}"
    else:
        fvec = compile_functional(functional, st)
        row = np.zeros(num_vars)
        for e in range(branches):
            row[e * K : (e + 1) * K] = fvec
        rows.append(row)
        rhs.append(float(value))
        description = (
            f"guessing {target.label()} pinned to {functional.name!r} = {value!r} "
            f"at level {st.level}"
        )

    return SDPProblem(
        num_vars=num_vars,
        blocks=blocks,
        objective=objective,
        eq_lhs=np.asarray(rows),
        eq_rhs=np.asarray(rhs),
        var_bound=np.ones(num_vars),
        metadata={
            "kind": "guessing",
            "description": description,
            "level": str(st.level),
            "target": target.label(),
            "branches": branches,
            "moment_size": st.size,
            "classes_per_branch": K,
            "mode": "behavior" if behavior is not None else "bell-value",
        },
    )
