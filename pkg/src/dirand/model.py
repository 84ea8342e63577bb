"""Qubit states and measurements, behaviors, and Bell functionals.

Everything here is a plain immutable value: behaviors are probability
tables computed once via the Born rule, functionals are sparse coefficient
maps, and all operations are pure functions.  Settings and outcomes are
0-based internally; the command-line layer translates to the 1-based
labels used in user-facing output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

ATOL = 1e-12

ID2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (ID2, SX, SY, SZ)

#: Two-qubit maximally entangled state (|00> + |11>)/sqrt(2) as a density matrix.
PHI_PLUS = np.zeros((4, 4), dtype=complex)
PHI_PLUS[np.ix_([0, 3], [0, 3])] = 0.5


def bloch_observable(v: Sequence[float]) -> np.ndarray:
    """Hermitian unitary observable v . sigma for a unit Bloch vector."""
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ValueError(f"Bloch vector must be unit length, got norm {np.linalg.norm(v)}")
    return v[0] * SX + v[1] * SY + v[2] * SZ


@dataclass(frozen=True)
class Scenario:
    """Measurement scenario: outcome count per setting, for each party."""

    alice_outcomes: tuple[int, ...]
    bob_outcomes: tuple[int, ...]

    def __post_init__(self) -> None:
        for name, counts in (("alice", self.alice_outcomes), ("bob", self.bob_outcomes)):
            if len(counts) == 0:
                raise ValueError(f"{name} must have at least one setting")
            if any(r < 2 for r in counts):
                raise ValueError(f"{name} outcome counts must all be >= 2, got {counts}")

    @property
    def num_alice_settings(self) -> int:
        return len(self.alice_outcomes)

    @property
    def num_bob_settings(self) -> int:
        return len(self.bob_outcomes)

    def outcomes(self, party: str, setting: int) -> int:
        counts = self.alice_outcomes if party == "A" else self.bob_outcomes
        return counts[setting]

    def joint_settings(self) -> Iterator[tuple[int, int]]:
        for x in range(len(self.alice_outcomes)):
            for y in range(len(self.bob_outcomes)):
                yield x, y


class BehaviorError(ValueError):
    """A probability table violating the behavior axioms."""


@dataclass(frozen=True)
class Behavior:
    """Joint conditional probability table P(ab|xy) over a scenario.

    The table is stored as a dense float array of shape
    ``(m_A, m_B, max r_A, max r_B)``; entries beyond a setting's outcome
    count are zero padding.  Construction validates positivity,
    normalisation per setting pair, and no-signalling, all at 1e-12.
    """

    scenario: Scenario
    table: np.ndarray

    def __post_init__(self) -> None:
        sc = self.scenario
        expected = (
            sc.num_alice_settings,
            sc.num_bob_settings,
            max(sc.alice_outcomes),
            max(sc.bob_outcomes),
        )
        if self.table.shape != expected:
            raise BehaviorError(f"table shape {self.table.shape} != {expected}")
        self.table.setflags(write=False)
        self._validate()

    def _validate(self) -> None:
        sc = self.scenario
        if np.min(self.table) < -ATOL or np.max(self.table) > 1 + ATOL:
            raise BehaviorError("probabilities outside [0, 1]")
        for x, y in sc.joint_settings():
            block = self.block(x, y)
            if abs(block.sum() - 1.0) > ATOL:
                raise BehaviorError(f"P(ab|{x},{y}) sums to {block.sum()}, not 1")
            pad = self.table[x, y].sum() - block.sum()
            if abs(pad) > ATOL:
                raise BehaviorError(f"nonzero padding at setting pair ({x},{y})")
        # No-signalling: marginals must not depend on the distant party's setting.
        for x in range(sc.num_alice_settings):
            margs = [self.block(x, y).sum(axis=1) for y in range(sc.num_bob_settings)]
            if any(np.max(np.abs(m - margs[0])) > ATOL for m in margs[1:]):
                raise BehaviorError(f"Alice marginal for x={x} depends on Bob's setting")
        for y in range(sc.num_bob_settings):
            margs = [self.block(x, y).sum(axis=0) for x in range(sc.num_alice_settings)]
            if any(np.max(np.abs(m - margs[0])) > ATOL for m in margs[1:]):
                raise BehaviorError(f"Bob marginal for y={y} depends on Alice's setting")

    def block(self, x: int, y: int) -> np.ndarray:
        """The (r_A(x), r_B(y)) probability block for one setting pair."""
        sc = self.scenario
        return self.table[x, y, : sc.alice_outcomes[x], : sc.bob_outcomes[y]]

    def prob(self, x: int, y: int, a: int, b: int) -> float:
        return float(self.block(x, y)[a, b])

    def alice_marginal(self, x: int) -> np.ndarray:
        """P(a|x), evaluated from the y=0 block (no-signalling is validated)."""
        return self.block(x, 0).sum(axis=1)

    def bob_marginal(self, y: int) -> np.ndarray:
        return self.block(0, y).sum(axis=0)

    def csv_rows(self) -> Iterator[tuple[int, int, int, int, float]]:
        """Rows (x, y, a, b, p) with 1-based setting and outcome labels."""
        for x, y in self.scenario.joint_settings():
            block = self.block(x, y)
            for a in range(block.shape[0]):
                for b in range(block.shape[1]):
                    yield x + 1, y + 1, a + 1, b + 1, float(block[a, b])


def behavior_from_blocks(scenario: Scenario, blocks: Mapping[tuple[int, int], np.ndarray]) -> Behavior:
    table = np.zeros(
        (
            scenario.num_alice_settings,
            scenario.num_bob_settings,
            max(scenario.alice_outcomes),
            max(scenario.bob_outcomes),
        )
    )
    for (x, y), block in blocks.items():
        table[x, y, : block.shape[0], : block.shape[1]] = block
    return Behavior(scenario, table)


@dataclass(frozen=True)
class MeasurementDiagnostics:
    """Validity report for a candidate POVM (diagnostics, not exceptions)."""

    psd_ok: bool
    complete_ok: bool
    min_eigenvalue: float
    completeness_error: float
    ranks: tuple[int, ...]
    extremal_hint: bool

    @property
    def valid(self) -> bool:
        return self.psd_ok and self.complete_ok


@dataclass(frozen=True)
class QubitMeasurement:
    """A qubit POVM: 2x2 Hermitian PSD elements summing to the identity."""

    elements: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        for el in self.elements:
            if el.shape != (2, 2):
                raise ValueError(f"POVM elements must be 2x2, got {el.shape}")
            el.setflags(write=False)

    @property
    def num_outcomes(self) -> int:
        return len(self.elements)

    @classmethod
    def projective(cls, v: Sequence[float]) -> "QubitMeasurement":
        """Two-outcome projective measurement of v . sigma; outcome 0 is +1."""
        obs = bloch_observable(v)
        return cls(((ID2 + obs) / 2, (ID2 - obs) / 2))

    @classmethod
    def rank_one_povm(cls, vectors: Sequence[Sequence[float]]) -> "QubitMeasurement":
        """Equal-weight rank-one POVM with elements (I + u_b . sigma) / n.

        The ``n`` unit Bloch vectors must sum to zero for completeness.
        """
        vs = [np.asarray(v, dtype=float) for v in vectors]
        n = len(vs)
        if np.linalg.norm(sum(vs)) > 1e-9:
            raise ValueError("rank-one POVM Bloch vectors must sum to zero")
        return cls(tuple((ID2 + bloch_observable(v)) / n for v in vs))


def validate_measurement(m: QubitMeasurement, tol: float = ATOL) -> MeasurementDiagnostics:
    """Check PSD and completeness, and report a sufficient extremality hint.

    The hint is true when every element is rank one and the elements'
    Pauli 4-vectors are linearly independent, which suffices for
    extremality of qubit POVMs with at most four outcomes.
    """
    min_eig = min(float(np.linalg.eigvalsh(el)[0]) for el in m.elements)
    total = sum(m.elements)
    completeness_error = float(np.max(np.abs(total - ID2)))
    rank_tol = 1e-9
    ranks = tuple(int(np.sum(np.linalg.eigvalsh(el) > rank_tol)) for el in m.elements)
    pauli_vecs = np.array(
        [[np.trace(el @ s).real / 2 for s in PAULI] for el in m.elements]
    )
    independent = np.linalg.matrix_rank(pauli_vecs, tol=1e-9) == len(m.elements)
    extremal = all(r == 1 for r in ranks) and independent and len(m.elements) <= 4
    return MeasurementDiagnostics(
        psd_ok=min_eig >= -tol,
        complete_ok=completeness_error <= tol,
        min_eigenvalue=min_eig,
        completeness_error=completeness_error,
        ranks=ranks,
        extremal_hint=extremal,
    )


def born_behavior(
    state: np.ndarray,
    alice: Sequence[QubitMeasurement],
    bob: Sequence[QubitMeasurement],
) -> Behavior:
    """Behavior P(ab|xy) = Tr[(A_{a|x} x B_{b|y}) rho] for a two-qubit state."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (4, 4):
        raise ValueError(f"state must be 4x4, got {state.shape}")
    if np.max(np.abs(state - state.conj().T)) > 1e-10:
        raise ValueError("state is not Hermitian")
    if np.linalg.eigvalsh(state)[0] < -1e-10:
        raise ValueError("state is not positive semidefinite")
    if abs(np.trace(state).real - 1.0) > 1e-10:
        raise ValueError("state does not have unit trace")
    for who, measurements in (("Alice", alice), ("Bob", bob)):
        for i, m in enumerate(measurements):
            diag = validate_measurement(m, tol=1e-10)
            if not diag.valid:
                raise ValueError(
                    f"{who} setting {i}: invalid POVM "
                    f"(min eig {diag.min_eigenvalue:.2e}, "
                    f"completeness error {diag.completeness_error:.2e})"
                )

    scenario = Scenario(
        tuple(m.num_outcomes for m in alice), tuple(m.num_outcomes for m in bob)
    )
    blocks = {}
    for x, y in scenario.joint_settings():
        block = np.empty((alice[x].num_outcomes, bob[y].num_outcomes))
        for a, ea in enumerate(alice[x].elements):
            for b, eb in enumerate(bob[y].elements):
                p = np.trace(np.kron(ea, eb) @ state)
                if abs(p.imag) > ATOL:
                    raise ValueError(f"probability has imaginary residue {p.imag:.2e}")
                block[a, b] = p.real
        # Clip float dust so the Behavior invariants hold exactly at 1e-12.
        blocks[(x, y)] = np.clip(block, 0.0, 1.0)
    return behavior_from_blocks(scenario, blocks)


def correlator(behavior: Behavior, x: int, y: int) -> float:
    """Standard two-outcome correlator P(a=b|xy) - P(a!=b|xy)."""
    sc = behavior.scenario
    if sc.alice_outcomes[x] != 2 or sc.bob_outcomes[y] != 2:
        raise ValueError(
            f"correlator needs two-outcome settings, got "
            f"{sc.alice_outcomes[x]} and {sc.bob_outcomes[y]} outcomes"
        )
    block = behavior.block(x, y)
    return float(block[0, 0] + block[1, 1] - block[0, 1] - block[1, 0])


@dataclass(frozen=True)
class BellFunctional:
    """Linear functional on behaviors: sum of coefficients times P, plus a constant.

    Coefficient keys are (x, y, a, b) with 0-based indices.
    """

    coefficients: Mapping[tuple[int, int, int, int], float]
    constant: float = 0.0
    name: str = ""
    quantum_bound: float | None = None
    classical_bound: float | None = None

    def check_scenario(self, scenario: Scenario) -> None:
        for (x, y, a, b) in self.coefficients:
            ok = (
                0 <= x < scenario.num_alice_settings
                and 0 <= y < scenario.num_bob_settings
                and 0 <= a < scenario.alice_outcomes[x]
                and 0 <= b < scenario.bob_outcomes[y]
            )
            if not ok:
                raise ValueError(
                    f"functional {self.name!r} references (x={x}, y={y}, a={a}, b={b}) "
                    f"outside the scenario"
                )


def eval_functional(functional: BellFunctional, behavior: Behavior) -> float:
    functional.check_scenario(behavior.scenario)
    total = functional.constant
    for (x, y, a, b), c in functional.coefficients.items():
        total += c * behavior.table[x, y, a, b]
    return float(total)


def correlator_functional(
    terms: Mapping[tuple[int, int], float],
    name: str = "",
    constant: float = 0.0,
    quantum_bound: float | None = None,
    classical_bound: float | None = None,
) -> BellFunctional:
    """Compile a sum of weighted correlators E_xy into probability coefficients."""
    coefficients: dict[tuple[int, int, int, int], float] = {}
    for (x, y), w in terms.items():
        for a in range(2):
            for b in range(2):
                key = (x, y, a, b)
                sign = 1.0 if a == b else -1.0
                coefficients[key] = coefficients.get(key, 0.0) + w * sign
    return BellFunctional(
        coefficients=coefficients,
        constant=constant,
        name=name,
        quantum_bound=quantum_bound,
        classical_bound=classical_bound,
    )


def add_probability_terms(
    functional: BellFunctional,
    terms: Mapping[tuple[int, int, int, int], float],
    name: str | None = None,
    quantum_bound: float | None = None,
    classical_bound: float | None = None,
) -> BellFunctional:
    coefficients = dict(functional.coefficients)
    for key, w in terms.items():
        coefficients[key] = coefficients.get(key, 0.0) + w
    return BellFunctional(
        coefficients=coefficients,
        constant=functional.constant,
        name=functional.name if name is None else name,
        quantum_bound=quantum_bound,
        classical_bound=classical_bound,
    )


def mix_visibility(behavior: Behavior, v: float) -> Behavior:
    """Mix with uniform noise: v P(ab|xy) + (1 - v) / (r_A(x) r_B(y))."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must be in [0, 1], got {v}")
    sc = behavior.scenario
    blocks = {}
    for x, y in sc.joint_settings():
        ra, rb = sc.alice_outcomes[x], sc.bob_outcomes[y]
        blocks[(x, y)] = v * behavior.block(x, y) + (1.0 - v) / (ra * rb)
    return behavior_from_blocks(sc, blocks)


@dataclass(frozen=True)
class GuessTarget:
    """What the adversary tries to guess: one party's outcome, or both."""

    kind: str  # "local" | "global"
    party: str | None = None  # "A" or "B" when local
    x: int | None = None  # 0-based Alice setting (global), or the local setting
    y: int | None = None  # 0-based Bob setting (global only)

    def __post_init__(self) -> None:
        if self.kind == "local":
            if self.party not in ("A", "B") or self.x is None or self.y is not None:
                raise ValueError("local target needs party and one setting")
        elif self.kind == "global":
            if self.party is not None or self.x is None or self.y is None:
                raise ValueError("global target needs one setting per party")
        else:
            raise ValueError(f"unknown target kind {self.kind!r}")

    @classmethod
    def local(cls, party: str, setting: int) -> "GuessTarget":
        return cls(kind="local", party=party, x=setting)

    @classmethod
    def global_(cls, x: int, y: int) -> "GuessTarget":
        return cls(kind="global", x=x, y=y)

    def validate(self, scenario: Scenario) -> None:
        if self.kind == "local":
            n = scenario.num_alice_settings if self.party == "A" else scenario.num_bob_settings
            if not 0 <= self.x < n:
                raise ValueError(f"target setting {self.x} out of range")
        else:
            if not 0 <= self.x < scenario.num_alice_settings:
                raise ValueError(f"target Alice setting {self.x} out of range")
            if not 0 <= self.y < scenario.num_bob_settings:
                raise ValueError(f"target Bob setting {self.y} out of range")

    def outcome_count(self, scenario: Scenario) -> int:
        """Number of guess branches: outcomes, or outcome pairs for global."""
        if self.kind == "local":
            return scenario.outcomes(self.party, self.x)
        return scenario.alice_outcomes[self.x] * scenario.bob_outcomes[self.y]

    def label(self) -> str:
        if self.kind == "local":
            return f"local:{self.party}:{self.x + 1}"
        return f"global:{self.x + 1}:{self.y + 1}"


@dataclass(frozen=True)
class Setup:
    """A concrete quantum strategy plus the functionals used to certify it."""

    state: np.ndarray
    alice_measurements: tuple[QubitMeasurement, ...]
    bob_measurements: tuple[QubitMeasurement, ...]
    functionals: tuple[BellFunctional, ...] = ()
    default_target: GuessTarget | None = None
    name: str = ""
    params: Mapping[str, float] = field(default_factory=dict)
    default_mode: str = "behavior"
    certify_functional: str | None = None  # name of the Bell-value-mode functional

    def __post_init__(self) -> None:
        self.state.setflags(write=False)
        if self.state.shape != (4, 4):
            raise ValueError("state must be 4x4")
        if np.max(np.abs(self.state - self.state.conj().T)) > ATOL:
            raise ValueError("state is not Hermitian")
        if np.linalg.eigvalsh(self.state)[0] < -ATOL:
            raise ValueError("state is not PSD")
        if abs(np.trace(self.state).real - 1.0) > ATOL:
            raise ValueError("state trace is not 1")
        if self.default_target is not None:
            self.default_target.validate(self.scenario)

    @property
    def scenario(self) -> Scenario:
        return Scenario(
            tuple(m.num_outcomes for m in self.alice_measurements),
            tuple(m.num_outcomes for m in self.bob_measurements),
        )

    def behavior(self) -> Behavior:
        return born_behavior(self.state, self.alice_measurements, self.bob_measurements)

    def functional(self, name: str) -> BellFunctional:
        for f in self.functionals:
            if f.name == name:
                return f
        raise KeyError(f"setup has no functional named {name!r}")


# --- JSON serialization (complex entries as [re, im] pairs) ---


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def _matrix_from_json(data: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data])


def setup_to_dict(setup: Setup) -> dict:
    def measurement(m: QubitMeasurement) -> list:
        return [_matrix_to_json(el) for el in m.elements]

    def functional(f: BellFunctional) -> dict:
        return {
            "name": f.name,
            "constant": f.constant,
            "quantum_bound": f.quantum_bound,
            "classical_bound": f.classical_bound,
            "coefficients": [
                {"x": x, "y": y, "a": a, "b": b, "value": v}
                for (x, y, a, b), v in sorted(f.coefficients.items())
            ],
        }

    return {
        "name": setup.name,
        "params": dict(setup.params),
        "state": _matrix_to_json(setup.state),
        "alice_measurements": [measurement(m) for m in setup.alice_measurements],
        "bob_measurements": [measurement(m) for m in setup.bob_measurements],
        "functionals": [functional(f) for f in setup.functionals],
        "default_target": None if setup.default_target is None else {
            "kind": setup.default_target.kind,
            "party": setup.default_target.party,
            "x": setup.default_target.x,
            "y": setup.default_target.y,
        },
        "default_mode": setup.default_mode,
        "certify_functional": setup.certify_functional,
    }


def setup_from_dict(data: dict) -> Setup:
    def measurement(els: list) -> QubitMeasurement:
        return QubitMeasurement(tuple(_matrix_from_json(el) for el in els))

    def functional(f: dict) -> BellFunctional:
        return BellFunctional(
            coefficients={
                (c["x"], c["y"], c["a"], c["b"]): float(c["value"])
                for c in f["coefficients"]
            },
            constant=float(f["constant"]),
            name=f["name"],
            quantum_bound=f.get("quantum_bound"),
            classical_bound=f.get("classical_bound"),
        )

    target = data.get("default_target")
    return Setup(
        state=_matrix_from_json(data["state"]),
        alice_measurements=tuple(measurement(m) for m in data["alice_measurements"]),
        bob_measurements=tuple(measurement(m) for m in data["bob_measurements"]),
        functionals=tuple(functional(f) for f in data["functionals"]),
        default_target=None if target is None else GuessTarget(
            kind=target["kind"], party=target["party"], x=target["x"], y=target["y"]
        ),
        name=data.get("name", ""),
        params=data.get("params", {}),
        default_mode=data.get("default_mode", "behavior"),
        certify_functional=data.get("certify_functional"),
    )


def save_setup(setup: Setup, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(setup_to_dict(setup), fh, indent=1, sort_keys=True)


def load_setup(path: str) -> Setup:
    with open(path) as fh:
        return setup_from_dict(json.load(fh))
