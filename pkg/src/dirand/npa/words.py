"""Projector words and the monomial basis for a hierarchy level.

Each measurement setting with r outcomes contributes r - 1 projector
letters; the last outcome is recovered by completeness.  Words over these
letters reduce by idempotence (repeated letter collapses) and orthogonality
(different outcomes of one setting annihilate); letters of the two parties
commute, so a monomial stores one word per party.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Sequence

from ..model import Scenario

#: Sentinel for a word that reduced to the zero operator.
ZERO = None

#: A letter is (setting, outcome) with outcome < outcomes(setting) - 1.
Letter = tuple[int, int]
Word = tuple[Letter, ...]


@dataclass(frozen=True, order=True)
class Monomial:
    """Canonical product of projectors, one reduced word per party."""

    alice: Word
    bob: Word

    @property
    def length(self) -> int:
        return len(self.alice) + len(self.bob)

    @property
    def pattern(self) -> str:
        return "A" * len(self.alice) + "B" * len(self.bob)

    def sort_key(self) -> tuple:
        return (self.length, self.pattern, self.alice, self.bob)

    def __str__(self) -> str:
        if not self.alice and not self.bob:
            return "1"
        parts = [f"A({x + 1},{a + 1})" for x, a in self.alice]
        parts += [f"B({y + 1},{b + 1})" for y, b in self.bob]
        return " ".join(parts)


IDENTITY = Monomial((), ())


def reduce_word(letters: Sequence[Letter]) -> Word | None:
    """Reduce one party's projector word; None encodes the zero operator."""
    out: list[Letter] = []
    for letter in letters:
        if out and out[-1][0] == letter[0]:
            if out[-1][1] == letter[1]:
                continue  # idempotent
            return ZERO  # orthogonal outcomes of one setting
        out.append(letter)
    return tuple(out)


def canonicalize(alice: Sequence[Letter], bob: Sequence[Letter]) -> Monomial | None:
    """Canonical form of a raw projector sequence, or ZERO."""
    aw = reduce_word(alice)
    if aw is ZERO:
        return ZERO
    bw = reduce_word(bob)
    if bw is ZERO:
        return ZERO
    return Monomial(aw, bw)


def adjoint(m: Monomial) -> Monomial:
    """Reverse each party word (projectors are Hermitian)."""
    return Monomial(m.alice[::-1], m.bob[::-1])


def product(left: Monomial, right: Monomial) -> Monomial | None:
    return canonicalize(left.alice + right.alice, left.bob + right.bob)


@dataclass(frozen=True)
class LevelSpec:
    """Hierarchy level: a base degree plus extra party-pattern classes."""

    base_level: int
    extra_classes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.base_level < 0:
            raise ValueError("base level must be non-negative")
        for pattern in self.extra_classes:
            if len(pattern) < 2 or set(pattern) - {"A", "B"}:
                raise ValueError(
                    f"pattern {pattern!r} must have length >= 2 and use only A, B"
                )

    def __str__(self) -> str:
        return "+".join([str(self.base_level), *self.extra_classes])

    def degree_pairs(self) -> set[tuple[int, int]]:
        """All (alice length, bob length) pairs the level admits."""
        pairs = {
            (i, total - i)
            for total in range(self.base_level + 1)
            for i in range(total + 1)
        }
        for pattern in self.extra_classes:
            pairs.add((pattern.count("A"), pattern.count("B")))
        return pairs


_LEVEL_RE = re.compile(r"^\s*(\d+)\s*((?:\+\s*[A-Za-z]+\s*)*)$")


def parse_level(text: str) -> LevelSpec:
    """Parse a level string such as "2", "1+AB" or "2+AAB+ABB"."""
    match = _LEVEL_RE.match(text)
    if not match:
        raise ValueError(f"malformed level {text!r}; expected INT('+'PATTERN)*")
    base = int(match.group(1))
    extras = tuple(
        p.strip().upper() for p in match.group(2).split("+") if p.strip()
    )
    for pattern in extras:
        if set(pattern) - {"A", "B"}:
            raise ValueError(f"unknown party letter in pattern {pattern!r}")
    return LevelSpec(base, extras)


def party_letters(scenario: Scenario, party: str) -> list[Letter]:
    counts = scenario.alice_outcomes if party == "A" else scenario.bob_outcomes
    return [(x, a) for x, r in enumerate(counts) for a in range(r - 1)]


def _words_of_length(letters: Sequence[Letter], length: int) -> Iterator[Word]:
    """All canonical words of exact length (adjacent settings differ)."""
    if length == 0:
        yield ()
        return

    def extend(word: list[Letter]) -> Iterator[Word]:
        if len(word) == length:
            yield tuple(word)
            return
        for letter in letters:
            if word and word[-1][0] == letter[0]:
                continue
            word.append(letter)
            yield from extend(word)
            word.pop()

    yield from extend([])


def monomial_basis(scenario: Scenario, level: LevelSpec) -> list[Monomial]:
    """Duplicate-free canonical basis, sorted by (length, pattern, letters)."""
    alice_letters = party_letters(scenario, "A")
    bob_letters = party_letters(scenario, "B")
    pairs = level.degree_pairs()
    max_a = max((p[0] for p in pairs), default=0)
    max_b = max((p[1] for p in pairs), default=0)
    alice_words = {n: list(_words_of_length(alice_letters, n)) for n in range(max_a + 1)}
    bob_words = {n: list(_words_of_length(bob_letters, n)) for n in range(max_b + 1)}
    seen: set[Monomial] = set()
    for na, nb in pairs:
        for aw in alice_words[na]:
            for bw in bob_words[nb]:
                seen.add(Monomial(aw, bw))
    seen.add(IDENTITY)
    return sorted(seen, key=Monomial.sort_key)
