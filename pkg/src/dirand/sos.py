"""Exact sum-of-squares verification over the free algebra of dichotomic
observables.

Coefficients live in the quadratic field Q(sqrt 3), represented exactly by
rational pairs; words are reduced only by the involution rule (each letter
squares to the identity) and by cross-party commutation, so within-party
letters do not commute.  No floating point enters this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

Scalar = Union[int, Fraction, "QuadExt"]

# A word is a tuple of 1-based letter indices per party; a key pairs the
# Alice word with the Bob word (cross-party order is structural).
Word = tuple[int, ...]
Key = tuple[Word, Word]

IDENTITY_KEY: Key = ((), ())


@dataclass(frozen=True)
class QuadExt:
    """Element p + q*sqrt(3) of the real quadratic field Q(sqrt 3)."""

    p: Fraction
    q: Fraction

    def __init__(self, p: Scalar = 0, q: Scalar = 0) -> None:
        object.__setattr__(self, "p", Fraction(p))
        object.__setattr__(self, "q", Fraction(q))

    @classmethod
    def sqrt3(cls) -> "QuadExt":
        return cls(0, 1)

    def __bool__(self) -> bool:
        return bool(self.p) or bool(self.q)

    def __add__(self, other: Scalar) -> "QuadExt":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadExt(self.p + other.p, self.q + other.q)

    __radd__ = __add__

    def __neg__(self) -> "QuadExt":
        return QuadExt(-self.p, -self.q)

    def __sub__(self, other: Scalar) -> "QuadExt":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadExt(self.p - other.p, self.q - other.q)

    def __rsub__(self, other: Scalar) -> "QuadExt":
        return (-self) + other

    def __mul__(self, other: Scalar) -> "QuadExt":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadExt(
            self.p * other.p + 3 * self.q * other.q,
            self.p * other.q + self.q * other.p,
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadExt":
        norm = self.p * self.p - 3 * self.q * self.q
        if norm == 0:
            raise ZeroDivisionError("zero element of Q(sqrt 3)")
        return QuadExt(self.p / norm, -self.q / norm)

    def __truediv__(self, other: Scalar) -> "QuadExt":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other: Scalar) -> "QuadExt":
        return _coerce(other) * self.inverse()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = QuadExt(other)
        if isinstance(other, QuadExt):
            return self.p == other.p and self.q == other.q
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.p, self.q))

    def __float__(self) -> float:
        return float(self.p) + float(self.q) * 3 ** 0.5

    def __repr__(self) -> str:
        return f"QuadExt({self.p}, {self.q})"

    def __str__(self) -> str:
        if not self.q:
            return str(self.p)
        if not self.p:
            return f"{self.q}*sqrt3"
        return f"{self.p} + {self.q}*sqrt3"


def _coerce(value: Scalar) -> "QuadExt":
    if isinstance(value, QuadExt):
        return value
    if isinstance(value, (int, Fraction)):
        return QuadExt(value)
    return NotImplemented


def _reduce_word(letters: Iterable[int]) -> Word:
    """Cancel adjacent equal letters (each observable squares to identity)."""
    stack: list[int] = []
    for letter in letters:
        if stack and stack[-1] == letter:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


class OperatorPoly:
    """Polynomial over normal-form words with coefficients in Q(sqrt 3)."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Key, Scalar] | None = None) -> None:
        reduced: dict[Key, QuadExt] = {}
        for (aw, bw), coeff in (terms or {}).items():
            key = (_reduce_word(aw), _reduce_word(bw))
            value = reduced.get(key, QuadExt()) + _coerce(coeff)
            if value:
                reduced[key] = value
            elif key in reduced:
                del reduced[key]
        self.terms = reduced

    @classmethod
    def identity(cls, coeff: Scalar = 1) -> "OperatorPoly":
        return cls({IDENTITY_KEY: coeff})

    @classmethod
    def alice(cls, letter: int, coeff: Scalar = 1) -> "OperatorPoly":
        return cls({((letter,), ()): coeff})

    @classmethod
    def bob(cls, letter: int, coeff: Scalar = 1) -> "OperatorPoly":
        return cls({((), (letter,)): coeff})

    def __add__(self, other: "OperatorPoly") -> "OperatorPoly":
        terms = dict(self.terms)
        for key, coeff in other.terms.items():
            terms[key] = terms.get(key, QuadExt()) + coeff
        return OperatorPoly(terms)

    def __sub__(self, other: "OperatorPoly") -> "OperatorPoly":
        return self + (-other)

    def __neg__(self) -> "OperatorPoly":
        return OperatorPoly({key: -coeff for key, coeff in self.terms.items()})

    def __mul__(self, other: "OperatorPoly | Scalar") -> "OperatorPoly":
        if isinstance(other, (int, Fraction, QuadExt)):
            return self.scale(other)
        terms: dict[Key, QuadExt] = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                key = (_reduce_word(a1 + a2), _reduce_word(b1 + b2))
                terms[key] = terms.get(key, QuadExt()) + c1 * c2
        return OperatorPoly(terms)

    def __rmul__(self, other: Scalar) -> "OperatorPoly":
        return self.scale(other)

    def scale(self, coeff: Scalar) -> "OperatorPoly":
        coeff = _coerce(coeff)
        return OperatorPoly({key: coeff * c for key, c in self.terms.items()})

    def adjoint(self) -> "OperatorPoly":
        """Reverse each party word; letters are Hermitian and coefficients real."""
        return OperatorPoly(
            {(aw[::-1], bw[::-1]): c for (aw, bw), c in self.terms.items()}
        )

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OperatorPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:  # polynomials are value objects
        return hash(frozenset(self.terms.items()))

    def coefficient(self, key: Key) -> QuadExt:
        return self.terms.get(key, QuadExt())

    def triples(self) -> list[tuple[Key, Fraction, Fraction]]:
        """Machine-readable listing: (word, rational part, sqrt3 part)."""
        return [(key, c.p, c.q) for key, c in sorted(self.terms.items())]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for (aw, bw), coeff in sorted(self.terms.items()):
            word = " ".join(
                [f"A{letter}" for letter in aw] + [f"B{letter}" for letter in bw]
            )
            pieces.append(f"({coeff}) {word or '1'}")
        return " + ".join(pieces)

    def __repr__(self) -> str:
        return f"OperatorPoly({self.terms!r})"


def verify_sos(
    target: OperatorPoly, terms: Iterable[OperatorPoly], scale: Scalar
) -> tuple[bool, OperatorPoly]:
    """Check scale * sum P^dagger P == target by exact expansion.

    Returns the verdict together with the difference polynomial, which is
    zero exactly when the identity holds and otherwise pinpoints the
    failing words.
    """
    total = OperatorPoly()
    for poly in terms:
        total = total + poly.adjoint() * poly
    difference = total.scale(scale) - target
    return difference.is_zero(), difference


def elegant_certificate() -> tuple[OperatorPoly, list[OperatorPoly], QuadExt]:
    """The exact identity bounding the elegant functional by 4 sqrt(3).

    Returns (target, terms, scale) with target = 4 sqrt(3) 1 - beta, where
    beta is the Bell operator of the elegant functional written in
    dichotomic observables, and scale * sum P^dagger P reproduces the
    target for the four returned linear polynomials.
    """
    inv_sqrt3 = QuadExt(0, Fraction(1, 3))  # 1/sqrt(3) = sqrt(3)/3
    signs = (
        (1, 1, 1),
        (1, -1, -1),
        (-1, 1, -1),
        (-1, -1, 1),
    )
    terms = []
    for lam, pattern in enumerate(signs, start=1):
        poly = OperatorPoly()
        for i, s in enumerate(pattern, start=1):
            poly = poly + OperatorPoly.alice(i, inv_sqrt3 * s)
        terms.append(poly - OperatorPoly.bob(lam))

    bell_signs = (
        (1, 1, -1, -1),
        (1, -1, 1, -1),
        (1, -1, -1, 1),
    )
    bell = OperatorPoly()
    for i in range(3):
        for j in range(4):
            bell = bell + OperatorPoly(
                {((i + 1,), (j + 1,)): bell_signs[i][j]}
            )
    target = OperatorPoly.identity(QuadExt(0, 4)) - bell
    return target, terms, QuadExt(0, Fraction(1, 2))


CERTIFICATES = {"elegant": elegant_certificate}


def certificate_report(name: str) -> str:
    """Human-readable rendering of a built-in certificate."""
    if name not in CERTIFICATES:
        raise KeyError(f"unknown certificate {name!r}")
    target, terms, scale = CERTIFICATES[name]()
    lines = [f"certificate: {name}", f"scale: {scale}", f"target: {target}"]
    for i, poly in enumerate(terms, start=1):
        lines.append(f"P{i}: {poly}")
    ok, diff = verify_sos(target, terms, scale)
    lines.append(f"identity holds: {ok}")
    if not ok:
        lines.append(f"difference: {diff}")
    return "\n".join(lines)
