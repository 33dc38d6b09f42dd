"""Uniform asymmetric binary system (uABS) with exact integer arithmetic.

The binary alphabet is spread over the naturals so that symbol 1 occupies a
subset of density p and symbol 0 the complement.  With the ceiling rule the
count of 1s below x is ceil(x*p); the floor rule uses floor(x*p).  All state
updates reduce to exact integer ceiling/floor divisions, so encode/decode are
bit-reproducible on every platform and mutually inverse bijections between
the naturals and {0,1} x naturals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "STATE_BOUND",
    "StateOverflowError",
    "UabsVariant",
    "BinaryProb",
    "UabsCodec",
    "uabs_symbol",
    "uabs_decode",
    "uabs_encode",
    "uabs_inaccuracy",
]

# Declared machine word for coder states.  Growing past this is an error:
# callers are expected to renormalize through the stream layer instead.
STATE_BOUND = 2**64 - 1


class StateOverflowError(OverflowError):
    """Encoding would push the state past the 64-bit machine bound."""


class UabsVariant(enum.Enum):
    """Rounding rule used to spread symbol 1 over the naturals."""

    CEILING = "ceiling"
    FLOOR = "floor"


@dataclass(frozen=True)
class BinaryProb:
    """Probability of symbol 1 as a reduced fraction num/den, 0 < num < den."""

    num: int
    den: int

    def __post_init__(self) -> None:
        if self.den <= 0 or self.num <= 0 or self.num >= self.den:
            raise ValueError(f"need 0 < num < den, got {self.num}/{self.den}")
        g = math.gcd(self.num, self.den)
        if g > 1:
            object.__setattr__(self, "num", self.num // g)
            object.__setattr__(self, "den", self.den // g)

    @classmethod
    def parse(cls, text: str) -> "BinaryProb":
        """Parse a 'NUM/DEN' string such as '3/10'."""
        num, sep, den = text.partition("/")
        if not sep:
            raise ValueError(f"expected NUM/DEN, got {text!r}")
        return cls(int(num), int(den))

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    @property
    def complement(self) -> Fraction:
        """Probability of symbol 0."""
        return Fraction(self.den - self.num, self.den)

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def uabs_symbol(x: int, p: BinaryProb, variant: UabsVariant = UabsVariant.CEILING) -> int:
    """Symbol spread at position x: 1 where the cumulative 1-count jumps.

    Total over x >= 0.  Over any window {0..N-1} the number of 1s is
    ceil(N*p) for the ceiling rule and floor(N*p) for the floor rule.
    """
    if x < 0:
        raise ValueError("position must be nonnegative")
    num, den = p.num, p.den
    if variant is UabsVariant.CEILING:
        return _ceil_div((x + 1) * num, den) - _ceil_div(x * num, den)
    return ((x + 1) * num) // den - (x * num) // den


def uabs_decode(
    x: int, p: BinaryProb, variant: UabsVariant = UabsVariant.CEILING
) -> tuple[int, int]:
    """Pop one symbol from state x, returning (symbol, reduced state)."""
    if x < 1:
        raise ValueError("decodable states start at 1")
    num, den = p.num, p.den
    if variant is UabsVariant.CEILING:
        x1 = _ceil_div(x * num, den)
    else:
        x1 = (x * num) // den
    s = uabs_symbol(x, p, variant)
    return (1, x1) if s == 1 else (0, x - x1)


def uabs_encode(
    s: int, x: int, p: BinaryProb, variant: UabsVariant = UabsVariant.CEILING
) -> int:
    """Push symbol s onto state x, growing it to roughly x / Pr(s).

    Exact inverse of :func:`uabs_decode`.  Raises StateOverflowError past the
    64-bit machine bound; keep states small with the stream layer.
    """
    if x < 0:
        raise ValueError("state must be nonnegative")
    if s not in (0, 1):
        raise ValueError(f"binary symbol expected, got {s}")
    num, den = p.num, p.den
    if variant is UabsVariant.CEILING:
        if s == 1:
            out = (x * den) // num
        else:
            out = _ceil_div((x + 1) * den, den - num) - 1
    else:
        if s == 1:
            out = _ceil_div((x + 1) * den, num) - 1
        else:
            out = (x * den) // (den - num)
    if out > STATE_BOUND:
        raise StateOverflowError(f"state {out} exceeds the 64-bit bound")
    return out


def uabs_inaccuracy(
    x: int, p: BinaryProb, variant: UabsVariant = UabsVariant.CEILING
) -> Fraction:
    """Exact deviation x_s/x - p_s of the symbol density at state x.

    The magnitude is always below 1/x.
    """
    s, xs = uabs_decode(x, p, variant)
    ps = p.fraction if s == 1 else p.complement
    return Fraction(xs, x) - ps


@dataclass(frozen=True)
class UabsCodec:
    """Adapter exposing the uABS formulas through the generic codec interface."""

    p: BinaryProb
    variant: UabsVariant = UabsVariant.CEILING

    n_symbols = 2

    def encode(self, s: int, x: int) -> int:
        return uabs_encode(s, x, self.p, self.variant)

    def decode(self, x: int) -> tuple[int, int]:
        return uabs_decode(x, self.p, self.variant)
