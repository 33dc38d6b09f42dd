"""Range-variant ANS (rABS/rANS) for arbitrary alphabets.

Symbols occupy contiguous runs of length l_s inside a cycle of length
m = sum(l_s); the coding formulas are one integer division and one multiply
per step.  Density deviations are bounded by m/x, so direct use favours
large states; the stream functions below renormalize into a fixed interval
whose bound is a multiple of m.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .stream import DigitStack, StreamConfig
from .uabs import STATE_BOUND, StateOverflowError

__all__ = [
    "QuantizedDist",
    "InaccuracyBoundReport",
    "rans_encode",
    "rans_decode",
    "rans_inaccuracy",
    "audit_inaccuracy",
    "rans_stream_config",
    "rans_stream_encode",
    "rans_stream_decode",
]


@dataclass(frozen=True)
class QuantizedDist:
    """Alphabet with integer frequencies l_s >= 1 over a cycle of length m.

    Derived fields: total m, cumulative offsets, and the cycle position to
    symbol lookup table.
    """

    freqs: tuple[int, ...]
    total: int = field(repr=False, compare=False, default=0)
    cumul: tuple[int, ...] = field(repr=False, compare=False, default=())
    symbol_of: tuple[int, ...] = field(repr=False, compare=False, default=())

    def __init__(self, freqs: Iterable[int]):
        freqs = tuple(int(f) for f in freqs)
        if not freqs:
            raise ValueError("alphabet must not be empty")
        if any(f < 1 for f in freqs):
            raise ValueError("every frequency must be at least 1")
        object.__setattr__(self, "freqs", freqs)
        cumul = []
        acc = 0
        for f in freqs:
            cumul.append(acc)
            acc += f
        object.__setattr__(self, "total", acc)
        object.__setattr__(self, "cumul", tuple(cumul))
        table = []
        for s, f in enumerate(freqs):
            table.extend([s] * f)
        object.__setattr__(self, "symbol_of", tuple(table))

    @property
    def n(self) -> int:
        return len(self.freqs)

    def prob(self, s: int) -> Fraction:
        return Fraction(self.freqs[s], self.total)


def rans_encode(s: int, x: int, d: QuantizedDist) -> int:
    """Map x to the x-th state carrying symbol s inside the frequency cycle."""
    if x < 0:
        raise ValueError("state must be nonnegative")
    ls = d.freqs[s]
    out = d.total * (x // ls) + d.cumul[s] + x % ls
    if out > STATE_BOUND:
        raise StateOverflowError(f"state {out} exceeds the 64-bit bound")
    return out


def rans_decode(x: int, d: QuantizedDist) -> tuple[int, int]:
    """Inverse of rans_encode: (symbol at cycle position, appearance index)."""
    if x < 0:
        raise ValueError("state must be nonnegative")
    m = d.total
    r = x % m
    s = d.symbol_of[r]
    return s, d.freqs[s] * (x // m) + r - d.cumul[s]


def rans_inaccuracy(x: int, d: QuantizedDist) -> Fraction:
    """Exact density deviation x_s/x - p_s at state x; magnitude below m/x."""
    if x < 1:
        raise ValueError("state must be positive")
    s, xs = rans_decode(x, d)
    return Fraction(xs, x) - d.prob(s)


@dataclass(frozen=True)
class InaccuracyBoundReport:
    """Worst observed deviation against its per-state bound m/x."""

    state: int
    max_abs_epsilon: Fraction
    bound: Fraction


def audit_inaccuracy(states: Iterable[int], d: QuantizedDist) -> InaccuracyBoundReport:
    """Scan states for the tightest deviation relative to m/x.

    Returns the report at the state maximizing |eps(x)| * x, i.e. where the
    bound has the least slack.
    """
    worst_x = None
    worst_margin = None
    for x in states:
        margin = abs(rans_inaccuracy(x, d)) * x
        if worst_margin is None or margin > worst_margin:
            worst_margin = margin
            worst_x = x
    if worst_x is None:
        raise ValueError("no states supplied")
    return InaccuracyBoundReport(
        state=worst_x,
        max_abs_epsilon=abs(rans_inaccuracy(worst_x, d)),
        bound=Fraction(d.total, worst_x),
    )


def rans_stream_config(d: QuantizedDist, digit_bits: int = 16) -> StreamConfig:
    """Practical streaming interval: l = m * 2**digit_bits, base 2**digit_bits.

    m divides l by construction and renormalization moves whole digits of
    digit_bits bits.
    """
    return StreamConfig(d.total << digit_bits, 1 << digit_bits)


def _stream_scale(d: QuantizedDist, cfg: StreamConfig) -> int:
    if cfg.l % d.total:
        raise ValueError(
            f"interval bound {cfg.l} is not a multiple of the cycle length {d.total}"
        )
    if cfg.b & (cfg.b - 1):
        raise ValueError("stream digit base must be a power of two")
    return cfg.l // d.total


def rans_stream_encode(
    symbols: Sequence[int],
    d: QuantizedDist,
    cfg: StreamConfig,
    *,
    initial_state: int | None = None,
    visited: list[int] | None = None,
) -> tuple[int, DigitStack]:
    """Stream-encode symbols in the given order, keeping the state inside I.

    Decoding pops symbols back last-in first-out, so callers wanting forward
    decode order should feed the sequence reversed.  Returns the final state
    and the digit stack.
    """
    scale = _stream_scale(d, cfg)
    b = cfg.b
    m = d.total
    freqs = d.freqs
    cumul = d.cumul
    limits = [b * scale * f for f in freqs]
    out = DigitStack(b)
    push = out.push
    x = cfg.l if initial_state is None else initial_state
    if not cfg.contains(x):
        raise ValueError("initial state outside the interval")
    for s in symbols:
        limit = limits[s]
        while x >= limit:
            push(x % b)
            x //= b
        f = freqs[s]
        x = m * (x // f) + cumul[s] + x % f
        if visited is not None:
            visited.append(x)
    return x, out


def rans_stream_decode(
    state: int,
    digits,
    count: int,
    d: QuantizedDist,
    cfg: StreamConfig,
    *,
    visited: list[int] | None = None,
) -> list[int]:
    """Pop count symbols starting from the encoder's final state.

    digits is any pop()-able digit source in LIFO order.  Emits symbols in
    reverse encode order and ends on the encoder's initial state.
    """
    _stream_scale(d, cfg)
    b = cfg.b
    l = cfg.l
    m = d.total
    freqs = d.freqs
    cumul = d.cumul
    symbol_of = d.symbol_of
    x = state
    if not cfg.contains(x):
        raise ValueError("state outside the interval")
    out = []
    for _ in range(count):
        if visited is not None:
            visited.append(x)
        r = x % m
        s = symbol_of[r]
        x = freqs[s] * (x // m) + r - cumul[s]
        out.append(s)
        while x < l:
            x = x * b + digits.pop()
    return out
