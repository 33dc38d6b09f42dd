"""Finite-state stream framework shared by every coder variant.

A coder keeps its state inside the interval I = {l .. b*l-1}.  Before encoding
symbol s the state is shrunk into the symbol's pre-image interval I_s by
moving least-significant base-b digits to a LIFO stack; decoding pops them
back.  Intervals of the shape {k .. b*k-1} are "b-unique": any positive
integer reaches them by a unique sequence of digit insertions or removals,
which is what makes the transfer loops invertible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

from .uabs import BinaryProb

__all__ = [
    "DigitUnderflowError",
    "IntervalError",
    "StreamConfig",
    "DigitStack",
    "SymbolRanges",
    "Codec",
    "compute_symbol_ranges",
    "check_b_unique",
    "check_uabs_condition",
    "digit_count",
    "transfer_rule",
    "bit_count_table",
    "stream_encode_step",
    "stream_decode_step",
    "encode_multi",
    "decode_multi",
]


class DigitUnderflowError(ValueError):
    """The decoder asked for more digits than the stream holds."""


class IntervalError(ValueError):
    """A symbol pre-image interval is unusable for stream coding."""


@dataclass(frozen=True)
class StreamConfig:
    """Operating interval I = {l .. b*l-1} with digit base b."""

    l: int
    b: int = 2

    def __post_init__(self) -> None:
        if self.l < 1:
            raise ValueError("interval bound l must be positive")
        if self.b < 2:
            raise ValueError("digit base must be at least 2")

    @property
    def lo(self) -> int:
        return self.l

    @property
    def hi(self) -> int:
        return self.b * self.l - 1

    @property
    def size(self) -> int:
        return (self.b - 1) * self.l

    def states(self) -> range:
        return range(self.l, self.b * self.l)

    def contains(self, x: int) -> bool:
        return self.l <= x < self.b * self.l

    @property
    def digit_bits(self) -> int:
        """Bits per digit; defined for power-of-two bases only."""
        if self.b & (self.b - 1):
            raise ValueError("digit base is not a power of two")
        return self.b.bit_length() - 1


class Codec(Protocol):
    """Single-step encode/decode pair over unbounded states."""

    n_symbols: int

    def encode(self, s: int, x: int) -> int: ...

    def decode(self, x: int) -> tuple[int, int]: ...


class DigitStack:
    """LIFO buffer of base-b digits.

    The encoder pushes digits least-significant first; popping returns them in
    exact reverse order, which is the order the decoder needs to rebuild
    states most-significant digit first.
    """

    __slots__ = ("base", "_digits")

    def __init__(self, base: int = 2, digits: Iterable[int] = ()):
        if base < 2:
            raise ValueError("digit base must be at least 2")
        self.base = base
        self._digits = list(digits)
        for d in self._digits:
            if not 0 <= d < base:
                raise ValueError(f"digit {d} out of range for base {base}")

    def push(self, digit: int) -> None:
        if not 0 <= digit < self.base:
            raise ValueError(f"digit {digit} out of range for base {self.base}")
        self._digits.append(digit)

    def push_block(self, value: int, count: int) -> None:
        """Push the count least-significant digits of value, low digit first."""
        base = self.base
        digits = self._digits
        for _ in range(count):
            value, r = divmod(value, base)
            digits.append(r)
        if value:
            raise ValueError("value does not fit in the given digit count")

    def pop(self) -> int:
        if not self._digits:
            raise DigitUnderflowError("digit stack exhausted")
        return self._digits.pop()

    def __len__(self) -> int:
        return len(self._digits)

    def __bool__(self) -> bool:
        return bool(self._digits)

    @property
    def digits(self) -> tuple[int, ...]:
        """Digits in production order (oldest first)."""
        return tuple(self._digits)

    @property
    def digit_bits(self) -> int:
        if self.base & (self.base - 1):
            raise ValueError("bit length is defined for power-of-two bases only")
        return self.base.bit_length() - 1

    @property
    def bit_length(self) -> int:
        """Total payload size in bits (power-of-two bases)."""
        return len(self._digits) * self.digit_bits


@dataclass(frozen=True)
class SymbolRanges:
    """Per-symbol pre-image intervals I_s, stored as inclusive (lower, upper)."""

    bounds: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.bounds)

    def lower(self, s: int) -> int:
        return self.bounds[s][0]

    def upper(self, s: int) -> int:
        return self.bounds[s][1]

    def size(self, s: int) -> int:
        lo, hi = self.bounds[s]
        return hi - lo + 1


def compute_symbol_ranges(codec: Codec, cfg: StreamConfig) -> SymbolRanges:
    """Find each I_s = {x : encode(s, x) in I} by decoding every state of I.

    Cost is proportional to |I|, so this is meant for table-sized intervals.
    Raises IntervalError when some I_s is empty or not contiguous.
    """
    n = codec.n_symbols
    lo = [None] * n
    hi = [None] * n
    count = [0] * n
    for x in cfg.states():
        s, xs = codec.decode(x)
        if not 0 <= s < n:
            raise IntervalError(f"decoded symbol {s} outside alphabet of size {n}")
        if lo[s] is None or xs < lo[s]:
            lo[s] = xs
        if hi[s] is None or xs > hi[s]:
            hi[s] = xs
        count[s] += 1
    bounds = []
    for s in range(n):
        if lo[s] is None:
            raise IntervalError(f"symbol {s} never appears in the interval")
        if count[s] != hi[s] - lo[s] + 1:
            raise IntervalError(f"pre-image of symbol {s} is not contiguous")
        bounds.append((lo[s], hi[s]))
    return SymbolRanges(tuple(bounds))


def check_b_unique(ranges: SymbolRanges, b: int) -> tuple[bool, ...]:
    """True per symbol iff I_s has the b-unique shape {k .. b*k-1}."""
    return tuple(hi == b * lo - 1 for lo, hi in ranges.bounds)


def check_uabs_condition(p: BinaryProb, cfg: StreamConfig) -> bool:
    """Exact validity test for stream uABS on (p, l, b).

    Holds iff b*ceil(l*p) == ceil(b*l*p); in particular whenever l*p is an
    integer.  Equivalent to both symbol pre-images being b-unique for the
    ceiling rule, provided each symbol claims at least one slot below l
    (a probability within 1/l of an endpoint starves the other symbol and
    never streams, so that corner reports False).
    """
    num, den = p.num, p.den
    lp_ceil = -((-cfg.l * num) // den)
    if not 1 <= lp_ceil <= cfg.l - 1:
        return False
    blp_ceil = -((-cfg.b * cfg.l * num) // den)
    return cfg.b * lp_ceil == blp_ceil


def digit_count(x: int, lower: int, b: int) -> int:
    """Number of base-b digits to strip from x to land in {lower .. b*lower-1}."""
    if lower < 1:
        raise ValueError("interval lower bound must be positive")
    if x < lower:
        raise ValueError("state below the target interval")
    k = 0
    limit = lower * b
    while x >= limit:
        k += 1
        limit *= b
    return k


def transfer_rule(ranges: SymbolRanges, cfg: StreamConfig) -> list[tuple[int, int]]:
    """Per-symbol (k_s, X_s): transfer k_s digits from states >= X_s, else k_s - 1.

    k_s is the digit count at the top state of I and X_s = lower_s * b**k_s
    the first state needing the larger count.
    """
    rule = []
    for s in range(len(ranges)):
        ks = digit_count(cfg.hi, ranges.lower(s), cfg.b)
        rule.append((ks, ranges.lower(s) * cfg.b**ks))
    return rule


def bit_count_table(codec: Codec, ranges: SymbolRanges, cfg: StreamConfig) -> list[list[int]]:
    """Digit counts per (symbol, state in I), indexed [s][x - l]."""
    rule = transfer_rule(ranges, cfg)
    table = []
    for s in range(len(ranges)):
        ks, xs = rule[s]
        table.append([ks - (x < xs) for x in cfg.states()])
    return table


def stream_encode_step(
    s: int, x: int, codec: Codec, ranges: SymbolRanges, out: DigitStack
) -> int:
    """Transfer digits until x fits I_s, then apply the codec; returns the new state.

    The whole block of k digits is extracted in one mask/divide instead of a
    digit-by-digit loop; the stack contents are identical either way.
    """
    b = out.base
    k = digit_count(x, ranges.lower(s), b)
    if k:
        scale = b**k
        out.push_block(x % scale, k)
        x //= scale
    return codec.encode(s, x)


def stream_decode_step(x: int, codec: Codec, cfg: StreamConfig, src) -> tuple[int, int]:
    """Pop one symbol, then pull digits until the state is back in I.

    src is anything with a pop() yielding digits in LIFO order.  Exactly
    inverts the latest stream_encode_step.
    """
    s, xs = codec.decode(x)
    b = cfg.b
    l = cfg.l
    while xs < l:
        xs = xs * b + src.pop()
    return s, xs


def _prepared(codecs: Sequence[Codec], cfg: StreamConfig) -> list[SymbolRanges]:
    cache: dict[int, SymbolRanges] = {}
    prepared = []
    for codec in codecs:
        other = getattr(codec, "cfg", None)
        if other is not None and other != cfg:
            raise ValueError("codec was built for a different stream interval")
        key = id(codec)
        if key not in cache:
            ranges = compute_symbol_ranges(codec, cfg)
            flags = check_b_unique(ranges, cfg.b)
            if not all(flags):
                bad = [s for s, ok in enumerate(flags) if not ok]
                raise IntervalError(f"symbol pre-images {bad} are not {cfg.b}-unique")
            cache[key] = ranges
        prepared.append(cache[key])
    return prepared


def encode_multi(
    symbols: Sequence[int],
    codecs: Sequence[Codec],
    cfg: StreamConfig,
    out: DigitStack,
    initial_state: int | None = None,
) -> int:
    """Encode symbols[i] with codecs[i] over a shared interval; returns the final state.

    Decoding runs the codec sequence in reverse, so callers that want forward
    decode order should feed symbols and codecs already reversed.
    """
    if len(symbols) != len(codecs):
        raise ValueError("one codec per symbol required")
    prepared = _prepared(codecs, cfg)
    x = cfg.l if initial_state is None else initial_state
    if not cfg.contains(x):
        raise ValueError("initial state outside the interval")
    for s, codec, ranges in zip(symbols, codecs, prepared):
        x = stream_encode_step(s, x, codec, ranges, out)
    return x


def decode_multi(
    state: int,
    codecs: Sequence[Codec],
    cfg: StreamConfig,
    src,
) -> list[int]:
    """Pop one symbol per codec, in the order given; inverse of encode_multi
    when handed the encoder's codec sequence reversed."""
    _prepared(codecs, cfg)
    x = state
    if not cfg.contains(x):
        raise ValueError("state outside the interval")
    out = []
    for codec in codecs:
        s, x = stream_decode_step(x, codec, cfg, src)
        out.append(s)
    return out
