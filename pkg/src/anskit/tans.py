"""Table-driven ANS: spread construction, coding tables, and spread searches.

A spread assigns one symbol to every state of I = {l .. b*l-1}; enumerating
each symbol's appearances from l_s upward yields the encode table, and the
inverse map plus digit counts yields the decode table.  Construction quality
decides how far the coder lands from the entropy limit, so alongside the
deterministic target-position heuristic this module offers an exhaustive
spread search, small fixed binary automata families, and a dedicated coder
for very rare symbols.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .rans import QuantizedDist
from .stream import DigitStack, IntervalError, StreamConfig, digit_count
from .stream import Codec, check_b_unique, compute_symbol_ranges

__all__ = [
    "SearchBudgetError",
    "SpreadFunction",
    "CandidateQueue",
    "EncodingTable",
    "DecodingTable",
    "TableCodec",
    "precise_init",
    "spread_from_codec",
    "build_tables",
    "encode_with_tables",
    "decode_with_tables",
    "spread_count",
    "iter_spreads",
    "exhaustive_search",
    "SearchResult",
    "qabs_family",
    "QabsResult",
    "qabs_spread",
    "low_prob_coder",
]


class SearchBudgetError(RuntimeError):
    """A spread enumeration would exceed the configured budget."""


@dataclass(frozen=True)
class SpreadFunction:
    """Symbol assignment over the states of I.

    counts[s] is the enumeration base l_s; symbol s must appear exactly
    (b-1)*l_s times and sum(counts) must equal l.  Violations raise at
    construction, so every spread in circulation is valid.
    """

    cfg: StreamConfig
    counts: tuple[int, ...]
    symbols: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        self.validate()

    def validate(self) -> None:
        cfg = self.cfg
        if any(c < 1 for c in self.counts):
            raise ValueError("every symbol needs at least one enumeration slot")
        if sum(self.counts) != cfg.l:
            raise ValueError("enumeration bases must sum to the interval bound l")
        if len(self.symbols) != cfg.size:
            raise ValueError("spread must assign a symbol to every state of I")
        seen = [0] * len(self.counts)
        for s in self.symbols:
            if not 0 <= s < len(self.counts):
                raise ValueError(f"symbol {s} outside the alphabet")
            seen[s] += 1
        expect = [(cfg.b - 1) * c for c in self.counts]
        if seen != expect:
            raise ValueError(f"appearance counts {seen} do not match {expect}")

    @property
    def n(self) -> int:
        return len(self.counts)

    def dump(self) -> str:
        """Table dump: header 'l b n l_0 .. l_{n-1}', then 'x symbol' lines."""
        head = f"{self.cfg.l} {self.cfg.b} {self.n} " + " ".join(map(str, self.counts))
        lines = [head]
        for x, s in zip(self.cfg.states(), self.symbols):
            lines.append(f"{x} {s}")
        return "\n".join(lines) + "\n"


class CandidateQueue:
    """Priority queue of (target position, symbol) pairs.

    getmin returns the smallest position; on equal positions the rarer symbol
    (smaller frequency) wins, and equal frequencies fall to the larger symbol
    index.  Positions are exact rationals so the order never depends on
    floating point.
    """

    def __init__(self, freqs: Sequence[int]):
        self._freqs = tuple(freqs)
        self._heap: list[tuple[Fraction, int, int, int]] = []

    def put(self, v: Fraction, s: int) -> None:
        heapq.heappush(self._heap, (v, self._freqs[s], -s, s))

    def getmin(self) -> tuple[Fraction, int]:
        if not self._heap:
            raise IndexError("queue is empty")
        v, _, _, s = heapq.heappop(self._heap)
        return v, s

    def __len__(self) -> int:
        return len(self._heap)


def _spread_loop(
    d: QuantizedDist,
    cfg: StreamConfig,
    choose: Callable[[CandidateQueue, int], tuple[Fraction, int]] | None = None,
) -> SpreadFunction:
    if d.total != cfg.l:
        raise ValueError(
            f"frequencies sum to {d.total} but the interval bound is {cfg.l}"
        )
    l = cfg.l
    queue = CandidateQueue(d.freqs)
    for s, ls in enumerate(d.freqs):
        queue.put(Fraction(l, 2 * ls), s)
    # Each symbol owns a finite target set matching its appearance budget;
    # an exhausted symbol leaves the queue, which keeps perturbed runs valid
    # and never alters the unperturbed order.
    budget = [(cfg.b - 1) * ls for ls in d.freqs]
    symbols = []
    for step in range(cfg.size):
        if choose is None:
            v, s = queue.getmin()
        else:
            v, s = choose(queue, step)
        budget[s] -= 1
        if budget[s] > 0:
            queue.put(v + Fraction(l, d.freqs[s]), s)
        symbols.append(s)
    return SpreadFunction(cfg, d.freqs, tuple(symbols))


def precise_init(d: QuantizedDist, cfg: StreamConfig) -> SpreadFunction:
    """Spread symbols near their ideal positions (2i+1)/(2 p_s).

    Walks the states of I in order, each time placing the symbol whose next
    target position is smallest; heap cost is log(n) per state.  Requires the
    frequencies to sum exactly to l.
    """
    return _spread_loop(d, cfg)


def spread_from_codec(codec: Codec, cfg: StreamConfig) -> SpreadFunction:
    """Extract the spread a formula codec induces on I.

    Every symbol pre-image must be b-unique and the appearance enumeration
    consecutive from l_s; both are verified by decoding each state.
    """
    ranges = compute_symbol_ranges(codec, cfg)
    flags = check_b_unique(ranges, cfg.b)
    if not all(flags):
        bad = [s for s, ok in enumerate(flags) if not ok]
        raise IntervalError(f"symbol pre-images {bad} are not {cfg.b}-unique")
    counts = tuple(ranges.lower(s) for s in range(len(ranges)))
    if sum(counts) != cfg.l:
        raise IntervalError("pre-image bounds do not partition the interval")
    expect = list(counts)
    symbols = []
    for x in cfg.states():
        s, xs = codec.decode(x)
        if xs != expect[s]:
            raise IntervalError("appearance enumeration is not consecutive")
        expect[s] += 1
        symbols.append(s)
    return SpreadFunction(cfg, counts, tuple(symbols))


@dataclass(frozen=True)
class EncodingTable:
    """Per symbol: digit-count rule (k_s, X_s) and appearance positions.

    next_states[s][x' - l_s] is the state of I where the x'-th appearance of
    s sits; encoding transfers k_s digits from states >= X_s and k_s - 1
    below, then jumps there.
    """

    cfg: StreamConfig
    counts: tuple[int, ...]
    k: tuple[int, ...]
    threshold: tuple[int, ...]
    next_states: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.counts)

    def digit_count(self, s: int, x: int) -> int:
        return self.k[s] - (x < self.threshold[s])

    def step(self, s: int, x: int, out: DigitStack) -> int:
        k = self.k[s] - (x < self.threshold[s])
        if k:
            scale = self.cfg.b**k
            out.push_block(x % scale, k)
            x //= scale
        return self.next_states[s][x - self.counts[s]]


@dataclass(frozen=True)
class DecodingTable:
    """Per state of I: emitted symbol, minimal digit pull, and the new base.

    The next state is new_base * b**digits + pulled digits; when b does not
    divide l one extra digit may follow, so decoding pulls until the state is
    back in I.
    """

    cfg: StreamConfig
    symbols: tuple[int, ...]
    new_base: tuple[int, ...]
    digit_counts: tuple[int, ...]


class TableCodec:
    """Codec view of a table pair, for the generic stream machinery."""

    def __init__(self, enc: EncodingTable, dec: DecodingTable):
        if enc.cfg != dec.cfg:
            raise ValueError("table pair built for different intervals")
        self.enc = enc
        self.dec = dec
        self.cfg = enc.cfg
        self.n_symbols = enc.n

    def encode(self, s: int, x: int) -> int:
        lo = self.enc.counts[s]
        if not lo <= x < self.cfg.b * lo:
            raise ValueError(f"state {x} outside the pre-image of symbol {s}")
        return self.enc.next_states[s][x - lo]

    def decode(self, x: int) -> tuple[int, int]:
        i = x - self.cfg.l
        return self.dec.symbols[i], self.dec.new_base[i]


def build_tables(
    spread: SpreadFunction, cfg: StreamConfig | None = None
) -> tuple[EncodingTable, DecodingTable]:
    """Materialize the mutually inverse encode/decode tables of a spread."""
    if cfg is not None and cfg != spread.cfg:
        raise ValueError("spread was built for a different interval")
    cfg = spread.cfg
    l, b = cfg.l, cfg.b
    counts = spread.counts
    n = spread.n
    k = tuple(digit_count(cfg.hi, counts[s], b) for s in range(n))
    threshold = tuple(counts[s] * b ** k[s] for s in range(n))
    nexts: list[list[int]] = [[0] * ((b - 1) * counts[s]) for s in range(n)]
    seen = [0] * n
    new_base = [0] * cfg.size
    digit_counts = [0] * cfg.size
    for j, s in enumerate(spread.symbols):
        xs = counts[s] + seen[s]
        seen[s] += 1
        nexts[s][xs - counts[s]] = l + j
        new_base[j] = xs
        kk = 0
        t = xs
        while t < l:
            t *= b
            kk += 1
        digit_counts[j] = kk
    enc = EncodingTable(cfg, counts, k, threshold, tuple(tuple(v) for v in nexts))
    dec = DecodingTable(cfg, spread.symbols, tuple(new_base), tuple(digit_counts))
    return enc, dec


def encode_with_tables(
    symbols,
    enc: EncodingTable,
    out: DigitStack,
    initial_state: int | None = None,
    visited: list[int] | None = None,
) -> int:
    """Run the table encoder over a symbol iterable; returns the final state.

    Symbols are consumed in the order given, so feed the sequence reversed if
    the decoder should produce them forward.
    """
    cfg = enc.cfg
    x = cfg.l if initial_state is None else initial_state
    if not cfg.contains(x):
        raise ValueError("initial state outside the interval")
    kk = enc.k
    thr = enc.threshold
    low = enc.counts
    tabs = enc.next_states
    push_block = out.push_block
    if cfg.b == 2:
        for s in symbols:
            k = kk[s] - (x < thr[s])
            push_block(x & ((1 << k) - 1), k)
            x = tabs[s][(x >> k) - low[s]]
            if visited is not None:
                visited.append(x)
    else:
        b = cfg.b
        for s in symbols:
            k = kk[s] - (x < thr[s])
            if k:
                scale = b**k
                push_block(x % scale, k)
                x //= scale
            x = tabs[s][x - low[s]]
            if visited is not None:
                visited.append(x)
    return x


def decode_with_tables(
    state: int,
    count: int,
    dec: DecodingTable,
    src,
    visited: list[int] | None = None,
) -> tuple[list[int], int]:
    """Pop count symbols from the decoder table; returns (symbols, final state).

    src is any pop()-able digit source.  Symbols come out in reverse encode
    order; the final state equals the encoder's initial state on intact
    streams.
    """
    cfg = dec.cfg
    l = cfg.l
    x = state
    if not cfg.contains(x):
        raise ValueError("state outside the interval")
    syms = dec.symbols
    base = dec.new_base
    out: list[int] = []
    append = out.append
    pop = src.pop
    if cfg.b == 2:
        for _ in range(count):
            i = x - l
            append(syms[i])
            x = base[i]
            while x < l:
                x = (x << 1) | pop()
            if visited is not None:
                visited.append(x)
    else:
        b = cfg.b
        for _ in range(count):
            i = x - l
            append(syms[i])
            x = base[i]
            while x < l:
                x = x * b + pop()
            if visited is not None:
                visited.append(x)
    return out, x


# ---------------------------------------------------------------------------
# spread-space searches


def spread_count(d: QuantizedDist, cfg: StreamConfig) -> int:
    """Number of distinct spreads: multinomial of the appearance counts."""
    if d.total != cfg.l:
        raise ValueError(
            f"frequencies sum to {d.total} but the interval bound is {cfg.l}"
        )
    total = cfg.size
    out = math.factorial(total)
    for ls in d.freqs:
        out //= math.factorial((cfg.b - 1) * ls)
    return out


def iter_spreads(d: QuantizedDist, cfg: StreamConfig) -> Iterator[list[int]]:
    """All distinct spreads in lexicographic order (shared list, copy to keep)."""
    seq = []
    for s, ls in enumerate(d.freqs):
        seq.extend([s] * ((cfg.b - 1) * ls))
    size = len(seq)
    while True:
        yield seq
        i = size - 2
        while i >= 0 and seq[i] >= seq[i + 1]:
            i -= 1
        if i < 0:
            return
        j = size - 1
        while seq[j] <= seq[i]:
            j -= 1
        seq[i], seq[j] = seq[j], seq[i]
        seq[i + 1 :] = reversed(seq[i + 1 :])


def _transition_index(d: QuantizedDist, cfg: StreamConfig) -> tuple[np.ndarray, np.ndarray]:
    """Spread-independent parts of the transition law.

    Returns (idx, digits): idx[s, j] is the appearance index (offset into the
    symbol's group) reached from state l+j, digits[s, j] the digits emitted.
    Only the appearance order varies between spreads.
    """
    l, b = cfg.l, cfg.b
    n = d.n
    idx = np.empty((n, cfg.size), dtype=np.int64)
    digs = np.empty((n, cfg.size), dtype=np.int64)
    for s, ls in enumerate(d.freqs):
        ks = digit_count(cfg.hi, ls, b)
        xs_threshold = ls * b**ks
        for j, x in enumerate(cfg.states()):
            k = ks - (x < xs_threshold)
            idx[s, j] = x // b**k - ls
            digs[s, j] = k
    return idx, digs


@dataclass(frozen=True)
class SearchResult:
    best: SpreadFunction
    delta_h: float
    optima: int
    enumerated: int


def exhaustive_search(
    d: QuantizedDist,
    cfg: StreamConfig,
    source_probs: Sequence[float] | None = None,
    budget: int = 10**6,
    tie_tol: float = 1e-12,
) -> SearchResult:
    """Score every spread and return the redundancy minimum.

    Each spread's coding automaton is solved for its stationary law and the
    expected digits per symbol; the result carries the best spread, its
    redundancy against the source probabilities (frequencies by default), and
    how many spreads tie with the minimum within tie_tol.
    """
    from .analysis import batch_stationary, entropy_bits

    total = spread_count(d, cfg)
    if total > budget:
        raise SearchBudgetError(f"{total} spreads exceed the budget of {budget}")
    n = d.n
    size = cfg.size
    if source_probs is None:
        probs = np.array([f / d.total for f in d.freqs], dtype=np.float64)
    else:
        probs = np.asarray([float(p) for p in source_probs], dtype=np.float64)
        if len(probs) != n:
            raise ValueError("one source probability per symbol required")

    spreads = np.empty((total, size), dtype=np.int8)
    enumerated = 0
    for seq in iter_spreads(d, cfg):
        spreads[enumerated] = seq
        enumerated += 1
    assert enumerated == total

    idx, digs = _transition_index(d, cfg)
    group_start = np.zeros(n, dtype=np.int64)
    app = [(cfg.b - 1) * f for f in d.freqs]
    group_start[1:] = np.cumsum(app)[:-1]
    flat_idx = (group_start[:, None] + idx).reshape(-1)

    # digits depend on (symbol, state) only, never on the spread
    weight = (probs @ digs) * math.log2(cfg.b)
    h = entropy_bits(probs)

    perm = np.argsort(spreads, axis=1, kind="stable")
    delta = np.empty(total, dtype=np.float64)
    chunk = max(1, 2**22 // (size * size))
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        next_slots = perm[lo:hi, flat_idx].reshape(hi - lo, n, size)
        pi = batch_stationary(next_slots, probs)
        delta[lo:hi] = pi @ weight - h

    best_idx = int(np.argmin(delta))
    best_val = float(delta[best_idx])
    optima = int(np.count_nonzero(delta <= best_val + tie_tol))
    best = SpreadFunction(cfg, d.freqs, tuple(int(v) for v in spreads[best_idx]))
    return SearchResult(best=best, delta_h=best_val, optima=optima, enumerated=enumerated)


@dataclass(frozen=True)
class QabsResult:
    """Redundancy curves for every binary spread over a small state set.

    masks[i] encodes spread i (bit j is the symbol at state l+j); curves[i, k]
    is its redundancy at p_grid[k].  envelope holds one representative per
    distinct curve that is lowest somewhere on the grid within the canonical
    half-family (symbol 0 strictly more frequent); label-swapped twins mirror
    those curves onto the other half of the probability axis.  envelope_full
    is the same construction without the restriction.
    """

    state_count: int
    masks: np.ndarray
    p_grid: np.ndarray
    curves: np.ndarray
    envelope: tuple[int, ...]
    envelope_full: tuple[int, ...]


def qabs_spread(state_count: int, mask: int) -> SpreadFunction:
    """Materialize the spread a mask denotes (bit j = symbol at state l+j)."""
    l = state_count
    symbols = tuple((mask >> j) & 1 for j in range(l))
    ones = sum(symbols)
    return SpreadFunction(StreamConfig(l, 2), (l - ones, ones), symbols)


def qabs_family(
    state_count: int,
    p_grid: Sequence[float],
    budget: int = 10**6,
    tie_tol: float = 1e-12,
    curve_tol: float = 1e-9,
) -> QabsResult:
    """Sweep every binary spread of a small automaton across a probability grid.

    For each spread with both symbols present the redundancy curve over
    p_grid is computed; the envelope collects one representative per distinct
    curve that is minimal for at least one grid point.
    """
    from .analysis import batch_stationary_from_matrices, batch_transition_matrices

    l = int(state_count)
    if not 2 <= l <= 16:
        raise ValueError("state count must be between 2 and 16")
    n_spreads = 2**l - 2
    if n_spreads > budget:
        raise SearchBudgetError(f"{n_spreads} spreads exceed the budget of {budget}")
    pg = np.asarray([float(p) for p in p_grid], dtype=np.float64)
    if pg.size == 0 or np.any(pg <= 0.0) or np.any(pg >= 1.0):
        raise ValueError("grid probabilities must lie strictly inside (0, 1)")

    masks = np.arange(1, 2**l - 1, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(l)) & 1
    ones = bits.sum(axis=1)
    curves = np.empty((n_spreads, pg.size), dtype=np.float64)
    h_grid = -(pg * np.log2(pg) + (1.0 - pg) * np.log2(1.0 - pg))

    cfg = StreamConfig(l, 2)
    for l1 in range(1, l):
        sel = np.nonzero(ones == l1)[0]
        if sel.size == 0:
            continue
        d = QuantizedDist((l - l1, l1))
        idx, digs = _transition_index(d, cfg)
        group_start = np.array([0, l - l1], dtype=np.int64)
        flat_idx = (group_start[:, None] + idx).reshape(-1)
        perm = np.argsort(bits[sel], axis=1, kind="stable")
        chunk = max(1, 2**21 // (l * l))
        for lo in range(0, sel.size, chunk):
            hi = min(lo + chunk, sel.size)
            next_slots = perm[lo:hi, flat_idx].reshape(hi - lo, 2, l)
            tmat = batch_transition_matrices(next_slots)
            for kp, p1 in enumerate(pg):
                probs = np.array([1.0 - p1, p1])
                pi = batch_stationary_from_matrices(tmat, next_slots, probs)
                weight = probs @ digs
                curves[sel[lo:hi], kp] = pi @ weight - h_grid[kp]

    # lowest curve per grid point, deduplicated by curve identity
    def lower_envelope(indices: np.ndarray) -> tuple[int, ...]:
        if indices.size == 0:
            return ()
        winners: list[int] = []
        sub = curves[indices]
        for kp in range(pg.size):
            col = sub[:, kp]
            winners.append(int(indices[int(np.argmax(col <= col.min() + tie_tol))]))
        reps: list[int] = []
        for i in sorted(set(winners)):
            if all(np.max(np.abs(curves[i] - curves[r])) > curve_tol for r in reps):
                reps.append(i)
        return tuple(reps)

    all_indices = np.arange(n_spreads)
    return QabsResult(
        state_count=l,
        masks=masks,
        p_grid=pg,
        curves=curves,
        envelope=lower_envelope(all_indices[2 * ones < l]),
        envelope_full=lower_envelope(all_indices),
    )


def low_prob_coder(p) -> tuple[SpreadFunction, StreamConfig]:
    """Cheap automaton for a rare symbol of probability p < 0.05.

    Uses l = round(0.5/p) states: the frequent symbol walks the state up by
    one, the rare symbol dumps all but the top digit of the state and jumps
    to the last state.
    """
    pf = Fraction(p) if not isinstance(p, Fraction) else p
    if not 0 < pf < Fraction(1, 20):
        raise ValueError("rare-symbol coder expects 0 < p < 0.05")
    l = round(Fraction(1, 2) / pf)
    cfg = StreamConfig(int(l), 2)
    symbols = (0,) * (cfg.l - 1) + (1,)
    return SpreadFunction(cfg, (cfg.l - 1, 1), symbols), cfg
