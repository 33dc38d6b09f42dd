"""Coding-automaton analysis: stationary laws, redundancy, bounds, CSV reports.

Redundancy is measured the operational way: solve the automaton's stationary
state distribution, take the expected digits per symbol, and subtract the
source entropy.  The distribution-mismatch form of the same quantity is
exposed separately as kl_distance.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable, Mapping, Sequence

import numpy as np

from .rans import QuantizedDist
from .stream import Codec, StreamConfig, compute_symbol_ranges, transfer_rule
from .uabs import BinaryProb

__all__ = [
    "AutomatonSpec",
    "StationaryDist",
    "EntropyReport",
    "KLResult",
    "InverseXFit",
    "SimulationResult",
    "entropy_bits",
    "stationary_distribution",
    "batch_stationary",
    "batch_transition_matrices",
    "batch_stationary_from_matrices",
    "delta_H",
    "kl_distance",
    "uabs_bound",
    "rans_bound",
    "tans_bound",
    "inverse_x_fit",
    "emit_csv",
    "simulate",
]


def entropy_bits(probs: Sequence[float]) -> float:
    """Shannon entropy in bits per symbol."""
    h = 0.0
    for p in probs:
        p = float(p)
        if p < 0:
            raise ValueError("probabilities must be nonnegative")
        if p:
            h -= p * math.log2(p)
    return h


@dataclass(frozen=True, eq=False)
class AutomatonSpec:
    """Transition system of a stream coder over I = {l .. b*l-1}.

    next_slots[s, j] is the slot (state minus l) reached from state l+j on
    symbol s, digit_counts[s, j] the digits emitted on the way.  The decode
    arrays, when present, give the symbol carried by each state and its
    appearance index, which is what the per-state inaccuracy is measured on.
    """

    cfg: StreamConfig
    probs: tuple[float, ...]
    next_slots: np.ndarray
    digit_counts: np.ndarray
    decode_symbols: np.ndarray | None = None
    decode_positions: np.ndarray | None = None

    @property
    def n_states(self) -> int:
        return self.next_slots.shape[1]

    @property
    def n_symbols(self) -> int:
        return self.next_slots.shape[0]

    def states(self) -> range:
        return self.cfg.states()

    @classmethod
    def from_encoding_table(cls, enc, probs: Sequence[float] | None = None) -> "AutomatonSpec":
        """Build the transition system of a table coder.

        probs default to the table's own frequencies counts/l.
        """
        cfg = enc.cfg
        b, l = cfg.b, cfg.l
        size = cfg.size
        n = enc.n
        if probs is None:
            probs = tuple(c / l for c in enc.counts)
        else:
            probs = tuple(float(p) for p in probs)
        if len(probs) != n or abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError("need one probability per symbol, summing to 1")
        states = np.arange(l, b * l, dtype=np.int64)
        next_slots = np.empty((n, size), dtype=np.int64)
        digit_counts = np.empty((n, size), dtype=np.int64)
        decode_symbols = np.empty(size, dtype=np.int64)
        decode_positions = np.empty(size, dtype=np.int64)
        for s in range(n):
            k = np.full(size, enc.k[s], dtype=np.int64)
            k -= states < enc.threshold[s]
            reduced = states // b**k
            table = np.asarray(enc.next_states[s], dtype=np.int64)
            next_slots[s] = table[reduced - enc.counts[s]] - l
            digit_counts[s] = k
            decode_symbols[table - l] = s
            decode_positions[table - l] = np.arange(
                enc.counts[s], b * enc.counts[s], dtype=np.int64
            )
        return cls(cfg, probs, next_slots, digit_counts, decode_symbols, decode_positions)

    @classmethod
    def from_codec(
        cls, codec: Codec, cfg: StreamConfig, probs: Sequence[float]
    ) -> "AutomatonSpec":
        """Build the transition system of a formula codec; O(|I|) per symbol."""
        ranges = compute_symbol_ranges(codec, cfg)
        rule = transfer_rule(ranges, cfg)
        n = codec.n_symbols
        probs = tuple(float(p) for p in probs)
        if len(probs) != n or abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError("need one probability per symbol, summing to 1")
        size = cfg.size
        b, l = cfg.b, cfg.l
        next_slots = np.empty((n, size), dtype=np.int64)
        digit_counts = np.empty((n, size), dtype=np.int64)
        decode_symbols = np.empty(size, dtype=np.int64)
        decode_positions = np.empty(size, dtype=np.int64)
        for j, x in enumerate(cfg.states()):
            s, xs = codec.decode(x)
            decode_symbols[j] = s
            decode_positions[j] = xs
            for t in range(n):
                ks, thr = rule[t]
                k = ks - (x < thr)
                nxt = codec.encode(t, x // b**k)
                if not cfg.contains(nxt):
                    raise ValueError("codec leaves the interval; pre-images unusable")
                next_slots[t, j] = nxt - l
                digit_counts[t, j] = k
        return cls(cfg, probs, next_slots, digit_counts, decode_symbols, decode_positions)


@dataclass(frozen=True, eq=False)
class StationaryDist:
    """Long-run state occupation law with the final iteration delta."""

    cfg: StreamConfig
    probs: np.ndarray
    residual: float
    iterations: int
    reducible: bool

    def prob(self, state: int) -> float:
        return float(self.probs[state - self.cfg.l])

    def as_dict(self) -> dict[int, float]:
        return {x: float(p) for x, p in zip(self.cfg.states(), self.probs)}


def _reachable_mask(next_slots: np.ndarray, start: int = 0) -> np.ndarray:
    size = next_slots.shape[1]
    mask = np.zeros(size, dtype=bool)
    frontier = np.array([start])
    mask[start] = True
    while frontier.size:
        nxt = np.unique(next_slots[:, frontier])
        fresh = nxt[~mask[nxt]]
        mask[fresh] = True
        frontier = fresh
    return mask


def _power_iteration(
    next_slots: np.ndarray,
    probs: np.ndarray,
    tol: float,
    max_iter: int,
    start_mask: np.ndarray | None = None,
) -> tuple[np.ndarray, float, int]:
    """Fixed point of the transition operator from a uniform start.

    A damping factor of 0.99 is mixed in only once the residual stops
    shrinking, which breaks periodic oscillation without biasing the result.
    """
    n, size = next_slots.shape
    flat = next_slots.reshape(-1)
    if start_mask is None:
        pi = np.full(size, 1.0 / size)
    else:
        pi = np.where(start_mask, 1.0, 0.0)
        pi /= pi.sum()
    damped = False
    history: list[float] = []
    residual = math.inf
    for it in range(1, max_iter + 1):
        contrib = (pi[None, :] * probs[:, None]).reshape(-1)
        nxt = np.bincount(flat, weights=contrib, minlength=size)
        if damped:
            nxt = 0.99 * nxt + 0.01 * pi
        total = nxt.sum()
        if total <= 0:
            raise RuntimeError("probability mass vanished during iteration")
        nxt /= total
        residual = float(np.max(np.abs(nxt - pi)))
        pi = nxt
        if residual < tol:
            return pi, residual, it
        history.append(residual)
        if not damped and it >= 64 and it % 32 == 0:
            if history[-1] > 0.5 * history[-33]:
                damped = True
    raise RuntimeError(
        f"stationary distribution did not converge below {tol} in {max_iter} iterations"
    )


def stationary_distribution(
    a: AutomatonSpec, tol: float = 1e-12, max_iter: int = 100_000
) -> StationaryDist:
    """Power-iterate the automaton's transition operator until the update
    delta falls below tol.

    When part of I is unreachable from the bottom state l, the chain is
    reducible: the iteration is then restricted to the reachable set and the
    result flagged.  Mass settles on the recurrent class inside it.
    """
    probs = np.asarray(a.probs, dtype=np.float64)
    mask = _reachable_mask(a.next_slots, start=0)
    reducible = not mask.all()
    start = mask if reducible else None
    pi, residual, iterations = _power_iteration(
        a.next_slots, probs, tol, max_iter, start_mask=start
    )
    return StationaryDist(a.cfg, pi, residual, iterations, reducible)


def batch_transition_matrices(next_slots: np.ndarray) -> np.ndarray:
    """One-hot transition tensors T[i, s, x, y] = 1 iff next(y, s) == x."""
    batch, n, size = next_slots.shape
    eye = np.eye(size)
    # eye[next] has the one-hot along the last axis, indexed [i, s, y, hot]
    return eye[next_slots].transpose(0, 1, 3, 2)


def batch_stationary_from_matrices(
    tmat: np.ndarray, next_slots: np.ndarray, probs: np.ndarray
) -> np.ndarray:
    """Solve the balance equations for a batch of automata sharing probs.

    Falls back to power iteration for rows where the linear solve is
    singular, negative, or out of balance (reducible chains).
    """
    batch, n, size, _ = tmat.shape
    m = np.einsum("s,isxy->ixy", probs, tmat)
    a = m - np.eye(size)
    a[:, 0, :] = 1.0
    rhs = np.zeros((batch, size))
    rhs[:, 0] = 1.0
    try:
        pi = np.linalg.solve(a, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        # retry row by row so one singular chain (two or more recurrent
        # classes) does not push the whole chunk onto the slow path
        pi = np.empty((batch, size))
        for i in range(batch):
            try:
                pi[i] = np.linalg.solve(a[i], rhs[i])
            except np.linalg.LinAlgError:
                pi[i] = np.nan
    balance = np.einsum("ixy,iy->ix", m, pi)
    bad = (
        ~np.isfinite(pi).all(axis=1)
        | (pi.min(axis=1) < -1e-9)
        | (np.abs(balance - pi).max(axis=1) > 1e-9)
        | (np.abs(pi.sum(axis=1) - 1.0) > 1e-9)
    )
    for i in np.nonzero(bad)[0]:
        mask = _reachable_mask(next_slots[i], start=0)
        start = mask if not mask.all() else None
        pi[i], _, _ = _power_iteration(
            next_slots[i], probs, 1e-13, 100_000, start_mask=start
        )
    return pi


def batch_stationary(next_slots: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Stationary laws for a batch of automata given as next-slot tensors."""
    tmat = batch_transition_matrices(next_slots)
    return batch_stationary_from_matrices(tmat, next_slots, probs)


@dataclass(frozen=True, eq=False)
class EntropyReport:
    """Operational rate of an automaton against its source entropy."""

    expected_bits_per_symbol: float
    shannon_entropy: float
    delta_h: float
    stationary: StationaryDist
    inaccuracies: dict[tuple[int, int], float] | None


def delta_H(a: AutomatonSpec, stationary: StationaryDist | None = None) -> EntropyReport:
    """Expected bits per symbol minus the source entropy.

    Expected bits weight each (state, symbol) digit count by the stationary
    law and the symbol probabilities; per-state density deviations are
    attached when the automaton carries its decode map.
    """
    if stationary is None:
        stationary = stationary_distribution(a)
    probs = np.asarray(a.probs, dtype=np.float64)
    digit_bits = math.log2(a.cfg.b)
    per_state = probs @ a.digit_counts.astype(np.float64)
    expected = float(per_state @ stationary.probs) * digit_bits
    h = entropy_bits(a.probs)
    inacc = None
    if a.decode_symbols is not None and a.decode_positions is not None:
        inacc = {}
        for j, x in enumerate(a.states()):
            s = int(a.decode_symbols[j])
            inacc[(s, x)] = float(a.decode_positions[j]) / x - a.probs[s]
    return EntropyReport(
        expected_bits_per_symbol=expected,
        shannon_entropy=h,
        delta_h=expected - h,
        stationary=stationary,
        inaccuracies=inacc,
    )


class KLResult(tuple):
    """Exact mismatch cost in bits with its small-deviation approximation."""

    __slots__ = ()

    def __new__(cls, exact: float, quadratic: float):
        return super().__new__(cls, (exact, quadratic))

    @property
    def exact(self) -> float:
        return self[0]

    @property
    def quadratic(self) -> float:
        return self[1]


def kl_distance(p: Sequence, q: Sequence) -> KLResult:
    """Bits per symbol wasted by coding a p-source at q rates.

    Returns the exact sum p*lg(p/q) plus the quadratic shortcut
    0.72 * sum((q-p)^2 / p).
    """
    if len(p) != len(q):
        raise ValueError("distributions must share an alphabet")
    exact = 0.0
    quad = 0.0
    for ps, qs in zip(p, q):
        ps = float(ps)
        qs = float(qs)
        if ps == 0.0:
            continue
        if qs == 0.0:
            raise ValueError("coder assigns zero mass to a used symbol")
        exact += ps * math.log2(ps / qs)
        quad += (qs - ps) ** 2 / ps
    return KLResult(exact, 0.72 * quad)


def uabs_bound(p: BinaryProb | Fraction | float, l: int) -> float:
    """Redundancy ceiling 1/(l^2 ln 4) * (1/p + 1/(1-p)) for the binary coder."""
    if l < 2:
        raise ValueError("interval bound must be at least 2")
    pf = float(p.fraction) if isinstance(p, BinaryProb) else float(p)
    return (1.0 / pf + 1.0 / (1.0 - pf)) / (l * l * math.log(4.0))


def rans_bound(d: QuantizedDist, l: int) -> float:
    """Range-coder version of the redundancy ceiling, scaled by the cycle length m."""
    if l < 2:
        raise ValueError("interval bound must be at least 2")
    inv = sum(1.0 / float(d.prob(s)) for s in range(d.n))
    return d.total * inv / (l * l * math.log(4.0))


def tans_bound(d: QuantizedDist, l: int) -> float:
    """Redundancy ceiling for spreads built by the target-position heuristic.

    Combines the per-symbol placement slack (p_s / (2 min p) + 1/2) with the
    generic 1/(l^2 ln 4) factor.
    """
    if l < 2:
        raise ValueError("interval bound must be at least 2")
    probs = [float(d.prob(s)) for s in range(d.n)]
    pmin = min(probs)
    acc = 0.0
    for ps in probs:
        slack = ps / (2.0 * pmin) + 0.5
        acc += slack * slack / ps
    return acc / (l * l * math.log(4.0))


@dataclass(frozen=True)
class InverseXFit:
    """Fit of the stationary law against the c/x shape."""

    scale: float
    max_deviation: float


def inverse_x_fit(dist: StationaryDist) -> InverseXFit:
    """Match c/x to the state law by fixing total mass; reports the worst gap."""
    states = np.array(list(dist.cfg.states()), dtype=np.float64)
    c = 1.0 / float(np.sum(1.0 / states))
    dev = float(np.max(np.abs(dist.probs - c / states)))
    return InverseXFit(scale=c, max_deviation=dev)


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, Fraction):
        return str(value)
    return str(value)


def _sort_key(row: Mapping, fields: Sequence[str]):
    key = []
    for f in fields:
        v = row[f]
        if isinstance(v, bool):
            key.append((2, str(v)))
        elif isinstance(v, Real):
            key.append((0, float(v)))
        else:
            key.append((1, str(v)))
    return tuple(key)


def emit_csv(rows: Iterable[Mapping], path, fieldnames: Sequence[str] | None = None) -> None:
    """Write a deterministic CSV: fixed column order, sorted rows, floats at
    12 significant digits.

    fieldnames may be omitted when at least one row is present; an empty row
    set with fieldnames yields a header-only file.
    """
    rows = list(rows)
    if fieldnames is None:
        if not rows:
            raise ValueError("fieldnames are required for an empty report set")
        fieldnames = list(rows[0].keys())
    rows.sort(key=lambda r: _sort_key(r, fieldnames))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_csv_cell(row[f]) for f in fieldnames])


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Empirical state visits and digit cost of a finite random walk."""

    state_counts: np.ndarray
    total_digits: int
    symbols: int
    digit_bits: float

    @property
    def bits_per_symbol(self) -> float:
        return self.total_digits * self.digit_bits / self.symbols

    def frequency(self, slot: int) -> float:
        return float(self.state_counts[slot]) / self.symbols


def simulate(a: AutomatonSpec, n_symbols: int, seed: int = 0) -> SimulationResult:
    """Drive the automaton with seeded i.i.d. symbols and tally state visits."""
    rng = np.random.default_rng(seed)
    draws = rng.choice(a.n_symbols, size=n_symbols, p=np.asarray(a.probs))
    counts = [0] * a.n_states
    nxt = [row.tolist() for row in a.next_slots]
    dig = [row.tolist() for row in a.digit_counts]
    slot = 0
    total = 0
    for s in draws.tolist():
        total += dig[s][slot]
        slot = nxt[s][slot]
        counts[slot] += 1
    return SimulationResult(
        state_counts=np.asarray(counts, dtype=np.int64),
        total_digits=total,
        symbols=n_symbols,
        digit_bits=math.log2(a.cfg.b),
    )
