"""Keyed spread generation: a fixed deterministic bit generator perturbs the
target-position construction so each key selects its own coding table.

The generator is part of the format contract: any implementation deriving a
table from the same key bytes must reproduce the same spread bit for bit.
Swapping in a vetted cryptographic generator behind the same interface is
possible, but the reference algorithm below defines the test vectors.  No
security claim is made for the reference generator itself.

Extension hook: deliberately slow key-to-table derivation (to tax brute-force
key search) can be added by wrapping KeySchedule construction; the perturbation
logic is agnostic to how the seed was produced.
"""

from __future__ import annotations

from fractions import Fraction

from .rans import QuantizedDist
from .stream import StreamConfig
from .tans import CandidateQueue, SpreadFunction, _spread_loop

__all__ = [
    "STRENGTH_UNLIMITED",
    "KeySchedule",
    "keyed_init",
    "keyspace_size",
]

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_GOLDEN = 0x9E3779B97F4A7C15

# Sentinel for an uncapped swap budget.
STRENGTH_UNLIMITED = _MASK64


class KeySchedule:
    """Deterministic decision-bit stream derived from key bytes.

    The key folds into 64 bits by seed = seed * 0x100000001B3 XOR byte; the
    seed then drives a splitmix64 sequence and every output word is consumed
    most-significant bit first.
    """

    __slots__ = ("_state", "_word", "_bits_left")

    def __init__(self, key: bytes):
        seed = _FNV_OFFSET
        for byte in key:
            seed = ((seed * _FNV_PRIME) & _MASK64) ^ byte
        self._state = seed
        self._word = 0
        self._bits_left = 0

    def next_word(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_bit(self) -> int:
        if self._bits_left == 0:
            self._word = self.next_word()
            self._bits_left = 64
        self._bits_left -= 1
        return (self._word >> self._bits_left) & 1


def keyed_init(
    d: QuantizedDist, cfg: StreamConfig, key: bytes, strength: int
) -> SpreadFunction:
    """Key-perturbed spread construction.

    Runs the target-position loop; with strength > 0, each undecided
    placement draws one generator bit whenever two candidates are pending.
    A clear bit keeps the top candidate; a set bit swaps the top two, placing
    the runner-up now and the displaced candidate at the very next state, so
    no placement moves more than one position.  At most `strength` swaps are
    spent per window of l placements (STRENGTH_UNLIMITED lifts the cap).
    Strength 0 reproduces the unperturbed construction exactly and consumes
    no generator output.
    """
    if strength < 0:
        raise ValueError("strength must be nonnegative")
    if strength == 0:
        return _spread_loop(d, cfg)
    schedule = KeySchedule(bytes(key))
    l = cfg.l
    state: dict = {"window": -1, "budget": 0, "held": None}

    def choose(queue: CandidateQueue, step: int) -> tuple[Fraction, int]:
        window = step // l
        if window != state["window"]:
            state["window"] = window
            state["budget"] = strength
        if state["held"] is not None:
            held = state["held"]
            state["held"] = None
            return held
        first = queue.getmin()
        if not len(queue):
            return first
        bit = schedule.next_bit()
        if bit and state["budget"] > 0:
            state["budget"] -= 1
            second = queue.getmin()
            state["held"] = first
            return second
        return first

    return _spread_loop(d, cfg, choose)


def keyspace_size(cfg: StreamConfig) -> int:
    """Count of binary perturbation patterns, 2**(l*(b-1)), as an exact integer."""
    return 1 << (cfg.l * (cfg.b - 1))
