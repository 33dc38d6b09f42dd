"""Command-line compressor and analyzer with a bit-exact container format.

Container layout (all integers little-endian):

    magic 'ANS1' | version u8 (=1) | variant u8 | table_log u8 | key_flag u8
    | alphabet_size u16 | freqs: alphabet_size x u16 | message_length u64
    | final_state u64 | payload_bits u64 | payload bytes

variant 0 is the table coder (base-2 digits, l = 2**table_log states),
variant 1 the range coder (16-bit digits, cycle m = 2**table_log, interval
bound m * 2**16), variant 2 the binary coder driven on the bit stream of the
input (base-2 digits, l = 2**table_log).  Frequencies sum to 2**table_log;
symbols absent from the input carry frequency 0 and are excluded from the
coding alphabet.  message_length counts coded symbols, which for variant 2
means bits (8 per input byte, least-significant bit of each byte first).

Encoding walks the input backwards from state l, so decoding starts at the
stored final state, streams the payload forward, and must land back on l.
Digits are recorded in production order and written reversed, packed
least-significant-bit-first within each byte; the tail byte is zero-padded
and payload_bits disambiguates.  Keyed containers (key_flag 1) derive their
table with the keyed schedule at unlimited strength, so the key alone
reproduces the table.
"""

from __future__ import annotations

import argparse
import struct
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import analysis
from .analysis import AutomatonSpec, delta_H, emit_csv, inverse_x_fit
from .keyed import STRENGTH_UNLIMITED, keyed_init
from .rans import QuantizedDist
from .stream import DigitStack, DigitUnderflowError, StreamConfig, check_uabs_condition
from .tans import (
    SearchBudgetError,
    build_tables,
    decode_with_tables,
    encode_with_tables,
    exhaustive_search,
    precise_init,
    qabs_family,
    spread_from_codec,
)
from .uabs import BinaryProb, UabsCodec

__all__ = [
    "ContainerError",
    "ContainerHeader",
    "Model",
    "VARIANT_TANS",
    "VARIANT_RANS",
    "VARIANT_UABS",
    "quantize",
    "build_model",
    "compress",
    "decompress",
    "pack_digits",
    "DigitStreamReader",
    "main",
]

MAGIC = b"ANS1"
VERSION = 1
VARIANT_TANS = 0
VARIANT_RANS = 1
VARIANT_UABS = 2
_VARIANT_NAMES = {"tans": VARIANT_TANS, "rans": VARIANT_RANS, "uabs": VARIANT_UABS}
_RANS_DIGIT_BITS = 16

_HEAD = struct.Struct("<4sBBBBH")
_TAIL = struct.Struct("<QQQ")


class ContainerError(ValueError):
    """Malformed, truncated, or corrupt container data."""


@dataclass(frozen=True)
class ContainerHeader:
    variant: int
    table_log: int
    key_flag: int
    alphabet_size: int
    freqs: tuple[int, ...]
    message_length: int
    final_state: int
    payload_bits: int

    def pack(self) -> bytes:
        head = _HEAD.pack(
            MAGIC, VERSION, self.variant, self.table_log, self.key_flag, self.alphabet_size
        )
        freqs = struct.pack(f"<{self.alphabet_size}H", *self.freqs)
        tail = _TAIL.pack(self.message_length, self.final_state, self.payload_bits)
        return head + freqs + tail

    @classmethod
    def unpack(cls, blob: bytes) -> tuple["ContainerHeader", int]:
        """Parse a header, returning it and the payload offset."""
        try:
            magic, version, variant, table_log, key_flag, alphabet_size = _HEAD.unpack_from(
                blob, 0
            )
            offset = _HEAD.size
            freqs = struct.unpack_from(f"<{alphabet_size}H", blob, offset)
            offset += 2 * alphabet_size
            message_length, final_state, payload_bits = _TAIL.unpack_from(blob, offset)
            offset += _TAIL.size
        except struct.error as exc:
            raise ContainerError(f"truncated or malformed header: {exc}") from None
        if magic != MAGIC:
            raise ContainerError(f"bad magic {magic!r}")
        if version != VERSION:
            raise ContainerError(f"unsupported version {version}")
        if variant not in (VARIANT_TANS, VARIANT_RANS, VARIANT_UABS):
            raise ContainerError(f"unknown variant {variant}")
        if not 1 <= table_log <= 16:
            raise ContainerError(f"table_log {table_log} outside 1..16")
        if key_flag not in (0, 1):
            raise ContainerError(f"bad key flag {key_flag}")
        header = cls(
            variant, table_log, key_flag, alphabet_size, tuple(freqs),
            message_length, final_state, payload_bits,
        )
        if sum(header.freqs) != 1 << table_log:
            raise ContainerError("frequencies do not sum to the table size")
        return header, offset


def quantize(counts, l: int) -> tuple[int, ...]:
    """Scale nonnegative counts to integer frequencies summing exactly to l.

    Largest-remainder rule: start from max(1, floor(l * count / total)) for
    every occurring symbol, then fix a deficit by incrementing the largest
    remainders (ties to the lower symbol index) and an excess by decrementing
    the smallest remainders that stay above 1.  Zero counts stay zero.
    """
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise ValueError("counts must be nonnegative")
    total = sum(counts)
    if total == 0:
        raise ValueError("at least one count must be positive")
    present = [i for i, c in enumerate(counts) if c > 0]
    if len(present) > l:
        raise ValueError(f"{len(present)} distinct symbols exceed {l} table slots")
    freqs = [0] * len(counts)
    remainders = {}
    for i in present:
        exact = Fraction(l * counts[i], total)
        freqs[i] = max(1, int(exact))
        remainders[i] = exact - int(exact)
    excess = sum(freqs) - l
    if excess < 0:
        order = sorted(present, key=lambda i: (-remainders[i], i))
        j = 0
        while excess < 0:
            freqs[order[j % len(order)]] += 1
            excess += 1
            j += 1
    elif excess > 0:
        order = sorted(present, key=lambda i: (remainders[i], i))
        j = 0
        while excess > 0:
            i = order[j % len(order)]
            if freqs[i] > 1:
                freqs[i] -= 1
                excess -= 1
            j += 1
    return tuple(freqs)


@dataclass(frozen=True)
class Model:
    """First-pass symbol statistics and their quantized coding distribution."""

    counts: tuple[int, ...]
    freqs: tuple[int, ...]
    dist: QuantizedDist
    present: tuple[int, ...]

    @property
    def alphabet_size(self) -> int:
        return len(self.freqs)


def build_model(counts, l: int) -> Model:
    """Quantize counts to l slots and compact the occurring symbols."""
    freqs = quantize(counts, l)
    present = tuple(i for i, f in enumerate(freqs) if f > 0)
    dist = QuantizedDist(tuple(freqs[i] for i in present))
    return Model(tuple(int(c) for c in counts), freqs, dist, present)


# ---------------------------------------------------------------------------
# payload packing


def pack_digits(stack: DigitStack) -> tuple[bytes, int]:
    """Write the digit stack reversed into bytes, low bit of each byte first.

    Returns (payload, payload_bits); the final partial byte is zero-padded.
    """
    digit_bits = stack.digit_bits
    out = bytearray()
    acc = 0
    nbits = 0
    for d in reversed(stack.digits):
        acc |= d << nbits
        nbits += digit_bits
        while nbits >= 8:
            out.append(acc & 0xFF)
            acc >>= 8
            nbits -= 8
    if nbits:
        out.append(acc & 0xFF)
    return bytes(out), len(stack) * digit_bits


class DigitStreamReader:
    """Forward reader over a packed payload, popping digits in LIFO order.

    pop() returns exactly the sequence a DigitStack would pop, because the
    writer reversed the digits before packing.
    """

    __slots__ = ("data", "digit_bits", "total_bits", "pos")

    def __init__(self, data: bytes, payload_bits: int, base: int):
        if base < 2 or base & (base - 1):
            raise ValueError("payload base must be a power of two")
        self.data = data
        self.digit_bits = base.bit_length() - 1
        self.total_bits = payload_bits
        self.pos = 0
        if payload_bits > 8 * len(data):
            raise ContainerError("payload shorter than its declared bit count")

    def pop(self) -> int:
        pos = self.pos
        width = self.digit_bits
        if pos + width > self.total_bits:
            raise DigitUnderflowError("payload exhausted")
        data = self.data
        value = 0
        got = 0
        while got < width:
            byte = data[pos >> 3]
            offset = pos & 7
            take = min(8 - offset, width - got)
            value |= ((byte >> offset) & ((1 << take) - 1)) << got
            got += take
            pos += take
        self.pos = pos
        return value

    @property
    def bits_remaining(self) -> int:
        return self.total_bits - self.pos


# ---------------------------------------------------------------------------
# compression paths


def _parse_variant(name_or_code) -> int:
    if isinstance(name_or_code, str):
        try:
            return _VARIANT_NAMES[name_or_code]
        except KeyError:
            raise ValueError(f"unknown variant {name_or_code!r}") from None
    return int(name_or_code)


def _build_spread(dist: QuantizedDist, cfg: StreamConfig, key: bytes | None):
    if key is None:
        return precise_init(dist, cfg)
    return keyed_init(dist, cfg, key, STRENGTH_UNLIMITED)


def _bit_symbols(data: bytes) -> list[int]:
    return np.unpackbits(np.frombuffer(data, np.uint8), bitorder="little").tolist()


def _uabs_freqs(data: bytes, l: int) -> tuple[int, int]:
    ones = int(np.unpackbits(np.frombuffer(data, np.uint8)).sum())
    zeros = 8 * len(data) - ones
    if ones == 0:
        return (l - 1, 1)
    if zeros == 0:
        return (1, l - 1)
    return quantize((zeros, ones), l)  # type: ignore[return-value]


def compress(
    data: bytes,
    variant="tans",
    table_log: int = 12,
    key: bytes | None = None,
) -> bytes:
    """Compress bytes into a self-describing container.

    The model is a static order-0 pass over the input; symbols are encoded
    last to first so the decoder emits them forward.
    """
    code = _parse_variant(variant)
    if not 1 <= table_log <= 16:
        raise ValueError("table_log must lie in 1..16")
    if key is not None and code != VARIANT_TANS:
        raise ValueError("keyed tables are only defined for the tans variant")
    l = 1 << table_log

    if not data:
        initial = l << _RANS_DIGIT_BITS if code == VARIANT_RANS else l
        header = ContainerHeader(code, table_log, int(key is not None), 1, (l,), 0, initial, 0)
        return header.pack()

    if code == VARIANT_UABS:
        freqs = _uabs_freqs(data, l)
        cfg = StreamConfig(l, 2)
        p = BinaryProb(freqs[1], l)
        spread = spread_from_codec(UabsCodec(p), cfg)
        enc, _ = build_tables(spread)
        symbols = _bit_symbols(data)
        symbols.reverse()
        stack = DigitStack(2)
        final = encode_with_tables(symbols, enc, stack)
        payload, nbits = pack_digits(stack)
        header = ContainerHeader(
            code, table_log, 0, 2, freqs, 8 * len(data), final, nbits
        )
        return header.pack() + payload

    counts = np.bincount(np.frombuffer(data, np.uint8), minlength=1)
    model = build_model(counts.tolist(), l)
    if max(model.freqs) > 0xFFFF:
        raise ValueError("a frequency exceeds 16 bits; use a smaller table_log")
    translate = bytearray(256)
    for i, sym in enumerate(model.present):
        translate[sym] = i
    dense = data.translate(bytes(translate))

    if code == VARIANT_TANS:
        cfg = StreamConfig(l, 2)
        spread = _build_spread(model.dist, cfg, key)
        enc, _ = build_tables(spread)
        stack = DigitStack(2)
        final = encode_with_tables(reversed(dense), enc, stack)
    else:
        cfg = StreamConfig(l << _RANS_DIGIT_BITS, 1 << _RANS_DIGIT_BITS)
        final, stack = _rans_encode_bytes(dense, model.dist, cfg)
    payload, nbits = pack_digits(stack)
    header = ContainerHeader(
        code,
        table_log,
        int(key is not None),
        model.alphabet_size,
        model.freqs,
        len(data),
        final,
        nbits,
    )
    return header.pack() + payload


def _rans_encode_bytes(dense: bytes, dist: QuantizedDist, cfg: StreamConfig):
    table_log = dist.total.bit_length() - 1
    freqs = dist.freqs
    cumul = dist.cumul
    limits = [f << (2 * _RANS_DIGIT_BITS) for f in freqs]
    mask = (1 << _RANS_DIGIT_BITS) - 1
    stack = DigitStack(cfg.b)
    push = stack.push
    x = cfg.l
    for s in reversed(dense):
        while x >= limits[s]:
            push(x & mask)
            x >>= _RANS_DIGIT_BITS
        f = freqs[s]
        x = ((x // f) << table_log) + cumul[s] + x % f
    return x, stack


def _rans_decode_bytes(
    header: ContainerHeader, dist: QuantizedDist, reader: DigitStreamReader
) -> bytes:
    table_log = header.table_log
    mask = (1 << table_log) - 1
    l = dist.total << _RANS_DIGIT_BITS
    freqs = dist.freqs
    cumul = dist.cumul
    symbol_of = dist.symbol_of
    pop = reader.pop
    x = header.final_state
    out = bytearray(header.message_length)
    for i in range(header.message_length):
        r = x & mask
        s = symbol_of[r]
        out[i] = s
        x = freqs[s] * (x >> table_log) + r - cumul[s]
        while x < l:
            x = (x << _RANS_DIGIT_BITS) | pop()
    if x != l:
        raise ContainerError("terminal state mismatch; data corrupt or wrong key")
    return bytes(out)


def decompress(blob: bytes, key: bytes | None = None, max_output: int | None = None) -> bytes:
    """Invert compress using only the container header (and key when flagged).

    Verifies the terminal state and full payload consumption; violations
    raise ContainerError.  max_output caps the declared message length as a
    guard against corrupt headers demanding absurd allocations.
    """
    header, offset = ContainerHeader.unpack(blob)
    if header.key_flag and key is None:
        raise ContainerError("container is keyed but no key was given")
    if not header.key_flag and key is not None:
        raise ContainerError("container is not keyed but a key was given")
    if max_output is not None and header.message_length > max_output:
        raise ContainerError(
            f"declared message length {header.message_length} exceeds the cap"
        )
    payload_len = (header.payload_bits + 7) // 8
    payload = blob[offset : offset + payload_len]
    if len(payload) != payload_len:
        raise ContainerError("payload truncated")
    l = 1 << header.table_log
    base = 1 << _RANS_DIGIT_BITS if header.variant == VARIANT_RANS else 2
    initial = l << _RANS_DIGIT_BITS if header.variant == VARIANT_RANS else l
    top = initial * base
    if not initial <= header.final_state < top:
        raise ContainerError("final state outside the coding interval")

    if header.message_length == 0:
        if header.final_state != initial or header.payload_bits:
            raise ContainerError("empty message with nonempty coder trail")
        return b""

    present = tuple(i for i, f in enumerate(header.freqs) if f > 0)
    dist = QuantizedDist(tuple(header.freqs[i] for i in present))
    reader = DigitStreamReader(payload, header.payload_bits, base)

    if header.variant == VARIANT_RANS:
        try:
            dense = _rans_decode_bytes(header, dist, reader)
        except DigitUnderflowError:
            raise ContainerError("payload exhausted; data corrupt or wrong key") from None
        if reader.bits_remaining:
            raise ContainerError("payload bits left over after decoding")
        return dense.translate(bytes(present) + bytes(256 - len(present)))

    cfg = StreamConfig(l, 2)
    if header.variant == VARIANT_UABS:
        if header.alphabet_size != 2 or len(present) != 2:
            raise ContainerError("binary variant requires a two-symbol model")
        if header.message_length % 8:
            raise ContainerError("bit count is not a whole number of bytes")
        p = BinaryProb(header.freqs[1], l)
        spread = spread_from_codec(UabsCodec(p), cfg)
        key_used = None
    else:
        spread = None
        key_used = key if header.key_flag else None
    if spread is None:
        spread = _build_spread(dist, cfg, key_used)
    _, dec = build_tables(spread)
    try:
        symbols, terminal = decode_with_tables(
            header.final_state, header.message_length, dec, reader
        )
    except DigitUnderflowError:
        raise ContainerError("payload exhausted; data corrupt or wrong key") from None
    if terminal != l:
        raise ContainerError("terminal state mismatch; data corrupt or wrong key")
    if reader.bits_remaining:
        raise ContainerError("payload bits left over after decoding")
    if header.variant == VARIANT_UABS:
        packed = np.packbits(np.asarray(symbols, dtype=np.uint8), bitorder="little")
        return packed.tobytes()[: header.message_length // 8]
    table = bytes(present) + bytes(256 - len(present))
    return bytes(symbols).translate(table)


# ---------------------------------------------------------------------------
# subcommands


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _read_key(text: str | None) -> bytes | None:
    if text is None:
        return None
    try:
        return bytes.fromhex(text)
    except ValueError:
        raise ValueError(f"key must be hex, got {text!r}") from None


def _cmd_compress(args) -> int:
    data = _read_input(args.input)
    blob = compress(data, args.variant, args.table_log, _read_key(args.key))
    out = args.output or (args.input + ".ans")
    _write_output(out, blob)
    ratio = 8.0 * len(blob) / len(data) if data else 0.0
    print(f"{len(data)} -> {len(blob)} bytes ({ratio:.4g} bits/symbol incl. header)")
    return 0


def _cmd_decompress(args) -> int:
    blob = _read_input(args.input)
    data = decompress(blob, _read_key(args.key))
    out = args.output or (args.input[:-4] if args.input.endswith(".ans") else args.input + ".out")
    _write_output(out, data)
    print(f"{len(blob)} -> {len(data)} bytes")
    return 0


def _read_input(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _write_output(path: str, blob: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(blob)


def _parse_l_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part]


def _analyze_uabs(args, rows: list[dict]) -> int:
    if not args.p or not args.l:
        raise _UsageError("--uabs needs -p NUM/DEN and -l N")
    p = BinaryProb.parse(args.p)
    for l in _parse_l_list(args.l):
        cfg = StreamConfig(l, 2)
        if not check_uabs_condition(p, cfg):
            raise ValueError(f"stream coding is invalid for p={p} at l={l}")
        auto = AutomatonSpec.from_codec(
            UabsCodec(p), cfg, (float(p.complement), float(p.fraction))
        )
        report = delta_H(auto)
        bound = analysis.uabs_bound(p, l)
        rows.append(
            {
                "variant": "uabs",
                "p": float(p.fraction),
                "l": l,
                "delta_H": report.delta_h,
                "bound": bound,
                "expected_bits": report.expected_bits_per_symbol,
                "entropy": report.shannon_entropy,
            }
        )
        print(
            f"uabs p={p} l={l}: bits/symbol={report.expected_bits_per_symbol:.12g} "
            f"H={report.shannon_entropy:.12g} delta_H={report.delta_h:.12g} "
            f"bound={bound:.12g}"
        )
        if args.stationary_csv:
            fit = inverse_x_fit(report.stationary)
            st_rows = [
                {"state": x, "prob": report.stationary.prob(x), "c_over_x": fit.scale / x}
                for x in cfg.states()
            ]
            emit_csv(st_rows, args.stationary_csv, ["state", "prob", "c_over_x"])
    return 0


def _analyze_tans(args, rows: list[dict]) -> int:
    if not args.freqs:
        raise _UsageError("--tans needs --freqs")
    counts = [int(v) for v in args.freqs.split(",")]
    l = int(args.l) if args.l else sum(counts)
    freqs = quantize(counts, l)
    dist = QuantizedDist(tuple(f for f in freqs if f))
    cfg = StreamConfig(l, 2)
    spread = precise_init(dist, cfg)
    enc, _ = build_tables(spread)
    report = delta_H(AutomatonSpec.from_encoding_table(enc))
    bound = analysis.tans_bound(dist, l)
    rows.append(
        {
            "variant": "tans",
            "freqs": "/".join(map(str, dist.freqs)),
            "l": l,
            "delta_H": report.delta_h,
            "bound": bound,
            "expected_bits": report.expected_bits_per_symbol,
            "entropy": report.shannon_entropy,
        }
    )
    print(
        f"tans freqs=({','.join(map(str, dist.freqs))}) l={l}: "
        f"bits/symbol={report.expected_bits_per_symbol:.12g} "
        f"H={report.shannon_entropy:.12g} delta_H={report.delta_h:.12g} bound={bound:.12g}"
    )
    if args.exhaustive:
        result = exhaustive_search(dist, cfg, budget=args.budget)
        matches = abs(result.delta_h - report.delta_h) <= 1e-9
        print(
            f"exhaustive: enumerated={result.enumerated} min delta_H={result.delta_h:.12g} "
            f"optima={result.optima} heuristic_attains_min={'yes' if matches else 'no'}"
        )
        rows.append(
            {
                "variant": "tans-exhaustive",
                "freqs": "/".join(map(str, dist.freqs)),
                "l": l,
                "delta_H": result.delta_h,
                "bound": bound,
                "expected_bits": result.delta_h + report.shannon_entropy,
                "entropy": report.shannon_entropy,
            }
        )
    return 0


def _analyze_qabs(args, rows: list[dict]) -> int:
    step = args.p_step
    grid = [round(step * k, 10) for k in range(1, int(round(1.0 / step)))]
    result = qabs_family(args.states, grid, budget=args.budget)
    print(
        f"qabs states={args.states}: spreads={len(result.masks)} "
        f"envelope_curves={len(result.envelope)}"
    )
    for idx in result.envelope:
        mask = int(result.masks[idx])
        for p, dh in zip(result.p_grid, result.curves[idx]):
            rows.append({"spread_id": mask, "p": float(p), "delta_H": float(dh)})
    return 0


def _cmd_analyze(args) -> int:
    rows: list[dict] = []
    if args.uabs:
        status = _analyze_uabs(args, rows)
    elif args.tans:
        status = _analyze_tans(args, rows)
    elif args.qabs:
        status = _analyze_qabs(args, rows)
    else:
        raise _UsageError("pick one of --uabs, --tans, --qabs")
    if args.csv and rows:
        emit_csv(rows, args.csv, list(rows[0].keys()))
        print(f"wrote {len(rows)} rows to {args.csv}")
    return status


def _cmd_table_gen(args) -> int:
    counts = [int(v) for v in args.freqs.split(",")]
    l = int(args.l) if args.l else sum(counts)
    freqs = quantize(counts, l)
    dist = QuantizedDist(tuple(f for f in freqs if f))
    cfg = StreamConfig(l, args.b)
    key = _read_key(args.key)
    if key is None:
        spread = precise_init(dist, cfg)
    else:
        spread = keyed_init(dist, cfg, key, args.strength)
    text = spread.dump()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {cfg.size} table entries to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_bench(args) -> int:
    rng = np.random.default_rng(args.seed)
    weights = 1.0 / np.arange(1, 257)
    weights /= weights.sum()
    data = rng.choice(256, size=args.size, p=weights).astype(np.uint8).tobytes()
    t0 = time.perf_counter()
    blob = compress(data, args.variant, args.table_log)
    t1 = time.perf_counter()
    out = decompress(blob)
    t2 = time.perf_counter()
    if out != data:
        raise RuntimeError("bench round trip failed")
    mb = args.size / 1e6
    print(
        f"{args.variant} table_log={args.table_log} size={args.size}: "
        f"encode {mb / (t1 - t0):.2f} MB/s, decode {mb / (t2 - t1):.2f} MB/s, "
        f"{8 * len(blob) / args.size:.4f} bits/byte"
    )
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="anskit", description="ANS entropy-coding toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compress", help="compress a file")
    c.add_argument("input")
    c.add_argument("-o", "--output")
    c.add_argument("--variant", choices=sorted(_VARIANT_NAMES), default="tans")
    c.add_argument("--table-log", type=int, default=12, dest="table_log")
    c.add_argument("--key", help="hex key for keyed table generation")
    c.set_defaults(func=_cmd_compress)

    d = sub.add_parser("decompress", help="decompress a container")
    d.add_argument("input")
    d.add_argument("-o", "--output")
    d.add_argument("--key", help="hex key for keyed containers")
    d.set_defaults(func=_cmd_decompress)

    a = sub.add_parser("analyze", help="redundancy analysis and sweeps")
    mode = a.add_mutually_exclusive_group(required=True)
    mode.add_argument("--uabs", action="store_true")
    mode.add_argument("--tans", action="store_true")
    mode.add_argument("--qabs", action="store_true")
    a.add_argument("-p", help="binary probability NUM/DEN")
    a.add_argument("-l", help="interval bound, or comma list for sweeps")
    a.add_argument("--freqs", help="comma-separated integer frequencies")
    a.add_argument("--states", type=int, default=16)
    a.add_argument("--p-step", type=float, default=0.01, dest="p_step")
    a.add_argument("--exhaustive", action="store_true")
    a.add_argument("--budget", type=int, default=10**6)
    a.add_argument("--csv", help="write sweep rows to this path")
    a.add_argument("--stationary-csv", dest="stationary_csv")
    a.set_defaults(func=_cmd_analyze)

    t = sub.add_parser("table-gen", help="dump a spread table")
    t.add_argument("--freqs", required=True)
    t.add_argument("-l")
    t.add_argument("--b", type=int, default=2)
    t.add_argument("--key")
    t.add_argument("--strength", type=int, default=STRENGTH_UNLIMITED)
    t.add_argument("--out")
    t.set_defaults(func=_cmd_table_gen)

    b = sub.add_parser("bench", help="throughput measurement")
    b.add_argument("--variant", choices=sorted(_VARIANT_NAMES), default="tans")
    b.add_argument("--table-log", type=int, default=12, dest="table_log")
    b.add_argument("--size", type=int, default=1_000_000)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ContainerError as exc:
        print(f"container error: {exc}", file=sys.stderr)
        return 2
    except SearchBudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
