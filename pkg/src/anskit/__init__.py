"""Asymmetric-numeral-systems entropy coding toolkit.

Exact-arithmetic binary coding (uabs), range coding for arbitrary alphabets
(rans), the shared renormalization stream framework (stream), table-driven
coding with spread searches (tans), automaton analysis (analysis), keyed
table generation (keyed), and a file-compressor CLI with a fixed container
format (cli).
"""

from .analysis import (
    AutomatonSpec,
    EntropyReport,
    StationaryDist,
    delta_H,
    emit_csv,
    entropy_bits,
    inverse_x_fit,
    kl_distance,
    rans_bound,
    simulate,
    stationary_distribution,
    tans_bound,
    uabs_bound,
)
from .cli import Model, compress, decompress, quantize
from .keyed import STRENGTH_UNLIMITED, KeySchedule, keyed_init, keyspace_size
from .rans import (
    InaccuracyBoundReport,
    QuantizedDist,
    audit_inaccuracy,
    rans_decode,
    rans_encode,
    rans_inaccuracy,
    rans_stream_config,
    rans_stream_decode,
    rans_stream_encode,
)
from .stream import (
    Codec,
    DigitStack,
    DigitUnderflowError,
    IntervalError,
    StreamConfig,
    SymbolRanges,
    bit_count_table,
    check_b_unique,
    check_uabs_condition,
    compute_symbol_ranges,
    decode_multi,
    encode_multi,
    stream_decode_step,
    stream_encode_step,
)
from .tans import (
    DecodingTable,
    EncodingTable,
    QabsResult,
    SearchBudgetError,
    SearchResult,
    SpreadFunction,
    TableCodec,
    build_tables,
    decode_with_tables,
    encode_with_tables,
    exhaustive_search,
    low_prob_coder,
    precise_init,
    qabs_family,
    qabs_spread,
    spread_from_codec,
)
from .uabs import (
    STATE_BOUND,
    BinaryProb,
    StateOverflowError,
    UabsCodec,
    UabsVariant,
    uabs_decode,
    uabs_encode,
    uabs_inaccuracy,
    uabs_symbol,
)

__version__ = "0.1.0"
