"""LDPC decoding with neighborhood-reliability scheduling, plus a
Monte-Carlo harness and a computation-tree deviation oracle."""

from .tanner import (
    TannerGraph,
    AlistError,
    GraphError,
    parse_alist,
    serialize_alist,
    load_alist,
    save_alist,
    from_dense,
    neighborhood,
    has_4cycle,
    count_4cycles,
    random_graph,
    random_tree_graph,
)
from .channel import ChannelConfig, transmit_all_zero, frame_rng
from .reliability import (
    CheckHardInfo,
    ReliabilityView,
    compute_hard_info,
    f_prime,
    f_bar,
    build_reliability_view,
    order_checks,
    REAL_F,
    INTEGER_FBAR,
    SERIAL,
    FIXED,
    VARIABLE,
)
from .decoder import (
    LLR_CAP,
    MINSUM,
    SPA,
    check_kernel_minsum,
    check_kernel_spa,
    DecoderState,
    DecodeOutcome,
    ScheduleTrace,
    TraceIteration,
    decode_flooding,
    decode_serial,
    decode_nr,
    export_trace,
    parse_trace,
)
from .oracle import (
    ComputationTree,
    MinimalDeviation,
    TreeCapError,
    build_tree,
    count_minimal_deviations,
    enumerate_minimal_deviations,
    check_eq1,
    check_proposition,
    deviation_report,
)

__version__ = "0.1.0"
