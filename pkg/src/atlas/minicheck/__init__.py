"""Desk-scale property checking over cycle traces and bounded FSM reachability."""

from atlas.minicheck.check import (
    FAILS, HOLDS, INCONCLUSIVE, VACUOUS, VERDICTS, VerificationOutcome, eval_cover, eval_property,
)
from atlas.minicheck.reach import ReachResult, bounded_reach
from atlas.minicheck.sva import (
    SvaProperty, parse_sva_expr, parse_sva_seq, parse_sva_subset, render_expr, render_property,
)
from atlas.minicheck.trace import X, Trace, load_trace, parse_trace_csv

__all__ = [
    "FAILS", "HOLDS", "INCONCLUSIVE", "VACUOUS", "VERDICTS", "VerificationOutcome", "eval_cover",
    "eval_property", "ReachResult", "bounded_reach", "SvaProperty", "parse_sva_expr", "parse_sva_seq",
    "parse_sva_subset", "render_expr", "render_property", "X", "Trace", "load_trace", "parse_trace_csv",
]
