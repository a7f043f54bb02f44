"""The checker against a separately written evaluator on random traces and subset properties."""

from __future__ import annotations

import random
from collections import Counter

from hypothesis import given, settings
from hypothesis import strategies as st

from atlas.minicheck import Trace, eval_cover, eval_property
from tests.oracles import naive_sva
from tests.oracles.generators import SIGNALS, random_case, random_seq, random_trace

N_CASES = 1500


def _compare(seed: int):
    prop, sig = random_case(random.Random(seed))
    text = naive_sva.render_property(prop)
    out = eval_property(Trace(sig, dict(SIGNALS)), text)
    return (out.verdict, out.cycle, out.start_cycle), naive_sva.evaluate(prop, sig, SIGNALS), text


def test_seeded_cases_agree():
    verdicts = Counter()
    mismatches = []
    for seed in range(N_CASES):
        got, expected, text = _compare(seed)
        verdicts[expected[0]] += 1
        if got != expected:
            mismatches.append((seed, text, got, expected))
    assert mismatches == []
    # every verdict shows up, so the comparison is not dominated by one outcome
    assert min(verdicts[v] for v in ("holds", "fails", "vacuous")) >= N_CASES // 10


@settings(max_examples=400, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_cases_agree(seed):
    got, expected, text = _compare(seed)
    assert got == expected, text


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_covers_agree(seed):
    rng = random.Random(seed)
    seq = random_seq(rng, 3)
    sig = random_trace(rng, rng.randint(6, 12))
    text = naive_sva.render_seq(seq)
    got = eval_cover(Trace(sig, dict(SIGNALS)), text)
    assert got == naive_sva.cover_starts(seq, sig, SIGNALS), text
