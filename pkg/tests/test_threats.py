from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atlas.assets import detect_assets
from atlas.errors import EmptyTmdb
from atlas.knowledge import ThreatModelRecord, Tmdb, build_keyword_index
from atlas.rtl import driver_map, extract_fsms, parse_rtl, symbol_table
from atlas.threats import CweHit, build_soc_threat_model, map_asset_to_cwes, rank_hits, score_cwe, title_index
from tests.oracles import naive_rank

FSM_QUERY = ["fsm", "finite state machine", "state", "control flow", "transition", "deadlock"]


def _record(cwe_id, keywords):
    return ThreatModelRecord(cwe_id, f"weakness {cwe_id}", ("SimpleHardware",), "a", "b", "c", "d",
                             keywords=tuple(keywords))


def _tmdb(spec: dict[int, tuple]) -> Tmdb:
    return Tmdb({k: _record(k, v) for k, v in spec.items()}, version="t")


@pytest.fixture(scope="module")
def soc_model(assets5_source, tmdb, index, defs):
    mod = parse_rtl(assets5_source).module()
    syms = symbol_table(mod)
    fsms = extract_fsms(mod)
    assets = detect_assets(syms, defs, fsms, driver_map(mod, syms))
    return build_soc_threat_model(assets, tmdb, index, design="soc_assets", fsms=fsms)


# -- score_cwe ---------------------------------------------------------------------


def test_fsm_score_against_1245(tmdb, index):
    score, matched = score_cwe(FSM_QUERY, tmdb.get(1245), index)
    assert score >= 3.0
    assert {"fsm", "transition"} <= matched


def test_empty_query_scores_zero(tmdb, index):
    assert score_cwe([], tmdb.get(1245), index) == (0.0, frozenset())


@pytest.mark.parametrize("query, expected", [
    (["finite state machine"], 2.0),
    (["fsm"], 1.0),
    (["machine"], 1.0),
    (["FSM", "fsm "], 1.0),
    (["deadlock"], 0.0),
])
def test_phrase_and_token_weights(query, expected):
    db = _tmdb({1: ("fsm", "finite state machine")})
    score, _ = score_cwe(query, db.get(1), build_keyword_index(db))
    assert score == expected


# -- map_asset_to_cwes --------------------------------------------------------------


def test_fsm_query_finds_1245(tmdb, index):
    assert 1245 in [h.cwe_id for h in map_asset_to_cwes(FSM_QUERY, tmdb, index, top_k=3)]


def test_no_match_is_empty(tmdb, index):
    assert map_asset_to_cwes(["zzz_nothing"], tmdb, index) == []


def test_empty_tmdb():
    db = Tmdb({}, "empty")
    with pytest.raises(EmptyTmdb):
        map_asset_to_cwes(["fsm"], db, build_keyword_index(db))


def test_top_k_must_be_positive(tmdb, index):
    with pytest.raises(ValueError):
        map_asset_to_cwes(["fsm"], tmdb, index, top_k=0)


def test_tie_at_boundary_keeps_one_extra():
    db = _tmdb({10: ("a", "b"), 11: ("a", "b"), 12: ("a",), 13: ("a",), 14: ("c",)})
    hits = map_asset_to_cwes(["a", "b"], db, build_keyword_index(db), top_k=3)
    assert [(h.cwe_id, h.score) for h in hits] == [(10, 2.0), (11, 2.0), (12, 1.0), (13, 1.0)]


def test_no_tie_no_extra():
    db = _tmdb({10: ("a", "b"), 11: ("a",)})
    assert [h.cwe_id for h in map_asset_to_cwes(["a", "b"], db, build_keyword_index(db), top_k=1)] == [10]


def test_rank_hits_drops_zero_scores():
    hits = [CweHit(2, 0.0, frozenset()), CweHit(1, 1.0, frozenset({"x"}))]
    assert [h.cwe_id for h in rank_hits(hits, 3)] == [1]


# -- SoC threat model ----------------------------------------------------------------


def test_five_asset_model(soc_model):
    assert len(soc_model.entries) == 5
    assert sum(1 for e in soc_model.entries if e.hits) >= 4


def test_fsm_asset_maps_to_1245(soc_model):
    assert 1245 in [h.cwe_id for h in soc_model.signal_hits("state_q")]


def test_empty_assets(tmdb, index):
    m = build_soc_threat_model([], tmdb, index, design="none")
    assert m.entries == () and m.tmdb_version == tmdb.version


def test_model_is_deterministic(soc_model, assets5_source, tmdb, index, defs):
    mod = parse_rtl(assets5_source).module()
    fsms = extract_fsms(mod)
    syms = symbol_table(mod)
    assets = detect_assets(list(reversed(syms)), defs, fsms, driver_map(mod, syms))
    again = build_soc_threat_model(assets, tmdb, index, design="soc_assets", fsms=fsms)
    assert again.to_dict() == soc_model.to_dict()


def test_hits_have_titles(soc_model):
    for e in soc_model.entries:
        for h in e.to_dict()["hits"]:
            assert h["title"]


def test_title_index_is_narrower(tmdb, index):
    titles = title_index(tmdb)
    assert len(titles.entries) > 0
    for kw, ids in titles.entries.items():
        for i in ids:
            assert kw.split()[0] in tmdb.get(i).title.lower().replace("-", " ")
    assert titles.source.endswith(":titles")


# -- properties against the brute-force oracle ----------------------------------------

_words = st.sampled_from(["fsm", "state", "key", "secret", "debug", "lock", "reset", "finite state machine",
                          "debug mode", "secret key", "bus", "clock"])
_records = st.dictionaries(st.integers(1, 2000), st.lists(_words, min_size=1, max_size=4, unique=True),
                           min_size=1, max_size=10)
_query = st.lists(_words, max_size=6, unique=True)


@settings(max_examples=300, deadline=None)
@given(_records, _query, st.integers(1, 5))
def test_ranking_matches_brute_force(records, query, k):
    db = _tmdb({c: tuple(v) for c, v in records.items()})
    got = [(h.cwe_id, h.score) for h in map_asset_to_cwes(query, db, build_keyword_index(db), top_k=k)]
    assert got == naive_rank.rank(query, {c: r.keywords for c, r in db.records.items()}, k)


@settings(max_examples=150, deadline=None)
@given(_records, _query, st.integers(1, 4), st.sampled_from([0.5, 2.0, 3.0]))
def test_ranking_is_scale_invariant(records, query, k, c):
    db = _tmdb({i: tuple(v) for i, v in records.items()})
    idx = build_keyword_index(db)
    base = [h.cwe_id for h in map_asset_to_cwes(query, db, idx, top_k=k)]
    scaled = [h.cwe_id for h in map_asset_to_cwes(query, db, idx, top_k=k, weights=(2.0 * c, 1.0 * c))]
    assert base == scaled


@settings(max_examples=150, deadline=None)
@given(_records, _query, st.integers(1, 4))
def test_top_k_prefix(records, query, k):
    db = _tmdb({i: tuple(v) for i, v in records.items()})
    idx = build_keyword_index(db)
    small = [h.cwe_id for h in map_asset_to_cwes(query, db, idx, top_k=k)]
    big = [h.cwe_id for h in map_asset_to_cwes(query, db, idx, top_k=k + 1)]
    # with ties the smaller cut may already carry one extra entry
    assert big[: len(small)] == small or small[: len(big)] == big
    assert all(h.score > 0 for h in map_asset_to_cwes(query, db, idx, top_k=k))
