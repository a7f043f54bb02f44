from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atlas.backend import DeterministicBackend
from atlas.errors import DuplicateCwe, InvalidDraft, ParseError, SchemaError, UnknownAssetType
from atlas.knowledge import (
    ADVERSARY_MODELS, AdversaryKind, AdversaryModel, AssetType, CweMeta, ThreatModelRecord, Tmdb, audit_tmdb,
    Violation, build_keyword_index, draft_threat_model, keyword_forms, load_asset_definitions,
    load_tmdb, save_tmdb, tmdb_from_dict, tmdb_to_dict, validate_record,
)
from atlas.knowledge.model import TEMPLATE_FIELDS

# the worked CWE-1245 example of the threat-model template
WORKED_1245 = ThreatModelRecord(
    cwe_id=1245,
    title="Improper Finite State Machines (FSMs) in Hardware Logic",
    adversaries=("SimpleHardware",),
    assets="Hardware State and Logic Integrity",
    attack_surfaces="Hardware Interfaces and State Machine Logic",
    vulnerabilities="Improper or insecure FSM design",
    threats="Exploiting undefined or insecure FSM transitions",
    keywords=("fsm", "finite state machine", "transition"),
)


def _record(cwe_id, keywords):
    return WORKED_1245.with_changes(cwe_id=cwe_id, title=f"weakness {cwe_id}", keywords=tuple(keywords))


def _write(tmp_path, doc, name="tmdb.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc), encoding="utf-8")
    return p


# -- adversary models --------------------------------------------------------


def test_adversary_models_cover_eight_kinds():
    assert len(AdversaryKind) == 8
    assert set(ADVERSARY_MODELS) == set(AdversaryKind)
    assert all(m.capabilities for m in ADVERSARY_MODELS.values())


def test_adversary_model_rejects_empty_capabilities():
    with pytest.raises(ValueError):
        AdversaryModel(AdversaryKind.NETWORK, "  ")


def test_adversary_model_rejects_unknown_kind():
    with pytest.raises(ValueError):
        AdversaryModel("Wizard", "casts spells")


# -- load / validate ---------------------------------------------------------


def test_bundled_tmdb_carries_the_worked_1245_record(tmdb):
    r = tmdb.get(1245)
    assert r.adversaries == ("SimpleHardware",)
    assert r.assets == "Hardware State and Logic Integrity"
    assert r.attack_surfaces == "Hardware Interfaces and State Machine Logic"
    assert r.vulnerabilities == "Improper or insecure FSM design"
    assert r.threats == "Exploiting undefined or insecure FSM transitions"


def test_bundled_tmdb_size_and_validity(tmdb):
    assert len(tmdb) >= 25
    assert all(validate_record(r) == [] for r in tmdb)


@pytest.mark.parametrize("cwe", [1245, 1271, 1221, 1329, 321, 226, 1243, 1191, 1207, 1232, 1233, 1260,
                                 1257, 1262, 1220, 1206, 276])
def test_bundled_tmdb_covers_evaluation_cwes(tmdb, cwe):
    assert tmdb.get(cwe) is not None


def test_empty_envelope_loads(tmp_path):
    t = load_tmdb(_write(tmp_path, {"version": "v0", "records": []}))
    assert len(t) == 0 and t.version == "v0"


def test_empty_threats_names_the_field(tmp_path):
    rec = WORKED_1245.to_dict() | {"threats": ""}
    with pytest.raises(SchemaError) as err:
        load_tmdb(_write(tmp_path, {"version": "v", "records": [rec]}))
    assert err.value.field == "threats"
    assert err.value.record == 1245


def test_missing_field_names_field(tmp_path):
    rec = WORKED_1245.to_dict()
    del rec["assets"]
    with pytest.raises(SchemaError) as err:
        load_tmdb(_write(tmp_path, {"version": "v", "records": [rec]}))
    assert err.value.field == "assets"


def test_unknown_field_rejected(tmp_path):
    rec = WORKED_1245.to_dict() | {"severity": "high"}
    with pytest.raises(SchemaError):
        load_tmdb(_write(tmp_path, {"version": "v", "records": [rec]}))


def test_duplicate_cwe(tmp_path):
    rec = WORKED_1245.to_dict()
    with pytest.raises(DuplicateCwe):
        load_tmdb(_write(tmp_path, {"version": "v", "records": [rec, rec]}))


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json", encoding="utf-8")
    with pytest.raises(ParseError):
        load_tmdb(p)


def test_load_is_order_independent(tmp_path):
    a, b = _record(1, ["x"]).to_dict(), _record(2, ["y"]).to_dict()
    t1 = load_tmdb(_write(tmp_path, {"version": "v", "records": [a, b]}, "a.json"))
    t2 = load_tmdb(_write(tmp_path, {"version": "v", "records": [b, a]}, "b.json"))
    assert t1 == t2


def test_validate_worked_1245_record():
    assert validate_record(WORKED_1245) == []


def test_validate_empty_adversaries():
    assert validate_record(WORKED_1245.with_changes(adversaries=())) == [Violation("adversaries", "empty")]


def test_validate_vulnerability_equals_threat():
    rec = WORKED_1245.with_changes(threats=WORKED_1245.vulnerabilities)
    assert validate_record(rec) == [Violation("threats", "duplicates vulnerabilities")]


@pytest.mark.parametrize("field, bad", [
    ("related_cves", ("CVE-19-1",)),
    ("related_capecs", (0,)),
    ("keywords", ("FSM",)),
    ("keywords", ("fsm", "fsm")),
    ("cwe_id", -3),
])
def test_validate_other_invariants(field, bad):
    problems = validate_record(WORKED_1245.with_changes(**{field: bad}))
    assert [v.field for v in problems] == [field]


@pytest.mark.parametrize("field", TEMPLATE_FIELDS)
def test_deleting_a_template_field_gives_one_violation(field):
    blank = () if field == "adversaries" else ""
    problems = validate_record(WORKED_1245.with_changes(**{field: blank}))
    assert len(problems) == 1 and problems[0].field == field


class _Junk:
    cwe_id = "abc"
    adversaries = 7


def test_validate_is_total_on_junk():
    problems = validate_record(_Junk())
    assert {v.field for v in problems} >= {"cwe_id", "title", "assets", "threats"}


_text = st.text(alphabet="abc xyz", max_size=8)


@settings(max_examples=150, deadline=None)
@given(title=_text, assets=_text, vulns=_text, threats=_text,
       advs=st.lists(st.sampled_from([k.value for k in AdversaryKind] + ["Nobody"]), max_size=3),
       kws=st.lists(st.text(alphabet="abAB ", max_size=5), max_size=4))
def test_validate_never_raises(title, assets, vulns, threats, advs, kws):
    rec = WORKED_1245.with_changes(title=title, assets=assets, vulnerabilities=vulns, threats=threats,
                              adversaries=tuple(advs), keywords=tuple(kws))
    problems = validate_record(rec)
    assert isinstance(problems, list)
    assert all(isinstance(v, Violation) for v in problems)


def test_save_load_round_trip(tmp_path, tmdb):
    p = tmp_path / "copy.json"
    save_tmdb(tmdb, p)
    assert load_tmdb(p) == tmdb
    assert tmdb_from_dict(tmdb_to_dict(tmdb)) == tmdb


# -- keyword index -------------------------------------------------------------


def test_index_three_records():
    t = Tmdb({1: _record(1, ["fsm", "state"]), 2: _record(2, ["debug", "jtag"]),
              3: _record(3, ["state", "reset"])}, "v")
    idx = build_keyword_index(t)
    # oracle: brute-force set construction
    expected = {r.cwe_id for r in t if "state" in r.keywords}
    assert idx.entries["state"] == frozenset(expected) == {1, 3}


def test_index_empty():
    assert build_keyword_index(Tmdb({}, "v")).entries == {}


def test_phrase_expansion():
    idx = build_keyword_index(Tmdb({7: _record(7, ["finite state machine"])}, "v"))
    for k in ("finite state machine", "finite", "state", "machine"):
        assert 7 in idx.lookup(k)


def test_lookup_is_case_insensitive(index):
    assert index.lookup("FSM") == index.lookup("fsm") != frozenset()


def test_keyword_forms():
    assert keyword_forms("  Finite  State Machine ") == ["finite state machine", "finite", "state", "machine"]
    assert keyword_forms("fsm") == ["fsm"]
    assert keyword_forms("") == []


def test_index_invariants(tmdb, index):
    for r in tmdb:
        for k in r.keywords:
            assert r.cwe_id in index.lookup(k)
    ids = set(tmdb.records)
    assert all(v <= ids for v in index.entries.values())
    assert build_keyword_index(tmdb) == index
    assert index.source == tmdb.version


_kw = st.lists(st.sampled_from(["fsm", "state", "debug", "finite state machine", "reset value", "lock"]),
               min_size=1, max_size=4, unique=True)


@settings(max_examples=60, deadline=None)
@given(st.lists(_kw, min_size=0, max_size=6))
def test_every_record_keyword_is_indexed(keyword_lists):
    t = Tmdb({i + 1: _record(i + 1, kws) for i, kws in enumerate(keyword_lists)}, "v")
    idx = build_keyword_index(t)
    for r in t:
        for k in r.keywords:
            assert r.cwe_id in idx.entries[k]
    assert build_keyword_index(t) == idx


# -- asset definitions ---------------------------------------------------------


def test_default_asset_definitions(defs):
    assert len(defs) == 7
    assert {d.asset_type for d in defs} == set(AssetType)
    by = {d.asset_type: set(d.patterns) for d in defs}
    assert by[AssetType.SENSITIVE_DATA] >= {"keys_*", "pass_*", "secret_*", "protected_*", "user_*"}
    assert by[AssetType.RUNTIME_INTEGRITY_STATE] >= {"state_*", "default_*", "pcr_*", "measurement_*"}


def test_empty_definition_file(tmp_path):
    p = tmp_path / "defs.json"
    p.write_text("[]", encoding="utf-8")
    assert load_asset_definitions(p) == []


def test_unknown_asset_type(tmp_path):
    p = tmp_path / "defs.json"
    p.write_text(json.dumps([{"asset_type": "Gold", "definition": ["x"], "patterns": ["gold_*"]}]),
                 encoding="utf-8")
    with pytest.raises(UnknownAssetType):
        load_asset_definitions(p)


def test_definition_without_patterns(tmp_path):
    p = tmp_path / "defs.json"
    p.write_text(json.dumps([{"asset_type": "SensitiveData", "definition": ["x"], "patterns": []}]),
                 encoding="utf-8")
    with pytest.raises(SchemaError):
        load_asset_definitions(p)


# -- drafting ------------------------------------------------------------------


def test_draft_links_capecs_from_cve_summary(tmdb):
    meta = CweMeta(1191, "On-Chip Debug and Test Interface With Improper Access Control",
                   "The chip does not implement or does not correctly perform access control to check "
                   "whether users are authorized to access internal registers and test modes through "
                   "the physical debug/test interface.",
                   ["CVE-2019-18827: debug access without authorization; CAPEC-1: Accessing "
                    "Functionality Not Properly Constrained by ACLs; CAPEC-180: Exploiting Incorrectly "
                    "Configured Access Control Security Levels"])
    rec = draft_threat_model(meta, [tmdb.get(1245)], DeterministicBackend())
    assert {1, 180} <= set(rec.related_capecs)
    assert "CVE-2019-18827" in rec.related_cves
    assert validate_record(rec) == []
    assert rec.reviewed is False


def test_draft_identity_for_exemplar_cwe():
    meta = CweMeta(1245, WORKED_1245.title)
    rec = draft_threat_model(meta, [WORKED_1245.with_changes(reviewed=True)], DeterministicBackend())
    assert rec == WORKED_1245.with_changes(reviewed=False)


class _EmptyAssets:
    mode = "stub"

    def __init__(self):
        self.calls = 0

    def request(self, task, payload):
        self.calls += 1
        return {"record": WORKED_1245.to_dict() | {"assets": ""}}


def test_draft_gives_up_after_three_attempts():
    backend = _EmptyAssets()
    with pytest.raises(InvalidDraft) as err:
        draft_threat_model(CweMeta(1245, WORKED_1245.title), [WORKED_1245], backend)
    assert backend.calls == 3
    assert any(v.field == "assets" for v in err.value.violations)


def test_draft_needs_an_exemplar():
    with pytest.raises(ValueError):
        draft_threat_model(CweMeta(1, "x"), [], DeterministicBackend())


def test_audit_lists_every_problem(tmp_path):
    good = WORKED_1245.to_dict()
    blank = dict(good, cwe_id=2, assets="")
    dup = dict(good)
    extra = dict(good, cwe_id=3, colour="red")
    p = _write(tmp_path, {"version": "t", "records": [good, blank, dup, extra]})
    version, count, found = audit_tmdb(p)
    assert (version, count) == ("t", 4)
    assert [(label, v.field) for label, v in found] == [(2, "assets"), (1245, "cwe_id"), (3, "colour")]


def test_audit_accepts_shipped_tmdb():
    from atlas.knowledge import DEFAULT_TMDB

    _, count, found = audit_tmdb(DEFAULT_TMDB)
    assert count > 0 and found == []
