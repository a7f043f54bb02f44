from __future__ import annotations

import itertools
import json

import pytest

from atlas.assets import detect_assets
from atlas.backend import BackendError, DeterministicBackend
from atlas.context import (
    BACKEND, DETERMINISTIC, DesignDoc, RtlSummary, SocContext, assemble_context, ingest_design_doc,
    summarize_rtl,
)
from atlas.errors import MissingContext
from atlas.rtl import ast_digest, driver_map, extract_fsms, symbol_table


class FakeRemote:
    mode = "remote"

    def __init__(self, answer=None, fail=False):
        self.answer = answer
        self.fail = fail
        self.calls = []

    def request(self, task, payload):
        self.calls.append(task)
        if self.fail:
            raise BackendError("connection refused")
        return self.answer


@pytest.fixture(scope="module")
def dma_context(dma, dma_mod, dma_assets):
    doc = ingest_design_doc(dma.doc, "doc.md")
    digest = ast_digest(dma_mod, {a.signal for a in dma_assets})
    return assemble_context(doc, digest, summarize_rtl(dma_mod, dma_assets))


# -- design documents --------------------------------------------------------------


def test_dma_register_map(dma):
    doc = ingest_design_doc(dma.doc)
    assert [(r.name, r.offset) for r in doc.register_map] == [
        ("busy_o", "0x00"), ("abort", "0x04"), ("xfer_cnt_q", "0x08"), ("state_q", "0x0C")]
    assert doc.register_map[1].access == "RO"


def test_empty_doc_has_one_body_section():
    doc = ingest_design_doc("")
    assert doc.sections == (("body", ""),)
    assert doc.register_map == () and doc.is_empty


def test_heading_lookup_is_normalized(dma):
    doc = ingest_design_doc(dma.doc)
    assert "done_i" in doc.section("  SECURITY   requirements")
    assert doc.section("nonexistent") is None


@pytest.mark.parametrize("text, headings", [
    ("intro\n# A\nx\n# B\ny\n", ["body", "A", "B"]),
    ("# A\nx\n# A\ny\n", ["A", "A (2)"]),
    ("## Deep ##\nz\n", ["Deep"]),
])
def test_section_splitting(text, headings):
    assert [h for h, _ in ingest_design_doc(text).sections] == headings


def test_register_rows_dedupe_on_offset():
    text = "| Name | Offset |\n|---|---|\n| a | 0x4 |\n| b | 4 |\n| c | 0x8 |\n"
    assert [r.name for r in ingest_design_doc(text).register_map] == ["a", "c"]


def test_table_without_offset_is_not_a_register_map():
    assert ingest_design_doc("| a | b |\n|---|---|\n| 1 | 2 |\n").register_map == ()


# -- RTL summary ---------------------------------------------------------------------


def test_summary_flags_sticky_abort(dma_mod, dma_assets):
    s = summarize_rtl(dma_mod, dma_assets)
    assert s.provenance == DETERMINISTIC
    why = dict(s.highlighted)
    assert "abort" in why and "done_i" in why
    assert "no clear when done_i low" in why["abort"]


def test_summary_without_assets(dma_mod):
    s = summarize_rtl(dma_mod, [])
    assert s.highlighted == ()
    assert "dma_ctrl" in s.text


def test_summary_is_deterministic(dma_mod, dma_assets):
    assert summarize_rtl(dma_mod, dma_assets) == summarize_rtl(dma_mod, list(dma_assets))
    assert summarize_rtl(dma_mod, dma_assets, backend=DeterministicBackend()) == \
        summarize_rtl(dma_mod, dma_assets)


def test_backend_ghost_highlight_dropped(dma_mod, dma_assets):
    remote = FakeRemote({"text": "abort never clears", "highlighted": [["abort", "sticky"], ["ghost", "?"]]})
    s = summarize_rtl(dma_mod, dma_assets, backend=remote)
    assert s.provenance == BACKEND
    assert s.signals == {"abort"}
    assert any("ghost" in w for w in s.warnings)


def test_backend_failure_falls_back(dma_mod, dma_assets):
    s = summarize_rtl(dma_mod, dma_assets, backend=FakeRemote(fail=True))
    assert s.provenance == DETERMINISTIC
    assert s == summarize_rtl(dma_mod, dma_assets)
    assert s.warnings


def test_highlights_are_symbols(corpus, defs):
    from atlas.rtl import parse_rtl

    for fx in corpus:
        mod = parse_rtl(fx.buggy_rtl).module()
        syms = symbol_table(mod)
        assets = detect_assets(syms, defs, extract_fsms(mod), driver_map(mod, syms))
        s = summarize_rtl(mod, assets)
        assert s.signals <= {x.name for x in syms}, fx.name


# -- assembly ------------------------------------------------------------------------


def test_assembly_is_order_free(dma_context):
    parts = [dma_context.doc, dma_context.digest, dma_context.summary]
    for perm in itertools.permutations(parts):
        assert assemble_context(*perm) == dma_context


@pytest.mark.parametrize("missing", ["doc", "digest", "summary"])
def test_missing_part(dma_context, missing):
    parts = {"doc": dma_context.doc, "digest": dma_context.digest, "summary": dma_context.summary}
    parts.pop(missing)
    with pytest.raises(MissingContext) as err:
        assemble_context(**parts)
    assert missing in str(err.value)


def test_part_given_twice(dma_context):
    with pytest.raises(ValueError):
        assemble_context(dma_context.doc, dma_context.doc, dma_context.digest, dma_context.summary)


def test_not_a_part():
    with pytest.raises(TypeError):
        assemble_context("design doc")


def test_provenance_markers(dma_context):
    d = dma_context.to_dict()
    assert d["design_doc"]["provenance"] == "design_doc:doc.md"
    assert d["ast_digest"]["provenance"] == "ast"
    assert d["rtl_summary"]["provenance"] == DETERMINISTIC


def test_context_round_trip(dma_context):
    text = json.dumps(dma_context.to_dict(), sort_keys=True)
    assert SocContext.from_dict(json.loads(text)) == dma_context


def test_empty_parts_still_assemble(dma_context):
    ctx = assemble_context(DesignDoc.empty(), dma_context.digest, RtlSummary.empty())
    assert ctx.discrepancies == ()
    assert ctx.summary.provenance == "empty"


def test_documented_registers_match_rtl(dma_context):
    assert dma_context.discrepancies == ()


def test_discrepancy_for_register_missing_in_rtl(dma_context):
    doc = ingest_design_doc("| Name | Offset |\n|---|---|\n| abort | 0x0 |\n| ghost_q | 0x4 |\n")
    ctx = assemble_context(doc, dma_context.digest, dma_context.summary)
    assert [(d.kind, d.name) for d in ctx.discrepancies] == [("doc_register_missing_in_rtl", "ghost_q")]
