from __future__ import annotations

import logging

import pytest

from atlas.emitter import emit_sva_checker, emit_tcl_harness, plan_for, write_outputs
from atlas.errors import UnvalidatedProperty
from atlas.minicheck.sva import parse_sva_subset
from atlas.propgen import SecurityProperty, add_nonvacuity_covers, mark_validated
from atlas.rtl import parse_rtl

ACTIVE_HIGH = """
module pulse (input logic clk, input logic rst, input logic d, output logic q);
  always_ff @(posedge clk) begin
    if (rst) q <= 1'b0;
    else q <= d;
  end
endmodule
"""


@pytest.fixture(scope="module")
def dma_prop(dma_symbols):
    p = SecurityProperty("cwe1245_abort_flag_clear", 1245, "clk", "!rst_n", "!done_i && abort", "##1 !abort",
                         family="fsm_integrity", asset="abort", rationale="abort must clear")
    p, errs = mark_validated(add_nonvacuity_covers(p), dma_symbols)
    assert not errs
    return p


@pytest.fixture(scope="module")
def dma_plan(dma_ast, dma_prop):
    return plan_for(dma_ast, ["rtl/dma_ctrl.sv"], [dma_prop])


def test_dma_checker_counts(dma_plan):
    text = emit_sva_checker(dma_plan)
    assert text.count("assert property") == 1
    assert text.count("cover property") == 1
    assert text.count("\nbind ") == 1
    assert "bind dma_ctrl dma_ctrl_checker u_dma_ctrl_checker" in text


def test_checker_ports_carry_widths(dma_ast, dma_symbols):
    p = SecurityProperty("s", 1245, "clk", "!rst_n", "start_i", "##1 state_q == 2'd1", covers=("start_i",))
    p, _ = mark_validated(p, dma_symbols)
    text = emit_sva_checker(plan_for(dma_ast, ["d.sv"], [p]))
    assert "input logic [1:0] state_q" in text
    assert "input logic clk,\n  input logic rst_n," in text


def test_empty_checker_warns(dma_ast, caplog):
    with caplog.at_level(logging.WARNING):
        text = emit_sva_checker(plan_for(dma_ast, ["d.sv"], []))
    assert "no properties" in caplog.text
    assert "assert property" not in text and "endmodule" in text


def test_draft_is_rejected(dma_ast):
    draft = SecurityProperty("d", 1245, "clk", "", "", "abort")
    plan = plan_for(dma_ast, ["d.sv"], [draft])
    with pytest.raises(UnvalidatedProperty):
        emit_sva_checker(plan)
    with pytest.raises(UnvalidatedProperty):
        emit_tcl_harness(plan)


def test_harness_lines(dma_ast, dma_prop):
    text = emit_tcl_harness(plan_for(dma_ast, ["a.sv", "b.sv"], [dma_prop]))
    lines = text.splitlines()
    assert [l for l in lines if l.startswith("analyze")] == [
        "analyze -sv a.sv", "analyze -sv b.sv", "analyze -sv dma_ctrl_checker.sv"]
    assert "elaborate -top dma_ctrl" in lines
    assert "clock clk" in lines
    assert "reset -expression {!rst_n}" in lines
    assert lines[-1] == "prove -all"


def test_active_high_reset():
    text = emit_tcl_harness(plan_for(parse_rtl(ACTIVE_HIGH), ["p.sv"], []))
    assert "reset -expression {rst}" in text


def test_duplicate_names_get_suffixes(dma_ast, dma_prop):
    text = emit_sva_checker(plan_for(dma_ast, ["d.sv"], [dma_prop, dma_prop]))
    assert "cwe1245_abort_flag_clear_a:" in text and "cwe1245_abort_flag_clear_1_a:" in text


def test_output_is_byte_identical(tmp_path, dma_plan):
    a = write_outputs(dma_plan, tmp_path / "a")
    b = write_outputs(dma_plan, tmp_path / "b")
    for x, y in zip(a, b):
        assert x.read_bytes() == y.read_bytes()
        assert b"\r\n" not in x.read_bytes()
    assert [p.name for p in a] == ["dma_ctrl_checker.sv", "dma_ctrl_fpv.tcl"]


def test_property_order_is_stable(dma_ast, dma_prop):
    other = SecurityProperty("aaa", 1191, dma_prop.clock, dma_prop.disable_expr, dma_prop.antecedent,
                             dma_prop.consequent, dma_prop.covers, status=dma_prop.status)
    one = emit_sva_checker(plan_for(dma_ast, ["d.sv"], [dma_prop, other]))
    two = emit_sva_checker(plan_for(dma_ast, ["d.sv"], [other, dma_prop]))
    assert one == two
    assert one.index("aaa_a") < one.index("cwe1245_abort_flag_clear_a")


def test_checker_reparses(dma_plan, dma_prop):
    ast = parse_rtl(emit_sva_checker(dma_plan))
    assert [m["name"] for m in ast.modules] == ["dma_ctrl_checker"]
    assert parse_sva_subset(dma_prop.sva_text)


def test_corpus_checkers_reparse(corpus_results):
    for r in corpus_results:
        props = r.validated_properties()
        text = emit_sva_checker(plan_for(r.ast, [f"{r.case.name}.sv"], props))
        ast = parse_rtl(text)
        assert ast.modules[0]["name"] == f"{r.module}_checker", r.case.name
        assert text.count("assert property") == len(props)
        for p in props:
            parse_sva_subset(p.sva_text)


def test_comment_cannot_close_early(dma_ast, dma_prop):
    from dataclasses import replace

    p = replace(dma_prop, rationale="tricky */ text\nover lines")
    text = emit_sva_checker(plan_for(dma_ast, ["d.sv"], [p]))
    assert "// CWE-1245: tricky * / text over lines" in text
