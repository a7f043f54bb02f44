from __future__ import annotations

import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atlas.assets import DetectedAsset
from atlas.backend import DeterministicBackend
from atlas.errors import BackendError, IterationExceeded, NoTemplate
from atlas.knowledge import AssetType
from atlas.minicheck.check import FAILS, HOLDS, INCONCLUSIVE, VACUOUS, VerificationOutcome
from atlas.minicheck.sva import parse_sva_seq, render_seq
from atlas.pipeline import build_context
from atlas.propgen import (
    ACCEPT, AST_PATH, DD_ATTACK_SURFACE, DRAFT, FLAG_MANUAL, MAX_ITERATIONS, RETRY, SUMMARY_ASSET, VALIDATED,
    FocusSet, PromptBundle, SecurityProperty, add_nonvacuity_covers, family_candidates, generate_properties,
    mark_validated, prune_focus, refine, select_family, validate_binding,
)
from atlas.propgen.generate import INCONCLUSIVE_FEEDBACK, VACUOUS_FEEDBACK


def _prop(**kw):
    base = dict(name="p", cwe_id=1245, clock="clk", disable_expr="!rst_n", antecedent="!done_i && abort",
                consequent="##1 !abort")
    base.update(kw)
    return SecurityProperty(**base)


class Canned:
    mode = "remote"

    def __init__(self, answer):
        self.answer = answer

    def request(self, task, payload):
        return self.answer


# -- focus pruning -------------------------------------------------------------------


def test_dma_focus(dma_bundle):
    f = dma_bundle.focus
    assert {"abort", "done_i"} <= f.signals
    assert not f.fallback
    assert f.justification["done_i"] == (SUMMARY_ASSET, DD_ATTACK_SURFACE, AST_PATH)


def test_focus_falls_back_without_doc(dma_ast, dma_mod, dma_assets):
    ctx = build_context(dma_ast, dma_mod, dma_assets, None)
    abort = next(a for a in dma_assets if a.signal == "abort")
    f = prune_focus(ctx, abort, dma_ast)
    assert f.fallback
    assert f.signals == {"abort", "done_i"}
    assert all(DD_ATTACK_SURFACE not in t for t in f.justification.values())


def test_focus_of_pure_input(dma_context, dma_ast):
    start = DetectedAsset("start_i", AssetType.RUNTIME_INTEGRITY_STATE, "input", "test", ("start_*",), 1.0)
    f = prune_focus(dma_context, start, dma_ast)
    assert "start_i" in f.signals


def test_focus_signals_are_design_signals(corpus_results):
    for r in corpus_results:
        names = {s.name for s in r.symbols}
        for a in r.assets:
            f = prune_focus(r.context, a, r.ast)
            # the strict intersection may leave out an asset the doc never names
            assert f.signals and f.signals <= names, r.case.name
            if f.fallback:
                assert a.signal in f.signals


def test_deeper_path_is_a_superset(dma_context, dma_ast, dma_assets):
    abort = next(a for a in dma_assets if a.signal == "abort")
    one = prune_focus(dma_context, abort, dma_ast, depth=1).signals
    two = prune_focus(dma_context, abort, dma_ast, depth=2).signals
    assert one <= two


def test_focus_depth_must_be_positive(dma_context, dma_assets):
    with pytest.raises(ValueError):
        prune_focus(dma_context, dma_assets[0], depth=0)


def test_focus_tags_required():
    with pytest.raises(ValueError):
        FocusSet(frozenset({"a"}), {})
    with pytest.raises(ValueError):
        FocusSet(frozenset({"a"}), {"a": ("hunch",)})


def test_focus_round_trip(dma_bundle):
    assert FocusSet.from_dict(json.loads(json.dumps(dma_bundle.focus.to_dict()))) == dma_bundle.focus


# -- bundles -----------------------------------------------------------------------


def test_bundle_iteration_bounds(dma_bundle):
    b = dma_bundle.next("x").next("y")
    assert b.iteration == MAX_ITERATIONS and b.prior_feedback == "y"
    with pytest.raises(ValueError):
        b.next("z")


def test_bundle_round_trip(dma_bundle):
    assert PromptBundle.from_dict(json.loads(json.dumps(dma_bundle.to_dict()))) == dma_bundle


# -- generation ----------------------------------------------------------------------


def test_dma_property(dma_bundle):
    (p,) = generate_properties(dma_bundle)
    assert p.antecedent == "!done_i && abort"
    assert p.consequent == "##1 !abort"
    assert (p.clock, p.disable_expr) == ("clk", "!rst_n")
    assert p.status == DRAFT and p.asset == "abort" and p.cwe_id == 1245
    assert p.sva_text == "@(posedge clk) disable iff (!rst_n) !done_i && abort |-> ##1 !abort"


def test_generation_is_deterministic(dma_bundle):
    assert generate_properties(dma_bundle) == generate_properties(dma_bundle)
    assert generate_properties(dma_bundle, DeterministicBackend()) == generate_properties(dma_bundle)


def test_later_iterations_change_candidate(dma_bundle):
    cands = family_candidates(dma_bundle.to_dict())
    assert len(cands) >= 2
    names = [generate_properties(dma_bundle.next("retry"))[0].name, generate_properties(dma_bundle)[0].name]
    assert names[0] == cands[1]["name"]


def test_unknown_cwe_without_keywords():
    with pytest.raises(NoTemplate):
        select_family(999999, ())


def test_nearest_family_by_keywords():
    fam, why = select_family(999999, ("finite state machine",))
    assert fam.name == "fsm_integrity" and "nearest" in why


@pytest.mark.parametrize("answer", [
    {},
    {"candidates": "nope"},
    {"candidates": [{"name": "x"}]},
    {"candidates": [{"name": "x", "consequent": "a", "covers": "a"}]},
    {"candidates": [42]},
])
def test_malformed_backend_answers(dma_bundle, answer):
    with pytest.raises(BackendError):
        generate_properties(dma_bundle, Canned(answer))


def test_backend_names_are_sanitized(dma_bundle):
    (p,) = generate_properties(dma_bundle, Canned({"candidates": [{"name": "a b-c", "consequent": "abort"}]}))
    assert p.name == "a_b_c" and p.status == DRAFT


# -- binding validation -----------------------------------------------------------------


def test_dma_property_binds(dma_bundle, dma_symbols):
    (p,) = generate_properties(dma_bundle)
    assert validate_binding(p, dma_symbols) == []


def test_unbound_signal(dma_symbols):
    errs = validate_binding(_prop(consequent="##1 !ghost_sig"), dma_symbols)
    assert [(e.kind, e.name) for e in errs] == [("unbound", "ghost_sig")]


def test_missing_clock(dma_symbols):
    errs = validate_binding(_prop(clock=""), dma_symbols)
    assert [e.kind for e in errs] == ["missing_clock"]


def test_undeclared_clock(dma_symbols):
    errs = validate_binding(_prop(clock="clk2"), dma_symbols)
    assert [(e.kind, e.name) for e in errs] == [("unbound", "clk2")]


def test_width_mismatch(dma_symbols):
    errs = validate_binding(_prop(consequent="##1 abort == 2'b10"), dma_symbols)
    assert [(e.kind, e.name) for e in errs] == [("width", "abort")]


def test_syntax_error(dma_symbols):
    errs = validate_binding(_prop(consequent="##1 (abort"), dma_symbols)
    assert [e.kind for e in errs] == ["syntax"]


def test_parameters_do_not_bind(dma_symbols):
    errs = validate_binding(_prop(consequent="##1 IDLE"), dma_symbols)
    assert [(e.kind, e.name) for e in errs] == [("unbound", "IDLE")]


def test_validation_needs_covers(dma_symbols):
    p, errs = mark_validated(_prop(), dma_symbols)
    assert errs == [] and p.status == DRAFT
    p, _ = mark_validated(add_nonvacuity_covers(_prop()), dma_symbols)
    assert p.status == VALIDATED


def test_validated_properties_reference_design_signals(corpus_results):
    n = 0
    for r in corpus_results:
        names = {s.name for s in r.symbols}
        for p in r.validated_properties():
            assert p.bound_signals <= names, (r.case.name, p.name)
            assert p.covers
            n += 1
    assert n >= 10


# -- covers --------------------------------------------------------------------------


def test_cover_for_single_step():
    assert add_nonvacuity_covers(_prop()).covers == ("!done_i && abort",)


def test_cover_for_multi_step():
    p = add_nonvacuity_covers(_prop(antecedent="a && b ##1 c"))
    assert set(p.covers) == {"a && b", "a && b ##1 c"}


def test_covers_are_idempotent():
    once = add_nonvacuity_covers(_prop(antecedent="a && b ##1 c"))
    assert add_nonvacuity_covers(once) == once


def test_existing_covers_are_kept():
    p = add_nonvacuity_covers(_prop(covers=("start_i",)))
    assert p.covers[0] == "start_i" and "!done_i && abort" in p.covers


def test_no_cover_without_antecedent():
    with pytest.raises(ValueError):
        add_nonvacuity_covers(_prop(antecedent=""))


_atoms = st.sampled_from(["a", "!b", "a && b", "c || !a", "$rose(a)", "v == 3'd2"])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(_atoms, st.integers(0, 2)), min_size=1, max_size=3))
def test_cover_contains_antecedent(steps):
    text = steps[0][0] + "".join(f" ##{d} ({e})" for e, d in steps[1:])
    p = add_nonvacuity_covers(_prop(antecedent=text))
    assert render_seq(parse_sva_seq(text)) in p.covers
    assert add_nonvacuity_covers(p) == p


# -- refinement ----------------------------------------------------------------------


@pytest.mark.parametrize("verdict, iteration, action, feedback", [
    (FAILS, 1, ACCEPT, ""),
    (HOLDS, 2, ACCEPT, ""),
    (VACUOUS, 1, RETRY, VACUOUS_FEEDBACK),
    (INCONCLUSIVE, 2, RETRY, INCONCLUSIVE_FEEDBACK),
    (VACUOUS, 3, FLAG_MANUAL, VACUOUS_FEEDBACK),
    (INCONCLUSIVE, 3, FLAG_MANUAL, INCONCLUSIVE_FEEDBACK),
])
def test_refine_policy(dma_bundle, verdict, iteration, action, feedback):
    b = dma_bundle
    for _ in range(iteration - 1):
        b = b.next("earlier")
    d = refine(_prop(), VerificationOutcome(verdict), iteration, b)
    assert (d.action, d.feedback, d.iteration) == (action, feedback, iteration)
    if action == RETRY:
        assert d.bundle.iteration == iteration + 1 and d.bundle.prior_feedback == feedback
    else:
        assert d.bundle is None


def test_refine_past_bound():
    with pytest.raises(IterationExceeded):
        refine(_prop(), VerificationOutcome(VACUOUS), MAX_ITERATIONS + 1)


def test_refine_unknown_verdict():
    with pytest.raises(ValueError):
        refine(_prop(), VerificationOutcome("maybe"), 1)


def test_refine_terminates_on_every_sequence():
    verdicts = (HOLDS, FAILS, VACUOUS, INCONCLUSIVE)
    for seq in itertools.product(verdicts, repeat=MAX_ITERATIONS):
        actions = []
        for i, v in enumerate(seq, start=1):
            actions.append(refine(_prop(), VerificationOutcome(v), i).action)
            if actions[-1] != RETRY:
                break
        assert actions[-1] in (ACCEPT, FLAG_MANUAL)
        assert len(actions) <= MAX_ITERATIONS


# -- properties ---------------------------------------------------------------------------


def test_property_round_trip():
    p = add_nonvacuity_covers(_prop(implication="|=>", consequent="!abort"))
    d = json.loads(json.dumps(p.to_dict()))
    assert SecurityProperty.from_dict(d) == p
    assert d["sva_text"] == "@(posedge clk) disable iff (!rst_n) !done_i && abort |=> !abort"


def test_bound_signals_include_clock():
    assert _prop().bound_signals == {"clk", "rst_n", "done_i", "abort"}


def test_unparsable_parts_keep_raw_text():
    p = _prop(consequent="##1 (abort")
    assert p.sva_text == p.property_text()
