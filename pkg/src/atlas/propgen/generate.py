"""Property generation, binding validation, cover synthesis and the refinement policy."""

from __future__ import annotations

import re
from dataclasses import replace

from atlas.backend import DeterministicBackend, GenerationBackend
from atlas.errors import BackendError, IterationExceeded, SvaSyntaxError
from atlas.minicheck.check import FAILS, HOLDS, INCONCLUSIVE, VACUOUS, VerificationOutcome
from atlas.minicheck.sva import (
    Cmp, Const, Func, Ident, Not, Seq, expr_signals, parse_sva_seq, render_expr, render_seq,
)
from atlas.propgen.model import (
    ACCEPT, DRAFT, FLAG_MANUAL, MAX_ITERATIONS, RETRY, VALIDATED, BindingError, PromptBundle,
    RefineDecision, SecurityProperty,
)
from atlas.rtl.symbols import SignalDecl

CANDIDATE_FIELDS = ("name", "clock", "disable_expr", "antecedent", "consequent", "covers", "rationale")

VACUOUS_FEEDBACK = "antecedent never exercised; tighten or relax the trigger condition"
INCONCLUSIVE_FEEDBACK = "result inconclusive; re-run with relaxed assumptions"

_SIZED = re.compile(r"^(\d+)'")


def _parse_candidate(c, cwe_id: int, asset: str) -> SecurityProperty:
    if not isinstance(c, dict):
        raise BackendError("property candidate must be a JSON object")
    missing = [k for k in ("name", "consequent") if not isinstance(c.get(k), str) or not c.get(k)]
    if missing:
        raise BackendError(f"property candidate lacks field '{missing[0]}'")
    covers = c.get("covers", [])
    if not isinstance(covers, list) or not all(isinstance(x, str) for x in covers):
        raise BackendError("property candidate covers must be a list of strings")
    return SecurityProperty(
        name=re.sub(r"\W", "_", c["name"]), cwe_id=cwe_id, clock=str(c.get("clock") or ""),
        disable_expr=str(c.get("disable_expr") or ""), antecedent=str(c.get("antecedent") or ""),
        consequent=c["consequent"], covers=tuple(covers), implication=c.get("implication", "|->"),
        status=DRAFT, family=str(c.get("family", "")), asset=asset,
        rationale=str(c.get("rationale", "")))


def generate_properties(bundle: PromptBundle, backend: GenerationBackend | None = None) -> list[SecurityProperty]:
    """Draft properties for one (asset, CWE) bundle; remote answers must be structured."""
    backend = backend or DeterministicBackend()
    response = backend.request("generate_properties", bundle.to_dict())
    cands = response.get("candidates") if isinstance(response, dict) else None
    if not isinstance(cands, list):
        raise BackendError("backend response has no 'candidates' list")
    return [_parse_candidate(c, bundle.cwe.cwe_id, bundle.asset.signal) for c in cands]


def _width_errors(e, widths: dict[str, int], out: list[BindingError]) -> None:
    if isinstance(e, Cmp):
        for a, b in ((e.left, e.right), (e.right, e.left)):
            if isinstance(a, Ident) and isinstance(b, Const) and a.name in widths:
                w = widths[a.name]
                m = _SIZED.match(b.text)
                size = int(m.group(1)) if m else None
                too_big = b.value is not None and b.value.bit_length() > w
                if too_big or (w == 1 and size is not None and size > 1):
                    out.append(BindingError("width", a.name,
                                            f"{w}-bit {a.name} compared with {b.text}"))
        _width_errors(e.left, widths, out)
        _width_errors(e.right, widths, out)
    elif isinstance(e, (Not, Func)):
        _width_errors(e.arg, widths, out)
    elif hasattr(e, "left"):
        _width_errors(e.left, widths, out)
        _width_errors(e.right, widths, out)


def _is_temporal(seq: Seq) -> bool:
    def has_func(e):
        if isinstance(e, Func):
            return True
        if isinstance(e, Not):
            return has_func(e.arg)
        if hasattr(e, "left"):
            return has_func(e.left) or has_func(e.right)
        return False

    return len(seq.steps) > 1 or any(s.hi > 0 or has_func(s.expr) for s in seq.steps)


def validate_binding(prop: SecurityProperty, symbols: list[SignalDecl]) -> list[BindingError]:
    decls = {s.name: s for s in symbols if s.storage != "parameter"}
    widths = {n: d.width for n, d in decls.items()}
    errors: list[BindingError] = []
    seqs = []
    for label, text in (("antecedent", prop.antecedent), ("consequent", prop.consequent),
                        ("disable_expr", prop.disable_expr), *(("cover", c) for c in prop.covers)):
        if not text:
            continue
        try:
            seqs.append(parse_sva_seq(text))
        except SvaSyntaxError as exc:
            errors.append(BindingError("syntax", label, str(exc)))
    names = set()
    for s in seqs:
        for step in s.steps:
            names |= expr_signals(step.expr)
            _width_errors(step.expr, widths, errors)
    for n in sorted(names - set(decls)):
        errors.append(BindingError("unbound", n, f"'{n}' is not declared in the design"))
    if prop.clock:
        if prop.clock not in decls:
            errors.append(BindingError("unbound", prop.clock, f"clock '{prop.clock}' is not declared"))
    elif any(decls[n].storage == "register" for n in names if n in decls) or any(map(_is_temporal, seqs)):
        errors.append(BindingError("missing_clock", prop.name, "property needs a sampling clock"))
    return errors


def mark_validated(prop: SecurityProperty, symbols: list[SignalDecl]) -> tuple[SecurityProperty, list[BindingError]]:
    errors = validate_binding(prop, symbols)
    if errors or not prop.covers:
        return prop, errors
    return replace(prop, status=VALIDATED), errors


def add_nonvacuity_covers(prop: SecurityProperty) -> SecurityProperty:
    """Cover the antecedent and, for a multi-step antecedent, its first step."""
    if not prop.antecedent:
        raise ValueError(f"{prop.name}: cannot cover an empty antecedent")
    seq = parse_sva_seq(prop.antecedent)
    wanted = [render_seq(seq)]
    if len(seq.steps) > 1:
        wanted.insert(0, render_expr(seq.steps[0].expr))
    have = []
    for c in prop.covers:
        try:
            have.append(render_seq(parse_sva_seq(c)))
        except SvaSyntaxError:
            have.append(c)
    out = list(dict.fromkeys(have))
    for w in wanted:
        if w not in out:
            out.append(w)
    return replace(prop, covers=tuple(out))


def refine(prop: SecurityProperty, outcome: VerificationOutcome, iteration: int,
           bundle: PromptBundle | None = None) -> RefineDecision:
    """Accept decided verdicts; retry vacuous or inconclusive ones until the third iteration."""
    if iteration > MAX_ITERATIONS:
        raise IterationExceeded(f"{prop.name}: iteration {iteration} exceeds {MAX_ITERATIONS}")
    if iteration < 1:
        raise ValueError("iteration starts at 1")
    if outcome.verdict in (FAILS, HOLDS):
        return RefineDecision(ACCEPT, "", None, iteration)
    if outcome.verdict not in (VACUOUS, INCONCLUSIVE):
        raise ValueError(f"unknown verdict {outcome.verdict!r}")
    feedback = VACUOUS_FEEDBACK if outcome.verdict == VACUOUS else INCONCLUSIVE_FEEDBACK
    if iteration == MAX_ITERATIONS:
        return RefineDecision(FLAG_MANUAL, feedback, None, iteration)
    return RefineDecision(RETRY, feedback, bundle.next(feedback) if bundle else None, iteration)
