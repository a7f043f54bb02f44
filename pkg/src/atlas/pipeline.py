"""End-to-end flow: parse, detect, map, contextualize, generate, check, refine, emit, report."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from atlas.assets import DetectedAsset, detect_assets
from atlas.backend import GenerationBackend, make_backend
from atlas.config import RunConfig
from atlas.context import DesignDoc, RtlSummary, SocContext, assemble_context, ingest_design_doc, summarize_rtl
from atlas.corpus import load_corpus, trace_widths
from atlas.emitter import plan_for, write_outputs
from atlas.errors import (
    AtlasError, BackendError, ConfigError, DepthExceeded, GuardUnsupported, NoTemplate, RtlSyntaxError,
    SvaSyntaxError, TraceError, UnknownSignal,
)
from atlas.knowledge import build_keyword_index, load_asset_definitions, load_tmdb
from atlas.knowledge.model import KeywordIndex, Tmdb
from atlas.minicheck.check import FAILS, HOLDS, INCONCLUSIVE, VACUOUS, VerificationOutcome, eval_property
from atlas.minicheck.reach import MAX_INPUTS, bounded_reach
from atlas.minicheck.trace import Trace, load_trace
from atlas.propgen.focus import prune_focus
from atlas.propgen.generate import add_nonvacuity_covers, generate_properties, mark_validated, refine
from atlas.propgen.model import FLAG_MANUAL, RETRY, VALIDATED, PromptBundle, SecurityProperty
from atlas.propgen.templates import FSM_INTEGRITY
from atlas.report import ReportRow, RunReport
from atlas.rtl import AstDigest, ast_digest, driver_map, extract_fsms, parse_rtl, symbol_table
from atlas.rtl.fsm import FsmCandidate
from atlas.threats import SocThreatModel, build_soc_threat_model, title_index

log = logging.getLogger(__name__)

TMDB = "tmdb"
DESIGN_DOC = "design_doc"
AST_DIGEST = "ast_digest"
RTL_SUMMARY = "rtl_summary"
ABLATABLE = (TMDB, DESIGN_DOC, AST_DIGEST, RTL_SUMMARY)
CONTEXT_PARTS = (DESIGN_DOC, AST_DIGEST, RTL_SUMMARY)


@dataclass(frozen=True)
class DesignCase:
    name: str
    rtl: Path
    doc: Path | None = None
    trace: Path | None = None
    fixed_rtl: Path | None = None
    fixed_trace: Path | None = None
    golden: dict | None = field(default=None, compare=False)


def cases_from_config(cfg: RunConfig) -> list[DesignCase]:
    if cfg.corpus is not None:
        return [DesignCase(f.name, f.buggy_path, f.doc_path, f.root / "buggy.csv", f.fixed_path,
                           f.root / "fixed.csv", f.golden) for f in load_corpus(cfg.corpus)]
    out = []
    for rtl in cfg.designs:
        rtl = Path(rtl)
        trace = Path(cfg.traces_dir) / f"{rtl.stem}.csv" if cfg.traces_dir else None
        out.append(DesignCase(rtl.stem, rtl, cfg.design_doc, trace if trace and trace.exists() else None))
    return out


@dataclass(frozen=True)
class Knowledge:
    tmdb: Tmdb
    index: KeywordIndex
    defs: tuple


def load_knowledge(cfg: RunConfig, drop=frozenset()) -> Knowledge:
    tmdb = load_tmdb(cfg.tmdb)
    index = title_index(tmdb) if TMDB in drop else build_keyword_index(tmdb)
    return Knowledge(tmdb, index, tuple(load_asset_definitions(cfg.asset_definitions)))


@dataclass
class PropertyResult:
    asset: DetectedAsset
    cwe_id: int
    prop: SecurityProperty | None
    outcome: VerificationOutcome | None = None
    fixed_outcome: VerificationOutcome | None = None
    iterations: int = 0
    decision: str = ""
    flags: list[str] = field(default_factory=list)

    @property
    def validated(self) -> bool:
        return self.prop is not None and self.prop.status == VALIDATED


@dataclass
class CaseResult:
    case: DesignCase
    module: str = ""
    assets: list[DetectedAsset] = field(default_factory=list)
    threat_model: SocThreatModel | None = None
    context: SocContext | None = None
    results: list[PropertyResult] = field(default_factory=list)
    fsms: list[FsmCandidate] = field(default_factory=list)
    symbols: list = field(default_factory=list)
    ast: object = None
    flags: list[str] = field(default_factory=list)

    def validated_properties(self) -> list[SecurityProperty]:
        return [r.prop for r in self.results if r.validated]


def _read(path: Path | None) -> str | None:
    return None if path is None else Path(path).read_text(encoding="utf-8")


def _trace(trace_path: Path | None, rtl_text: str | None) -> Trace | None:
    if trace_path is None or rtl_text is None or not Path(trace_path).exists():
        return None
    return load_trace(trace_path, trace_widths(rtl_text))


def build_context(ast, mod, assets, doc_text: str | None, drop=frozenset(), backend=None) -> SocContext:
    symbols = symbol_table(mod)
    doc = DesignDoc.empty() if DESIGN_DOC in drop or doc_text is None else ingest_design_doc(doc_text)
    if AST_DIGEST in drop:
        digest = AstDigest.empty()
    else:
        digest = ast_digest(mod, {s.name for s in symbols if s.storage != "parameter"})
    summary = RtlSummary.empty() if RTL_SUMMARY in drop else summarize_rtl(mod, assets, backend)
    return assemble_context(doc, digest, summary)


def _reach_outcome(prop: SecurityProperty, fsms: list[FsmCandidate], symbols, flags: list[str]):
    """Budget exhaustion of the asset's FSM makes a passing FSM-integrity verdict inconclusive."""
    if prop.family != FSM_INTEGRITY:
        return None
    fsm = next((f for f in fsms if prop.asset == f.state_signal or prop.asset in f.flag_signals), None)
    if fsm is None:
        return None
    inputs = {s.name for s in symbols if s.direction == "input" and s.width == 1}
    used = sorted({n for _, _, g in fsm.transitions for n in inputs if n in g.replace("(", " ").replace(")", " ")
                   .replace("!", " ").replace("&", " ").replace("|", " ").split()})
    if len(used) > MAX_INPUTS:
        flags.append("reach skipped: too many free inputs")
        return None
    try:
        return bounded_reach(fsm, used)
    except (GuardUnsupported, DepthExceeded) as exc:
        flags.append(f"reach skipped: {exc}")
        return None


def check_property(prop: SecurityProperty, trace: Trace, reach=None) -> VerificationOutcome:
    out = eval_property(trace, prop.sva_text, covers=prop.covers)
    if reach is not None and reach.budget_exhausted and out.verdict in (HOLDS, VACUOUS):
        return VerificationOutcome(INCONCLUSIVE, covers_hit=out.covers_hit)
    return out


def develop_property(bundle: PromptBundle, backend: GenerationBackend, symbols, trace: Trace | None,
                     fsms=(), max_iterations: int = 3) -> PropertyResult:
    """Generate, validate, cover and check one (asset, CWE) property, refining up to the bound."""
    res = PropertyResult(bundle.asset, bundle.cwe.cwe_id, None)
    while True:
        res.iterations = bundle.iteration
        try:
            cands = generate_properties(bundle, backend)
        except NoTemplate as exc:
            res.flags.append(str(exc))
            res.decision = FLAG_MANUAL
            return res
        except BackendError as exc:
            res.flags.append(f"backend: {exc}")
            res.decision = FLAG_MANUAL
            return res
        prop, errors = None, []
        for c in cands:
            try:
                c = add_nonvacuity_covers(c) if c.antecedent else c
            except SvaSyntaxError as exc:
                errors = [str(exc)]
                continue
            c, errs = mark_validated(c, symbols)
            if not errs:
                prop = c
                break
            errors = [f"{e.kind}:{e.name}" for e in errs]
            prop = prop or c
        res.prop = prop
        outcome = None
        if prop is None or prop.status != VALIDATED:
            res.flags.append("binding: " + ", ".join(errors or ["no candidate"]))
            feedback = "binding errors: " + ", ".join(errors)
        elif trace is None:
            res.decision = "unchecked"
            return res
        else:
            try:
                outcome = check_property(prop, trace, _reach_outcome(prop, list(fsms), symbols, res.flags))
            except (UnknownSignal, DepthExceeded) as exc:
                # not a verdict: inconclusive is reserved for reach budget exhaustion
                res.flags.append(f"check: {exc}")
                feedback = f"property cannot be checked on the trace: {exc}"
        res.outcome = outcome
        if outcome is None:
            decision_action = RETRY
            if bundle.iteration >= max_iterations:
                decision_action = FLAG_MANUAL
        else:
            d = refine(prop, outcome, bundle.iteration, bundle)
            decision_action, feedback = d.action, d.feedback
            if decision_action == RETRY and bundle.iteration >= max_iterations:
                decision_action = FLAG_MANUAL
        res.decision = decision_action
        if decision_action != RETRY:
            return res
        bundle = bundle.next(feedback)


def analyze_case(case: DesignCase, kb: Knowledge, cfg: RunConfig, drop=frozenset(),
                 backend: GenerationBackend | None = None) -> CaseResult:
    backend = backend or make_backend(cfg.backend)
    out = CaseResult(case)
    rtl = _read(case.rtl)
    partial = False
    try:
        ast = parse_rtl(rtl)
    except RtlSyntaxError as exc:
        if exc.partial is None or not exc.partial.modules:
            out.flags.append(f"parse error: {exc}")
            return out
        ast, partial = exc.partial, True
        out.flags.append("partial module: properties skipped")
    mod = ast.module()
    out.ast, out.module = ast, mod["name"]
    symbols = symbol_table(mod)
    fsms = extract_fsms(mod)
    out.symbols, out.fsms = symbols, fsms
    out.assets = detect_assets(symbols, list(kb.defs), fsms, driver_map(mod, symbols))
    out.threat_model = build_soc_threat_model(out.assets, kb.tmdb, kb.index, cfg.top_k, case.name, fsms)
    if partial:
        return out
    out.context = build_context(ast, mod, out.assets, _read(case.doc), drop, backend)
    trace = _trace(case.trace, rtl)
    fixed_text = _read(case.fixed_rtl)
    fixed_trace = _trace(case.fixed_trace, fixed_text)
    for entry in out.threat_model.entries:
        focus = prune_focus(out.context, entry.asset, ast, cfg.path_depth)
        for hit in entry.hits:
            bundle = PromptBundle(out.context, hit.record or kb.tmdb.records[hit.cwe_id], entry.asset, focus)
            res = develop_property(bundle, backend, symbols, trace, fsms, cfg.max_iterations)
            if res.validated and fixed_trace is not None:
                try:
                    res.fixed_outcome = check_property(res.prop, fixed_trace)
                except (UnknownSignal, DepthExceeded) as exc:
                    res.flags.append(f"fixed check: {exc}")
            out.results.append(res)
    return out


def _pick(result: CaseResult, signal: str, cwe_id: int | None) -> PropertyResult | None:
    cands = [r for r in result.results if r.asset.signal == signal and (cwe_id is None or r.cwe_id == cwe_id)]
    if not cands:
        return None
    score = {}
    for e in result.threat_model.entries if result.threat_model else ():
        for h in e.hits:
            score[(e.asset.key, h.cwe_id)] = h.score
    cands.sort(key=lambda r: (-score.get((r.asset.key, r.cwe_id), 0.0), r.asset.asset_type.value))
    return cands[0]


def _row(result: CaseResult, signal: str, cfg: RunConfig) -> ReportRow:
    case = result.case
    golden = case.golden or {}
    hits = result.threat_model.signal_hits(signal, cfg.top_k) if result.threat_model else []
    ids = tuple(h.cwe_id for h in hits)
    target = golden.get("target_cwe")
    detected = None if target is None else target in ids[: cfg.top_k]
    pr = _pick(result, signal, target if target is not None else (ids[0] if ids else None))
    flags = list(result.flags) + (pr.flags if pr else [])
    if pr is None or not pr.validated:
        return ReportRow(case.name, result.module, golden.get("bug", ""), signal, ids, cfg.top_k, target,
                         detected, None if pr is None or pr.prop is None else pr.prop.sva_text,
                         None if pr is None or pr.prop is None else pr.prop.name,
                         iterations=pr.iterations if pr else 0, flags=tuple(flags))
    vb = pr.outcome.verdict if pr.outcome else None
    vf = pr.fixed_outcome.verdict if pr.fixed_outcome else None
    hits_fixed = sum(len(v) for v in pr.fixed_outcome.covers_hit.values()) if pr.fixed_outcome else 0
    expected = golden.get("expected", {})
    if expected:
        prop_ok = vb == expected.get("buggy")
    else:
        prop_ok = vb in (FAILS, HOLDS)
    fv_ok = vb == FAILS and (vf == HOLDS and hits_fixed > 0 if case.fixed_trace else True)
    if pr.decision == FLAG_MANUAL:
        flags.append("flagged for manual review")
    return ReportRow(case.name, result.module, golden.get("bug", ""), signal, ids, cfg.top_k, target, detected,
                     pr.prop.sva_text, pr.prop.name, prop_ok, fv_ok, vb, vf,
                     pr.outcome.cycle if pr.outcome else None, hits_fixed, pr.iterations, tuple(flags))


def rows_for(result: CaseResult, cfg: RunConfig) -> list[ReportRow]:
    golden = result.case.golden
    if golden:
        return [_row(result, golden["asset"], cfg)]
    if not result.assets:
        return [ReportRow(result.case.name, result.module, "", "", flags=tuple(result.flags))]
    return [_row(result, s, cfg) for s in sorted({a.signal for a in result.assets})]


def emit_case(result: CaseResult, out_dir: Path) -> tuple[Path, Path] | None:
    if result.ast is None or result.context is None:
        return None
    plan = plan_for(result.ast, [str(result.case.rtl)], result.validated_properties())
    return write_outputs(plan, Path(out_dir) / result.case.name)


def _check_drop(drop) -> frozenset:
    drop = frozenset(drop)
    bad = sorted(drop - set(ABLATABLE))
    if bad:
        raise ConfigError(f"unknown ablation part(s): {', '.join(bad)}")
    if drop == frozenset(ABLATABLE):
        raise ConfigError("cannot drop the TMDB and every context part at once")
    return drop


def analyze_all(cfg: RunConfig, drop=frozenset()) -> tuple[list[CaseResult], Knowledge]:
    cfg.validate()
    drop = _check_drop(drop)
    try:
        kb = load_knowledge(cfg, drop)
    except (AtlasError, OSError) as exc:
        raise ConfigError(f"cannot load knowledge base: {exc}") from exc
    cases = cases_from_config(cfg)
    if not cases:
        raise ConfigError("no designs to analyze")
    backend = make_backend(cfg.backend)

    def one(case: DesignCase) -> CaseResult:
        try:
            return analyze_case(case, kb, cfg, drop, backend)
        except (AtlasError, OSError, TraceError) as exc:
            log.warning("%s: %s", case.name, exc)
            res = CaseResult(case)
            res.flags.append(f"pipeline error: {exc}")
            return res

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(pool.map(one, cases))
    if all(r.ast is None for r in results):
        raise ConfigError("no design file could be loaded")
    return results, kb


def run_pipeline(cfg: RunConfig, drop=frozenset(), emit: bool = True) -> RunReport:
    results, kb = analyze_all(cfg, drop)
    if emit and cfg.output_dir is not None:
        for r in results:
            emit_case(r, cfg.output_dir)
    rows = [row for r in results for row in rows_for(r, cfg)]
    return RunReport.build(rows, drop, kb.tmdb.version, cfg.backend)


def ablate(cfg: RunConfig, drop) -> RunReport:
    """Run with the named parts replaced by empty stand-ins; the TMDB falls back to CWE titles."""
    return run_pipeline(replace(cfg, output_dir=None), _check_drop(drop))
