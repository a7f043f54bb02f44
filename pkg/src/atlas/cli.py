"""Command-line entry point: ``atlas <subcommand>``.

Exit codes: 0 success, 1 configuration error, 2 pipeline error, 3 golden mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from atlas import __version__
from atlas.config import RunConfig, load_config
from atlas.corpus import trace_widths
from atlas.emitter import plan_for, write_outputs
from atlas.errors import AtlasError, ConfigError
from atlas.knowledge import audit_tmdb, build_keyword_index, load_tmdb
from atlas.minicheck import eval_property, load_trace
from atlas.pipeline import ABLATABLE, CONTEXT_PARTS, DesignCase, ablate, analyze_case, load_knowledge, run_pipeline
from atlas.report import RunReport, parse_report, render_report

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PIPELINE = 2
EXIT_GOLDEN = 3

log = logging.getLogger("atlas")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    designs = getattr(args, "design", None)
    overrides = {
        "tmdb": getattr(args, "tmdb", None),
        "asset_definitions": getattr(args, "asset_defs", None),
        "designs": list(designs) if designs else None,
        "design_doc": getattr(args, "doc", None),
        "traces_dir": getattr(args, "traces", None),
        "corpus": getattr(args, "corpus", None),
        "backend": getattr(args, "backend", None),
        "top_k": getattr(args, "top_k", None),
        "max_iterations": getattr(args, "max_iterations", None),
        "path_depth": getattr(args, "path_depth", None),
        "output_dir": getattr(args, "out", None),
        "workers": getattr(args, "workers", None),
    }
    return cfg.with_overrides(**overrides)


def _single_case(args, cfg: RunConfig) -> DesignCase:
    rtl = Path(args.design)
    if not rtl.exists():
        raise ConfigError(f"design file does not exist: {rtl}")
    trace = Path(args.trace) if getattr(args, "trace", None) else None
    return DesignCase(rtl.stem, rtl, cfg.design_doc, trace)


def _analyze(args):
    cfg = _config(args)
    cfg = replace(cfg, designs=(Path(args.design),), corpus=None).validate()
    kb = load_knowledge(cfg)
    return analyze_case(_single_case(args, cfg), kb, cfg), cfg


# -- subcommands ---------------------------------------------------------------


def cmd_tmdb_validate(args) -> int:
    version, count, found = audit_tmdb(args.tmdb or RunConfig().tmdb)
    problems = [{"cwe_id": label, "field": v.field, "reason": v.reason} for label, v in found]
    _write(_dump({"version": version, "records": count, "violations": problems}), None)
    return EXIT_OK if not problems else EXIT_PIPELINE


def cmd_tmdb_index(args) -> int:
    tmdb = load_tmdb(args.tmdb or RunConfig().tmdb)
    _write(_dump(build_keyword_index(tmdb).to_dict()), args.output)
    return EXIT_OK


def cmd_detect_assets(args) -> int:
    result, _ = _analyze(args)
    _write(_dump([a.to_dict() for a in result.assets]), args.output)
    return EXIT_OK if result.ast is not None else EXIT_PIPELINE


def cmd_threat_model(args) -> int:
    result, _ = _analyze(args)
    if result.threat_model is None:
        log.error("%s", "; ".join(result.flags))
        return EXIT_PIPELINE
    _write(_dump(result.threat_model.to_dict()), args.output)
    return EXIT_OK


def _property_records(result) -> list[dict]:
    out = []
    for r in result.results:
        if r.prop is None:
            continue
        out.append({"asset": r.asset.signal, "asset_type": r.asset.asset_type.value, "cwe_id": r.cwe_id,
                    "property": r.prop.to_dict(), "sva": r.prop.sva_text, "iterations": r.iterations,
                    "decision": r.decision, "flags": list(r.flags),
                    "outcome": r.outcome.to_dict() if r.outcome else None})
    return out


def cmd_gen_properties(args) -> int:
    result, _ = _analyze(args)
    if result.context is None:
        log.error("%s", "; ".join(result.flags))
        return EXIT_PIPELINE
    records = _property_records(result)
    if args.validated_only:
        records = [r for r in records if r["property"]["status"] == "validated"]
    _write(_dump(records), args.output)
    return EXIT_OK


def cmd_emit(args) -> int:
    result, _ = _analyze(args)
    if result.ast is None or result.context is None:
        log.error("%s", "; ".join(result.flags))
        return EXIT_PIPELINE
    plan = plan_for(result.ast, [str(Path(args.design))], result.validated_properties())
    for path in write_outputs(plan, args.out):
        print(path)
    return EXIT_OK


def cmd_check_trace(args) -> int:
    rtl = Path(args.design).read_text(encoding="utf-8")
    trace = load_trace(args.trace, trace_widths(rtl))
    outcome = eval_property(trace, args.property, covers=tuple(args.cover or ()))
    _write(_dump(outcome.to_dict()), None)
    return EXIT_OK


def _finish_report(report: RunReport, args, label: str = "report") -> int:
    out = getattr(args, "out", None)
    if out:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        _write(render_report(report, "json"), str(out / f"{label}.json"))
        _write(render_report(report, "table"), str(out / f"{label}.md"))
        if not args.no_figures:
            from atlas.plots import outcome_grid

            outcome_grid(report, out / f"{label}.png")
    sys.stdout.write(render_report(report, args.format))
    if getattr(args, "check_golden", False):
        bad = [r.design for r in report.rows if r.detected is not None and not r.accurate]
        if bad:
            log.error("golden mismatch: %s", ", ".join(bad))
            return EXIT_GOLDEN
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _config(args)
    return _finish_report(run_pipeline(cfg), args)


def _drop_label(drop) -> str:
    return "+".join(sorted(drop)) or "full"


def cmd_ablate(args) -> int:
    cfg = _config(args)
    if args.sweep:
        configs = {"full": frozenset(), "no tmdb": frozenset({"tmdb"})}
        # single-context runs keep one part and drop the other two
        for keep in CONTEXT_PARTS:
            configs[f"{keep} only"] = frozenset(CONTEXT_PARTS) - {keep}
        reports = {label: ablate(cfg, drop) for label, drop in configs.items()}
        summary = {k: r.aggregates for k, r in reports.items()}
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            _write(_dump(summary), str(out / "ablation.json"))
            if not args.no_figures:
                from atlas.plots import ablation_bars

                ablation_bars(reports, out / "ablation.png")
        _write(_dump(summary), None)
        return EXIT_OK
    drop = frozenset(p.strip() for p in (args.drop or "").split(",") if p.strip())
    return _finish_report(ablate(cfg, drop), args, f"ablation_{_drop_label(drop)}")


def cmd_report(args) -> int:
    report = parse_report(Path(args.report).read_text(encoding="utf-8"))
    if not report.consistent():
        log.error("aggregates do not match the rows")
        return EXIT_PIPELINE
    sys.stdout.write(render_report(report, args.format))
    if args.figure:
        from atlas.plots import outcome_grid

        outcome_grid(report, args.figure)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def _run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI-style config file; flags override it")
    p.add_argument("--tmdb", help="threat model database JSON")
    p.add_argument("--asset-defs", help="asset definitions JSON")
    p.add_argument("--backend", choices=("deterministic_template", "remote"))
    p.add_argument("--top-k", type=int)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--path-depth", type=int)
    p.add_argument("--doc", help="design document (markdown)")


def _batch_options(p: argparse.ArgumentParser) -> None:
    _run_options(p)
    p.add_argument("--design", action="append", help="design file; repeatable")
    p.add_argument("--traces", help="directory holding <design>.csv traces")
    p.add_argument("--corpus", help="fixture corpus directory")
    p.add_argument("--out", help="output directory for report, figures and emitted checkers")
    p.add_argument("--workers", type=int)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--check-golden", action="store_true", help="exit 3 unless every graded row is accurate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atlas", description="Threat-model-driven SVA generation for RTL")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    tmdb = sub.add_parser("tmdb", help="threat model database tools")
    tsub = tmdb.add_subparsers(dest="tmdb_command", required=True)
    p = tsub.add_parser("validate", help="check every record against the template")
    p.add_argument("--tmdb")
    p.set_defaults(func=cmd_tmdb_validate)
    p = tsub.add_parser("index", help="print the keyword index")
    p.add_argument("--tmdb")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_tmdb_index)

    for name, func, help_text in (
        ("detect-assets", cmd_detect_assets, "list security assets in a design"),
        ("threat-model", cmd_threat_model, "map assets to ranked CWEs"),
        ("gen-properties", cmd_gen_properties, "generate and check security properties"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("design")
        _run_options(p)
        p.add_argument("--trace", help="trace CSV used to check generated properties")
        p.add_argument("-o", "--output")
        if name == "gen-properties":
            p.add_argument("--validated-only", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("emit", help="write the bound SVA checker and proof harness")
    p.add_argument("design")
    _run_options(p)
    p.add_argument("--trace")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("check-trace", help="evaluate one property on a trace")
    p.add_argument("trace")
    p.add_argument("--design", required=True, help="design file supplying signal widths")
    p.add_argument("--property", required=True)
    p.add_argument("--cover", action="append")
    p.set_defaults(func=cmd_check_trace)

    p = sub.add_parser("run", help="run the whole flow and report")
    _batch_options(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ablate", help="run with parts of the knowledge or context removed")
    _batch_options(p)
    p.add_argument("--drop", help=f"comma-separated subset of {','.join(ABLATABLE)}")
    p.add_argument("--sweep", action="store_true", help="full, no-TMDB and each single-context run")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("report", help="render a saved JSON report")
    p.add_argument("report")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--figure", help="also write the outcome grid to this image path")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("config: %s", exc)
        return EXIT_CONFIG
    except (AtlasError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
