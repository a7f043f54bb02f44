from __future__ import annotations

import json

import pytest

from atlas.corpus import ASSETS5_DIR, CORPUS_ROOT, load_corpus
from atlas.knowledge import (
    DEFAULT_ASSET_DEFINITIONS, DEFAULT_TMDB, build_keyword_index, load_asset_definitions, load_tmdb,
)
from atlas.rtl import parse_rtl


@pytest.fixture(scope="session")
def tmdb():
    return load_tmdb(DEFAULT_TMDB)


@pytest.fixture(scope="session")
def index(tmdb):
    return build_keyword_index(tmdb)


@pytest.fixture(scope="session")
def defs():
    return load_asset_definitions(DEFAULT_ASSET_DEFINITIONS)


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(CORPUS_ROOT)


@pytest.fixture(scope="session")
def dma(corpus):
    return next(f for f in corpus if f.name == "dma_sticky_abort")


@pytest.fixture(scope="session")
def dma_ast(dma):
    return parse_rtl(dma.buggy_rtl)


@pytest.fixture(scope="session")
def dma_mod(dma_ast):
    return dma_ast.module()


@pytest.fixture(scope="session")
def assets5_golden():
    return json.loads((ASSETS5_DIR / "golden.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def assets5_source():
    return (ASSETS5_DIR / "soc_assets.sv").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def dma_symbols(dma_mod):
    from atlas.rtl import symbol_table

    return symbol_table(dma_mod)


@pytest.fixture(scope="session")
def dma_assets(dma_mod, dma_symbols, defs):
    from atlas.assets import detect_assets
    from atlas.rtl import driver_map, extract_fsms

    return detect_assets(dma_symbols, defs, extract_fsms(dma_mod), driver_map(dma_mod, dma_symbols))


@pytest.fixture(scope="session")
def dma_context(dma, dma_ast, dma_mod, dma_assets):
    from atlas.pipeline import build_context

    return build_context(dma_ast, dma_mod, dma_assets, dma.doc)


@pytest.fixture(scope="session")
def dma_bundle(dma_ast, dma_assets, dma_context, tmdb):
    from atlas.propgen import PromptBundle, prune_focus

    abort = next(a for a in dma_assets if a.signal == "abort")
    return PromptBundle(dma_context, tmdb.get(1245), abort, prune_focus(dma_context, abort, dma_ast))


@pytest.fixture(scope="session")
def corpus_results():
    from atlas.config import RunConfig
    from atlas.pipeline import analyze_all

    results, _ = analyze_all(RunConfig(corpus=CORPUS_ROOT, workers=1))
    return results


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
