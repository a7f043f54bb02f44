"""The bundled buggy/fixed fixture corpus and its golden expectations."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from atlas.minicheck.trace import Trace, parse_trace_csv
from atlas.rtl import parse_rtl, simulate, symbol_table

FIXTURE_ROOT = Path(__file__).parent / "fixtures"
CORPUS_ROOT = FIXTURE_ROOT / "corpus"
ASSETS5_DIR = FIXTURE_ROOT / "assets5"


@dataclass(frozen=True)
class Fixture:
    name: str
    root: Path
    golden: dict = field(compare=False)

    @property
    def buggy_path(self) -> Path:
        return self.root / "buggy.sv"

    @property
    def fixed_path(self) -> Path:
        return self.root / "fixed.sv"

    @property
    def doc_path(self) -> Path:
        return self.root / "doc.md"

    @property
    def buggy_rtl(self) -> str:
        return self.buggy_path.read_text(encoding="utf-8")

    @property
    def fixed_rtl(self) -> str:
        return self.fixed_path.read_text(encoding="utf-8")

    @property
    def doc(self) -> str:
        return self.doc_path.read_text(encoding="utf-8")

    @property
    def target_cwe(self) -> int:
        return int(self.golden["target_cwe"])

    @property
    def asset(self) -> str:
        return self.golden["asset"]

    @property
    def bug(self) -> str:
        return self.golden["bug"]

    @property
    def module(self) -> str:
        return self.golden["module"]

    def trace(self, variant: str) -> Trace:
        """The bundled trace of the ``buggy`` or ``fixed`` design."""
        widths = trace_widths(self.buggy_rtl if variant == "buggy" else self.fixed_rtl)
        text = (self.root / f"{variant}.csv").read_text(encoding="utf-8")
        return parse_trace_csv(text, widths)


def trace_widths(rtl: str) -> dict[str, int]:
    return {s.name: s.width for s in symbol_table(parse_rtl(rtl)) if s.storage != "parameter"}


def load_fixture(root: Path | str) -> Fixture:
    root = Path(root)
    golden = json.loads((root / "golden.json").read_text(encoding="utf-8"))
    return Fixture(golden.get("name", root.name), root, golden)


def load_corpus(root: Path | str = CORPUS_ROOT) -> list[Fixture]:
    """Every fixture under ``root``, in name order."""
    dirs = sorted(p for p in Path(root).iterdir() if (p / "golden.json").is_file())
    return [load_fixture(p) for p in dirs]


def read_stimulus(text: str) -> list[dict[str, int | None]]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rec.pop("cycle", None)
        rows.append({k: None if v.strip().lower() == "x" else int(v) for k, v in rec.items()})
    return rows


def render_trace(rtl: str, stimulus: list[dict]) -> str:
    """Simulate ``rtl`` under ``stimulus`` and render the trace CSV."""
    res = simulate(parse_rtl(rtl), stimulus)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["cycle", *res.columns])
    for t, row in enumerate(res.rows):
        w.writerow([t, *("x" if row[c] is None else row[c] for c in res.columns)])
    return out.getvalue()


def regenerate_traces(fixture_dir: Path | str) -> dict[str, str]:
    """Rewrite ``buggy.csv`` and ``fixed.csv`` from the RTL and ``stimulus.csv``."""
    root = Path(fixture_dir)
    stim = read_stimulus((root / "stimulus.csv").read_text(encoding="utf-8"))
    out = {}
    for variant in ("buggy", "fixed"):
        text = render_trace((root / f"{variant}.sv").read_text(encoding="utf-8"), stim)
        (root / f"{variant}.csv").write_text(text, encoding="utf-8")
        out[variant] = text
    return out
