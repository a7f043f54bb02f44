"""Run reports: per-design rows, aggregate rates and their JSON/table renderings."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

SCHEMA_VERSION = 1
TABLE_COLUMNS = ("Module", "Bug", "Detected CWEs", "Prop", "FV")
CHECK = "✓"
CROSS = "✗"


@dataclass(frozen=True)
class ReportRow:
    design: str
    module: str
    bug: str
    asset: str
    detected_cwes: tuple[int, ...] = ()
    top_k: int = 3
    target_cwe: int | None = None
    detected: bool | None = None  # target CWE within the top-k; None without a golden
    property_text: str | None = None
    property_name: str | None = None
    prop_ok: bool = False
    fv_ok: bool = False
    verdict_buggy: str | None = None
    verdict_fixed: str | None = None
    fail_cycle: int | None = None
    covers_hit_fixed: int = 0
    iterations: int = 0
    flags: tuple[str, ...] = ()

    @property
    def accurate(self) -> bool:
        return bool(self.detected and self.prop_ok and self.fv_ok)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["detected_cwes"] = list(self.detected_cwes)
        d["flags"] = list(self.flags)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ReportRow":
        d = dict(d)
        d["detected_cwes"] = tuple(d.get("detected_cwes", ()))
        d["flags"] = tuple(d.get("flags", ()))
        return cls(**d)


def compute_aggregates(rows) -> dict:
    graded = [r for r in rows if r.detected is not None]
    detected = [r for r in graded if r.detected]
    accurate = [r for r in detected if r.accurate]
    return {
        "rows": len(rows),
        "graded": len(graded),
        "detected": len(detected),
        "accurate": len(accurate),
        "cwe_detection_rate": len(detected) / len(graded) if graded else 0.0,
        "property_accuracy_given_detection": len(accurate) / len(detected) if detected else 0.0,
        "fv_discriminating": sum(1 for r in rows if r.fv_ok),
    }


@dataclass(frozen=True)
class RunReport:
    rows: tuple[ReportRow, ...]
    aggregates: dict = field(default_factory=dict)
    ablation: tuple[str, ...] = ()
    tmdb_version: str = ""
    backend: str = ""
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def build(cls, rows, ablation=(), tmdb_version: str = "", backend: str = "") -> "RunReport":
        rows = tuple(sorted(rows, key=lambda r: (r.design, r.asset)))
        return cls(rows, compute_aggregates(rows), tuple(sorted(ablation)), tmdb_version, backend)

    def consistent(self) -> bool:
        return compute_aggregates(self.rows) == self.aggregates

    def to_dict(self) -> dict:
        return {"schema_version": self.schema_version, "ablation": list(self.ablation),
                "tmdb_version": self.tmdb_version, "backend": self.backend,
                "aggregates": dict(self.aggregates), "rows": [r.to_dict() for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {d.get('schema_version')!r}")
        return cls(tuple(ReportRow.from_dict(r) for r in d["rows"]), dict(d["aggregates"]),
                   tuple(d.get("ablation", ())), d.get("tmdb_version", ""), d.get("backend", ""),
                   d["schema_version"])


def _cwe_cell(row: ReportRow) -> str:
    shown = list(row.detected_cwes[: row.top_k])
    text = ",".join(str(c) for c in shown) or "-"
    extra = row.detected_cwes[row.top_k:]
    if extra:
        text += " (tie: " + ",".join(str(c) for c in extra) + ")"
    return text


def render_table(report: RunReport) -> str:
    lines = ["| " + " | ".join(TABLE_COLUMNS) + " |", "|" + "|".join("---" for _ in TABLE_COLUMNS) + "|"]
    for r in report.rows:
        cells = (r.design, r.bug or r.asset, _cwe_cell(r), CHECK if r.prop_ok else CROSS,
                 CHECK if r.fv_ok else CROSS)
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def render_report(report: RunReport, fmt: str = "table") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if fmt in ("table", "table-text", "text"):
        return render_table(report)
    raise ValueError(f"unknown report format '{fmt}'")


def parse_report(text: str) -> RunReport:
    return RunReport.from_dict(json.loads(text))
