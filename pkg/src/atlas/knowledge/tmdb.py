"""Loading, saving and validating the threat model database."""

from __future__ import annotations

import json
from pathlib import Path

from atlas.errors import DuplicateCwe, ParseError, SchemaError
from atlas.knowledge.model import (
    CVE_PATTERN,
    AdversaryKind,
    ThreatModelRecord,
    Tmdb,
    Violation,
)

_TEXT_FIELDS = ("assets", "attack_surfaces", "vulnerabilities", "threats")
_REQUIRED = ("cwe_id", "title", "adversaries", *_TEXT_FIELDS)
_ADVERSARY_NAMES = {k.value for k in AdversaryKind}


def _blank(value) -> bool:
    return not isinstance(value, str) or not value.strip()


def validate_record(record: ThreatModelRecord) -> list[Violation]:
    """Check a record against the template invariants.

    Never raises; malformed attribute types are reported as violations.
    """
    out: list[Violation] = []
    cwe_id = getattr(record, "cwe_id", None)
    if not isinstance(cwe_id, int) or isinstance(cwe_id, bool) or cwe_id <= 0:
        out.append(Violation("cwe_id", "not a positive integer"))
    if _blank(getattr(record, "title", None)):
        out.append(Violation("title", "empty"))

    adversaries = getattr(record, "adversaries", None)
    if not adversaries:
        out.append(Violation("adversaries", "empty"))
    else:
        try:
            unknown = [a for a in adversaries if str(getattr(a, "value", a)) not in _ADVERSARY_NAMES]
        except TypeError:
            unknown = [adversaries]
        if unknown:
            out.append(Violation("adversaries", f"unknown adversary model {unknown[0]!r}"))

    for name in _TEXT_FIELDS:
        if _blank(getattr(record, name, None)):
            out.append(Violation(name, "empty"))

    vulns, threats = getattr(record, "vulnerabilities", None), getattr(record, "threats", None)
    if not _blank(vulns) and not _blank(threats):
        if " ".join(vulns.split()).casefold() == " ".join(threats.split()).casefold():
            out.append(Violation("threats", "duplicates vulnerabilities"))

    for cve in getattr(record, "related_cves", ()) or ():
        if not isinstance(cve, str) or not CVE_PATTERN.match(cve):
            out.append(Violation("related_cves", f"malformed CVE id {cve!r}"))
    for capec in getattr(record, "related_capecs", ()) or ():
        if not isinstance(capec, int) or isinstance(capec, bool) or capec <= 0:
            out.append(Violation("related_capecs", f"not a positive integer: {capec!r}"))

    keywords = getattr(record, "keywords", ()) or ()
    seen: set[str] = set()
    for kw in keywords:
        if not isinstance(kw, str) or not kw.strip():
            out.append(Violation("keywords", f"blank keyword {kw!r}"))
            continue
        if kw != kw.lower() or kw != kw.strip():
            out.append(Violation("keywords", f"keyword not normalized: {kw!r}"))
        if kw in seen:
            out.append(Violation("keywords", f"duplicate keyword {kw!r}"))
        seen.add(kw)

    if not isinstance(getattr(record, "reviewed", False), bool):
        out.append(Violation("reviewed", "not a boolean"))
    return out


def record_from_dict(data: dict, where: str = "record") -> ThreatModelRecord:
    """Build a record from its JSON form, enforcing the exact field set."""
    if not isinstance(data, dict):
        raise SchemaError(f"{where}: expected an object", record=where)
    known = set(ThreatModelRecord.field_names())
    label = f"CWE-{data['cwe_id']}" if "cwe_id" in data else where
    extra = sorted(set(data) - known)
    if extra:
        raise SchemaError(f"{label}: unknown field '{extra[0]}'", field=extra[0], record=label)
    for name in _REQUIRED:
        if name not in data:
            raise SchemaError(f"{label}: missing field '{name}'", field=name, record=label)

    def as_list(name):
        value = data.get(name, [])
        if not isinstance(value, list):
            raise SchemaError(f"{label}: field '{name}' must be a list", field=name, record=label)
        return tuple(value)

    for name in ("title", *_TEXT_FIELDS):
        if not isinstance(data[name], str):
            raise SchemaError(f"{label}: field '{name}' must be text", field=name, record=label)
    return ThreatModelRecord(
        cwe_id=data["cwe_id"],
        title=data["title"],
        adversaries=as_list("adversaries"),
        assets=data["assets"],
        attack_surfaces=data["attack_surfaces"],
        vulnerabilities=data["vulnerabilities"],
        threats=data["threats"],
        related_cves=as_list("related_cves"),
        related_capecs=as_list("related_capecs"),
        keywords=as_list("keywords"),
        reviewed=data.get("reviewed", False),
        review_notes=data.get("review_notes", ""),
    )


def tmdb_from_dict(doc) -> Tmdb:
    if not isinstance(doc, dict) or set(doc) != {"version", "records"}:
        raise SchemaError("TMDB envelope must be an object with exactly 'version' and 'records'")
    if not isinstance(doc["version"], str) or not isinstance(doc["records"], list):
        raise SchemaError("TMDB 'version' must be text and 'records' a list")
    records: dict[int, ThreatModelRecord] = {}
    for i, raw in enumerate(doc["records"]):
        rec = record_from_dict(raw, where=f"records[{i}]")
        problems = validate_record(rec)
        if problems:
            first = problems[0]
            raise SchemaError(
                f"CWE-{rec.cwe_id}: field '{first.field}' {first.reason}",
                field=first.field,
                record=rec.cwe_id,
            )
        if rec.cwe_id in records:
            raise DuplicateCwe(f"CWE-{rec.cwe_id} appears more than once", "cwe_id", rec.cwe_id)
        records[rec.cwe_id] = rec
    return Tmdb(records={k: records[k] for k in sorted(records)}, version=doc["version"])


def load_tmdb(path: str | Path) -> Tmdb:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return tmdb_from_dict(doc)


def audit_tmdb(path: str | Path) -> tuple[str, int, list[tuple[object, Violation]]]:
    """Every record-level problem in a TMDB file, rather than the first one.

    Returns ``(version, record_count, [(cwe_id or position, violation)])``. Only an
    unreadable file or a broken envelope raises.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("records"), list):
        raise SchemaError("TMDB envelope must be an object with a 'records' list")
    found: list[tuple[object, Violation]] = []
    seen: set = set()
    for i, raw in enumerate(doc["records"]):
        try:
            rec = record_from_dict(raw, where=f"records[{i}]")
        except SchemaError as exc:
            label = raw.get("cwe_id", f"records[{i}]") if isinstance(raw, dict) else f"records[{i}]"
            found.append((label, Violation(exc.field or "record", str(exc))))
            continue
        found.extend((rec.cwe_id, v) for v in validate_record(rec))
        if rec.cwe_id in seen:
            found.append((rec.cwe_id, Violation("cwe_id", "appears more than once")))
        seen.add(rec.cwe_id)
    return str(doc.get("version", "")), len(doc["records"]), found


def tmdb_to_dict(tmdb: Tmdb) -> dict:
    return {"version": tmdb.version, "records": [r.to_dict() for r in tmdb]}


def save_tmdb(tmdb: Tmdb, path: str | Path) -> None:
    text = json.dumps(tmdb_to_dict(tmdb), indent=2, ensure_ascii=False) + "\n"
    Path(path).write_text(text, encoding="utf-8")
