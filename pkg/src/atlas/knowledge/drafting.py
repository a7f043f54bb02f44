"""Backend-assisted drafting of new threat model records from CWE metadata."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from atlas.errors import AtlasError, BackendError, InvalidDraft
from atlas.knowledge.model import ThreatModelRecord, Violation
from atlas.knowledge.tmdb import record_from_dict, validate_record

MAX_DRAFT_ATTEMPTS = 3
DEFAULT_EXEMPLAR_COUNT = 3

_CVE_RE = re.compile(r"\bCVE-\d{4}-\d{4,}\b")
_CAPEC_RE = re.compile(r"\bCAPEC-(\d+)\b")
_WORD_RE = re.compile(r"[a-z][a-z0-9-]+")
_STOP = frozenset(
    "a an and are as at be by for from in into is it its not of on or that the this to "
    "use used using with without when which".split()
)


@dataclass
class CweMeta:
    cwe_id: int
    title: str
    description: str = ""
    summaries: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"cwe_id": self.cwe_id, "title": self.title,
                "description": self.description, "summaries": list(self.summaries)}


def _first_sentence(text: str) -> str:
    text = " ".join(text.split())
    head = re.split(r"(?<=[.!?])\s", text, maxsplit=1)[0]
    return head.rstrip(".")


def _title_keywords(title: str) -> list[str]:
    words = [w for w in _WORD_RE.findall(title.lower()) if w not in _STOP]
    return sorted(dict.fromkeys(words))


def _closest_exemplar(meta: dict, examples: list[dict]) -> dict:
    words = set(_title_keywords(meta["title"] + " " + meta.get("description", "")))
    return max(examples, key=lambda ex: (len(words & set(ex.get("keywords", ()))), -ex["cwe_id"]))


def template_draft(payload: dict) -> dict:
    """Deterministic drafting handler.

    An exemplar for the same CWE is returned as-is; otherwise the record is
    assembled from the metadata text and the closest exemplar's adversaries.
    """
    meta, examples = payload["cwe_meta"], payload["examples"]
    for ex in examples:
        if ex["cwe_id"] == meta["cwe_id"]:
            return {"record": dict(ex, reviewed=False)}

    text = " ".join(meta.get("summaries", []))
    nearest = _closest_exemplar(meta, examples)
    title = meta["title"]
    vuln = _first_sentence(meta.get("description", "")) or f"The design exhibits: {title}"
    record = {
        "cwe_id": meta["cwe_id"],
        "title": title,
        "adversaries": list(nearest["adversaries"]),
        "assets": f"Hardware assets exposed by {title.lower()}",
        "attack_surfaces": nearest["attack_surfaces"],
        "vulnerabilities": vuln,
        "threats": f"An adversary exploits {title.lower()} to reach protected assets",
        "related_cves": sorted(set(_CVE_RE.findall(text))),
        "related_capecs": sorted({int(n) for n in _CAPEC_RE.findall(text)}),
        "keywords": _title_keywords(title),
        "reviewed": False,
        "review_notes": "",
    }
    return {"record": record}


def _parse_draft(response: dict) -> tuple[ThreatModelRecord | None, list[Violation]]:
    raw = response.get("record") if isinstance(response, dict) else None
    if not isinstance(raw, dict):
        raise BackendError("draft response lacks a 'record' object")
    try:
        record = record_from_dict(raw, where="draft")
    except AtlasError as exc:
        return None, [Violation(getattr(exc, "field", None) or "record", str(exc))]
    return record, validate_record(record)


def draft_threat_model(cwe_meta: CweMeta | dict, examples: list[ThreatModelRecord],
                       backend, max_attempts: int = MAX_DRAFT_ATTEMPTS) -> ThreatModelRecord:
    """Ask the backend for a record, retrying with the violations as feedback.

    The result always has ``reviewed=False``; flipping it is a human step.
    """
    if not examples:
        raise ValueError("at least one exemplar record is required")
    meta = cwe_meta.to_dict() if isinstance(cwe_meta, CweMeta) else dict(cwe_meta)
    payload = {"cwe_meta": meta, "examples": [e.to_dict() for e in examples]}
    feedback: list[Violation] = []
    for attempt in range(1, max_attempts + 1):
        payload["attempt"] = attempt
        payload["feedback"] = [f"{v.field}: {v.reason}" for v in feedback]
        record, feedback = _parse_draft(backend.request("draft_threat_model", payload))
        if record is not None and not feedback:
            return record.with_changes(reviewed=False)
    raise InvalidDraft(f"CWE-{meta['cwe_id']}: draft still invalid after {max_attempts} attempts",
                       feedback)
