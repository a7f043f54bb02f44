"""Keyword scoring of assets against the threat model database."""

from __future__ import annotations

from dataclasses import dataclass, field

from atlas.assets import DetectedAsset, asset_query_keywords
from atlas.errors import EmptyTmdb
from atlas.knowledge.index import keyword_forms
from atlas.knowledge.model import KeywordIndex, ThreatModelRecord, Tmdb

PHRASE_WEIGHT = 2.0
TOKEN_WEIGHT = 1.0
DEFAULT_TOP_K = 3


@dataclass(frozen=True)
class CweHit:
    cwe_id: int
    score: float
    matched_keywords: frozenset[str]
    record: ThreatModelRecord | None = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {"cwe_id": self.cwe_id, "score": self.score,
                "matched_keywords": sorted(self.matched_keywords),
                "title": self.record.title if self.record else None}


def _norm(k: str) -> str:
    return " ".join(k.lower().split())


def keyword_weight(keyword: str, phrase: float = PHRASE_WEIGHT, token: float = TOKEN_WEIGHT) -> float:
    return phrase if " " in _norm(keyword) else token


def score_cwe(query, record: ThreatModelRecord, index: KeywordIndex,
              weights: tuple[float, float] = (PHRASE_WEIGHT, TOKEN_WEIGHT)) -> tuple[float, frozenset[str]]:
    """Sum of weights of the query keywords the record answers to (as a phrase or a token form)."""
    matched = frozenset(k for k in {_norm(q) for q in query} if k and record.cwe_id in index.lookup(k))
    score = sum(keyword_weight(k, *weights) for k in matched)
    return score, matched


def rank_hits(hits: list[CweHit], top_k: int) -> list[CweHit]:
    """Score-descending, id-ascending; a tie straddling the cut keeps one extra hit."""
    ranked = sorted((h for h in hits if h.score > 0), key=lambda h: (-h.score, h.cwe_id))
    if len(ranked) > top_k and ranked[top_k - 1].score == ranked[top_k].score:
        return ranked[: top_k + 1]
    return ranked[:top_k]


def map_asset_to_cwes(keywords, tmdb: Tmdb, index: KeywordIndex, top_k: int = DEFAULT_TOP_K,
                      weights: tuple[float, float] = (PHRASE_WEIGHT, TOKEN_WEIGHT)) -> list[CweHit]:
    if top_k < 1:
        raise ValueError("top_k must be at least 1")
    if len(tmdb) == 0:
        raise EmptyTmdb("the threat model database has no records")
    hits = []
    for record in tmdb:
        score, matched = score_cwe(keywords, record, index, weights)
        if score > 0:
            hits.append(CweHit(record.cwe_id, score, matched, record))
    return rank_hits(hits, top_k)


@dataclass(frozen=True)
class ThreatEntry:
    asset: DetectedAsset
    hits: tuple[CweHit, ...]
    top_k: int
    query: frozenset[str] = frozenset()

    def to_dict(self) -> dict:
        return {"asset": self.asset.to_dict(), "query": sorted(self.query), "top_k": self.top_k,
                "hits": [h.to_dict() for h in self.hits]}


@dataclass(frozen=True)
class SocThreatModel:
    design: str
    entries: tuple[ThreatEntry, ...]
    tmdb_version: str

    def entries_for(self, signal: str) -> list[ThreatEntry]:
        return [e for e in self.entries if e.asset.signal == signal]

    def signal_hits(self, signal: str, top_k: int | None = None) -> list[CweHit]:
        """Hits merged over every asset type of one signal, best score per CWE, re-ranked."""
        best: dict[int, CweHit] = {}
        k = top_k
        for e in self.entries_for(signal):
            k = k or e.top_k
            for h in e.hits:
                cur = best.get(h.cwe_id)
                if cur is None or h.score > cur.score:
                    best[h.cwe_id] = h
        return rank_hits(list(best.values()), k or DEFAULT_TOP_K)

    def to_dict(self) -> dict:
        return {"design": self.design, "tmdb_version": self.tmdb_version,
                "entries": [e.to_dict() for e in self.entries]}


def build_soc_threat_model(assets: list[DetectedAsset], tmdb: Tmdb, index: KeywordIndex,
                           top_k: int = DEFAULT_TOP_K, design: str = "", fsms=()) -> SocThreatModel:
    entries = []
    for a in assets:
        query = frozenset(asset_query_keywords(a, fsms))
        entries.append(ThreatEntry(a, tuple(map_asset_to_cwes(query, tmdb, index, top_k)), top_k, query))
    return SocThreatModel(design, tuple(entries), tmdb.version)


def title_index(tmdb: Tmdb) -> KeywordIndex:
    """Index over CWE title words only, standing in for a catalogue without threat models."""
    entries: dict[str, set[int]] = {}
    for r in tmdb:
        words = [w.strip("(),:/").lower() for w in r.title.replace("-", " ").split()]
        for w in words:
            for form in keyword_forms(w):
                if form:
                    entries.setdefault(form, set()).add(r.cwe_id)
    return KeywordIndex({k: frozenset(v) for k, v in sorted(entries.items())}, source=f"{tmdb.version}:titles")
