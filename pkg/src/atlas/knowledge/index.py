"""Keyword inverted index over the threat model database."""

from __future__ import annotations

from collections import defaultdict

from atlas.knowledge.model import KeywordIndex, Tmdb


def keyword_forms(keyword: str) -> list[str]:
    """The whole normalized keyword followed by its component tokens.

    >>> keyword_forms("Finite State Machine")
    ['finite state machine', 'finite', 'state', 'machine']
    """
    whole = " ".join(keyword.lower().split())
    if not whole:
        return []
    tokens = whole.split(" ")
    return [whole] + tokens if len(tokens) > 1 else [whole]


def build_keyword_index(tmdb: Tmdb) -> KeywordIndex:
    entries: dict[str, set[int]] = defaultdict(set)
    for record in tmdb:
        for kw in record.keywords:
            for form in keyword_forms(kw):
                entries[form].add(record.cwe_id)
    return KeywordIndex(
        entries={k: frozenset(entries[k]) for k in sorted(entries)},
        source=tmdb.version,
    )


def record_terms(keywords) -> set[str]:
    """Every phrase and token form a record's keyword list answers to."""
    out: set[str] = set()
    for kw in keywords:
        out.update(keyword_forms(kw))
    return out
