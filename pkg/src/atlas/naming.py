"""Identifier tokenization shared by the RTL analyses and the asset matcher."""

from __future__ import annotations


def tokenize_identifier(name: str) -> list[str]:
    """Split on underscores and lower-to-upper camelCase boundaries, lowercased.

    Digits stay attached to the token they follow.

    >>> tokenize_identifier("BootHashValid")
    ['boot', 'hash', 'valid']
    """
    out: list[str] = []
    for part in name.split("_"):
        start = 0
        for i in range(1, len(part)):
            if part[i - 1].islower() and part[i].isupper():
                out.append(part[start:i])
                start = i
        if part[start:]:
            out.append(part[start:])
    return [t.lower() for t in out if t]


def is_reset_name(name: str) -> bool:
    return any(t in ("rst", "reset") for t in tokenize_identifier(name))
