"""Random traces and subset properties for differential testing."""

from __future__ import annotations

import random

SIGNALS = {"a": 1, "b": 1, "c": 1, "v": 3}
MAX_DELAY = 3
MAX_PAST = 2


def random_trace(rng: random.Random, n: int, x_rate: float = 0.08) -> dict:
    out = {}
    for name, width in SIGNALS.items():
        out[name] = tuple(None if rng.random() < x_rate else rng.randrange(1 << width) for _ in range(n))
    return out


def random_expr(rng: random.Random, depth: int = 2):
    if depth <= 0 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.6:
            return ("sig", rng.choice(["a", "b", "c"]))
        if r < 0.75:
            return ("bit", "v", rng.randrange(4))  # index 3 is out of range on purpose
        if r < 0.85:
            return ("cmp", rng.choice(["==", "!=", "<"]), ("sig", "v"), ("const", rng.randrange(8)))
        if r < 0.95:
            return ("const", rng.choice([0, 1]))
        return ("const", None)
    kind = rng.choice(["not", "and", "or", "and", "or", "past", "stable", "rose", "fell", "isunknown", "cmp"])
    if kind == "not":
        return ("not", random_expr(rng, depth - 1))
    if kind in ("and", "or"):
        return (kind, random_expr(rng, depth - 1), random_expr(rng, depth - 1))
    if kind == "past":
        return ("past", random_expr(rng, depth - 1), rng.randint(1, MAX_PAST))
    if kind == "cmp":
        return ("cmp", rng.choice(["==", "!="]), random_expr(rng, depth - 1), ("const", rng.choice([0, 1])))
    return (kind, random_expr(rng, depth - 1))


def random_seq(rng: random.Random, max_steps: int = 3, lead: bool = False):
    steps = []
    for i in range(rng.randint(1, max_steps)):
        if i == 0 and not lead:
            lo = hi = 0
        else:
            lo = rng.randint(0, MAX_DELAY)
            hi = lo if rng.random() < 0.6 else rng.randint(lo, MAX_DELAY)
        steps.append((lo, hi, random_expr(rng)))
    return steps


def random_property(rng: random.Random) -> dict:
    prop = {"consequent": random_seq(rng, 2, lead=rng.random() < 0.5)}
    if rng.random() < 0.85:
        prop["antecedent"] = random_seq(rng, 2)
        prop["implication"] = rng.choice(["|->", "|=>"])
    if rng.random() < 0.5:
        prop["disable"] = random_expr(rng, 1)
    return prop


def random_case(rng: random.Random, max_len: int = 12):
    # delays and $past depth stay below the trace length
    n = rng.randint(MAX_DELAY + MAX_PAST + 1, max_len)
    return random_property(rng), random_trace(rng, n)
