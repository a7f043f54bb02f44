"""Trace-relative evaluation of subset properties and covers.

Semantics, per attempt starting at cycle ``t``:

* Boolean expressions are three-valued; X propagates unless the other operand
  of ``&&``/``||`` decides the result.
* The antecedent matches at end cycle ``e`` when every step is definitely true
  (X does not match). Every match launches one obligation.
* A consequent path is decided false at its first definitely-false step,
  pending if it runs past the end of the trace first, unknown if any step is X
  and true otherwise. The obligation is true if any path is true, else pending
  if any path is pending, else unknown if any path is unknown, else false.
* Pending obligations are dropped. False and unknown obligations fail unless
  the disable condition is definitely true somewhere between ``t`` and the
  cycle where the failure is decided.
* The failure cycle is the cycle where the last path was decided.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from atlas.errors import DepthExceeded, UnknownSignal
from atlas.minicheck.sva import (
    And, Bit, Cmp, Const, Func, Ident, Not, Or, Seq, Step, SvaProperty, expr_signals, max_past_depth,
    parse_sva_seq, parse_sva_subset, render_seq,
)
from atlas.minicheck.trace import Trace

HOLDS = "holds"
FAILS = "fails"
VACUOUS = "vacuous"
INCONCLUSIVE = "inconclusive"
VERDICTS = (HOLDS, FAILS, VACUOUS, INCONCLUSIVE)


@dataclass(frozen=True)
class VerificationOutcome:
    verdict: str
    cycle: int | None = None  # earliest failing cycle
    witness: dict | None = None  # signal values at that cycle, None for X
    start_cycle: int | None = None  # attempt that produced the earliest failure
    covers_hit: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "cycle": self.cycle, "witness": self.witness,
                "start_cycle": self.start_cycle,
                "covers_hit": {k: list(v) for k, v in self.covers_hit.items()}}


class _Vectors:
    """Per-expression value vectors over the whole trace, computed once."""

    def __init__(self, trace: Trace):
        self.trace = trace
        self.n = trace.length
        self.cache: dict = {}

    def __call__(self, e) -> list:
        v = self.cache.get(e)
        if v is None:
            v = self.cache[e] = self._compute(e)
        return v

    def _compute(self, e) -> list:
        n = self.n
        if isinstance(e, Ident):
            return list(self.trace.signals[e.name])
        if isinstance(e, Const):
            return [e.value] * n
        if isinstance(e, Bit):
            width = self.trace.widths[e.name]
            vals = self.trace.signals[e.name]
            if e.index >= width:
                return [None] * n
            return [None if v is None else (v >> e.index) & 1 for v in vals]
        if isinstance(e, Not):
            return [None if v is None else int(v == 0) for v in self(e.arg)]
        if isinstance(e, And):
            return [_and(a, b) for a, b in zip(self(e.left), self(e.right))]
        if isinstance(e, Or):
            return [_or(a, b) for a, b in zip(self(e.left), self(e.right))]
        if isinstance(e, Cmp):
            return [_cmp(e.op, a, b) for a, b in zip(self(e.left), self(e.right))]
        if isinstance(e, Func):
            arg = self(e.arg)
            if e.name == "$isunknown":
                return [int(v is None) for v in arg]
            d = e.depth if e.name == "$past" else 1
            prev = [None] * min(d, n) + arg[: max(0, n - d)]
            if e.name == "$past":
                return prev
            if e.name == "$stable":
                return [None if a is None or b is None else int(a == b) for a, b in zip(arg, prev)]
            want = (0, 1) if e.name == "$rose" else (1, 0)
            return [None if a is None or b is None else int((b & 1, a & 1) == want)
                    for a, b in zip(arg, prev)]
        raise TypeError(f"not an SVA expression: {e!r}")


def _truth(v):
    return None if v is None else v != 0


def _and(a, b):
    ta, tb = _truth(a), _truth(b)
    if ta is False or tb is False:
        return 0
    if ta is None or tb is None:
        return None
    return 1


def _or(a, b):
    ta, tb = _truth(a), _truth(b)
    if ta or tb:
        return 1
    if ta is None or tb is None:
        return None
    return 0


def _cmp(op, a, b):
    if a is None or b is None:
        return None
    if op == "==":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    return int(a < b)


@dataclass
class _Summary:
    """Aggregate over all consequent paths from one (step, cycle) node."""

    t_min: int | None = None
    t_max: int | None = None
    pending: bool = False
    x_max: int | None = None
    f_max: int | None = None

    def merge(self, o: "_Summary") -> None:
        self.t_min = _opt(min, self.t_min, o.t_min)
        self.t_max = _opt(max, self.t_max, o.t_max)
        self.pending = self.pending or o.pending
        self.x_max = _opt(max, self.x_max, o.x_max)
        self.f_max = _opt(max, self.f_max, o.f_max)

    def verdict(self) -> tuple[str, int | None]:
        if self.t_min is not None:
            return "T", self.t_min
        if self.pending:
            return "P", None
        if self.x_max is not None:
            return "X", _opt(max, self.x_max, self.f_max)
        return "F", self.f_max


def _opt(fn, a, b):
    if a is None:
        return b
    if b is None:
        return a
    return fn(a, b)


class _Checker:
    def __init__(self, trace: Trace):
        self.vec = _Vectors(trace)
        self.n = trace.length

    def _truth_at(self, e, c):
        return _truth(self.vec(e)[c])

    def match_ends(self, seq: Seq, t: int) -> list[int]:
        """End cycles of antecedent matches starting at ``t``."""
        cur = {t}
        for step in seq.steps:
            vals = self.vec(step.expr)
            nxt = set()
            for c in cur:
                for d in range(step.lo, step.hi + 1):
                    k = c + d
                    if k < self.n and vals[k] is not None and vals[k] != 0:
                        nxt.add(k)
            cur = nxt
            if not cur:
                break
        return sorted(cur)

    def consequent(self, seq: Seq, anchor: int) -> tuple[str, int | None]:
        memo: dict = {}

        def node(i: int, base: int) -> _Summary:
            key = (i, base)
            if key in memo:
                return memo[key]
            step = seq.steps[i]
            last = i == len(seq.steps) - 1
            agg = _Summary()
            for d in range(step.lo, step.hi + 1):
                c = base + d
                if c >= self.n:
                    agg.merge(_Summary(pending=True))
                    continue
                v = self._truth_at(step.expr, c)
                if v is False:
                    agg.merge(_Summary(f_max=c))
                elif last:
                    agg.merge(_Summary(t_min=c, t_max=c) if v else _Summary(x_max=c))
                elif v:
                    agg.merge(node(i + 1, c))
                else:
                    rest = node(i + 1, c)
                    # an unknown step turns every true continuation unknown
                    agg.merge(_Summary(pending=rest.pending, f_max=rest.f_max,
                                       x_max=_opt(max, rest.x_max, rest.t_max)))
            memo[key] = agg
            return agg

        return node(0, anchor).verdict()

    def disabled(self, expr, lo: int, hi: int) -> bool:
        if expr is None:
            return False
        vals = self.vec(expr)
        return any(vals[c] is not None and vals[c] != 0 for c in range(lo, min(hi, self.n - 1) + 1))


def _check_signals(trace: Trace, names: set[str]) -> None:
    missing = sorted(names - set(trace.signals))
    if missing:
        raise UnknownSignal(missing[0])


def _check_depth(trace: Trace, prop: SvaProperty) -> None:
    n = trace.length
    for e in prop.expressions():
        if max_past_depth(e) >= n:
            raise DepthExceeded(f"$past depth {max_past_depth(e)} needs a trace longer than {n} cycles")
    seqs = [prop.consequent] + ([prop.antecedent] if prop.antecedent else [])
    for s in seqs:
        for step in s.steps:
            if step.hi >= n:
                raise DepthExceeded(f"delay {step.hi} needs a trace longer than {n} cycles")


def _as_property(prop) -> SvaProperty:
    return parse_sva_subset(prop) if isinstance(prop, str) else prop


def _as_seq(cover) -> Seq:
    if isinstance(cover, str):
        return parse_sva_seq(cover)
    if isinstance(cover, Seq):
        return cover
    return Seq((Step(0, 0, cover),))


def eval_cover(trace: Trace, cover) -> list[int]:
    """Start cycles at which the cover sequence (or expression) is definitely matched."""
    seq = _as_seq(cover)
    names = set()
    for s in seq.steps:
        names |= expr_signals(s.expr)
    _check_signals(trace, names)
    chk = _Checker(trace)
    return [t for t in range(trace.length) if chk.match_ends(seq, t)]


def eval_property(trace: Trace, prop, covers=()) -> VerificationOutcome:
    prop = _as_property(prop)
    names = prop.signals() - ({prop.clock[1]} if prop.clock else set())
    _check_signals(trace, names)
    _check_depth(trace, prop)
    chk = _Checker(trace)
    n = trace.length
    fail: tuple[int, int] | None = None  # (cycle, start)
    matched = False
    shift = 1 if prop.implication == "|=>" else 0
    for t in range(n):
        ends = chk.match_ends(prop.antecedent, t) if prop.antecedent else [t]
        if ends:
            matched = True
        for e in ends:
            status, cycle = chk.consequent(prop.consequent, e + shift)
            if status not in ("F", "X"):
                continue
            if chk.disabled(prop.disable, t, cycle):
                continue
            if fail is None or (cycle, t) < fail:
                fail = (cycle, t)
    hits = {(c if isinstance(c, str) else render_seq(_as_seq(c))): eval_cover(trace, c) for c in covers}
    if fail is not None:
        cycle, start = fail
        witness = {s: trace.signals[s][cycle] for s in sorted(names)}
        return VerificationOutcome(FAILS, cycle, witness, start, hits)
    if not matched:
        return VerificationOutcome(VACUOUS, covers_hit=hits)
    return VerificationOutcome(HOLDS, covers_hit=hits)
