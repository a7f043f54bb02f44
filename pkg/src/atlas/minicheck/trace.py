"""Cycle traces: one value per signal per clock cycle, ``None`` standing for X."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

from atlas.errors import TraceError

X = None


@dataclass(frozen=True)
class Trace:
    signals: dict[str, tuple]
    widths: dict[str, int]

    def __post_init__(self):
        lengths = {len(v) for v in self.signals.values()}
        if len(lengths) > 1:
            raise TraceError("all signal vectors must have the same length")
        if not lengths or lengths == {0}:
            raise TraceError("a trace needs at least one cycle")
        for name, values in self.signals.items():
            width = self.widths.get(name)
            if width is None:
                raise TraceError(f"no width for signal '{name}'")
            for t, v in enumerate(values):
                if v is not X and not (0 <= v < (1 << width)):
                    raise TraceError(f"cycle {t}: value {v} does not fit {name}[{width}]")

    @property
    def length(self) -> int:
        return len(next(iter(self.signals.values())))

    def value(self, name: str, t: int):
        return self.signals[name][t]

    def prefix(self, n: int) -> "Trace":
        return Trace({k: v[:n] for k, v in self.signals.items()}, dict(self.widths))

    def to_csv(self, columns: list[str] | None = None) -> str:
        cols = columns or list(self.signals)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cycle", *cols])
        for t in range(self.length):
            w.writerow([t, *("x" if self.signals[c][t] is X else self.signals[c][t] for c in cols)])
        return buf.getvalue()


def parse_trace_csv(text: str, widths: dict[str, int]) -> Trace:
    """Read the CSV form: header ``cycle,<sig>...``, decimal values or ``x``."""
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows or rows[0][0].strip() != "cycle":
        raise TraceError("trace header must start with 'cycle'")
    names = [h.strip() for h in rows[0][1:]]
    if len(set(names)) != len(names):
        raise TraceError("duplicate signal column in trace header")
    columns: dict[str, list] = {n: [] for n in names}
    for i, row in enumerate(rows[1:]):
        if len(row) != len(names) + 1:
            raise TraceError(f"row {i + 1}: expected {len(names) + 1} fields")
        try:
            cycle = int(row[0])
        except ValueError:
            raise TraceError(f"row {i + 1}: bad cycle number {row[0]!r}") from None
        if cycle != i:
            raise TraceError(f"row {i + 1}: cycles must count up from 0 without gaps")
        for name, raw in zip(names, row[1:]):
            raw = raw.strip()
            if raw.lower() == "x":
                columns[name].append(X)
            else:
                try:
                    columns[name].append(int(raw))
                except ValueError:
                    raise TraceError(f"cycle {cycle}: bad value {raw!r} for '{name}'") from None
    missing = [n for n in names if n not in widths]
    if missing:
        raise TraceError(f"no declared width for trace signal '{missing[0]}'")
    return Trace({n: tuple(v) for n, v in columns.items()}, {n: widths[n] for n in names})


def load_trace(path: str | Path, widths: dict[str, int]) -> Trace:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TraceError(f"{path}: {exc}") from exc
    return parse_trace_csv(text, widths)
