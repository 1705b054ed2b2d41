"""Aggregation into repeatability tables (raw strength 1, cumulative <=2..<=5)."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

STRENGTHS = (1, 2, 3, 4, 5)
COLUMNS = ("s1", "le2", "le3", "le4", "le5")
MISSING = "–"
AVERAGE = "Average"


@dataclass
class RepeatabilityReport:
    """Per-class cumulative values; ``None`` marks a missing cell.

    ``cumulative[cls][i]`` is the mean of raw strengths 1..i+1; it is missing
    when any of those strengths is missing.
    """

    raw: dict = field(default_factory=dict)  # cls -> {strength: value}
    cumulative: dict = field(default_factory=dict)  # cls -> list of 5 (float | None)
    average: list = field(default_factory=list)
    curves: dict = field(default_factory=dict)

    @property
    def classes(self) -> list[str]:
        return list(self.cumulative)

    def rows(self) -> list[tuple[str, list]]:
        return [(c, self.cumulative[c]) for c in self.classes] + [(AVERAGE, self.average)]

    def to_csv(self, digits: int = 2) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("class",) + COLUMNS)
        for name, vals in self.rows():
            w.writerow([name] + [MISSING if v is None else f"{v:.{digits}f}" for v in vals])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "raw": {c: {str(s): v for s, v in sorted(r.items())} for c, r in self.raw.items()},
            "table": {name: dict(zip(COLUMNS, vals)) for name, vals in self.rows()},
            "curves": self.curves,
        }


def aggregate(results: dict, classes=None) -> RepeatabilityReport:
    """Build a report from ``{(class, strength): value}``.

    ``classes`` fixes the row order (default: order of first appearance).
    The Average row is the mean over classes of each column, skipping
    missing cells.
    """
    if not results:
        raise ValueError("aggregate needs at least one (class, strength) value")
    order = list(classes) if classes is not None else list(dict.fromkeys(c for c, _ in results))
    raw = {c: {} for c in order}
    for (c, s), v in results.items():
        if s not in STRENGTHS:
            raise ValueError(f"strength must be 1..5, got {s}")
        if not 0 <= v <= 100:
            raise ValueError(f"repeatability out of range: {v}")
        if c not in raw:
            raise ValueError(f"class {c!r} not in the row order")
        raw[c][s] = float(v)
    cum = {}
    for c in order:
        vals, acc = [], []
        for s in STRENGTHS:
            if acc is not None and s in raw[c]:
                acc.append(raw[c][s])
                vals.append(float(np.mean(acc)))
            else:
                acc = None
                vals.append(None)
        cum[c] = vals
    avg = []
    for i in range(len(STRENGTHS)):
        col = [cum[c][i] for c in order if cum[c][i] is not None]
        avg.append(float(np.mean(col)) if col else None)
    return RepeatabilityReport(raw, cum, avg)
