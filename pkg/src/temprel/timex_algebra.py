"""Rule-based temporal relations between DATE-valued time expressions.

DATE values are mapped to fractional-year intervals with day granularity:
a calendar day contributes (month-1)/12 + (day-1)/365 past the year mark.
Leap years are deliberately ignored (constant 365 denominator) so the
arithmetic stays exact and order-preserving within a year.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .documents import Document, TimexMention, TLink
from .errors import StructuralError, UnsupportedValueError
from .relations import RelationLabel

EQUALITY_TOLERANCE = 1e-9  # far below one day (~2.7e-3 fractional years)

_DAYS_IN_MONTH = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]

# Season start months; winter ends on March 1 of the following year.
_SEASONS = {"SP": (3, 6), "SU": (6, 9), "FA": (9, 12), "WI": (12, 15)}

_YEAR_RE = re.compile(r"^(\d{4})$")
_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")
_DAY_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")
_SEASON_RE = re.compile(r"^(\d{4})-(SP|SU|FA|WI)$")


@dataclass(frozen=True)
class IntervalTuple:
    start: float
    end: float

    def __post_init__(self):
        if self.start > self.end:
            raise StructuralError(f"interval start {self.start} after end {self.end}")

    def display(self) -> tuple[float, float]:
        """Truncate both bounds to 3 decimals for reporting."""
        return (math.floor(self.start * 1000) / 1000,
                math.floor(self.end * 1000) / 1000)


def _day_point(year: int, month: int, day: int) -> float:
    return year + (month - 1) / 12 + (day - 1) / 365


def normalize_date_value(value: str) -> IntervalTuple:
    """Map an ISO-like DATE (or TIME) value to a fractional-year interval.

    TIME values are truncated to their date part.  Anything that does not
    resolve to at least day granularity (durations, fuzzy references,
    week numbers) raises UnsupportedValueError.
    """
    v = value.strip()
    if "T" in v:
        v = v.split("T", 1)[0]

    m = _DAY_RE.match(v)
    if m:
        year, month, day = int(m[1]), int(m[2]), int(m[3])
        if not (1 <= month <= 12 and 1 <= day <= _DAYS_IN_MONTH[month - 1]):
            raise UnsupportedValueError(f"out-of-range calendar date {value!r}")
        point = _day_point(year, month, day)
        return IntervalTuple(point, point)

    m = _MONTH_RE.match(v)
    if m:
        year, month = int(m[1]), int(m[2])
        if not 1 <= month <= 12:
            raise UnsupportedValueError(f"out-of-range month {value!r}")
        return IntervalTuple(
            _day_point(year, month, 1),
            _day_point(year, month, _DAYS_IN_MONTH[month - 1]),
        )

    m = _YEAR_RE.match(v)
    if m:
        year = int(m[1])
        return IntervalTuple(year, year + 364 / 365)

    m = _SEASON_RE.match(v)
    if m:
        year, code = int(m[1]), m[2]
        first, last = _SEASONS[code]
        start = _day_point(year, first, 1)
        end = _day_point(year + 1, last - 12, 1) if last > 12 else _day_point(year, last, 1)
        return IntervalTuple(start, end)

    raise UnsupportedValueError(f"cannot normalize value {value!r}")


def classify_timex_pair(t1: IntervalTuple, t2: IntervalTuple,
                        tolerance: float = EQUALITY_TOLERANCE) -> RelationLabel:
    """Relate two intervals: one of five labels, or NO_LINK on partial overlap."""
    if (abs(t1.start - t2.start) <= tolerance
            and abs(t1.end - t2.end) <= tolerance):
        return RelationLabel.SIMULTANEOUS
    if t1.end < t2.start:
        return RelationLabel.BEFORE
    if t1.start > t2.end:
        return RelationLabel.AFTER
    if t1.start < t2.start and t1.end > t2.end:
        return RelationLabel.INCLUDES
    if t1.start > t2.start and t1.end < t2.end:
        return RelationLabel.IS_INCLUDED
    return RelationLabel.NO_LINK


def generate_timex_links(doc: Document, counters: dict | None = None) -> list[TLink]:
    """Derive rule links among TIMEXes and between each TIMEX and the DCT.

    Pairs are taken in document order (i < j), each non-DCT TIMEX is also
    paired with the DCT.  TIMEXes with unnormalizable values are skipped;
    ``counters`` (if given) accumulates a ``skipped_timex`` tally.
    """
    def tally(key):
        if counters is not None:
            counters[key] = counters.get(key, 0) + 1

    normalized: list[tuple[TimexMention, IntervalTuple]] = []
    for timex in doc.timexes:
        try:
            normalized.append((timex, normalize_date_value(timex.value)))
        except UnsupportedValueError:
            tally("skipped_timex")
    try:
        dct_tuple = normalize_date_value(doc.dct.value)
    except UnsupportedValueError:
        dct_tuple = None
        tally("skipped_timex")

    links = []
    for i, (ti, tup_i) in enumerate(normalized):
        for tj, tup_j in normalized[i + 1:]:
            relation = classify_timex_pair(tup_i, tup_j)
            if relation.is_positive:
                links.append(TLink("", ti.id, tj.id, relation,
                                   score=1.0, origin="rule-timex"))
    if dct_tuple is not None:
        for timex, tup in normalized:
            relation = classify_timex_pair(tup, dct_tuple)
            if relation.is_positive:
                links.append(TLink("", timex.id, doc.dct.id, relation,
                                   score=1.0, origin="rule-timex"))
    return links
