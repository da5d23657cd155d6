"""Temporal relation labels and their inverses."""

from __future__ import annotations

from enum import Enum

from .errors import FormatError


class RelationLabel(Enum):
    BEFORE = "BEFORE"
    AFTER = "AFTER"
    IBEFORE = "IBEFORE"
    IAFTER = "IAFTER"
    INCLUDES = "INCLUDES"
    IS_INCLUDED = "IS_INCLUDED"
    BEGINS = "BEGINS"
    BEGUN_BY = "BEGUN_BY"
    ENDS = "ENDS"
    ENDED_BY = "ENDED_BY"
    DURING = "DURING"
    DURING_INV = "DURING_INV"
    SIMULTANEOUS = "SIMULTANEOUS"
    NO_LINK = "NO_LINK"

    def invert(self) -> "RelationLabel":
        """Relation of (b, a) given the relation of (a, b)."""
        return _INVERSES[self]

    @property
    def is_positive(self) -> bool:
        return self is not RelationLabel.NO_LINK

    @classmethod
    def from_string(cls, raw: str, merge_identity: bool = True) -> "RelationLabel":
        """Parse a relType string.

        IDENTITY collapses into SIMULTANEOUS when ``merge_identity`` is set;
        VAGUE and NONE are aliases of NO_LINK.
        """
        name = raw.strip().upper().replace("-", "_")
        if name == "IDENTITY":
            if not merge_identity:
                raise FormatError("IDENTITY labels require merge_identity=True")
            return cls.SIMULTANEOUS
        if name in ("VAGUE", "NONE"):
            return cls.NO_LINK
        try:
            return cls[name]
        except KeyError:
            raise FormatError(f"unknown relation label {raw!r}") from None


_INVERSE_PAIRS = [
    (RelationLabel.BEFORE, RelationLabel.AFTER),
    (RelationLabel.IBEFORE, RelationLabel.IAFTER),
    (RelationLabel.INCLUDES, RelationLabel.IS_INCLUDED),
    (RelationLabel.BEGINS, RelationLabel.BEGUN_BY),
    (RelationLabel.ENDS, RelationLabel.ENDED_BY),
    (RelationLabel.DURING, RelationLabel.DURING_INV),
    (RelationLabel.SIMULTANEOUS, RelationLabel.SIMULTANEOUS),
    (RelationLabel.NO_LINK, RelationLabel.NO_LINK),
]

_INVERSES = {}
for _a, _b in _INVERSE_PAIRS:
    _INVERSES[_a] = _b
    _INVERSES[_b] = _a
