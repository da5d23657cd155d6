"""Document model: tokens, mentions, links, and questions."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import StructuralError
from .relations import RelationLabel

TLINK_ORIGINS = (
    "gold",
    "classifier-intra",
    "classifier-cross",
    "classifier-dct",
    "rule-timex",
)

# Origins whose links are taken at face value rather than scored.
RELIABLE_ORIGINS = ("gold", "rule-timex")


@dataclass
class Token:
    index: int
    text: str
    lemma: str
    pos: str
    head: int  # index of head within the sentence, -1 for the root
    deprel: str
    char_span: tuple[int, int] | None = None


@dataclass
class EventMention:
    id: str
    char_span: tuple[int, int]
    class_attr: str | None = None
    # (sentence index, token index), filled once parses are attached
    token: tuple[int, int] | None = None


@dataclass
class TimexMention:
    id: str
    type_attr: str
    value: str
    char_span: tuple[int, int] | None = None
    is_dct: bool = False
    # (sentence index, first token, one past last token)
    token_span: tuple[int, int, int] | None = None

    def __post_init__(self):
        if self.is_dct and self.token_span is not None:
            raise StructuralError("the creation-time TIMEX carries no token span")


@dataclass
class MakeInstance:
    eiid: str
    eid: str
    tense: str | None = None
    aspect: str | None = None
    polarity: str | None = None
    pos: str | None = None


@dataclass
class TLink:
    id: str
    source: str
    target: str
    relation: RelationLabel
    score: float = 1.0
    origin: str = "gold"

    def __post_init__(self):
        if self.source == self.target:
            raise StructuralError(
                f"link {self.id or '<unnamed>'} relates {self.source} to itself"
            )
        if not 0.0 <= self.score <= 1.0:
            raise StructuralError(f"link score {self.score} outside [0, 1]")
        if self.origin not in TLINK_ORIGINS:
            raise StructuralError(f"unknown link origin {self.origin!r}")
        if self.origin in RELIABLE_ORIGINS and self.score != 1.0:
            raise StructuralError(
                f"{self.origin} link {self.id or '<unnamed>'} must carry score 1.0"
            )


@dataclass
class Document:
    doc_id: str
    text: str
    dct: TimexMention
    sentences: list[list[Token]] = field(default_factory=list)
    events: list[EventMention] = field(default_factory=list)
    timexes: list[TimexMention] = field(default_factory=list)  # excludes the DCT
    tlinks: list[TLink] = field(default_factory=list)
    instances: list[MakeInstance] = field(default_factory=list)

    def entity_ids(self) -> set[str]:
        ids = {e.id for e in self.events}
        ids.update(t.id for t in self.timexes)
        ids.add(self.dct.id)
        return ids

    def eid_to_eiid(self) -> dict[str, str]:
        return {inst.eid: inst.eiid for inst in self.instances}

    def validate(self) -> None:
        """Check id resolution and token-reference ranges."""
        if not self.dct.is_dct:
            raise StructuralError("document creation time mention lacks is_dct")
        ids = self.entity_ids()
        if len(ids) < len(self.events) + len(self.timexes) + 1:
            raise StructuralError(f"duplicate entity ids in {self.doc_id}")
        for link in self.tlinks:
            for endpoint in (link.source, link.target):
                if endpoint not in ids:
                    raise StructuralError(
                        f"link {link.id or '<unnamed>'} references unknown "
                        f"entity {endpoint!r}"
                    )
        for event in self.events:
            if event.token is not None:
                si, ti = event.token
                if not (0 <= si < len(self.sentences)):
                    raise StructuralError(f"event {event.id} sentence out of range")
                if not (0 <= ti < len(self.sentences[si])):
                    raise StructuralError(f"event {event.id} token out of range")
        for timex in self.timexes:
            if timex.token_span is not None:
                si, lo, hi = timex.token_span
                if not (0 <= si < len(self.sentences)):
                    raise StructuralError(f"timex {timex.id} sentence out of range")
                if not (0 <= lo < hi <= len(self.sentences[si])):
                    raise StructuralError(f"timex {timex.id} token span out of range")


@dataclass
class Question:
    doc_id: str
    source: str
    target: str
    relation: RelationLabel
    gold: str  # yes | no | unknown

    def __post_init__(self):
        if self.relation is RelationLabel.NO_LINK:
            raise StructuralError("questions never ask about NO_LINK")
        if self.gold not in ("yes", "no", "unknown"):
            raise StructuralError(f"unknown gold answer {self.gold!r}")
