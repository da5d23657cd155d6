"""Loader for the line-oriented question file format.

One record per line: doc_id, source entity id, target entity id, queried
relation, gold answer (yes / no / unknown).  Blank lines and ``#`` comments
are skipped.
"""

from __future__ import annotations

from .documents import Question
from .errors import FormatError, StructuralError
from .relations import RelationLabel

_ANSWERS = ("yes", "no", "unknown")


def load_questions(text: str) -> list[Question]:
    questions = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 5:
            raise FormatError(f"expected 5 fields, got {len(fields)}", line_no)
        doc_id, source, target, rel_raw, answer = fields
        try:
            relation = RelationLabel.from_string(rel_raw)
        except FormatError as exc:
            raise FormatError(str(exc), line_no) from None
        if answer not in _ANSWERS:
            raise FormatError(f"unknown answer {answer!r}", line_no)
        try:
            questions.append(Question(doc_id, source, target, relation, answer))
        except StructuralError as exc:
            raise FormatError(str(exc), line_no) from None
    return questions
