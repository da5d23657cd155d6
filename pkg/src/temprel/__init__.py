"""Temporal relation extraction and reasoning over TimeML documents."""

from .documents import (
    Document,
    EventMention,
    MakeInstance,
    Question,
    TimexMention,
    TLink,
    Token,
)
from .relations import RelationLabel

__version__ = "0.1.0"

__all__ = [
    "Document",
    "EventMention",
    "MakeInstance",
    "Question",
    "RelationLabel",
    "TLink",
    "TimexMention",
    "Token",
    "__version__",
]
