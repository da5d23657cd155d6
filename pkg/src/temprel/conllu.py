"""CoNLL-U ingestion and token/annotation alignment."""

from __future__ import annotations

import logging

from .documents import Document, Token
from .errors import AlignmentError, FormatError, StructuralError

logger = logging.getLogger(__name__)


def parse_conllu(text: str) -> list[list[Token]]:
    """Parse 10-column CoNLL-U text into per-sentence token lists.

    Comment lines are skipped, as are multiword-token ranges and empty
    nodes.  Heads are rebased to 0-based indices with -1 for the root.
    """
    sentences = []
    current: list[tuple[int, Token]] = []

    def flush():
        if not current:
            return
        sent_no = len(sentences) + 1
        tokens = [tok for _, tok in sorted(current, key=lambda p: p[0])]
        for pos, tok in enumerate(tokens):
            tok.index = pos
        n = len(tokens)
        roots = [t for t in tokens if t.head == -1]
        if len(roots) != 1:
            raise StructuralError(
                f"sentence {sent_no} has {len(roots)} roots, expected exactly one"
            )
        for tok in tokens:
            if tok.head >= n or tok.head < -1:
                raise StructuralError(
                    f"sentence {sent_no}: token {tok.index} head {tok.head} "
                    f"out of range"
                )
            if tok.head == tok.index:
                raise StructuralError(
                    f"sentence {sent_no}: token {tok.index} is its own head"
                )
        sentences.append(tokens)
        current.clear()

    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise FormatError(f"expected 10 tab-separated columns, got {len(cols)}",
                              line_no)
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            continue  # multiword ranges and empty nodes carry no tree structure
        try:
            index = int(tok_id) - 1
            head = int(cols[6]) - 1
        except ValueError:
            raise FormatError(f"non-numeric ID or HEAD field: {line!r}", line_no)
        current.append((index, Token(
            index=index,
            text=cols[1],
            lemma=cols[2],
            pos=cols[3],
            head=head,
            deprel=cols[7],
        )))
    flush()
    return sentences


def align_tokens(text: str, sentences: list[list[Token]]) -> None:
    """Fill token char spans by scanning the raw text left to right."""
    cursor = 0
    for si, sentence in enumerate(sentences):
        for tok in sentence:
            at = text.find(tok.text, cursor)
            if at < 0:
                raise AlignmentError(
                    f"token {tok.text!r} (sentence {si + 1}) not found in text "
                    f"after offset {cursor}"
                )
            tok.char_span = (at, at + len(tok.text))
            cursor = at + len(tok.text)


def _covered_tokens(sentences, span):
    lo, hi = span
    hits = []
    for si, sentence in enumerate(sentences):
        for tok in sentence:
            s, e = tok.char_span
            if s < hi and e > lo:
                hits.append((si, tok.index))
    return hits


def _syntactic_head(sentence, token_indices):
    inside = set(token_indices)
    for ti in token_indices:
        if sentence[ti].head not in inside:
            return ti
    return token_indices[0]


def attach_parses(doc: Document, sentences: list[list[Token]]) -> None:
    """Attach a dependency parse to a document and resolve mention tokens.

    Event mentions resolve to a single token: the covering token when the
    annotation span matches one, otherwise the syntactic head of the
    covered tokens (with a warning).  TIMEX mentions resolve to contiguous
    token runs within one sentence.
    """
    align_tokens(doc.text, sentences)
    doc.sentences = sentences

    for event in doc.events:
        hits = _covered_tokens(sentences, event.char_span)
        if not hits:
            raise AlignmentError(
                f"event {event.id} span {event.char_span} covers no token"
            )
        if len(hits) == 1:
            event.token = hits[0]
            continue
        si = hits[0][0]
        same_sentence = [ti for s, ti in hits if s == si]
        head = _syntactic_head(sentences[si], same_sentence)
        logger.warning(
            "event %s in %s spans %d tokens; snapping to head token %r",
            event.id, doc.doc_id, len(hits), sentences[si][head].text,
        )
        event.token = (si, head)

    for timex in doc.timexes:
        hits = _covered_tokens(sentences, timex.char_span)
        if not hits:
            raise AlignmentError(
                f"timex {timex.id} span {timex.char_span} covers no token"
            )
        si = hits[0][0]
        same = sorted(ti for s, ti in hits if s == si)
        if len(same) != len(hits):
            logger.warning(
                "timex %s in %s crosses a sentence boundary; keeping the "
                "first-sentence part", timex.id, doc.doc_id,
            )
        if same != list(range(same[0], same[-1] + 1)):
            raise AlignmentError(f"timex {timex.id} covers non-contiguous tokens")
        timex.token_span = (si, same[0], same[-1] + 1)

    doc.validate()


def timex_head_token(doc: Document, timex) -> tuple[int, int]:
    """Sentence/token position representing a (non-DCT) TIMEX mention."""
    si, lo, hi = timex.token_span
    head = _syntactic_head(doc.sentences[si], list(range(lo, hi)))
    return (si, head)
