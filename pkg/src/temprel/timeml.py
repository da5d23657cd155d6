"""TimeML parsing and serialization.

Consumes the EVENT / TIMEX3 / MAKEINSTANCE / TLINK / DCT subset.  Links are
exposed on event ids (eids); the eiid indirection through MAKEINSTANCE is
resolved at parse time and re-derived at serialization time.
"""

from __future__ import annotations

import logging
import xml.etree.ElementTree as ET
from xml.sax.saxutils import escape, quoteattr

from .documents import (
    TLINK_ORIGINS,
    Document,
    EventMention,
    MakeInstance,
    TimexMention,
    TLink,
)
from .errors import AlignmentError, StructuralError, TimeMLParseError
from .relations import RelationLabel

logger = logging.getLogger(__name__)

_INSTANCE_ATTRS = ("tense", "aspect", "polarity", "pos")


def parse_timeml(xml_text: str, *, merge_identity: bool = True,
                 doc_id: str | None = None) -> Document:
    """Parse a TimeML string into a Document.

    ``merge_identity`` relabels IDENTITY links as SIMULTANEOUS on ingest.
    ``doc_id`` overrides the DOCID element (required when it is absent).
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        line, column = exc.position
        raise TimeMLParseError(str(exc.msg), line, column) from exc

    docid_el = root.find("DOCID")
    if docid_el is not None and docid_el.text:
        doc_id = docid_el.text.strip()
    if not doc_id:
        raise StructuralError("no DOCID element and no doc_id given")

    dct_el = root.find("DCT/TIMEX3")
    if dct_el is None:
        raise StructuralError(f"{doc_id}: missing DCT declaration")
    dct = TimexMention(
        id=dct_el.get("tid", "t0"),
        type_attr=dct_el.get("type", "DATE"),
        value=dct_el.get("value", ""),
        is_dct=True,
    )

    text_el = root.find("TEXT")
    if text_el is None:
        raise StructuralError(f"{doc_id}: missing TEXT element")

    parts: list[str] = []
    events: list[EventMention] = []
    timexes: list[TimexMention] = []

    def emit(piece):
        if piece:
            parts.append(piece)

    emit(text_el.text)
    for child in text_el:
        start = sum(len(p) for p in parts)
        inner = "".join(child.itertext())
        emit(inner)
        end = start + len(inner)
        if child.tag == "EVENT":
            events.append(EventMention(
                id=child.attrib["eid"],
                char_span=(start, end),
                class_attr=child.get("class"),
            ))
        elif child.tag == "TIMEX3":
            timexes.append(TimexMention(
                id=child.attrib["tid"],
                type_attr=child.get("type", "DATE"),
                value=child.get("value", ""),
                char_span=(start, end),
            ))
        else:
            logger.warning("%s: flattening unhandled inline tag <%s>",
                           doc_id, child.tag)
        emit(child.tail)
    text = "".join(parts)

    instances = []
    eiid_to_eid = {}
    for el in root.iter("MAKEINSTANCE"):
        inst = MakeInstance(
            eiid=el.attrib["eiid"],
            eid=el.attrib["eventID"],
            **{a: el.get(a) for a in _INSTANCE_ATTRS},
        )
        if inst.eiid in eiid_to_eid:
            raise StructuralError(f"{doc_id}: duplicate MAKEINSTANCE {inst.eiid}")
        eiid_to_eid[inst.eiid] = inst.eid
        instances.append(inst)

    def resolve_endpoint(el, inst_attr, time_attr):
        eiid = el.get(inst_attr)
        if eiid is not None:
            if eiid not in eiid_to_eid:
                raise AlignmentError(
                    f"{doc_id}: TLINK {el.get('lid', '?')} references {eiid!r} "
                    f"with no MAKEINSTANCE entry"
                )
            return eiid_to_eid[eiid]
        tid = el.get(time_attr)
        if tid is None:
            raise StructuralError(
                f"{doc_id}: TLINK {el.get('lid', '?')} lacks a "
                f"{inst_attr}/{time_attr} endpoint"
            )
        return tid

    tlinks = []
    for el in root.iter("TLINK"):
        source = resolve_endpoint(el, "eventInstanceID", "timeID")
        target = resolve_endpoint(el, "relatedToEventInstance", "relatedToTime")
        origin = el.get("origin", "gold")
        if origin not in TLINK_ORIGINS:
            origin = "gold"
        score = float(el.get("score", "1.0"))
        tlinks.append(TLink(
            id=el.get("lid", ""),
            source=source,
            target=target,
            relation=RelationLabel.from_string(el.attrib["relType"],
                                               merge_identity=merge_identity),
            score=score,
            origin=origin,
        ))

    doc = Document(
        doc_id=doc_id,
        text=text,
        dct=dct,
        events=events,
        timexes=timexes,
        tlinks=tlinks,
        instances=instances,
    )
    doc.validate()
    return doc


def _attr(name, value):
    return f" {name}={quoteattr(value)}" if value is not None else ""


def serialize_timeml(doc: Document) -> str:
    """Render a Document back to TimeML. Inverse of parse_timeml."""
    doc.validate()

    mentions = sorted(
        [("EVENT", e.char_span, e) for e in doc.events]
        + [("TIMEX3", t.char_span, t) for t in doc.timexes],
        key=lambda m: m[1],
    )
    body = []
    cursor = 0
    for tag, (start, end), mention in mentions:
        if start < cursor:
            raise StructuralError(
                f"{doc.doc_id}: overlapping mention spans at offset {start}"
            )
        body.append(escape(doc.text[cursor:start]))
        inner = escape(doc.text[start:end])
        if tag == "EVENT":
            attrs = _attr("eid", mention.id) + _attr("class", mention.class_attr)
        else:
            attrs = (_attr("tid", mention.id) + _attr("type", mention.type_attr)
                     + _attr("value", mention.value))
        body.append(f"<{tag}{attrs}>{inner}</{tag}>")
        cursor = end
    body.append(escape(doc.text[cursor:]))

    eid_to_eiid = doc.eid_to_eiid()
    event_ids = {e.id for e in doc.events}

    def endpoint_attrs(entity_id, inst_attr, time_attr):
        if entity_id in event_ids:
            if entity_id not in eid_to_eiid:
                raise StructuralError(
                    f"{doc.doc_id}: event {entity_id} is a link endpoint but "
                    f"has no MAKEINSTANCE entry"
                )
            return _attr(inst_attr, eid_to_eiid[entity_id])
        return _attr(time_attr, entity_id)

    lines = [
        '<?xml version="1.0" ?>',
        "<TimeML>",
        f"<DOCID>{escape(doc.doc_id)}</DOCID>",
        (f'<DCT><TIMEX3{_attr("tid", doc.dct.id)}{_attr("type", doc.dct.type_attr)}'
         f'{_attr("value", doc.dct.value)}'
         f' functionInDocument="CREATION_TIME">{escape(doc.dct.value)}'
         f"</TIMEX3></DCT>"),
        f"<TEXT>{''.join(body)}</TEXT>",
    ]
    for inst in doc.instances:
        attrs = _attr("eventID", inst.eid) + _attr("eiid", inst.eiid)
        for name in _INSTANCE_ATTRS:
            attrs += _attr(name, getattr(inst, name))
        lines.append(f"<MAKEINSTANCE{attrs}/>")
    for link in doc.tlinks:
        if not link.id:
            raise StructuralError(
                f"{doc.doc_id}: cannot serialize a link with no lid "
                f"({link.source} -> {link.target})"
            )
        rel = "VAGUE" if link.relation is RelationLabel.NO_LINK else link.relation.value
        attrs = (
            _attr("lid", link.id)
            + _attr("relType", rel)
            + endpoint_attrs(link.source, "eventInstanceID", "timeID")
            + endpoint_attrs(link.target, "relatedToEventInstance", "relatedToTime")
            + _attr("origin", link.origin)
            + _attr("score", repr(link.score))
        )
        lines.append(f"<TLINK{attrs}/>")
    lines.append("</TimeML>")
    lines.append("")
    return "\n".join(lines)
