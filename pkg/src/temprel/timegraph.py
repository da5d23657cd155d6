"""Point-algebra inference over interval endpoints.

Every entity contributes a start and an end point with an implicit
start <= end edge.  Link labels translate to equalities and strict orders
between points; equalities are collapsed with union-find and the
strict/non-strict reachability closure is computed over the equivalence
classes.  A path is strict as soon as any edge on it is strict.
"""

from __future__ import annotations

import logging

import numpy as np

from .documents import Question, TLink
from .relations import RelationLabel

logger = logging.getLogger(__name__)

R = RelationLabel

START, END = 0, 1

# (owner, point) pairs: owner 0 is the link source, owner 1 the target.
_LT, _EQ = "<", "="

_CONSTRAINTS = {
    R.BEFORE: [((0, END), _LT, (1, START))],
    R.IBEFORE: [((0, END), _EQ, (1, START))],
    R.INCLUDES: [((0, START), _LT, (1, START)), ((1, END), _LT, (0, END))],
    R.BEGINS: [((0, START), _EQ, (1, START)), ((0, END), _LT, (1, END))],
    R.ENDS: [((0, END), _EQ, (1, END)), ((1, START), _LT, (0, START))],
    R.SIMULTANEOUS: [((0, START), _EQ, (1, START)), ((0, END), _EQ, (1, END))],
    # treated as simultaneity for inference purposes
    R.DURING: [((0, START), _EQ, (1, START)), ((0, END), _EQ, (1, END))],
}


def _mirrored(constraints):
    return [((1 - a_owner, a_point), op, (1 - b_owner, b_point))
            for (a_owner, a_point), op, (b_owner, b_point) in constraints]


for _label in list(_CONSTRAINTS):
    _inverse = _label.invert()
    if _inverse not in _CONSTRAINTS:
        _CONSTRAINTS[_inverse] = _mirrored(_CONSTRAINTS[_label])


def point_constraints(label: RelationLabel, source: str, target: str):
    """Constraints as ((entity, point), op, (entity, point)) triples."""
    owners = (source, target)
    return [((owners[a_owner], a_point), op, (owners[b_owner], b_point))
            for (a_owner, a_point), op, (b_owner, b_point)
            in _CONSTRAINTS[label]]


_NONE, _WEAK, _STRICT = 0, 1, 2


class PointGraph:
    """Equality classes over interval endpoints plus their order closure."""

    def __init__(self):
        self.entities: set[str] = set()
        self._parent: dict = {}
        self._lt_edges: list = []
        self._index: dict = {}
        self._reach: np.ndarray | None = None
        self._closed = False

    # -- construction ----------------------------------------------------

    def _point(self, entity: str, which: int):
        self.entities.add(entity)
        key = (entity, which)
        if key not in self._parent:
            self._parent[key] = key
        return key

    def _find(self, key):
        root = key
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[key] != root:
            self._parent[key], key = root, self._parent[key]
        return root

    def add_entity(self, entity: str):
        self._point(entity, START)
        self._point(entity, END)
        self._closed = False

    def add_equal(self, p, q):
        self._parent[self._find(self._point(*p))] = self._find(self._point(*q))
        self._closed = False

    def add_less(self, p, q):
        self._lt_edges.append((self._point(*p), self._point(*q)))
        self._closed = False

    def add_link(self, link: TLink):
        if link.relation is R.NO_LINK:
            return
        self.add_entity(link.source)
        self.add_entity(link.target)
        for p, op, q in point_constraints(link.relation, link.source, link.target):
            if op == _EQ:
                self.add_equal(p, q)
            else:
                self.add_less(p, q)

    # -- closure ----------------------------------------------------------

    def close(self):
        """Strict/non-strict reachability over equality-class roots."""
        roots = sorted({self._find(k) for k in self._parent})
        self._index = {root: i for i, root in enumerate(roots)}
        n = len(roots)
        reach = np.zeros((n, n), dtype=np.int8)
        for entity in self.entities:
            i = self._index[self._find((entity, START))]
            j = self._index[self._find((entity, END))]
            if i != j:
                reach[i, j] = max(reach[i, j], _WEAK)
        for p, q in self._lt_edges:
            i, j = self._index[self._find(p)], self._index[self._find(q)]
            reach[i, j] = _STRICT
        for k in range(n):
            col = reach[:, k]
            row = reach[k, :]
            through = np.minimum.outer(col > 0, row > 0) * \
                np.maximum.outer(col, row)
            np.maximum(reach, through, out=reach)
        self._reach = reach
        self._closed = True

    def _ensure_closed(self):
        if not self._closed:
            self.close()

    def _strength(self, p, q) -> int:
        i = self._index[self._find(p)]
        j = self._index[self._find(q)]
        if i == j:
            return _NONE
        return int(self._reach[i, j])

    # -- queries ----------------------------------------------------------

    def has_entity(self, entity: str) -> bool:
        return entity in self.entities

    def point_lt(self, p, q) -> bool:
        self._ensure_closed()
        return self._strength(p, q) == _STRICT

    def point_eq(self, p, q) -> bool:
        self._ensure_closed()
        if self._find(p) == self._find(q):
            return True
        return (self._strength(p, q) == _WEAK
                and self._strength(q, p) == _WEAK)

    def entails(self, source: str, target: str, label: RelationLabel) -> bool:
        if not (self.has_entity(source) and self.has_entity(target)):
            return False
        for p, op, q in point_constraints(label, source, target):
            holds = self.point_eq(p, q) if op == _EQ else self.point_lt(p, q)
            if not holds:
                return False
        return True

    def inconsistent_entities(self) -> list[str]:
        """Entities caught in a strict cycle (reflexive strict order)."""
        self._ensure_closed()
        bad = []
        for entity in sorted(self.entities):
            for which in (START, END):
                i = self._index[self._find((entity, which))]
                if self._reach[i, i] == _STRICT:
                    bad.append(entity)
                    break
        return bad


def build_timegraph(tlinks: list[TLink]) -> PointGraph:
    graph = PointGraph()
    for link in tlinks:
        graph.add_link(link)
    graph.close()
    inconsistent = graph.inconsistent_entities()
    if inconsistent:
        logger.warning("inconsistent link set around entities: %s",
                       ", ".join(inconsistent))
    return graph


def answer_question(graph: PointGraph, question: Question) -> str:
    """yes / no / unanswered for one relation query.

    ``yes`` when the asked relation is entailed, ``no`` when its inverse
    is, ``unanswered`` otherwise (including absent entities).  On an
    inconsistent graph both may be entailed; the yes check runs first.
    """
    if not (graph.has_entity(question.source) and graph.has_entity(question.target)):
        return "unanswered"
    if graph.entails(question.source, question.target, question.relation):
        return "yes"
    if graph.entails(question.source, question.target,
                     question.relation.invert()):
        return "no"
    return "unanswered"
