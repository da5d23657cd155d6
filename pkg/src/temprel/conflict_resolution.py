"""Bidirectional prediction merging and per-family cycle pruning.

Positive links of the BEFORE/AFTER and INCLUDES/IS_INCLUDED families are
normalized into directed graphs (inverse labels flip the edge) and rule
edges between time expressions seed each graph.  Event vertices are added
one at a time in seeded random order; when an event's candidate edges
close a cycle, removal orders over those candidates are tried and the one
that discards the least total weight wins.  Removed edges revert to
NO_LINK.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .documents import Document, RELIABLE_ORIGINS, TLink
from .errors import StructuralError
from .relations import RelationLabel

R = RelationLabel

# label -> (family, canonical direction is source->target?)
_FAMILY = {
    R.BEFORE: ("before", True),
    R.AFTER: ("before", False),
    R.INCLUDES: ("includes", True),
    R.IS_INCLUDED: ("includes", False),
}

FAMILIES = ("before", "includes")


def double_check_merge(fwd: tuple[RelationLabel, float],
                       bwd: tuple[RelationLabel, float],
                       veto: bool = True) -> tuple[RelationLabel, float]:
    """Reconcile the two directional predictions for one entity pair.

    ``fwd`` is the prediction for (a, b), ``bwd`` for (b, a); the result is
    expressed for (a, b).  Consistent predictions keep the higher score.
    Inconsistent positives resolve by score (forward wins exact ties).
    With ``veto`` on, a positive prediction overrides NO_LINK from the
    other direction regardless of score.
    """
    fwd_label, fwd_score = fwd
    bwd_label, bwd_score = bwd
    if bwd_label.invert() is fwd_label:
        return fwd_label, max(fwd_score, bwd_score)
    if veto and fwd_label.is_positive != bwd_label.is_positive:
        if fwd_label.is_positive:
            return fwd_label, fwd_score
        return bwd_label.invert(), bwd_score
    if fwd_score >= bwd_score:
        return fwd_label, fwd_score
    return bwd_label.invert(), bwd_score


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    weight: float
    link: TLink | None = field(default=None, compare=False)


def _has_cycle(edges) -> bool:
    adjacency: dict[str, list[str]] = {}
    for edge in edges:
        adjacency.setdefault(edge.source, []).append(edge.target)
        adjacency.setdefault(edge.target, [])
    WHITE, GREY, BLACK = 0, 1, 2
    color = dict.fromkeys(adjacency, WHITE)
    for start in adjacency:
        if color[start] != WHITE:
            continue
        stack = [(start, iter(adjacency[start]))]
        color[start] = GREY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GREY:
                    return True
                if color[nxt] == WHITE:
                    color[nxt] = GREY
                    stack.append((nxt, iter(adjacency[nxt])))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return False


def _removal_orders(candidates: list[Edge], rng: np.random.Generator):
    """Candidate removal orders: greedy ascending weight, then permutations.

    All n! orders are enumerated while n! fits the n*(n-1) budget (n <= 3);
    beyond that, the budget is filled with seeded random permutations.
    """
    greedy = sorted(candidates, key=lambda e: (e.weight, e.source, e.target))
    n = len(candidates)
    if n <= 1:
        return [greedy]
    if math.factorial(n) <= n * (n - 1):
        return [list(p) for p in itertools.permutations(greedy)]
    orders = [greedy]
    for _ in range(n * (n - 1) - 1):
        orders.append([candidates[i] for i in rng.permutation(n)])
    return orders


@dataclass
class InsertionRecord:
    event: str
    base_edges: list[Edge]
    candidates: list[Edge]
    removed: list[Edge]
    removed_weight: float
    orders_tried: int


@dataclass
class PruneResult:
    retained: list[Edge]
    removed: list[Edge]
    insertions: list[InsertionRecord]
    seed: int


def prune_graph(timex_edges: list[Edge], event_candidates: list[Edge],
                event_vertices=None, timex_vertices=None, seed: int = 0,
                insertion_order: list[str] | None = None) -> PruneResult:
    """Incrementally insert event vertices, breaking cycles greedily.

    ``timex_edges`` seed the graph and are never removal candidates; they
    must be acyclic among themselves.  Each event's candidate edges are
    the not-yet-placed edges linking it to vertices already in the graph,
    so an edge between two events belongs to the later-inserted one.
    Events are inserted in seeded random order unless ``insertion_order``
    pins it explicitly.
    """
    if _has_cycle(timex_edges):
        raise StructuralError("rule edges form a cycle")
    if timex_vertices is None:
        timex_vertices = {e.source for e in timex_edges}
        timex_vertices.update(e.target for e in timex_edges)
    if event_vertices is None:
        event_vertices = set()
        for e in event_candidates:
            event_vertices.update((e.source, e.target))
        event_vertices -= set(timex_vertices)

    rng = np.random.default_rng(seed)
    if insertion_order is not None:
        if set(insertion_order) != set(event_vertices):
            raise StructuralError("insertion_order must cover the event vertices")
        order = list(insertion_order)
    else:
        order = sorted(event_vertices)
        rng.shuffle(order)

    graph = list(timex_edges)
    present = set(timex_vertices)
    pending = list(event_candidates)
    removed_all: list[Edge] = []
    insertions: list[InsertionRecord] = []

    for event in order:
        present.add(event)
        candidates = [e for e in pending
                      if (e.source == event and e.target in present)
                      or (e.target == event and e.source in present)]
        pending = [e for e in pending if e not in candidates]
        record = InsertionRecord(event, list(graph), candidates, [], 0.0, 0)
        if candidates and _has_cycle(graph + candidates):
            best_removed = None
            best_weight = math.inf
            orders = _removal_orders(candidates, rng)
            record.orders_tried = len(orders)
            for removal_order in orders:
                active = list(removal_order)
                removed = []
                weight = 0.0
                while active and _has_cycle(graph + active):
                    victim = active.pop(0)
                    removed.append(victim)
                    weight += victim.weight
                if weight < best_weight:
                    best_weight = weight
                    best_removed = removed
            dropped = set(best_removed)
            graph = graph + [e for e in candidates if e not in dropped]
            removed_all.extend(best_removed)
            record.removed = best_removed
            record.removed_weight = best_weight
        else:
            graph = graph + candidates
        insertions.append(record)

    return PruneResult(graph, removed_all, insertions, seed)


def merge_predictions(raw_links: list[TLink],
                      veto: bool = True) -> list[TLink]:
    """Collapse both-order classifier predictions to one link per pair.

    The canonical direction is the lexicographically smaller (source,
    target) ordering.  Pairs that merge to NO_LINK are dropped.
    """
    by_pair: dict[tuple[str, str], dict[tuple[str, str], TLink]] = {}
    for link in raw_links:
        key = tuple(sorted((link.source, link.target)))
        by_pair.setdefault(key, {})[(link.source, link.target)] = link

    merged = []
    for (a, b), directions in sorted(by_pair.items()):
        fwd = directions.get((a, b))
        bwd = directions.get((b, a))
        if fwd is not None and bwd is not None:
            label, score = double_check_merge(
                (fwd.relation, fwd.score), (bwd.relation, bwd.score), veto=veto)
            origin = fwd.origin
        elif fwd is not None:
            label, score, origin = fwd.relation, fwd.score, fwd.origin
        else:
            label, score, origin = bwd.relation.invert(), bwd.score, bwd.origin
        if label.is_positive:
            merged.append(TLink("", a, b, label, score=score, origin=origin))
    return merged


@dataclass
class ResolveResult:
    tlinks: list[TLink]
    removed: list[TLink]
    prune_results: dict[str, PruneResult]

    def dump(self) -> str:
        """Line-oriented diagnostic: removed edges with weights, per family."""
        lines = []
        for family in FAMILIES:
            result = self.prune_results[family]
            for edge in result.removed:
                lines.append(f"{family}\t{edge.source}\t{edge.target}"
                             f"\t{edge.weight:.6f}")
        return "\n".join(lines) + ("\n" if lines else "")


def _family_edge(link: TLink, weight: float) -> tuple[str, Edge]:
    family, forward = _FAMILY[link.relation]
    if forward:
        return family, Edge(link.source, link.target, weight, link)
    return family, Edge(link.target, link.source, weight, link)


def resolve_document(doc: Document, raw_links: list[TLink], veto: bool = True,
                     seed: int = 0) -> ResolveResult:
    """Merge both-order predictions, then prune each relation family.

    Rule links pass straight through the merge; their BEFORE/INCLUDES
    family edges seed the graphs with weight 1 and survive unconditionally.
    Labels outside the two families are never pruning candidates.
    """
    rule_links = [l for l in raw_links if l.origin in RELIABLE_ORIGINS]
    predicted = [l for l in raw_links if l.origin not in RELIABLE_ORIGINS]
    merged = merge_predictions(predicted, veto=veto)

    fixed: dict[str, list[Edge]] = {family: [] for family in FAMILIES}
    candidates: dict[str, list[Edge]] = {family: [] for family in FAMILIES}
    final: list[TLink] = []
    for link in rule_links:
        if link.relation in _FAMILY:
            family, edge = _family_edge(link, 1.0)
            fixed[family].append(edge)
        else:
            final.append(link)
    for link in merged:
        if link.relation in _FAMILY:
            family, edge = _family_edge(link, link.score)
            candidates[family].append(edge)
        else:
            final.append(link)

    event_ids = {e.id for e in doc.events}
    timex_ids = {t.id for t in doc.timexes} | {doc.dct.id}
    removed: list[TLink] = []
    prune_results = {}
    for family in FAMILIES:
        result = prune_graph(
            fixed[family], candidates[family],
            event_vertices=event_ids, timex_vertices=timex_ids,
            seed=seed,
        )
        prune_results[family] = result
        # retained covers the seed rule edges plus surviving candidates
        final.extend(edge.link for edge in result.retained)
        removed.extend(edge.link for edge in result.removed)

    return ResolveResult(final, removed, prune_results)
