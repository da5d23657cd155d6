"""Dependency-path contexts for entity pairs.

Paths are bottom-up token index sequences: from a mention up toward the
root, not in word order.  Embedding lookup happens downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

from .documents import Token
from .errors import StructuralError


@dataclass(frozen=True)
class PathPair:
    """Shortest path between two tokens, split at the least common ancestor.

    Both branches end with the LCA, so the last elements coincide.
    """
    left: tuple[int, ...]
    right: tuple[int, ...]

    @property
    def lca(self) -> int:
        return self.left[-1]


def _chain_to_root(sentence: list[Token], index: int) -> list[int]:
    chain = [index]
    seen = {index}
    current = index
    while sentence[current].head != -1:
        current = sentence[current].head
        if current in seen:
            raise StructuralError(f"head cycle through token {current}")
        seen.add(current)
        chain.append(current)
    return chain


def root_path(sentence: list[Token], entity: int) -> tuple[int, ...]:
    """Token indices from the entity up to and including the sentence root."""
    if not 0 <= entity < len(sentence):
        raise StructuralError(f"entity index {entity} out of range")
    return tuple(_chain_to_root(sentence, entity))


def shortest_path_branches(sentence: list[Token], src: int, tgt: int) -> PathPair:
    """Split the tree path between src and tgt at their LCA.

    The left branch runs src..LCA, the right branch tgt..LCA.  When one
    entity dominates the other, the dominating branch is the single LCA
    token.
    """
    if src == tgt:
        raise StructuralError("source and target coincide")
    src_chain = _chain_to_root(sentence, src)
    tgt_chain = _chain_to_root(sentence, tgt)
    on_src_chain = set(src_chain)
    lca = next(node for node in tgt_chain if node in on_src_chain)
    left = src_chain[:src_chain.index(lca) + 1]
    right = tgt_chain[:tgt_chain.index(lca) + 1]
    return PathPair(tuple(left), tuple(right))


def flat_window(sentence: list[Token], entity: int, width: int = 11,
                other_entity: int | None = None) -> tuple[int, ...]:
    """Entity-centered token window, cut short before the other entity.

    No padding is inserted; windows near sentence edges simply shrink.
    """
    if width % 2 == 0 or width < 1:
        raise StructuralError(f"window width must be odd and positive, got {width}")
    if other_entity == entity:
        raise StructuralError("other_entity coincides with entity")
    half = width // 2
    lo = max(0, entity - half)
    hi = min(len(sentence) - 1, entity + half)
    if other_entity is not None:
        if other_entity < entity:
            lo = max(lo, other_entity + 1)
        else:
            hi = min(hi, other_entity - 1)
    return tuple(range(lo, hi + 1))
