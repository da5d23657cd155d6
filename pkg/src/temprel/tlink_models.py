"""Training-instance construction and the three pair classifiers.

Instances carry the branch token strings plus a label; pair enumeration
covers both orders, so every gold link also contributes its flipped
counterpart with the inverted label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .conllu import timex_head_token
from .deppath import flat_window, root_path, shortest_path_branches
from .documents import Document, TLink
from .errors import StructuralError
from .neural.embeddings import EmbeddingTable
from .neural.models import PairExample, TwoBranchModel
from .relations import RelationLabel

R = RelationLabel

_MERGED_POSITIVES = [
    R.BEFORE, R.AFTER, R.IBEFORE, R.IAFTER, R.INCLUDES, R.IS_INCLUDED,
    R.BEGINS, R.BEGUN_BY, R.ENDS, R.ENDED_BY, R.SIMULTANEOUS,
]
_FULL_POSITIVES = _MERGED_POSITIVES[:-1] + [R.DURING, R.DURING_INV, R.SIMULTANEOUS]
_DENSE_POSITIVES = [R.BEFORE, R.AFTER, R.INCLUDES, R.IS_INCLUDED, R.SIMULTANEOUS]


@dataclass(frozen=True)
class LabelSet:
    """The classifier label inventory plus the gold-label canonicalizer."""

    name: str
    positives: tuple[RelationLabel, ...]
    merge_map: dict = field(default_factory=dict, hash=False, compare=False)

    @property
    def labels(self) -> list[RelationLabel]:
        return list(self.positives) + [R.NO_LINK]

    def canon(self, label: RelationLabel) -> RelationLabel:
        label = self.merge_map.get(label, label)
        return label if label in self.positives else R.NO_LINK

    def index(self, label: RelationLabel) -> int:
        return self.labels.index(self.canon(label))


_DURING_MERGE = {R.DURING: R.SIMULTANEOUS, R.DURING_INV: R.SIMULTANEOUS}

LABEL_SETS = {
    "merged": LabelSet("merged", tuple(_MERGED_POSITIVES), dict(_DURING_MERGE)),
    "full": LabelSet("full", tuple(_FULL_POSITIVES)),
    "dense": LabelSet("dense", tuple(_DENSE_POSITIVES), dict(_DURING_MERGE)),
}


@dataclass
class PairInstance:
    kind: str  # intra | cross | dct
    left: list[str]
    right: list[str]
    source: str
    target: str
    label: RelationLabel = R.NO_LINK


def _gold_lookup(doc: Document):
    gold = {}
    for link in doc.tlinks:
        gold[(link.source, link.target)] = link.relation
        gold.setdefault((link.target, link.source), link.relation.invert())
    return gold


def _entities_by_sentence(doc: Document):
    """Per-sentence (entity id, token index) lists in document order."""
    per_sentence: list[list[tuple[str, int, bool]]] = [[] for _ in doc.sentences]
    for event in doc.events:
        si, ti = event.token
        per_sentence[si].append((event.id, ti, True))
    for timex in doc.timexes:
        si, ti = timex_head_token(doc, timex)
        per_sentence[si].append((timex.id, ti, False))
    for bucket in per_sentence:
        bucket.sort(key=lambda item: item[1])
    return per_sentence


def _words(sentence, indices) -> list[str]:
    return [sentence[i].text for i in indices]


def _intra_branches(sentence, src_tok, tgt_tok, flat, window):
    if flat:
        return (_words(sentence, flat_window(sentence, src_tok, window, tgt_tok)),
                _words(sentence, flat_window(sentence, tgt_tok, window, src_tok)))
    pair = shortest_path_branches(sentence, src_tok, tgt_tok)
    return _words(sentence, pair.left), _words(sentence, pair.right)


def _context(sentence, tok, flat, window):
    if flat:
        return _words(sentence, flat_window(sentence, tok, window))
    return _words(sentence, root_path(sentence, tok))


def build_intra_instances(doc: Document, label_set: LabelSet,
                          flat: bool = False, window: int = 11) -> list[PairInstance]:
    """All ordered same-sentence entity pairs (n*(n-1) per sentence)."""
    gold = _gold_lookup(doc)
    instances = []
    for si, bucket in enumerate(_entities_by_sentence(doc)):
        sentence = doc.sentences[si]
        for a_id, a_tok, _ in bucket:
            for b_id, b_tok, _ in bucket:
                if a_id == b_id or a_tok == b_tok:
                    continue
                left, right = _intra_branches(sentence, a_tok, b_tok, flat, window)
                label = label_set.canon(gold.get((a_id, b_id), R.NO_LINK))
                instances.append(PairInstance("intra", left, right,
                                              a_id, b_id, label))
    return instances


def build_cross_instances(doc: Document, label_set: LabelSet,
                          flat: bool = False, window: int = 11) -> list[PairInstance]:
    """Ordered pairs of entities in adjacent sentences, both directions."""
    gold = _gold_lookup(doc)
    per_sentence = _entities_by_sentence(doc)
    instances = []
    for si in range(len(per_sentence) - 1):
        here, there = per_sentence[si], per_sentence[si + 1]
        for a_id, a_tok, _ in here:
            a_ctx = _context(doc.sentences[si], a_tok, flat, window)
            for b_id, b_tok, _ in there:
                b_ctx = _context(doc.sentences[si + 1], b_tok, flat, window)
                label = label_set.canon(gold.get((a_id, b_id), R.NO_LINK))
                instances.append(PairInstance("cross", a_ctx, b_ctx,
                                              a_id, b_id, label))
                flipped = label_set.canon(gold.get((b_id, a_id), R.NO_LINK))
                instances.append(PairInstance("cross", b_ctx, a_ctx,
                                              b_id, a_id, flipped))
    return instances


def build_dct_instances(doc: Document, label_set: LabelSet,
                        flat: bool = False, window: int = 11) -> list[PairInstance]:
    """One instance per event: its root path forward and reversed."""
    gold = _gold_lookup(doc)
    instances = []
    for event in doc.events:
        si, ti = event.token
        context = _context(doc.sentences[si], ti, flat, window)
        label = label_set.canon(gold.get((event.id, doc.dct.id), R.NO_LINK))
        instances.append(PairInstance("dct", list(context), list(reversed(context)),
                                      event.id, doc.dct.id, label))
    return instances


def downsample_nolink(instances: list[PairInstance], ratio: float,
                      seed: int = 0) -> list[PairInstance]:
    """Keep every positive; subsample NO_LINK to floor(ratio * positives)."""
    if ratio < 0:
        raise StructuralError(f"downsampling ratio must be >= 0, got {ratio}")
    if math.isinf(ratio):
        return list(instances)
    negatives = [i for i, inst in enumerate(instances)
                 if inst.label is R.NO_LINK]
    n_positive = len(instances) - len(negatives)
    quota = min(len(negatives), int(ratio * n_positive))
    rng = np.random.default_rng(seed)
    chosen = set(rng.choice(len(negatives), size=quota, replace=False)) \
        if quota else set()
    keep = {negatives[i] for i in chosen}
    return [inst for i, inst in enumerate(instances)
            if inst.label is not R.NO_LINK or i in keep]


def encode_instance(instance: PairInstance, table: EmbeddingTable,
                    label_set: LabelSet) -> PairExample:
    return PairExample(
        left=table.encode(instance.left),
        right=table.encode(instance.right),
        label=label_set.index(instance.label),
    )


@dataclass
class ClassifierBundle:
    """The intra-sentence, cross-sentence, and creation-time models."""

    intra: TwoBranchModel | None
    cross: TwoBranchModel | None
    dct: TwoBranchModel | None
    label_set: LabelSet
    config: dict = field(default_factory=dict)

    def require_ready(self):
        missing = [name for name in ("intra", "cross", "dct")
                   if getattr(self, name) is None]
        if missing:
            raise StructuralError(f"bundle is missing trained models: {missing}")
        for model in (self.intra, self.cross, self.dct):
            if [l for l in model.labels] != self.label_set.labels:
                raise StructuralError("bundle models disagree on the label set")


def classify_pairs(bundle: ClassifierBundle, doc: Document, table: EmbeddingTable,
                   flat: bool = False, window: int = 11) -> list[TLink]:
    """Raw predictions for every candidate pair, in both orders.

    TIMEX-TIMEX pairs are left to the rule component.  The returned links
    include NO_LINK predictions; merging and pruning happen downstream.
    """
    bundle.require_ready()
    labels = bundle.label_set.labels
    results = []

    def predict(model, origin, left_words, right_words, source, target):
        idx, score = model.predict(table.encode(left_words),
                                   table.encode(right_words))
        results.append(TLink("", source, target, labels[idx],
                             score=score, origin=origin))

    per_sentence = _entities_by_sentence(doc)
    for si, bucket in enumerate(per_sentence):
        sentence = doc.sentences[si]
        for a_id, a_tok, a_is_event in bucket:
            for b_id, b_tok, b_is_event in bucket:
                if a_id == b_id or a_tok == b_tok \
                        or not (a_is_event or b_is_event):
                    continue
                left, right = _intra_branches(sentence, a_tok, b_tok, flat, window)
                predict(bundle.intra, "classifier-intra", left, right, a_id, b_id)

    for si in range(len(per_sentence) - 1):
        here, there = per_sentence[si], per_sentence[si + 1]
        for a_id, a_tok, a_is_event in here:
            a_ctx = _context(doc.sentences[si], a_tok, flat, window)
            for b_id, b_tok, b_is_event in there:
                if not (a_is_event or b_is_event):
                    continue
                b_ctx = _context(doc.sentences[si + 1], b_tok, flat, window)
                predict(bundle.cross, "classifier-cross", a_ctx, b_ctx, a_id, b_id)
                predict(bundle.cross, "classifier-cross", b_ctx, a_ctx, b_id, a_id)

    for event in doc.events:
        si, ti = event.token
        context = list(_context(doc.sentences[si], ti, flat, window))
        predict(bundle.dct, "classifier-dct", context, list(reversed(context)),
                event.id, doc.dct.id)
        predict(bundle.dct, "classifier-dct", list(reversed(context)), context,
                doc.dct.id, event.id)
    return results


def inverse_frequency_weights(counts) -> np.ndarray:
    """Weights proportional to 1/frequency, normalized to mean 1.

    Classes absent from the data get weight 0; normalization runs over the
    observed classes.
    """
    counts = np.asarray(counts, dtype=np.float64)
    weights = np.zeros_like(counts)
    seen = counts > 0
    if not seen.any():
        raise StructuralError("no observed classes")
    weights[seen] = 1.0 / counts[seen]
    weights[seen] *= seen.sum() / weights[seen].sum()
    return weights


@dataclass(frozen=True)
class ModeSettings:
    """Per-mode policy knobs consumed by training and merging."""

    name: str
    downsample_intra: float
    downsample_cross: float
    downsample_dct: float
    veto: bool
    inverse_class_weights: bool
    batch_size: int


def qa_tempeval_config() -> ModeSettings:
    return ModeSettings("qa-tempeval", downsample_intra=0.1, downsample_cross=1.0,
                        downsample_dct=4.0, veto=True,
                        inverse_class_weights=False, batch_size=32)


def dense_mode_config() -> ModeSettings:
    """TimeBank-Dense policy: keep every instance, weight classes by inverse
    frequency, shrink the batch, and drop the positive-over-NO_LINK veto."""
    inf = math.inf
    return ModeSettings("timebank-dense", downsample_intra=inf,
                        downsample_cross=inf, downsample_dct=inf, veto=False,
                        inverse_class_weights=True, batch_size=16)


MODES = {"qa-tempeval": qa_tempeval_config, "timebank-dense": dense_mode_config}
