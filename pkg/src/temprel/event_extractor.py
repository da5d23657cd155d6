"""Token-level binary event detection.

Each token is judged from a 9-token embedding window fed through an LSTM
branch, concatenated with a small dense encoding of four binary features
of the center token, and squeezed through a sigmoid.  Recall is boosted by
weighting the positive class rather than by lowering the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .documents import Document, EventMention, Token
from .neural.embeddings import EmbeddingTable
from .neural.layers import (
    DenseLayer,
    LSTMLayer,
    dropout_mask,
    max_pool_argmax,
    max_pool_backward,
    sigmoid,
)
from .neural.training import TrainingConfig, TrainingHistory, train

VERB_POS = {"VERB", "AUX", "MD", "VB", "VBD", "VBG", "VBN", "VBP", "VBZ"}
NOUN_POS = {"NOUN", "PROPN", "NN", "NNS", "NNP", "NNPS"}
_SUBJECT_PREFIXES = ("nsubj", "csubj")


@dataclass(frozen=True)
class TokenFeatures:
    is_main_verb: bool
    is_predicate: bool
    is_verb: bool
    is_noun: bool

    def as_vector(self) -> np.ndarray:
        return np.asarray(
            [self.is_main_verb, self.is_predicate, self.is_verb, self.is_noun],
            dtype=np.float64,
        )


def token_features(sentence: list[Token], index: int) -> TokenFeatures:
    """Derive the four binary token features from the dependency parse."""
    tok = sentence[index]
    pos = tok.pos.upper()
    is_verb = pos in VERB_POS
    is_noun = pos in NOUN_POS
    is_main_verb = is_verb and tok.head == -1
    has_subject = any(
        t.head == index and t.deprel.startswith(_SUBJECT_PREFIXES)
        for t in sentence
    )
    is_predicate = has_subject or is_main_verb
    return TokenFeatures(is_main_verb, is_predicate, is_verb, is_noun)


def build_window(sentence: list[Token], index: int, table: EmbeddingTable,
                 size: int = 9) -> tuple[np.ndarray, TokenFeatures]:
    """Embeddings of tokens index-4..index+4 (zero rows past the edges),
    plus the center token's features."""
    half = size // 2
    rows = []
    for i in range(index - half, index + half + 1):
        if 0 <= i < len(sentence):
            rows.append(table.lookup(sentence[i].text))
        else:
            rows.append(table.zero())
    return np.stack(rows), token_features(sentence, index)


@dataclass
class TokenExample:
    window: np.ndarray    # (9, dim)
    features: np.ndarray  # (4,)
    label: int = 0


class EventModel:
    """LSTM-over-window + feature branch -> single sigmoid output."""

    def __init__(self, input_dim: int, units: int = 128, hidden: int = 30,
                 feature_hidden: int = 3, dropout_input: float = 0.5,
                 dropout_hidden: float = 0.5, threshold: float = 0.5,
                 positive_weight: float = 3.0, seed: int = 0):
        rng = np.random.default_rng(seed)
        self.input_dim = input_dim
        self.units = units
        self.hidden = hidden
        self.feature_hidden = feature_hidden
        self.dropout_input = dropout_input
        self.dropout_hidden = dropout_hidden
        self.threshold = threshold
        self.positive_weight = positive_weight
        self.seed = seed
        self.lstm = LSTMLayer(input_dim, units, rng, name="window")
        self.dense_hidden = DenseLayer(units, hidden, rng, "tanh", name="hidden")
        self.dense_features = DenseLayer(4, feature_hidden, rng, "tanh",
                                         name="features")
        self.dense_out = DenseLayer(hidden + feature_hidden, 1, rng, "linear",
                                    name="out")

    def parameters(self):
        return (self.lstm.parameters() + self.dense_hidden.parameters()
                + self.dense_features.parameters() + self.dense_out.parameters())

    def zero_grads(self):
        for p in self.parameters():
            p.zero_grad()

    def checkpoint_config(self):
        return {
            "kind": "event",
            "input_dim": self.input_dim,
            "units": self.units,
            "hidden": self.hidden,
            "feature_hidden": self.feature_hidden,
            "dropout_input": self.dropout_input,
            "dropout_hidden": self.dropout_hidden,
            "threshold": self.threshold,
            "positive_weight": self.positive_weight,
            "seed": self.seed,
        }

    def _forward(self, window, features, train, rng, cache):
        if train:
            window = window * dropout_mask(rng, window.shape, self.dropout_input)
        lcache: list = []
        hs = self.lstm.forward(window, lcache)
        pooled, pool_idx = max_pool_argmax(hs)
        dcache: list = []
        hid = self.dense_hidden.forward(pooled, dcache)
        feat = self.dense_features.forward(features, dcache)
        combined = np.concatenate([hid, feat])
        mask = dropout_mask(rng, combined.shape, self.dropout_hidden) if train \
            else None
        dropped = combined * mask if mask is not None else combined
        logit = self.dense_out.forward(dropped, dcache)[0]
        if cache is not None:
            cache.update(lcache=lcache, pool_idx=pool_idx, steps=hs.shape[0],
                         mask=mask, dcache=dcache)
        return logit

    def predict_token(self, window: np.ndarray, features: np.ndarray) -> float:
        return float(sigmoid(self._forward(window, features, False, None, None)))

    def loss_only(self, example: TokenExample, weight: float = 1.0) -> float:
        logit = self._forward(example.window, example.features, False, None, None)
        if example.label:
            return weight * float(np.logaddexp(0.0, -logit))
        return weight * float(np.logaddexp(0.0, logit))

    def backprop(self, example: TokenExample, weight: float = 1.0,
                 train: bool = False, rng=None) -> float:
        cache: dict = {}
        logit = self._forward(example.window, example.features, train, rng, cache)
        p = float(sigmoid(logit))
        if example.label:
            loss = weight * float(np.logaddexp(0.0, -logit))
            d_logit = weight * (p - 1.0)
        else:
            loss = weight * float(np.logaddexp(0.0, logit))
            d_logit = weight * p

        dcache = cache["dcache"]
        d_dropped = self.dense_out.backward(dcache[2], np.asarray([d_logit]))
        if cache["mask"] is not None:
            d_dropped = d_dropped * cache["mask"]
        d_hid, d_feat = d_dropped[:self.hidden], d_dropped[self.hidden:]
        self.dense_features.backward(dcache[1], d_feat)
        d_pooled = self.dense_hidden.backward(dcache[0], d_hid)
        self.lstm.backward(
            cache["lcache"],
            max_pool_backward(cache["pool_idx"], cache["steps"], d_pooled))
        return loss


def build_event_examples(doc: Document, table: EmbeddingTable) -> list[TokenExample]:
    """One example per token; gold mention tokens are the positives."""
    positive = {e.token for e in doc.events if e.token is not None}
    examples = []
    for si, sentence in enumerate(doc.sentences):
        for ti in range(len(sentence)):
            window, feats = build_window(sentence, ti, table)
            examples.append(TokenExample(window, feats.as_vector(),
                                         int((si, ti) in positive)))
    return examples


def train_event_model(docs: list[Document], table: EmbeddingTable,
                      config: TrainingConfig, *, units: int = 128,
                      hidden: int = 30, feature_hidden: int = 3,
                      dropout_input: float = 0.5, dropout_hidden: float = 0.5,
                      threshold: float = 0.5, positive_weight: float = 3.0,
                      model_seed: int = 0) -> tuple[EventModel, TrainingHistory]:
    examples = [ex for doc in docs for ex in build_event_examples(doc, table)]
    model = EventModel(
        input_dim=table.dimension, units=units, hidden=hidden,
        feature_hidden=feature_hidden, dropout_input=dropout_input,
        dropout_hidden=dropout_hidden, threshold=threshold,
        positive_weight=positive_weight, seed=model_seed,
    )
    weighted = TrainingConfig(
        learning_rate=config.learning_rate, batch_size=config.batch_size,
        epochs=config.epochs, patience=config.patience,
        class_weights={1: positive_weight}, seed=config.seed,
    )
    history = train(model, examples, weighted)
    return model, history


def predict_events(model: EventModel, doc: Document,
                   table: EmbeddingTable) -> list[EventMention]:
    """Single-token mentions for every token scoring at or above threshold.

    Tokens covered by a TIMEX mention are never event candidates; the two
    annotation layers must not overlap.
    """
    taken = set()
    for timex in doc.timexes:
        if timex.token_span is not None:
            si, lo, hi = timex.token_span
            taken.update((si, ti) for ti in range(lo, hi))
    mentions = []
    for si, sentence in enumerate(doc.sentences):
        for ti, tok in enumerate(sentence):
            if (si, ti) in taken:
                continue
            window, feats = build_window(sentence, ti, table)
            score = model.predict_token(window, feats.as_vector())
            if score >= model.threshold:
                mentions.append(EventMention(
                    id=f"e{len(mentions) + 1}",
                    char_span=tok.char_span,
                    token=(si, ti),
                ))
    return mentions
