"""Acceptance suite: one test per criterion, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines as they complete.  Every tolerance and time limit is asserted.
"""

import functools
import itertools
import json
import time
from pathlib import Path

import numpy as np
import pytest

from temprel.conflict_resolution import (
    Edge,
    double_check_merge,
    prune_graph,
)
from temprel.evaluation import QAReport
from temprel.event_extractor import EventModel, TokenExample
from temprel.neural import (
    EmbeddingTable,
    PairExample,
    TrainingConfig,
    TwoBranchModel,
    gradient_check,
    train,
)
from temprel.pipeline import PipelineConfig, annotate_corpus, train_all
from temprel.relations import RelationLabel as R
from temprel.timegraph import build_timegraph
from temprel.timex_algebra import classify_timex_pair, normalize_date_value
from temprel.timeml import parse_timeml, serialize_timeml

from conftest import FIXTURES
from test_conflict_resolution import _cyclic, exact_min_removal_weight
from test_timegraph_qa import (
    ASKABLE,
    OracleClosure,
    ask,
    random_consistent_links,
)
from test_timex_algebra import day_order_oracle, random_day


def criterion(number, description, limit_seconds):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            started = time.perf_counter()
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[FAIL] criterion {number}: {description}")
                raise
            elapsed = time.perf_counter() - started
            print(f"[PASS] criterion {number}: {description} "
                  f"({elapsed:.2f}s < {limit_seconds}s)")
            assert elapsed < limit_seconds, \
                f"criterion {number} exceeded its {limit_seconds}s budget"
        return wrapper
    return decorate


@criterion(1, "date normalization reproduces the reference tuples", 1)
def test_criterion_01_timex_normalization():
    assert normalize_date_value("2017-08-04").display() == (2017.591, 2017.591)
    assert normalize_date_value("2017-SU").display() == (2017.416, 2017.666)


@criterion(2, "interval classification agrees with a calendar oracle "
              "on 1000 random day pairs", 5)
def test_criterion_02_interval_classification():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        d1, d2 = random_day(rng), random_day(rng)
        t1 = normalize_date_value(d1.isoformat())
        t2 = normalize_date_value(d2.isoformat())
        forward = classify_timex_pair(t1, t2)
        backward = classify_timex_pair(t2, t1)
        assert forward is day_order_oracle(d1, d2)
        assert forward is backward.invert()


def _random_prune_instance(rng):
    n_timex = int(rng.integers(1, 7))
    n_event = int(rng.integers(1, 6))
    timex_ids = [f"t{i}" for i in range(n_timex)]
    event_ids = [f"e{i}" for i in range(n_event)]
    timex_edges = [Edge(timex_ids[i], timex_ids[j], 1.0)
                   for i in range(n_timex) for j in range(i + 1, n_timex)
                   if rng.random() < 0.4]
    candidates = []
    nodes = timex_ids + event_ids
    for _ in range(int(rng.integers(1, 12))):
        a, b = rng.choice(nodes, size=2, replace=False)
        if str(a).startswith("t") and str(b).startswith("t"):
            continue
        candidates.append(Edge(str(a), str(b), float(rng.uniform(0.05, 1.0))))
    return timex_edges, candidates, set(event_ids), set(timex_ids)


@criterion(3, "pruning is acyclic, keeps rule edges, and is subset-minimal "
              "on small insertions over 500 random instances", 30)
def test_criterion_03_pruning():
    rng = np.random.default_rng(31337)
    small_insertions_checked = 0
    for trial in range(500):
        timex_edges, candidates, events, timexes = _random_prune_instance(rng)
        result = prune_graph(timex_edges, candidates, event_vertices=events,
                             timex_vertices=timexes, seed=trial)
        assert not _cyclic(result.retained)
        assert set(timex_edges) <= set(result.retained)
        for record in result.insertions:
            if len(record.candidates) <= 3:
                oracle = exact_min_removal_weight(record.base_edges,
                                                  record.candidates)
                assert record.removed_weight == pytest.approx(oracle)
                small_insertions_checked += 1
    assert small_insertions_checked > 500


@criterion(4, "double-check merge truth table matches the reconciliation "
              "semantics", 1)
def test_criterion_04_double_check_merge():
    cases = [
        # consistent predictions keep the forward reading, best score
        ((R.BEFORE, 0.8), (R.AFTER, 0.7), (R.BEFORE, 0.8)),
        ((R.INCLUDES, 0.5), (R.IS_INCLUDED, 0.9), (R.INCLUDES, 0.9)),
        ((R.SIMULTANEOUS, 0.6), (R.SIMULTANEOUS, 0.4), (R.SIMULTANEOUS, 0.6)),
        # conflicting positives resolve by score, inverting a backward win
        ((R.BEFORE, 0.6), (R.BEFORE, 0.9), (R.AFTER, 0.9)),
        ((R.BEFORE, 0.9), (R.BEFORE, 0.6), (R.BEFORE, 0.9)),
        ((R.BEFORE, 0.7), (R.INCLUDES, 0.8), (R.IS_INCLUDED, 0.8)),
        # a positive vetoes NO_LINK regardless of score, either direction
        ((R.NO_LINK, 0.99), (R.AFTER, 0.55), (R.BEFORE, 0.55)),
        ((R.NO_LINK, 0.99), (R.BEFORE, 0.55), (R.AFTER, 0.55)),
        ((R.AFTER, 0.51), (R.NO_LINK, 0.95), (R.AFTER, 0.51)),
        # agreeing on NO_LINK stays NO_LINK
        ((R.NO_LINK, 0.7), (R.NO_LINK, 0.9), (R.NO_LINK, 0.9)),
    ]
    for fwd, bwd, expected in cases:
        assert double_check_merge(fwd, bwd) == expected
    # the dense configuration drops the veto and falls back to scores
    assert double_check_merge((R.NO_LINK, 0.99), (R.AFTER, 0.55),
                              veto=False) == (R.NO_LINK, 0.99)


@criterion(5, "analytic gradients match central finite differences "
              "below 1e-4", 60)
def test_criterion_05_gradient_check():
    rng = np.random.default_rng(5150)
    event_model = EventModel(input_dim=10, units=8, hidden=6,
                             feature_hidden=3, seed=1)
    example = TokenExample(rng.normal(size=(9, 10)),
                           np.asarray([1.0, 0.0, 1.0, 0.0]), label=1)
    assert gradient_check(event_model, example, epsilon=1e-5,
                          weight=3.0) < 1e-4

    pair_model = TwoBranchModel(input_dim=10, labels=list("abcde"), units=8,
                                hidden=8, seed=2)
    pair = PairExample(rng.normal(size=(4, 10)), rng.normal(size=(3, 10)),
                       label=3)
    assert gradient_check(pair_model, pair, epsilon=1e-5, weight=1.5) < 1e-4


@criterion(6, "intra-sentence model reaches 99% training accuracy on a "
              "cue-word corpus within 200 epochs", 300)
def test_criterion_06_overfit_sanity():
    labels = [R.BEFORE, R.AFTER, R.INCLUDES, R.IS_INCLUDED, R.SIMULTANEOUS,
              R.NO_LINK]
    cues = {label: f"cue_{label.value.lower()}" for label in labels}
    table = EmbeddingTable(dimension=16, seed=9)
    rng = np.random.default_rng(42)
    fillers = [f"word{i}" for i in range(30)]
    examples = []
    for i in range(200):
        label = labels[i % len(labels)]
        left = [str(rng.choice(fillers)), cues[label], "root"]
        right = [str(rng.choice(fillers)), str(rng.choice(fillers)), "root"]
        examples.append(PairExample(table.encode(left), table.encode(right),
                                    labels.index(label)))

    model = TwoBranchModel(16, labels, units=32, hidden=32,
                           dropout_input=0.6, dropout_hidden=0.5, seed=1)

    def accuracy():
        hits = sum(model.predict(ex.left, ex.right)[0] == ex.label
                   for ex in examples)
        return hits / len(examples)

    epochs_run = 0
    while epochs_run < 200:
        train(model, examples, TrainingConfig(
            learning_rate=2e-3, batch_size=16, epochs=40,
            seed=2 + epochs_run))
        epochs_run += 40
        if accuracy() >= 0.99:
            break
    assert accuracy() >= 0.99, f"accuracy {accuracy():.3f} after {epochs_run}"


@criterion(7, "timegraph verdicts match a brute-force propagation oracle "
              "on 200 random graphs", 30)
def test_criterion_07_timegraph_closure():
    rng = np.random.default_rng(7777)
    for _ in range(200):
        ids, tlinks = random_consistent_links(rng, max_entities=7)
        graph = build_timegraph(tlinks)
        oracle = OracleClosure(tlinks)
        for a, b in itertools.permutations(ids, 2):
            for relation in ASKABLE:
                assert ask(graph, a, b, relation) == \
                    oracle.answer(a, b, relation)


@criterion(8, "qa metric arithmetic reproduces the reference counts", 1)
def test_criterion_08_qa_metrics():
    report = QAReport.from_counts(questions=79, answered=66, correct=42)
    assert round(report.coverage, 2) == 0.84
    assert round(report.precision, 2) == 0.64
    assert round(report.recall, 2) == 0.53
    assert round(report.f1, 2) == 0.58


@criterion(9, "two identically seeded pipeline runs emit byte-identical "
              "annotations", 120)
def test_criterion_09_determinism(tmp_path):
    outputs = []
    for run in ("first", "second"):
        base = tmp_path / run
        values = json.loads((FIXTURES / "config.json").read_text())
        cfg = PipelineConfig(**values,
                             corpus_dir=str(FIXTURES / "corpus"),
                             parses_dir=str(FIXTURES / "parses"),
                             checkpoint_dir=str(base / "checkpoints"),
                             output_dir=str(base / "output"))
        train_all(cfg)
        succeeded, failed = annotate_corpus(cfg)
        assert (succeeded, failed) == (2, 0)
        outputs.append({p.name: p.read_bytes()
                        for p in sorted(Path(cfg.output_dir).glob("*.tml"))})
    assert outputs[0] == outputs[1]


@criterion(10, "golden fixtures survive parse/serialize/parse unchanged", 5)
def test_criterion_10_round_trip():
    goldens = sorted((FIXTURES / "corpus").glob("*.tml")) + \
        sorted((FIXTURES / "dense_gold").glob("*.tml"))
    assert goldens
    for path in goldens:
        doc = parse_timeml(path.read_text())
        assert parse_timeml(serialize_timeml(doc)) == doc
