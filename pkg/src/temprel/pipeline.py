"""End-to-end orchestration: corpus loading, training, annotation, evaluation.

Every tunable lives in PipelineConfig and is echoed into the training
manifest together with its provenance, so a checkpoint directory fully
describes how it was produced.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from . import event_extractor, tlink_models
from .conflict_resolution import ResolveResult, resolve_document
from .conllu import attach_parses, parse_conllu
from .documents import Document, MakeInstance, TLink
from .errors import StructuralError, TemprelError
from .evaluation import (
    DenseReport,
    QAReport,
    answer_all,
    dense_pair_labels,
    evaluate_dense,
    evaluate_qa,
)
from .neural.checkpoint import load_model, save_model
from .neural.embeddings import EmbeddingTable
from .neural.models import TwoBranchModel
from .neural.training import TrainingConfig, train
from .questions import load_questions
from .relations import RelationLabel
from .timegraph import build_timegraph
from .timeml import parse_timeml, serialize_timeml
from .timex_algebra import generate_timex_links

logger = logging.getLogger(__name__)

CHECKPOINT_FILES = {
    "event": "event.npz",
    "intra": "intra.npz",
    "cross": "cross.npz",
    "dct": "dct.npz",
}
MANIFEST_FILE = "manifest.json"

# Which settings restate published values and which are artifact defaults.
PROVENANCE = {
    "embedding_dim": "published",
    "event_units": "published",
    "event_hidden": "published",
    "event_feature_hidden": "published",
    "event_dropout_input": "published",
    "event_dropout_hidden": "published",
    "pair_units": "published",
    "pair_hidden": "published",
    "pair_dropout_input": "published",
    "pair_dropout_hidden": "published",
    "window": "published",
    "mode": "published",
    "merge_identity": "published",
    "event_positive_weight": "default",
    "event_threshold": "default",
    "learning_rate": "default",
    "batch_size": "default",
    "epochs": "default",
    "patience": "default",
    "seed": "default",
    "label_set": "default",
    "flat_context": "default",
    "use_gold_entities": "default",
    "embedding_seed": "default",
}


_PATH_FIELDS = ("corpus_dir", "parses_dir", "embeddings", "checkpoint_dir",
                "questions", "output_dir")


@dataclass
class PipelineConfig:
    # paths
    corpus_dir: str = ""
    parses_dir: str = ""
    embeddings: str = ""
    checkpoint_dir: str = "checkpoints"
    questions: str = ""
    output_dir: str = "output"

    # policies
    mode: str = "qa-tempeval"
    label_set: str = ""  # empty -> mode default
    flat_context: bool = False
    use_gold_entities: bool | None = None  # None -> mode default
    merge_identity: bool = True

    # model shapes
    embedding_dim: int = 300
    embedding_seed: int = 13
    event_units: int = 128
    event_hidden: int = 30
    event_feature_hidden: int = 3
    event_threshold: float = 0.5
    event_positive_weight: float = 3.0
    event_dropout_input: float = 0.5
    event_dropout_hidden: float = 0.5
    pair_units: int = 256
    pair_hidden: int = 100
    pair_dropout_input: float = 0.6
    pair_dropout_hidden: float = 0.5
    window: int = 11

    # training
    learning_rate: float = 1e-3
    batch_size: int = 0  # 0 -> mode default
    epochs: int = 30
    patience: int = 0
    seed: int = 7

    def __post_init__(self):
        if self.mode not in tlink_models.MODES:
            raise StructuralError(f"unknown mode {self.mode!r}; expected one of "
                                  f"{sorted(tlink_models.MODES)}")
        if self.label_set and self.label_set not in tlink_models.LABEL_SETS:
            raise StructuralError(f"unknown label set {self.label_set!r}")

    @property
    def mode_settings(self) -> tlink_models.ModeSettings:
        return tlink_models.MODES[self.mode]()

    @property
    def effective_label_set(self) -> tlink_models.LabelSet:
        if self.label_set:
            return tlink_models.LABEL_SETS[self.label_set]
        default = "dense" if self.mode == "timebank-dense" else "merged"
        return tlink_models.LABEL_SETS[default]

    @property
    def effective_batch_size(self) -> int:
        return self.batch_size or self.mode_settings.batch_size

    @property
    def gold_entities(self) -> bool:
        if self.use_gold_entities is None:
            return self.mode == "timebank-dense"
        return self.use_gold_entities

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "PipelineConfig":
        values = json.loads(Path(path).read_text(encoding="utf-8")) if path else {}
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise StructuralError(f"unknown config keys: {sorted(unknown)}")
        for key, value in (overrides or {}).items():
            if value is not None:
                values[key] = value
        return cls(**values)

    def manifest(self) -> dict:
        everything = dataclasses.asdict(self)
        paths = {k: everything.pop(k) for k in _PATH_FIELDS}
        settings = everything
        mode = self.mode_settings
        return {
            "paths": paths,
            "settings": settings,
            "provenance": {k: PROVENANCE.get(k, "default") for k in settings},
            "resolved": {
                "label_set": self.effective_label_set.name,
                "batch_size": self.effective_batch_size,
                "use_gold_entities": self.gold_entities,
                "downsample": {
                    "intra": mode.downsample_intra,
                    "cross": mode.downsample_cross,
                    "dct": mode.downsample_dct,
                },
                "veto": mode.veto,
                "inverse_class_weights": mode.inverse_class_weights,
                "model_seeds": _model_seeds(self.seed),
            },
        }


def _model_seeds(seed: int) -> dict:
    return {
        "event": seed + 1,
        "intra": seed + 2,
        "cross": seed + 3,
        "dct": seed + 4,
        "downsample": seed + 5,
        "prune": seed + 6,
    }


def load_embeddings(cfg: PipelineConfig) -> EmbeddingTable:
    if cfg.embeddings:
        return EmbeddingTable.load(cfg.embeddings, seed=cfg.embedding_seed)
    return EmbeddingTable(dimension=cfg.embedding_dim, seed=cfg.embedding_seed)


def load_document(tml_path, parses_dir, merge_identity: bool = True) -> Document:
    tml_path = Path(tml_path)
    doc = parse_timeml(tml_path.read_text(encoding="utf-8"),
                       merge_identity=merge_identity, doc_id=tml_path.stem)
    parse_path = Path(parses_dir) / (tml_path.stem + ".conllu")
    if not parse_path.exists():
        raise StructuralError(f"no parse file for {tml_path.name}: {parse_path}")
    attach_parses(doc, parse_conllu(parse_path.read_text(encoding="utf-8")))
    return doc


def load_corpus(corpus_dir, parses_dir, merge_identity: bool = True) -> list[Document]:
    paths = sorted(Path(corpus_dir).glob("*.tml"))
    if not paths:
        raise StructuralError(f"no .tml files in {corpus_dir}")
    return [load_document(p, parses_dir, merge_identity) for p in paths]


def _class_weights(instances, label_set, enabled: bool) -> dict[int, float] | None:
    if not enabled:
        return None
    counts = [0] * len(label_set.labels)
    for inst in instances:
        counts[label_set.index(inst.label)] += 1
    weights = tlink_models.inverse_frequency_weights(counts)
    return {i: float(w) for i, w in enumerate(weights)}


def train_all(cfg: PipelineConfig) -> dict:
    """Train the event model and the three pair classifiers; write
    checkpoints, the manifest, and the loss report."""
    mode = cfg.mode_settings
    label_set = cfg.effective_label_set
    seeds = _model_seeds(cfg.seed)
    docs = load_corpus(cfg.corpus_dir, cfg.parses_dir, cfg.merge_identity)
    table = load_embeddings(cfg)
    checkpoint_dir = Path(cfg.checkpoint_dir)
    checkpoint_dir.mkdir(parents=True, exist_ok=True)
    histories = {}

    event_model, histories["event"] = event_extractor.train_event_model(
        docs, table,
        TrainingConfig(learning_rate=cfg.learning_rate,
                       batch_size=cfg.effective_batch_size,
                       epochs=cfg.epochs, patience=0, seed=seeds["event"]),
        units=cfg.event_units, hidden=cfg.event_hidden,
        feature_hidden=cfg.event_feature_hidden,
        dropout_input=cfg.event_dropout_input,
        dropout_hidden=cfg.event_dropout_hidden,
        threshold=cfg.event_threshold,
        positive_weight=cfg.event_positive_weight, model_seed=seeds["event"],
    )
    save_model(event_model, checkpoint_dir / CHECKPOINT_FILES["event"])

    builders = {
        "intra": (tlink_models.build_intra_instances, mode.downsample_intra),
        "cross": (tlink_models.build_cross_instances, mode.downsample_cross),
        "dct": (tlink_models.build_dct_instances, mode.downsample_dct),
    }
    for kind, (builder, ratio) in builders.items():
        instances = [inst for doc in docs
                     for inst in builder(doc, label_set, flat=cfg.flat_context,
                                         window=cfg.window)]
        instances = tlink_models.downsample_nolink(instances, ratio,
                                                   seed=seeds["downsample"])
        examples = [tlink_models.encode_instance(inst, table, label_set)
                    for inst in instances]
        model = TwoBranchModel(
            input_dim=table.dimension, labels=label_set.labels,
            units=cfg.pair_units, hidden=cfg.pair_hidden,
            dropout_input=cfg.pair_dropout_input,
            dropout_hidden=cfg.pair_dropout_hidden, seed=seeds[kind],
        )
        histories[kind] = train(model, examples, TrainingConfig(
            learning_rate=cfg.learning_rate, batch_size=cfg.effective_batch_size,
            epochs=cfg.epochs, patience=0,
            class_weights=_class_weights(instances, label_set,
                                         mode.inverse_class_weights),
            seed=seeds[kind],
        ))
        save_model(model, checkpoint_dir / CHECKPOINT_FILES[kind])

    manifest = cfg.manifest()
    manifest["checkpoints"] = dict(CHECKPOINT_FILES)
    manifest["training"] = {
        name: {"epochs_run": len(h.train_losses),
               "final_loss": h.train_losses[-1],
               "stopped_early": h.stopped_early}
        for name, h in histories.items()
    }
    (checkpoint_dir / MANIFEST_FILE).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    from .reporting import write_training_report
    write_training_report(histories, checkpoint_dir)
    return manifest


def load_bundle(checkpoint_dir) -> tuple:
    """Load the event model and classifier bundle from a checkpoint dir."""
    checkpoint_dir = Path(checkpoint_dir)
    manifest_path = checkpoint_dir / MANIFEST_FILE
    if not manifest_path.exists():
        raise StructuralError(f"no manifest in {checkpoint_dir}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    label_set = tlink_models.LABEL_SETS[manifest["resolved"]["label_set"]]
    models = {kind: load_model(checkpoint_dir / name)
              for kind, name in CHECKPOINT_FILES.items()}
    bundle = tlink_models.ClassifierBundle(
        intra=models["intra"], cross=models["cross"], dct=models["dct"],
        label_set=label_set, config=manifest,
    )
    bundle.require_ready()
    return models["event"], bundle, manifest


def _instance_for(event_id: str) -> MakeInstance:
    suffix = event_id[1:] if event_id.startswith("e") else "_" + event_id
    return MakeInstance(eiid=f"ei{suffix}", eid=event_id)


def annotate_document(doc: Document, event_model, bundle, table,
                      cfg: PipelineConfig) -> tuple[Document, ResolveResult]:
    """Run the full annotation pipeline on one parsed document."""
    mode = cfg.mode_settings
    working = copy.deepcopy(doc)
    working.tlinks = []
    if not cfg.gold_entities:
        working.events = event_extractor.predict_events(event_model, working, table)
        working.instances = [_instance_for(e.id) for e in working.events]
    elif not working.instances:
        working.instances = [_instance_for(e.id) for e in working.events]

    counters: dict = {}
    rule_links = generate_timex_links(working, counters)
    raw_links = tlink_models.classify_pairs(bundle, working, table,
                                            flat=cfg.flat_context,
                                            window=cfg.window)
    result = resolve_document(working, rule_links + raw_links,
                              veto=mode.veto, seed=_model_seeds(cfg.seed)["prune"])
    if counters.get("skipped_timex"):
        logger.info("%s: skipped %d unnormalizable TIMEX value(s)",
                    working.doc_id, counters["skipped_timex"])

    final = sorted(result.tlinks, key=lambda l: (l.source, l.target,
                                                 l.relation.value))
    working.tlinks = [
        TLink(f"l{i}", link.source, link.target, link.relation,
              score=link.score, origin=link.origin)
        for i, link in enumerate(final, start=1)
    ]
    working.validate()
    return working, result


def annotate_corpus(cfg: PipelineConfig, input_dir=None,
                    output_dir=None) -> tuple[int, int]:
    """Annotate every document; one failure does not sink the corpus."""
    input_dir = Path(input_dir or cfg.corpus_dir)
    output_dir = Path(output_dir or cfg.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    event_model, bundle, _ = load_bundle(cfg.checkpoint_dir)
    table = load_embeddings(cfg)

    succeeded = failed = 0
    for path in sorted(input_dir.glob("*.tml")):
        try:
            doc = load_document(path, cfg.parses_dir, cfg.merge_identity)
            annotated, _ = annotate_document(doc, event_model, bundle, table, cfg)
            (output_dir / path.name).write_text(serialize_timeml(annotated),
                                                encoding="utf-8")
            succeeded += 1
        except (TemprelError, OSError) as exc:
            logger.error("failed to annotate %s: %s", path.name, exc)
            failed += 1
    return succeeded, failed


def evaluate_qa_mode(cfg: PipelineConfig, annotations_dir=None) -> QAReport:
    annotations_dir = Path(annotations_dir or cfg.output_dir)
    if not cfg.questions:
        raise StructuralError("qa evaluation needs a questions file")
    questions = load_questions(Path(cfg.questions).read_text(encoding="utf-8"))
    graphs = {}
    for path in sorted(annotations_dir.glob("*.tml")):
        doc = parse_timeml(path.read_text(encoding="utf-8"),
                           merge_identity=cfg.merge_identity, doc_id=path.stem)
        graphs[doc.doc_id] = build_timegraph(doc.tlinks)
    results = answer_all(graphs, questions)
    report = evaluate_qa(results)

    from .reporting import write_qa_report
    write_qa_report(report, results, cfg.output_dir)
    return report


def evaluate_dense_mode(cfg: PipelineConfig, gold_dir, predictions_dir=None) \
        -> DenseReport:
    predictions_dir = Path(predictions_dir or cfg.output_dir)
    gold: dict = {}
    predicted: dict = {}
    for path in sorted(Path(gold_dir).glob("*.tml")):
        gold_doc = parse_timeml(path.read_text(encoding="utf-8"),
                                merge_identity=cfg.merge_identity,
                                doc_id=path.stem)
        pred_path = predictions_dir / path.name
        if not pred_path.exists():
            raise StructuralError(f"no prediction for {path.name}")
        pred_doc = parse_timeml(pred_path.read_text(encoding="utf-8"),
                                merge_identity=cfg.merge_identity,
                                doc_id=pred_path.stem)
        lookup = dense_pair_labels(pred_doc.tlinks)
        for link in gold_doc.tlinks:
            key = (gold_doc.doc_id, link.source, link.target)
            gold[key] = link.relation
            predicted[key] = lookup.get((link.source, link.target),
                                        RelationLabel.NO_LINK)
    report = evaluate_dense(predicted, gold)

    from .reporting import write_dense_report
    write_dense_report(report, cfg.output_dir)
    return report
