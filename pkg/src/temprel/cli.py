"""Command-line entry points: train, annotate, evaluate, prune."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .conflict_resolution import Edge, prune_graph
from .documents import RELIABLE_ORIGINS
from .errors import FormatError, TemprelError
from .pipeline import (
    PipelineConfig,
    annotate_corpus,
    evaluate_dense_mode,
    evaluate_qa_mode,
    train_all,
)
from .relations import RelationLabel


def _add_config_arguments(parser):
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--corpus", dest="corpus_dir", help="TimeML corpus directory")
    parser.add_argument("--parses", dest="parses_dir",
                        help="CoNLL-U parse directory")
    parser.add_argument("--embeddings", help="text embedding file (optional)")
    parser.add_argument("--checkpoints", dest="checkpoint_dir",
                        help="checkpoint directory")
    parser.add_argument("--questions", help="question file")
    parser.add_argument("--out", dest="output_dir", help="output directory")
    parser.add_argument("--mode", choices=["qa-tempeval", "timebank-dense"])
    parser.add_argument("--label-set", dest="label_set",
                        choices=["merged", "full", "dense"])
    parser.add_argument("--seed", type=int)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--flat-context", dest="flat_context",
                        action="store_true", default=None,
                        help="use flat token windows instead of dependency paths")
    parser.add_argument("--gold-entities", dest="use_gold_entities",
                        action="store_true", default=None,
                        help="keep the input event/TIMEX tags instead of tagging")


def _config_from_args(args) -> PipelineConfig:
    override_keys = (
        "corpus_dir", "parses_dir", "embeddings", "checkpoint_dir", "questions",
        "output_dir", "mode", "label_set", "seed", "epochs", "flat_context",
        "use_gold_entities",
    )
    overrides = {k: getattr(args, k, None) for k in override_keys}
    return PipelineConfig.from_file(args.config, overrides)


def _cmd_train(args) -> int:
    cfg = _config_from_args(args)
    manifest = train_all(cfg)
    print(f"wrote {len(manifest['checkpoints'])} checkpoints and manifest "
          f"to {cfg.checkpoint_dir}")
    for name, stats in sorted(manifest["training"].items()):
        print(f"  {name}: {stats['epochs_run']} epochs, "
              f"final loss {stats['final_loss']:.4f}")
    return 0


def _cmd_annotate(args) -> int:
    cfg = _config_from_args(args)
    succeeded, failed = annotate_corpus(cfg, input_dir=args.input)
    print(f"annotated {succeeded} document(s), {failed} failure(s)")
    return 1 if failed else 0


def _cmd_evaluate(args) -> int:
    cfg = _config_from_args(args)
    if (args.gold and cfg.mode != "timebank-dense") or \
            (not args.gold and cfg.mode == "timebank-dense"):
        print("dense evaluation needs --gold and --mode timebank-dense",
              file=sys.stderr)
        return 2
    if cfg.mode == "timebank-dense":
        report = evaluate_dense_mode(cfg, gold_dir=args.gold,
                                     predictions_dir=args.annotations)
        print(f"pairs={report.pairs} correct={report.correct}")
        print(f"precision={report.precision:.3f} recall={report.recall:.3f} "
              f"f1={report.f1:.3f}")
    else:
        report = evaluate_qa_mode(cfg, annotations_dir=args.annotations)
        print(f"questions={report.questions} answered={report.answered} "
              f"correct={report.correct}")
        print(f"coverage={report.coverage:.3f} precision={report.precision:.3f} "
              f"recall={report.recall:.3f} f1={report.f1:.3f}")
    return 0


def parse_link_dump(text: str):
    """Parse 'source target relation score [origin]' lines into edges.

    Ids starting with 't' count as rule vertices; everything else is an
    event vertex inserted incrementally during pruning.
    """
    rule_edges = {"before": [], "includes": []}
    candidate_edges = {"before": [], "includes": []}
    passthrough = []
    family_of = {
        RelationLabel.BEFORE: ("before", True),
        RelationLabel.AFTER: ("before", False),
        RelationLabel.INCLUDES: ("includes", True),
        RelationLabel.IS_INCLUDED: ("includes", False),
    }
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (4, 5):
            raise FormatError(f"expected 4 or 5 fields, got {len(fields)}", line_no)
        source, target, rel_raw, score_raw = fields[:4]
        origin = fields[4] if len(fields) == 5 else "classifier-intra"
        relation = RelationLabel.from_string(rel_raw)
        try:
            score = float(score_raw)
        except ValueError:
            raise FormatError(f"bad score {score_raw!r}", line_no)
        if relation not in family_of:
            passthrough.append((source, target, relation, score))
            continue
        family, forward = family_of[relation]
        edge = Edge(source, target, score) if forward \
            else Edge(target, source, score)
        if origin in RELIABLE_ORIGINS:
            rule_edges[family].append(edge)
        else:
            candidate_edges[family].append(edge)
    return rule_edges, candidate_edges, passthrough


def _cmd_prune(args) -> int:
    text = Path(args.links).read_text(encoding="utf-8")
    rule_edges, candidate_edges, passthrough = parse_link_dump(text)
    dump_lines = []
    for family in ("before", "includes"):
        result = prune_graph(rule_edges[family], candidate_edges[family],
                             seed=args.seed)
        for edge in result.retained:
            print(f"retained {family} {edge.source} -> {edge.target} "
                  f"({edge.weight:.3f})")
        for edge in result.removed:
            print(f"removed  {family} {edge.source} -> {edge.target} "
                  f"({edge.weight:.3f})")
            dump_lines.append(f"{family}\t{edge.source}\t{edge.target}"
                              f"\t{edge.weight:.6f}")
    for source, target, relation, _ in passthrough:
        print(f"passthrough {source} -> {target} ({relation.value})")
    if args.removed_out:
        Path(args.removed_out).write_text(
            "\n".join(dump_lines) + ("\n" if dump_lines else ""),
            encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="temprel",
        description="Temporal relation extraction and reasoning pipeline",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train all models from a corpus")
    _add_config_arguments(p_train)
    p_train.set_defaults(func=_cmd_train)

    p_annotate = sub.add_parser("annotate", help="annotate TimeML documents")
    _add_config_arguments(p_annotate)
    p_annotate.add_argument("--input", help="input directory "
                            "(defaults to the corpus directory)")
    p_annotate.set_defaults(func=_cmd_annotate)

    p_eval = sub.add_parser("evaluate", help="evaluate annotations")
    _add_config_arguments(p_eval)
    p_eval.add_argument("--annotations", help="annotated TimeML directory "
                        "(defaults to the output directory)")
    p_eval.add_argument("--gold", help="gold directory (dense mode)")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_prune = sub.add_parser("prune", help="prune a link dump file")
    p_prune.add_argument("links", help="link dump: source target relation "
                         "score [origin]")
    p_prune.add_argument("--seed", type=int, default=0)
    p_prune.add_argument("--removed-out", help="write removed edges here")
    p_prune.set_defaults(func=_cmd_prune)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except TemprelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
