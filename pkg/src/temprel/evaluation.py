"""Question-answering and dense pairwise evaluation metrics."""

from __future__ import annotations

from dataclasses import dataclass

from .documents import Question
from .errors import ScopeError, StructuralError
from .relations import RelationLabel
from .timegraph import PointGraph, answer_question


@dataclass
class QuestionResult:
    question: Question
    system: str  # yes | no | unanswered

    @property
    def outcome(self) -> str:
        if self.system == "unanswered":
            return "unanswered"
        return "correct" if self.system == self.question.gold else "incorrect"


@dataclass
class QAReport:
    questions: int
    answered: int
    correct: int
    coverage: float
    precision: float
    recall: float
    f1: float
    precision_defined: bool = True

    @classmethod
    def from_counts(cls, questions: int, answered: int, correct: int) -> "QAReport":
        if questions <= 0:
            raise StructuralError("need at least one question")
        coverage = answered / questions
        precision_defined = answered > 0
        precision = correct / answered if precision_defined else 0.0
        recall = correct / questions
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall > 0 else 0.0)
        return cls(questions, answered, correct, coverage, precision, recall,
                   f1, precision_defined)


def answer_all(graphs: dict[str, PointGraph],
               questions: list[Question]) -> list[QuestionResult]:
    """Answer each question against its document's graph.

    Questions whose document is missing count as unanswered.
    """
    results = []
    for question in questions:
        graph = graphs.get(question.doc_id)
        system = answer_question(graph, question) if graph is not None \
            else "unanswered"
        results.append(QuestionResult(question, system))
    return results


def evaluate_qa(results: list[QuestionResult]) -> QAReport:
    answered = sum(1 for r in results if r.system != "unanswered")
    correct = sum(1 for r in results if r.outcome == "correct")
    return QAReport.from_counts(len(results), answered, correct)


@dataclass
class DenseReport:
    pairs: int
    predicted: int
    correct: int
    precision: float
    recall: float
    f1: float


def evaluate_dense(predicted: dict, gold: dict) -> DenseReport:
    """Micro-averaged P/R/F1 over a densely labeled pair scope.

    Both mappings go from pair keys to RelationLabel; NO_LINK predictions
    stand in for VAGUE and count like any other label.  Predictions for
    pairs outside the gold scope are an error.
    """
    for key in predicted:
        if key not in gold:
            raise ScopeError(f"predicted pair {key!r} is not in the gold scope")
    if not gold:
        raise StructuralError("empty gold scope")
    correct = sum(1 for key, label in predicted.items() if gold[key] is label)
    precision = correct / len(predicted) if predicted else 0.0
    recall = correct / len(gold)
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return DenseReport(len(gold), len(predicted), correct, precision, recall, f1)


def dense_pair_labels(doc_tlinks, all_pairs=None) -> dict:
    """Orientation-normalized lookup from directed pairs to labels."""
    table: dict = {}
    for link in doc_tlinks:
        table[(link.source, link.target)] = link.relation
        table.setdefault((link.target, link.source), link.relation.invert())
    if all_pairs is not None:
        for pair in all_pairs:
            table.setdefault(pair, RelationLabel.NO_LINK)
    return table
