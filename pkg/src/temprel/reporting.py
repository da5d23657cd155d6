"""Report rendering: line-oriented text, tab-delimited summaries, figures."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _write(path: Path, content: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")
    return path


def write_qa_report(report, results, out_dir, stem: str = "qa") -> dict[str, Path]:
    """Per-question outcomes (text), metric summary (TSV), and a bar chart."""
    out_dir = Path(out_dir)

    lines = ["# doc_id source target relation gold system outcome"]
    for r in results:
        q = r.question
        lines.append(f"{q.doc_id} {q.source} {q.target} {q.relation.value} "
                     f"{q.gold} {r.system} {r.outcome}")
    lines.append("")
    lines.append(f"questions={report.questions} answered={report.answered} "
                 f"correct={report.correct}")
    lines.append(f"coverage={report.coverage:.3f} precision={report.precision:.3f} "
                 f"recall={report.recall:.3f} f1={report.f1:.3f}")
    if not report.precision_defined:
        lines.append("note: no questions answered; precision reported as 0")
    text_path = _write(out_dir / f"{stem}_report.txt", "\n".join(lines) + "\n")

    rows = ["metric\tvalue",
            f"questions\t{report.questions}",
            f"answered\t{report.answered}",
            f"correct\t{report.correct}",
            f"coverage\t{report.coverage:.6f}",
            f"precision\t{report.precision:.6f}",
            f"recall\t{report.recall:.6f}",
            f"f1\t{report.f1:.6f}"]
    tsv_path = _write(out_dir / f"{stem}_summary.tsv", "\n".join(rows) + "\n")

    fig, ax = plt.subplots(figsize=(5, 3.2))
    names = ["coverage", "precision", "recall", "f1"]
    values = [report.coverage, report.precision, report.recall, report.f1]
    ax.bar(names, values, color="#4878d0")
    ax.set_ylim(0, 1)
    ax.set_ylabel("score")
    ax.set_title("question answering")
    for x, v in enumerate(values):
        ax.text(x, v + 0.02, f"{v:.2f}", ha="center", fontsize=9)
    fig.tight_layout()
    fig_path = out_dir / f"{stem}_metrics.png"
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)

    return {"text": text_path, "tsv": tsv_path, "figure": fig_path}


def write_dense_report(report, out_dir, stem: str = "dense") -> dict[str, Path]:
    out_dir = Path(out_dir)
    rows = ["metric\tvalue",
            f"pairs\t{report.pairs}",
            f"predicted\t{report.predicted}",
            f"correct\t{report.correct}",
            f"precision\t{report.precision:.6f}",
            f"recall\t{report.recall:.6f}",
            f"f1\t{report.f1:.6f}"]
    tsv_path = _write(out_dir / f"{stem}_summary.tsv", "\n".join(rows) + "\n")

    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    names = ["precision", "recall", "f1"]
    values = [report.precision, report.recall, report.f1]
    ax.bar(names, values, color="#6acc64")
    ax.set_ylim(0, 1)
    ax.set_ylabel("score")
    ax.set_title("dense pairwise evaluation")
    for x, v in enumerate(values):
        ax.text(x, v + 0.02, f"{v:.2f}", ha="center", fontsize=9)
    fig.tight_layout()
    fig_path = out_dir / f"{stem}_metrics.png"
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)

    return {"tsv": tsv_path, "figure": fig_path}


def write_training_report(histories: dict, out_dir) -> dict[str, Path]:
    """Loss curves for every trained model: one TSV plus one figure."""
    out_dir = Path(out_dir)
    rows = ["model\tepoch\ttrain_loss\tval_loss"]
    for name, history in histories.items():
        for epoch, loss in enumerate(history.train_losses, start=1):
            val = (f"{history.val_losses[epoch - 1]:.6f}"
                   if epoch <= len(history.val_losses) else "")
            rows.append(f"{name}\t{epoch}\t{loss:.6f}\t{val}")
    tsv_path = _write(out_dir / "training_losses.tsv", "\n".join(rows) + "\n")

    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    for name, history in histories.items():
        epochs = range(1, len(history.train_losses) + 1)
        ax.plot(epochs, history.train_losses, marker="o", markersize=3,
                label=name)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean training loss")
    ax.set_title("training loss")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig_path = out_dir / "training_losses.png"
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)

    return {"tsv": tsv_path, "figure": fig_path}
