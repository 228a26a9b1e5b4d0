"""Render a cross-validation report to delimited text and figures.

Takes the JSON document written by the ``cv`` command and produces, in one
output directory: the per-fold accuracy table as TSV, a fold-accuracy
figure and a confusion-matrix heatmap.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def folds_tsv(doc: dict) -> str:
    lines = ["repeat\tfold\taccuracy"]
    for r, row in enumerate(doc["fold_accuracies"]):
        for f, acc in enumerate(row):
            lines.append(f"{r}\t{f}\t{'NA' if acc is None else repr(acc)}")
    lines.append(f"overall\tmean\t{doc['mean_accuracy']!r}")
    return "\n".join(lines) + "\n"


def _accuracy_figure(doc: dict, path: Path) -> None:
    per_repeat = [
        [a for a in row if a is not None] for row in doc["fold_accuracies"]
    ]
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.boxplot(per_repeat, positions=range(len(per_repeat)), widths=0.5)
    for r, accs in enumerate(per_repeat):
        ax.plot([r] * len(accs), accs, "o", color="tab:blue", alpha=0.5, ms=4)
    ax.axhline(doc["mean_accuracy"], color="tab:red", lw=1, ls="--",
               label=f"mean = {doc['mean_accuracy']:.3f}")
    ax.set_xlabel("repeat")
    ax.set_ylabel("fold accuracy")
    ax.set_xticks(range(len(per_repeat)))
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="lower right", frameon=False)
    ax.set_title(f"{doc['config'].get('method', '')} + {doc['config'].get('similarity', '')}"
                 f" + {doc['config'].get('classifier', '')}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _confusion_figure(doc: dict, path: Path) -> None:
    counts = np.asarray(doc["confusion"], dtype=float)
    classes = doc["classes"]
    fig, ax = plt.subplots(figsize=(4.8, 4.2))
    im = ax.imshow(counts, cmap="Blues")
    ax.set_xticks(range(len(classes)), classes, rotation=45, ha="right")
    ax.set_yticks(range(len(classes)), classes)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    thresh = counts.max() / 2.0 if counts.size else 0.0
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            ax.text(j, i, f"{int(counts[i, j])}", ha="center", va="center",
                    color="white" if counts[i, j] > thresh else "black", fontsize=9)
    fig.colorbar(im, ax=ax, shrink=0.8, label="count")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report(doc: dict, outdir: str | Path) -> list[Path]:
    """Write folds.tsv, accuracy.png and confusion.png; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    tsv_path = outdir / "folds.tsv"
    tsv_path.write_text(folds_tsv(doc), encoding="utf-8")
    acc_path = outdir / "accuracy.png"
    _accuracy_figure(doc, acc_path)
    conf_path = outdir / "confusion.png"
    _confusion_figure(doc, conf_path)
    return [tsv_path, acc_path, conf_path]
