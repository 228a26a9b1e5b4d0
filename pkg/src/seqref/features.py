"""Similarity-to-reference feature matrices and their file exports.

A dataset transforms into a dense |D| x |R| matrix whose (i, j) entry is the
similarity of sequence i to reference j. The same spec must transform train
and test; the matrix carries it for that reason. Numbers export with 17
significant digits so CSV round-trips are bit-exact.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .refselect import ReferenceSet
from .seqcore import LabeledSequence
from .similarity import SimilaritySpec, similarity_matrix


def fmt_real(x: float) -> str:
    """17 significant digits: enough to reproduce any float64 exactly."""
    return format(float(x), ".17g")


@dataclass
class FeatureMatrix:
    """Rows follow the dataset, columns follow the reference set."""

    values: np.ndarray
    labels: np.ndarray  # per-row class id
    feature_names: tuple[str, ...]
    spec: SimilaritySpec
    classes: tuple[str, ...]  # full class table, indexes label ids

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def transform(
    D: list[LabeledSequence],
    R: ReferenceSet,
    spec: SimilaritySpec,
    classes: tuple[str, ...] | list[str],
    threads: int = 1,
) -> FeatureMatrix:
    """Similarity of every sequence in ``D`` to every reference in ``R``."""
    if not D:
        raise ValueError("transform requires a non-empty dataset")
    matrix = similarity_matrix([inst.sequence for inst in D], list(R.references), spec, threads)
    return FeatureMatrix(
        values=matrix.values,
        labels=np.asarray([inst.label for inst in D], dtype=np.int64),
        feature_names=R.provenance,
        spec=spec,
        classes=tuple(classes),
    )


def from_values(
    values: np.ndarray,
    labels: np.ndarray,
    spec: SimilaritySpec,
    feature_names: tuple[str, ...],
    classes: tuple[str, ...],
) -> FeatureMatrix:
    """Wrap precomputed similarity values (e.g. slices of a cached pairwise
    matrix) in a FeatureMatrix."""
    return FeatureMatrix(
        values=np.asarray(values, dtype=float),
        labels=np.asarray(labels, dtype=np.int64),
        feature_names=tuple(feature_names),
        spec=spec,
        classes=tuple(classes),
    )


def export_csv(m: FeatureMatrix, path: str | Path) -> None:
    """Header f0..f{n-1},label; one row per instance; label is the class token."""
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"f{j}" for j in range(m.values.shape[1])] + ["label"])
            for row, label in zip(m.values, m.labels):
                writer.writerow([fmt_real(v) for v in row] + [m.classes[label]])
    except OSError as exc:
        raise OSError(f"cannot write feature CSV to {path}: {exc}") from exc


def import_csv(path: str | Path) -> tuple[np.ndarray, list[str]]:
    """Read back an exported CSV: (values, label tokens)."""
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-1] != "label":
            raise ValueError(f"{path}: not a feature CSV (missing label column)")
        values: list[list[float]] = []
        labels: list[str] = []
        for row in reader:
            values.append([float(v) for v in row[:-1]])
            labels.append(row[-1])
    return np.asarray(values, dtype=float), labels


def export_arff(m: FeatureMatrix, path: str | Path, relation: str = "seqref_features") -> None:
    """ARFF with numeric feature attributes and a nominal class attribute.

    The class attribute enumerates the full class table even when some
    class is absent from the exported rows.
    """
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8") as fh:
            fh.write(f"@relation {relation}\n\n")
            for j in range(m.values.shape[1]):
                fh.write(f"@attribute f{j} numeric\n")
            class_list = ",".join(m.classes)
            fh.write(f"@attribute class {{{class_list}}}\n\n@data\n")
            for row, label in zip(m.values, m.labels):
                fh.write(",".join(fmt_real(v) for v in row) + f",{m.classes[label]}\n")
    except OSError as exc:
        raise OSError(f"cannot write ARFF to {path}: {exc}") from exc
