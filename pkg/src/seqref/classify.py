"""Built-in classifiers (KNN, Gaussian naive Bayes) and the repeated
stratified cross-validation harness.

Reference selection and every fit statistic use only the training fold;
test sequences never enter the reference set. Fold assignments are fully
determined by (seed, repeat), so every reported number is reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .features import FeatureMatrix, from_values, transform
from .refselect import (
    GAHC,
    MHT,
    RA,
    NoReferencesError,
    SelectionMethod,
    select_references,
)
from .seqcore import SequenceDataset
from .similarity import SimilaritySpec, similarity_matrix


@dataclass(frozen=True)
class KnnConfig:
    k: int = 1

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class ClassifierConfig:
    """Which built-in classifier to run."""

    kind: str  # "knn" or "nb"
    k: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("knn", "nb"):
            raise ValueError(f"unknown classifier {self.kind!r}; expected 'knn' or 'nb'")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    def describe(self) -> str:
        return f"knn(k={self.k})" if self.kind == "knn" else "nb"


@dataclass(frozen=True)
class CvConfig:
    folds: int = 5
    repeats: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.folds < 2:
            raise ValueError(f"folds must be >= 2, got {self.folds}")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def knn_predict_batch(trainX: FeatureMatrix, queries: np.ndarray, cfg: KnnConfig) -> np.ndarray:
    """Majority label among the k nearest training rows, per query row.

    Distance ties resolve to the lower training row index; vote ties to the
    smaller class id.
    """
    X = trainX.values
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    if q.shape[1] != X.shape[1]:
        raise ValueError(f"query has {q.shape[1]} features, training data has {X.shape[1]}")
    if cfg.k > X.shape[0]:
        raise ValueError(f"k={cfg.k} exceeds training size {X.shape[0]}")
    n_classes = len(trainX.classes)
    out = np.empty(q.shape[0], dtype=np.int64)
    for i, row in enumerate(q):
        d2 = ((X - row) ** 2).sum(axis=1)
        nearest = np.argsort(d2, kind="stable")[: cfg.k]
        votes = np.bincount(trainX.labels[nearest], minlength=n_classes)
        out[i] = int(np.argmax(votes))
    return out


def knn_predict(trainX: FeatureMatrix, query: np.ndarray, cfg: KnnConfig) -> int:
    return int(knn_predict_batch(trainX, np.asarray(query, dtype=float)[None, :], cfg)[0])


VARIANCE_FLOOR = 1e-9


@dataclass
class GnbModel:
    """Gaussian class-conditional model: prior, mean and floored variance
    per class and feature. Only classes present in training are modeled."""

    class_ids: np.ndarray
    log_priors: np.ndarray
    means: np.ndarray  # (classes, features)
    variances: np.ndarray


def gnb_fit(trainX: FeatureMatrix) -> GnbModel:
    labels = trainX.labels
    class_ids = np.unique(labels)
    if class_ids.size == 0:
        raise ValueError("gnb_fit requires at least one training sample")
    means, variances, log_priors = [], [], []
    for ci in class_ids:
        rows = trainX.values[labels == ci]
        means.append(rows.mean(axis=0))
        variances.append(rows.var(axis=0) + VARIANCE_FLOOR)
        log_priors.append(np.log(rows.shape[0] / trainX.values.shape[0]))
    return GnbModel(
        class_ids=class_ids,
        log_priors=np.asarray(log_priors),
        means=np.asarray(means),
        variances=np.asarray(variances),
    )


def gnb_predict_batch(model: GnbModel, queries: np.ndarray) -> np.ndarray:
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    if q.shape[1] != model.means.shape[1]:
        raise ValueError(
            f"query has {q.shape[1]} features, model was fit on {model.means.shape[1]}"
        )
    # log densities: (queries, classes)
    diff = q[:, None, :] - model.means[None, :, :]
    log_like = -0.5 * (
        np.log(2.0 * np.pi * model.variances)[None, :, :] + diff**2 / model.variances[None, :, :]
    ).sum(axis=2)
    scores = log_like + model.log_priors[None, :]
    return model.class_ids[np.argmax(scores, axis=1)]


def gnb_predict(model: GnbModel, query: np.ndarray) -> int:
    return int(gnb_predict_batch(model, np.asarray(query, dtype=float)[None, :])[0])


@dataclass
class FoldPlan:
    """Per-repeat fold id for every instance, plus stratification warnings."""

    assignments: list[np.ndarray]
    warnings: list[str] = field(default_factory=list)


def stratified_folds(labels: list[int], cfg: CvConfig) -> FoldPlan:
    """Shuffle each class with a (seed, repeat)-derived generator and deal
    round-robin into folds; per class the fold sizes differ by at most one.

    Classes roll into the fold counter consecutively so leave-one-out
    (folds = n) degenerates correctly to singleton test folds.
    """
    labels_arr = np.asarray(labels, dtype=np.int64)
    n = labels_arr.size
    class_ids = np.unique(labels_arr)
    warnings = [
        f"class {ci} has {int((labels_arr == ci).sum())} members, fewer than {cfg.folds} folds"
        for ci in class_ids
        if int((labels_arr == ci).sum()) < cfg.folds
    ]
    assignments: list[np.ndarray] = []
    for r in range(cfg.repeats):
        rng = np.random.default_rng([cfg.seed, r])
        fold = np.empty(n, dtype=np.int64)
        offset = 0
        for ci in class_ids:
            idx = np.flatnonzero(labels_arr == ci)  # canonical: ascending original index
            perm = rng.permutation(idx)
            fold[perm] = (offset + np.arange(perm.size)) % cfg.folds
            offset += perm.size
        assignments.append(fold)
    return FoldPlan(assignments=assignments, warnings=warnings)


@dataclass
class EvalReport:
    """Cross-validation outcome: per-fold accuracies, their mean, summed
    confusion counts and a per-fold detail trail."""

    config: dict
    classes: tuple[str, ...]
    fold_accuracies: list[list[float | None]]
    mean_accuracy: float
    confusion: list[list[int]]  # rows true class, columns predicted
    fold_details: list[dict]
    warnings: list[str]
    failures: list[dict]

    def to_json(self) -> str:
        doc = {
            "config": self.config,
            "classes": list(self.classes),
            "fold_accuracies": self.fold_accuracies,
            "mean_accuracy": self.mean_accuracy,
            "confusion": self.confusion,
            "fold_details": self.fold_details,
            "warnings": self.warnings,
            "failures": self.failures,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def to_tsv(self) -> str:
        lines = ["repeat\tfold\taccuracy"]
        for r, row in enumerate(self.fold_accuracies):
            for f, acc in enumerate(row):
                lines.append(f"{r}\t{f}\t{'NA' if acc is None else repr(acc)}")
        lines.append(f"overall\tmean\t{self.mean_accuracy!r}")
        return "\n".join(lines) + "\n"


def _fit_predict(
    clf: ClassifierConfig, trainX: FeatureMatrix, test_values: np.ndarray
) -> np.ndarray:
    if clf.kind == "knn":
        return knn_predict_batch(trainX, test_values, KnnConfig(k=clf.k))
    model = gnb_fit(trainX)
    return gnb_predict_batch(model, test_values)


def cross_validate(
    dataset: SequenceDataset,
    method: SelectionMethod,
    spec: SimilaritySpec,
    clf: ClassifierConfig,
    cfg: CvConfig,
    threads: int = 1,
    skip_failed_folds: bool = False,
) -> EvalReport:
    """Repeated stratified cross-validation of the full pipeline.

    Each fold selects references, transforms train and test with the same
    similarity spec, fits and scores. For the sequence-based selectors the
    full pairwise similarity matrix is computed once up front; similarity
    is a pure function of the two sequences, so slicing it per fold leaks
    nothing, and the provenance audit still rejects any test-fold
    reference.
    """
    n = len(dataset)
    if n == 0:
        raise ValueError("cross_validate requires a non-empty dataset")
    if cfg.folds > n:
        raise ValueError(f"folds={cfg.folds} exceeds dataset size {n}")
    labels_arr = np.asarray(dataset.labels(), dtype=np.int64)
    n_classes = len(dataset.classes)
    plan = stratified_folds(dataset.labels(), cfg)

    cache: np.ndarray | None = None
    if method.kind in (RA, GAHC, MHT):
        seqs = dataset.sequences()
        cache = similarity_matrix(seqs, seqs, spec, threads=threads).values

    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    fold_accuracies: list[list[float | None]] = [
        [None] * cfg.folds for _ in range(cfg.repeats)
    ]
    fold_details: list[dict] = []
    failures: list[dict] = []
    warnings = list(plan.warnings)

    for r in range(cfg.repeats):
        assign = plan.assignments[r]
        for f in range(cfg.folds):
            test_idx = np.flatnonzero(assign == f)
            train_idx = np.flatnonzero(assign != f)
            detail: dict = {"repeat": r, "fold": f}
            try:
                if test_idx.size == 0 or train_idx.size == 0:
                    raise ValueError("empty train or test fold")
                train = dataset.subset(train_idx)
                if cache is not None:
                    # RA ignores the candidate similarities; skip the copy
                    sub = None if method.kind == RA else cache[np.ix_(train_idx, train_idx)]
                    refset = select_references(train, method, spec, sim=sub)
                    ref_global = train_idx[np.asarray(refset.train_indices, dtype=np.int64)]
                    if set(ref_global.tolist()) & set(test_idx.tolist()):
                        raise AssertionError("test-fold sequence leaked into references")
                    names = tuple(f"train:{g}" for g in ref_global.tolist())
                    trainX = from_values(
                        cache[np.ix_(train_idx, ref_global)],
                        labels_arr[train_idx],
                        spec,
                        names,
                        tuple(dataset.classes),
                    )
                    test_values = cache[np.ix_(test_idx, ref_global)]
                    ref_labels = labels_arr[ref_global]
                else:
                    refset = select_references(train, method, spec)
                    trainX = transform(train, refset, spec, dataset.classes, threads)
                    test_values = transform(
                        dataset.subset(test_idx), refset, spec, dataset.classes, threads
                    ).values
                    ref_labels = None
                preds = _fit_predict(clf, trainX, test_values)
                truth = labels_arr[test_idx]
                acc = float(np.mean(preds == truth))
                fold_accuracies[r][f] = acc
                np.add.at(confusion, (truth, preds), 1)
                detail["accuracy"] = acc
                detail["n_references"] = len(refset)
                if ref_labels is not None:
                    per_class = np.bincount(ref_labels, minlength=n_classes)
                    detail["references_per_class"] = {
                        dataset.classes[ci]: int(per_class[ci]) for ci in range(n_classes)
                    }
                fold_details.append(detail)
            except (NoReferencesError, ValueError, AssertionError) as exc:
                record = {"repeat": r, "fold": f, "error": str(exc)}
                failures.append(record)
                if not skip_failed_folds:
                    raise RuntimeError(
                        f"fold (repeat={r}, fold={f}) failed: {exc}"
                    ) from exc

    scored = [a for row in fold_accuracies for a in row if a is not None]
    if not scored:
        raise RuntimeError("every fold failed; no accuracy to report")
    config = {
        "method": method.describe(),
        "similarity": spec.describe(),
        "classifier": clf.describe(),
        "folds": cfg.folds,
        "repeats": cfg.repeats,
        "seed": cfg.seed,
        "skip_failed_folds": skip_failed_folds,
    }
    return EvalReport(
        config=config,
        classes=tuple(dataset.classes),
        fold_accuracies=fold_accuracies,
        mean_accuracy=float(np.mean(scored)),
        confusion=confusion.tolist(),
        fold_details=fold_details,
        warnings=warnings,
        failures=failures,
    )
