"""Reference point selection: all-training, cluster representatives, and
hypothesis-testing survivors, plus the bridge to pattern-based references.

The selected ``ReferenceSet`` defines the feature space: one feature column
per reference sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import patterns as pat
from .seqcore import LabeledSequence, Sequence
from .similarity import SimilaritySpec, similarity_matrix

RA = "ra"
GAHC = "gahc"
MHT = "mht"
PATTERN = "pattern"


class NoReferencesError(ValueError):
    """Raised when a selector ends with an empty reference set."""


@dataclass(frozen=True)
class SelectionMethod:
    """Which selector to run and its parameters."""

    kind: str
    pointnum: int | None = None  # gahc; None = ceil(|train| / 10)
    alpha: float | None = None  # mht significance level
    include_self: bool = True  # mht: keep Sim[k, k] in the positive sample
    preset: str | None = None  # pattern preset name

    def __post_init__(self) -> None:
        if self.kind not in (RA, GAHC, MHT, PATTERN):
            raise ValueError(f"unknown selection method {self.kind!r}")
        if self.kind == GAHC and self.pointnum is not None and self.pointnum < 1:
            raise ValueError("gahc pointnum must be >= 1")
        if self.kind == MHT:
            if self.alpha is None or not (0.0 < self.alpha <= 1.0):
                raise ValueError("mht requires alpha in (0, 1]")
        if self.kind == PATTERN and self.preset not in pat.PRESETS:
            raise ValueError(
                f"unknown pattern preset {self.preset!r}; expected one of {sorted(pat.PRESETS)}"
            )

    @classmethod
    def ra(cls) -> "SelectionMethod":
        return cls(RA)

    @classmethod
    def gahc(cls, pointnum: int | None = None) -> "SelectionMethod":
        return cls(GAHC, pointnum=pointnum)

    @classmethod
    def mht(cls, alpha: float = 0.05, include_self: bool = True) -> "SelectionMethod":
        return cls(MHT, alpha=alpha, include_self=include_self)

    @classmethod
    def pattern(cls, preset: str) -> "SelectionMethod":
        return cls(PATTERN, preset=preset)

    def describe(self) -> str:
        if self.kind == GAHC:
            return f"gahc(pointnum={self.pointnum if self.pointnum is not None else 'auto'})"
        if self.kind == MHT:
            return f"mht(alpha={self.alpha},include_self={self.include_self})"
        if self.kind == PATTERN:
            return f"pattern({self.preset})"
        return "ra"


@dataclass(frozen=True)
class ReferenceSet:
    """Ordered reference sequences plus where each one came from.

    ``provenance`` strings are unique ("train:<index>" or "pattern:<items>");
    ``train_indices`` carries the numeric origin for training-sequence
    references (None for pattern references).
    """

    references: tuple[Sequence, ...]
    provenance: tuple[str, ...]
    method: str
    train_indices: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not self.references:
            raise NoReferencesError(f"selection {self.method!r} produced no references")
        if len(self.provenance) != len(self.references):
            raise ValueError("provenance must align with references")
        if len(set(self.provenance)) != len(self.provenance):
            raise ValueError("duplicate provenance entries in reference set")

    def __len__(self) -> int:
        return len(self.references)


@dataclass(frozen=True)
class MhtEntry:
    """One candidate's test outcome: its index, class, p-value, rank within
    the class's ascending p-value order (1-based) and whether it was kept."""

    index: int
    label: int
    pvalue: float
    rank: int
    kept: bool


@dataclass
class MhtReport:
    """Audit trail of the multiple-hypothesis-testing selector."""

    entries: list[MhtEntry] = field(default_factory=list)
    maxindex: dict[int, int] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_tsv(self) -> str:
        lines = ["candidate\tclass\tpvalue\tkept"]
        for e in self.entries:
            lines.append(f"{e.index}\t{e.label}\t{e.pvalue!r}\t{int(e.kept)}")
        return "\n".join(lines) + "\n"


def select_all(train: list[LabeledSequence]) -> ReferenceSet:
    """Every training sequence, in dataset order."""
    if not train:
        raise ValueError("select_all requires a non-empty training set")
    return ReferenceSet(
        references=tuple(inst.sequence for inst in train),
        provenance=tuple(f"train:{i}" for i in range(len(train))),
        method="ra",
        train_indices=tuple(range(len(train))),
    )


def _gahc_clusters(
    base: np.ndarray, pointnum: int
) -> tuple[list[list[int]], list[tuple[float, int, int]]]:
    """Group-average agglomeration down to ``pointnum`` clusters.

    Returns the final clusters (member index lists) and the merge trace as
    (similarity, min-member of each merged cluster) triples. Cluster-pair
    similarity is recomputed as the exact mean over all cross-pair member
    similarities; ties pick the lexicographically smallest pair.
    """
    n = base.shape[0]
    clusters: list[list[int]] = [[i] for i in range(n)]
    avg = base.astype(float).copy()
    np.fill_diagonal(avg, -np.inf)
    avg[np.tril_indices(n)] = -np.inf
    trace: list[tuple[float, int, int]] = []
    while len(clusters) > pointnum:
        flat = int(np.argmax(avg))  # first maximum = smallest (i, j) lexicographically
        i, j = divmod(flat, avg.shape[1])
        trace.append((float(avg[i, j]), min(clusters[i]), min(clusters[j])))
        clusters[i] = clusters[i] + clusters[j]
        del clusters[j]
        avg = np.delete(np.delete(avg, j, axis=0), j, axis=1)
        members = clusters[i]
        for x in range(len(clusters)):
            if x == i:
                continue
            mean = float(base[np.ix_(members, clusters[x])].mean())
            if x < i:
                avg[x, i] = mean
            else:
                avg[i, x] = mean
    return clusters, trace


def select_gahc(
    cr: list[Sequence],
    spec: SimilaritySpec,
    pointnum: int,
    sim: np.ndarray | None = None,
) -> ReferenceSet:
    """Cluster the candidates and keep one representative per cluster.

    Starts from singletons, repeatedly merges the most similar pair under
    group-average linkage until ``pointnum`` clusters remain, then emits
    each cluster's minimum-index member, ordered by that index. ``sim``
    overrides the pairwise similarity matrix (rows and columns over ``cr``).
    """
    if not 1 <= pointnum <= len(cr):
        raise ValueError(f"pointnum must lie in [1, {len(cr)}], got {pointnum}")
    base = sim if sim is not None else similarity_matrix(cr, cr, spec).values
    clusters, _ = _gahc_clusters(base, pointnum)
    reps = sorted(min(members) for members in clusters)
    return ReferenceSet(
        references=tuple(cr[r] for r in reps),
        provenance=tuple(f"train:{r}" for r in reps),
        method=f"gahc(pointnum={pointnum})",
        train_indices=tuple(reps),
    )


def _midranks(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def _exact_two_sided(ranks1_sum: float, n1: int, n2: int) -> float:
    """Exact two-sided p by enumerating all rank assignments (no ties)."""
    n = n1 + n2
    u1 = n1 * n2 + n1 * (n1 + 1) / 2.0 - ranks1_sum
    u_hi = max(u1, n1 * n2 - u1)
    total = 0
    extreme = 0
    for subset in combinations(range(1, n + 1), n1):
        u = n1 * n2 + n1 * (n1 + 1) / 2.0 - sum(subset)
        total += 1
        if u >= u_hi:
            extreme += 1
    return min(1.0, 2.0 * extreme / total)


EXACT_LIMIT = 12  # exact enumeration only for tie-free samples up to this total


def mann_whitney_p(sim_pos: list[float], sim_neg: list[float]) -> float:
    """Two-sided Mann-Whitney U test p-value on two similarity samples.

    Ranks use midranks for ties. Small tie-free samples (total <= 12) use
    the exact permutation null; otherwise the normal approximation with
    tie-corrected variance and a 0.5 continuity correction. Identical
    values on both sides give p = 1.
    """
    if not sim_pos or not sim_neg:
        raise ValueError("both similarity samples must be non-empty")
    n1, n2 = len(sim_pos), len(sim_neg)
    combined = list(sim_pos) + list(sim_neg)
    distinct = len(set(combined))
    if distinct == 1:
        return 1.0
    ranks = _midranks(combined)
    r1 = sum(ranks[:n1])
    if distinct == n1 + n2 and n1 + n2 <= EXACT_LIMIT:
        return _exact_two_sided(r1, n1, n2)
    u1 = n1 * n2 + n1 * (n1 + 1) / 2.0 - r1
    u_hi = max(u1, n1 * n2 - u1)
    n = n1 + n2
    # tie-corrected variance of U
    _, tie_counts = np.unique(np.asarray(combined), return_counts=True)
    tie_term = float(np.sum(tie_counts**3 - tie_counts)) / (n * (n - 1))
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0.0:
        return 1.0
    z = (u_hi - n1 * n2 / 2.0 - 0.5) / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2.0)))


def bh_select(pvals: list[float], alpha: float) -> int:
    """Benjamini-Hochberg step-up cutoff over ascending p-values.

    Returns the largest 1-based k with p_k <= alpha * k / m (0 when none
    qualifies); the caller keeps exactly the first k entries.
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    m = len(pvals)
    for a, b in zip(pvals, pvals[1:]):
        if b < a:
            raise ValueError("bh_select requires p-values sorted ascending")
    maxindex = 0
    for k in range(1, m + 1):
        if pvals[k - 1] <= alpha * k / m:
            maxindex = k
    return maxindex


def select_mht(
    train: list[LabeledSequence],
    spec: SimilaritySpec,
    alpha: float,
    include_self: bool = True,
    sim: np.ndarray | None = None,
) -> tuple[ReferenceSet, MhtReport]:
    """Keep the candidates whose similarity profile separates their class.

    For every class, each member is U-tested on its similarities to the
    class (``Sim+``, including its self-similarity unless ``include_self``
    is False) versus the rest (``Sim-``); the class's candidates are then
    thinned with the BH procedure at level ``alpha``. The result is the
    union over classes, ordered by (class, p-rank).
    """
    if not train:
        raise ValueError("select_mht requires a non-empty training set")
    labels = [inst.label for inst in train]
    class_ids = sorted(set(labels))
    if len(class_ids) < 2:
        raise ValueError("select_mht requires at least 2 classes")
    seqs = [inst.sequence for inst in train]
    base = sim if sim is not None else similarity_matrix(seqs, seqs, spec).values

    report = MhtReport()
    kept_order: list[int] = []
    for ci in class_ids:
        pos = [k for k, lab in enumerate(labels) if lab == ci]
        neg = [k for k, lab in enumerate(labels) if lab != ci]
        if len(pos) < 2:
            report.notes.append(
                f"class {ci} has {len(pos)} member(s); p-value computed from a single sample"
            )
        pvals: list[tuple[float, int]] = []
        for k in pos:
            pos_cols = pos if include_self else [j for j in pos if j != k]
            if not pos_cols:
                pos_cols = [k]
                report.notes.append(
                    f"candidate {k}: empty positive sample, fell back to self-similarity"
                )
            sim_pos = [float(base[k, j]) for j in pos_cols]
            sim_neg = [float(base[k, j]) for j in neg]
            pvals.append((mann_whitney_p(sim_pos, sim_neg), k))
        pvals.sort(key=lambda pair: (pair[0], pair[1]))
        maxindex = bh_select([p for p, _ in pvals], alpha)
        report.maxindex[ci] = maxindex
        for rank, (p, k) in enumerate(pvals, start=1):
            kept = rank <= maxindex
            report.entries.append(MhtEntry(index=k, label=ci, pvalue=p, rank=rank, kept=kept))
            if kept:
                kept_order.append(k)
    if not kept_order:
        raise NoReferencesError(
            f"mht selection kept no candidates at alpha={alpha}; consider a larger alpha"
        )
    refset = ReferenceSet(
        references=tuple(seqs[k] for k in kept_order),
        provenance=tuple(f"train:{k}" for k in kept_order),
        method=f"mht(alpha={alpha})",
        train_indices=tuple(kept_order),
    )
    return refset, report


def default_pointnum(n_train: int) -> int:
    """One tenth of the training size, rounded up."""
    return max(1, math.ceil(n_train / 10))


def select_references(
    train: list[LabeledSequence],
    method: SelectionMethod,
    spec: SimilaritySpec,
    sim: np.ndarray | None = None,
) -> ReferenceSet:
    """Dispatch to the configured selector; ``sim`` is an optional
    precomputed train-by-train similarity matrix for the sequence-based
    selectors."""
    if method.kind == RA:
        return select_all(train)
    if method.kind == GAHC:
        pointnum = method.pointnum
        if pointnum is None:
            pointnum = default_pointnum(len(train))
        return select_gahc([inst.sequence for inst in train], spec, pointnum, sim=sim)
    if method.kind == MHT:
        refset, _ = select_mht(
            train, spec, method.alpha, include_self=method.include_self, sim=sim
        )
        return refset
    if method.kind == PATTERN:
        preset = pat.PRESETS[method.preset]
        mined = pat.preset_references(train, preset)
        if not mined:
            raise NoReferencesError(
                f"pattern preset {method.preset!r} mined no references on this training set"
            )
        return ReferenceSet(
            references=tuple(p.sequence for p in mined),
            provenance=tuple("pattern:" + ",".join(map(str, p.items)) for p in mined),
            method=f"pattern({method.preset})",
        )
    raise ValueError(f"unknown selection method {method.kind!r}")
