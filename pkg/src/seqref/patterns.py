"""Frequent-subsequence mining and the pattern constraint catalogue.

Mining is projected-database prefix growth (PrefixSpan style), optionally
gap-constrained. A pattern is retained when it is frequent in at least one
class; per-class statistics are kept so the discriminative, structural and
interestingness filters can be stacked on top. Well-known method presets
(fsp, dsp, scip, featuremine) are expressed as such stacks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from .seqcore import (
    GapBounds,
    LabeledSequence,
    Sequence,
    SequenceDataset,
    embeds_with_gap,
    is_subsequence,
    min_window,
    occount_nonoverlap,
)

DF1 = "df1"
DF2 = "df2"
DF3 = "df3"
DF4 = "df4"
DF5 = "df5"
DF6 = "df6"
DISCRIMINATIVE_KINDS = (DF1, DF2, DF3, DF4, DF5, DF6)

UNIQUENESS = "uniqueness"
CLOSEDNESS = "closedness"
REDUNDANCY = "redundancy"
STRUCTURAL_KINDS = (UNIQUENESS, CLOSEDNESS, REDUNDANCY)


@dataclass(frozen=True)
class Pattern:
    """A mined subsequence."""

    sequence: Sequence

    def __len__(self) -> int:
        return len(self.sequence)

    @property
    def items(self) -> tuple[int, ...]:
        return self.sequence.items


@dataclass(frozen=True)
class PatternStats:
    """Per-class occurrence statistics of one pattern.

    Class axis covers ids 0..j-1 for the training data the pattern was
    mined from; classes absent from a fold have size 0 and zero counts.
    """

    class_sizes: tuple[int, ...]
    counts: tuple[int, ...]
    occounts: tuple[int, ...]
    occ_vectors: tuple[tuple[int, ...], ...]
    mean_windows: tuple[float, ...]
    pattern_length: int

    @property
    def total_count(self) -> int:
        return sum(self.counts)

    def sup(self, ci: int) -> float:
        return self.counts[ci] / self.class_sizes[ci] if self.class_sizes[ci] else 0.0

    def occ(self, ci: int) -> float:
        """Mean per-sequence non-overlapping occurrence count in class ci."""
        return self.occounts[ci] / self.class_sizes[ci] if self.class_sizes[ci] else 0.0

    def conf(self, ci: int) -> float:
        """Fraction of the pattern's containing sequences that belong to ci."""
        total = self.total_count
        return self.counts[ci] / total if total else 0.0

    def cohesion(self, ci: int) -> float:
        w = self.mean_windows[ci]
        return self.pattern_length / w if w > 0 else 0.0

    def interest(self, ci: int) -> float:
        return self.sup(ci) * self.cohesion(ci)

    @property
    def target_class(self) -> int:
        """Class with the highest support fraction; ties go to the smaller id."""
        sups = [self.sup(ci) for ci in range(len(self.class_sizes))]
        return int(np.argmax(sups))

    def rest_sup(self, ci: int) -> float:
        size = sum(self.class_sizes) - self.class_sizes[ci]
        count = self.total_count - self.counts[ci]
        return count / size if size else 0.0

    def rest_occ(self, ci: int) -> float:
        size = sum(self.class_sizes) - self.class_sizes[ci]
        occ = sum(self.occounts) - self.occounts[ci]
        return occ / size if size else 0.0


@dataclass(frozen=True)
class MiningConfig:
    """Thresholds for frequent-pattern mining."""

    minsup: float
    maxsize: int
    gap: GapBounds | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.minsup <= 1.0):
            raise ValueError(f"minsup must lie in (0, 1], got {self.minsup}")
        if self.maxsize < 1:
            raise ValueError(f"maxsize must be >= 1, got {self.maxsize}")


@dataclass(frozen=True)
class DiscriminativeSpec:
    """One discriminative filter (df1..df6) with its thresholds.

    ``target`` fixes the over-expressed class c1; when None each pattern is
    evaluated against its own best-supported class. The contrast set is
    always the union of the remaining classes.
    """

    kind: str
    minsup: float | None = None
    mincount: float | None = None
    minsupdiff: float | None = None
    min_f_ratio: float | None = None
    min_gr: float | None = None
    min_sig: float = 0.0
    alpha_chi: float | None = None
    target: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in DISCRIMINATIVE_KINDS:
            raise ValueError(f"unknown discriminative kind {self.kind!r}")
        required = {
            DF1: ("minsup",),
            DF2: ("mincount",),
            DF3: ("minsupdiff",),
            DF4: ("min_f_ratio",),
            DF5: ("min_gr",),
            DF6: ("alpha_chi",),
        }[self.kind]
        for name in required:
            if getattr(self, name) is None:
                raise ValueError(f"{self.kind} requires threshold {name!r}")


def _contains(t: Sequence, s: Sequence, gap: GapBounds | None) -> bool:
    if gap is None:
        return is_subsequence(t, s)
    return embeds_with_gap(t, s, gap)


def compute_stats(
    t: Sequence,
    class_seqs: dict[int, list[Sequence]],
    n_classes: int,
    gap: GapBounds | None = None,
) -> PatternStats:
    """Full per-class statistics for pattern ``t``.

    Containment counts respect the mining gap constraint when one is set;
    occurrence counts and windows always use plain subsequence semantics.
    """
    counts, occounts, occ_vectors, mean_windows = [], [], [], []
    for ci in range(n_classes):
        seqs = class_seqs.get(ci, [])
        count = sum(1 for s in seqs if _contains(t, s, gap))
        occ_vec = tuple(occount_nonoverlap(t, s) for s in seqs)
        windows = [w for s in seqs if (w := min_window(t, s)) is not None]
        counts.append(count)
        occounts.append(sum(occ_vec))
        occ_vectors.append(occ_vec)
        mean_windows.append(sum(windows) / len(windows) if windows else 0.0)
    return PatternStats(
        class_sizes=tuple(len(class_seqs.get(ci, [])) for ci in range(n_classes)),
        counts=tuple(counts),
        occounts=tuple(occounts),
        occ_vectors=tuple(occ_vectors),
        mean_windows=tuple(mean_windows),
        pattern_length=len(t),
    )


def _group_by_class(train: list[LabeledSequence]) -> tuple[dict[int, list[Sequence]], int]:
    groups: dict[int, list[Sequence]] = {}
    for inst in train:
        groups.setdefault(inst.label, []).append(inst.sequence)
    n_classes = max(groups) + 1
    return groups, n_classes


def mine_frequent(
    train: list[LabeledSequence], cfg: MiningConfig
) -> list[tuple[Pattern, PatternStats]]:
    """All patterns of length <= maxsize frequent in at least one class.

    Output is in canonical order: by length, then lexicographically by
    item id. Support is anti-monotone per class, so pruning on the best
    per-class support is exact.
    """
    if not train:
        raise ValueError("mine_frequent requires a non-empty training set")
    groups, n_classes = _group_by_class(train)
    sizes = [len(groups.get(ci, [])) for ci in range(n_classes)]
    seqs = [inst.sequence.items for inst in train]
    labels = [inst.label for inst in train]

    def frequent_enough(class_counts: list[int]) -> bool:
        return any(
            sizes[ci] and class_counts[ci] / sizes[ci] >= cfg.minsup
            for ci in range(n_classes)
        )

    found: list[tuple[int, ...]] = []

    if cfg.gap is None:
        # classic projection: (sequence id, first position after the
        # leftmost embedding); one pass finds extensions and their counts
        def grow(prefix: tuple[int, ...], proj: list[tuple[int, int]]) -> None:
            ext_counts: dict[int, list[int]] = {}
            ext_proj: dict[int, list[tuple[int, int]]] = {}
            for sid, pos in proj:
                seq = seqs[sid]
                seen: dict[int, int] = {}
                for j in range(pos, len(seq)):
                    if seq[j] not in seen:
                        seen[seq[j]] = j
                for item, j in seen.items():
                    ext_counts.setdefault(item, [0] * n_classes)[labels[sid]] += 1
                    ext_proj.setdefault(item, []).append((sid, j + 1))
            for item in sorted(ext_proj):
                if not frequent_enough(ext_counts[item]):
                    continue
                pattern = prefix + (item,)
                found.append(pattern)
                if len(pattern) < cfg.maxsize:
                    grow(pattern, ext_proj[item])

        grow((), [(sid, 0) for sid in range(len(seqs))])
    else:
        gap = cfg.gap

        # gap constraints break the leftmost-position property, so track
        # every feasible last-match position per sequence
        def grow_gap(prefix: tuple[int, ...], proj: list[tuple[int, tuple[int, ...]]]) -> None:
            ext_counts: dict[int, list[int]] = {}
            ext_proj: dict[int, list[tuple[int, tuple[int, ...]]]] = {}
            for sid, positions in proj:
                seq = seqs[sid]
                nxt: dict[int, set[int]] = {}
                if not prefix:
                    for j, item in enumerate(seq):
                        nxt.setdefault(item, set()).add(j)
                else:
                    for p in positions:
                        lo = p + 1 + gap.mingap
                        hi = min(p + 1 + gap.maxgap, len(seq) - 1)
                        for j in range(lo, hi + 1):
                            nxt.setdefault(seq[j], set()).add(j)
                for item, js in nxt.items():
                    ext_counts.setdefault(item, [0] * n_classes)[labels[sid]] += 1
                    ext_proj.setdefault(item, []).append((sid, tuple(sorted(js))))
            for item in sorted(ext_proj):
                if not frequent_enough(ext_counts[item]):
                    continue
                pattern = prefix + (item,)
                found.append(pattern)
                if len(pattern) < cfg.maxsize:
                    grow_gap(pattern, ext_proj[item])

        grow_gap((), [(sid, ()) for sid in range(len(seqs))])

    found.sort(key=lambda items: (len(items), items))
    return [
        (Pattern(Sequence(items)), compute_stats(Sequence(items), groups, n_classes, cfg.gap))
        for items in found
    ]


def _growth_rate(stats: PatternStats, c1: int) -> float:
    """sup_c1 / sup_rest computed from integer counts, so ratios of exact
    fractions (e.g. 0.6 / 0.2) hit thresholds like 3 exactly."""
    count1, size1 = stats.counts[c1], stats.class_sizes[c1]
    count2 = stats.total_count - count1
    size2 = sum(stats.class_sizes) - size1
    if count1 == 0 or size1 == 0:
        return 0.0
    if count2 == 0 or size2 == 0:
        return math.inf
    return (count1 * size2) / (count2 * size1)


def _chi_squared_containment(stats: PatternStats) -> tuple[float, float]:
    """Pearson chi-squared over the (class x contains/not-contains) table.

    Degenerate margins (pattern in every sequence or in none) carry no
    signal and yield (0, 1). Returns (statistic, p-value).
    """
    rows = [
        (stats.counts[ci], stats.class_sizes[ci] - stats.counts[ci])
        for ci in range(len(stats.class_sizes))
        if stats.class_sizes[ci] > 0
    ]
    obs = np.asarray(rows, dtype=float)
    col = obs.sum(axis=0)
    if col[0] == 0.0 or col[1] == 0.0 or obs.shape[0] < 2:
        return 0.0, 1.0
    row = obs.sum(axis=1)
    expected = np.outer(row, col) / obs.sum()
    stat = float(((obs - expected) ** 2 / expected).sum())
    df = obs.shape[0] - 1
    pvalue = float(gammaincc(df / 2.0, stat / 2.0))
    return stat, pvalue


def discriminative_eval(
    p: Pattern,
    stats: PatternStats,
    spec: DiscriminativeSpec,
    mined: list[tuple[Pattern, PatternStats]] | None = None,
) -> tuple[float, bool]:
    """Score ``p`` under one discriminative function and test its threshold.

    The contrast class c2 pools every class other than c1. df5's conditional
    redundancy needs the surrounding mined set (``mined``) to collect the
    discriminative proper sub-patterns Q; without it Q is treated as empty.
    """
    live_classes = sum(1 for size in stats.class_sizes if size > 0)
    if live_classes < 2:
        raise ValueError("discriminative evaluation requires >= 2 non-empty classes")
    c1 = spec.target if spec.target is not None else stats.target_class
    sup1, sup2 = stats.sup(c1), stats.rest_sup(c1)

    if spec.kind == DF1:
        return sup1 - sup2, sup1 > spec.minsup and sup2 <= spec.minsup

    if spec.kind == DF2:
        occ1, occ2 = stats.occ(c1), stats.rest_occ(c1)
        return occ1 - occ2, occ1 > spec.mincount and occ2 <= spec.mincount

    if spec.kind == DF3:
        score = sup1 - sup2
        return score, score >= spec.minsupdiff

    if spec.kind == DF4:
        occ1, occ2 = stats.occ(c1), stats.rest_occ(c1)
        n1 = stats.class_sizes[c1]
        n2 = sum(stats.class_sizes) - n1
        grand = (occ1 + occ2) / 2.0
        between = n1 * (occ1 - grand) ** 2 + n2 * (occ2 - grand) ** 2
        vec1 = stats.occ_vectors[c1]
        vec2 = [o for ci, vec in enumerate(stats.occ_vectors) if ci != c1 for o in vec]
        within = sum((o - occ1) ** 2 for o in vec1) + sum((o - occ2) ** 2 for o in vec2)
        if within == 0.0:
            score = math.inf if between > 0.0 else 0.0
        else:
            score = between / within
        return score, score >= spec.min_f_ratio

    if spec.kind == DF5:
        gr = _growth_rate(stats, c1)
        sig = math.inf
        if mined is not None:
            for q, q_stats in mined:
                if q.sequence == p.sequence or not is_subsequence(q.sequence, p.sequence):
                    continue
                q_gr = _growth_rate(q_stats, c1)
                if q_gr < spec.min_gr:
                    continue
                if math.isinf(q_gr):
                    ratio = 1.0 if math.isinf(gr) else 0.0
                else:
                    ratio = gr / q_gr
                sig = min(sig, ratio)
        return gr, gr >= spec.min_gr and sig >= spec.min_sig

    if spec.kind == DF6:
        stat, pvalue = _chi_squared_containment(stats)
        return stat, pvalue <= spec.alpha_chi

    raise ValueError(f"unknown discriminative kind {spec.kind!r}")


def interestingness(p: Pattern, class_seqs: list[Sequence]) -> tuple[float, float, float]:
    """(support, cohesion, interestingness) of ``p`` within one class.

    Cohesion is |p| over the mean minimal window across supporting
    sequences; interestingness is support times cohesion. All zero when
    the pattern is unsupported.
    """
    if len(p) == 0:
        raise ValueError("interestingness requires a non-empty pattern")
    windows = [w for s in class_seqs if (w := min_window(p.sequence, s)) is not None]
    if not windows:
        return 0.0, 0.0, 0.0
    sup = len(windows) / len(class_seqs)
    cohesion = len(p) / (sum(windows) / len(windows))
    return sup, cohesion, sup * cohesion


def _passes_structural(
    p: Pattern,
    stats: PatternStats,
    all_mined: list[tuple[Pattern, PatternStats]],
    which: set[str] | frozenset[str],
    target: int | None,
) -> bool:
    if UNIQUENESS in which and len(set(p.items)) != len(p.items):
        return False
    if CLOSEDNESS in which:
        for q, q_stats in all_mined:
            if len(q) <= len(p) or not is_subsequence(p.sequence, q.sequence):
                continue
            if q_stats.total_count == stats.total_count:
                return False
    if REDUNDANCY in which:
        ci = target if target is not None else stats.target_class
        total = sum(stats.class_sizes)
        prior = stats.class_sizes[ci] / total if total else 0.0
        if stats.conf(ci) < prior:
            return False
    return True


def structural_filters(
    p: Pattern,
    all_mined: list[tuple[Pattern, PatternStats]],
    dataset: SequenceDataset,
    which: set[str],
    target: int | None = None,
) -> bool:
    """Conjunction of the requested structural checks on ``p``.

    closedness compares whole-dataset containment counts against the mined
    super-patterns of ``p``; redundancy compares the pattern's confidence
    for ``target`` (default: its best-supported class) against that class's
    prior.
    """
    unknown = set(which) - set(STRUCTURAL_KINDS)
    if unknown:
        raise ValueError(f"unknown structural filters: {sorted(unknown)}")
    stats = next((st for q, st in all_mined if q.sequence == p.sequence), None)
    if stats is None:
        groups = {ci: [] for ci in range(len(dataset.classes))}
        for inst in dataset.instances:
            groups[inst.label].append(inst.sequence)
        stats = compute_stats(p.sequence, groups, len(dataset.classes))
    return _passes_structural(p, stats, all_mined, which, target)


def select_pattern_references(
    train: list[LabeledSequence],
    cfg: MiningConfig,
    disc: DiscriminativeSpec | None = None,
    structural: frozenset[str] | set[str] = frozenset(),
    minint: float | None = None,
) -> list[Pattern]:
    """Mine frequent patterns and filter them through the requested stack.

    An empty result is returned as-is; whether that is an error is the
    caller's decision.
    """
    mined = mine_frequent(train, cfg)
    kept: list[Pattern] = []
    for p, stats in mined:
        target = stats.target_class
        if structural and not _passes_structural(p, stats, mined, structural, target):
            continue
        if disc is not None:
            _, passes = discriminative_eval(p, stats, disc, mined=mined)
            if not passes:
                continue
        if minint is not None and stats.interest(target) < minint:
            continue
        kept.append(p)
    return kept


@dataclass(frozen=True)
class PatternPreset:
    """A named pattern-method configuration: mining + filter stack + the
    boolean/cohesion similarity it is conventionally paired with."""

    name: str
    mining: MiningConfig
    disc: DiscriminativeSpec | None = None
    structural: frozenset[str] = frozenset()
    minint: float | None = None
    similarity: str = "sf1"


PRESETS: dict[str, PatternPreset] = {
    "fsp": PatternPreset("fsp", MiningConfig(minsup=0.3, maxsize=3)),
    "dsp": PatternPreset(
        "dsp",
        MiningConfig(minsup=0.3, maxsize=3),
        disc=DiscriminativeSpec(DF5, min_gr=3.0),
    ),
    "scip": PatternPreset(
        "scip",
        MiningConfig(minsup=0.05, maxsize=3),
        minint=0.02,
        similarity="sf3",
    ),
    "featuremine": PatternPreset(
        "featuremine",
        MiningConfig(minsup=0.3, maxsize=3),
        disc=DiscriminativeSpec(DF6, alpha_chi=0.05),
        structural=frozenset({REDUNDANCY}),
    ),
}


def preset_references(train: list[LabeledSequence], preset: PatternPreset) -> list[Pattern]:
    return select_pattern_references(
        train,
        preset.mining,
        disc=preset.disc,
        structural=preset.structural,
        minint=preset.minint,
    )
