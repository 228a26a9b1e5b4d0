"""Sequence-to-sequence similarity functions and pairwise matrix construction.

Nine similarity kinds are supported. ``sf1`` .. ``sf5`` are directional: the
first argument plays the role of the data sequence *s* and the second the
reference *t*. ``sf6``, ``jaccard_lcs``, ``ssk`` and ``lcs_min`` are
symmetric. All math is 64-bit floating point.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .seqcore import Sequence, is_subsequence, min_window, occount_nonoverlap

SF1 = "sf1"
SF2 = "sf2"
SF3 = "sf3"
SF4 = "sf4"
SF5 = "sf5"
SF6 = "sf6"
JACCARD_LCS = "jaccard_lcs"
SSK = "ssk"
LCS_MIN = "lcs_min"

KINDS = (SF1, SF2, SF3, SF4, SF5, SF6, JACCARD_LCS, SSK, LCS_MIN)
#: kinds whose value is symmetric in (s, t)
SYMMETRIC_KINDS = frozenset({SF6, JACCARD_LCS, SSK, LCS_MIN})
#: kinds whose values always lie in [0, 1]
NORMALIZED_KINDS = frozenset({SF1, SF2, SF3, SF6, JACCARD_LCS, SSK, LCS_MIN})

DEFAULT_SSK_N = 1
DEFAULT_SSK_LAMBDA = 0.5


@dataclass(frozen=True)
class SimilaritySpec:
    """Which similarity function to use plus its parameters.

    ``gamma`` is the sf2 window tolerance, ``lam`` the ssk gap decay and
    ``n`` the ssk subsequence length; each must be present exactly when its
    kind requires it.
    """

    kind: str
    gamma: float | None = None
    lam: float | None = None
    n: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown similarity kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == SF2:
            if self.gamma is None or not (0.0 <= self.gamma <= 1.0):
                raise ValueError("sf2 requires gamma in [0, 1]")
        elif self.gamma is not None:
            raise ValueError(f"gamma is only valid for sf2, not {self.kind}")
        if self.kind == SSK:
            if self.n is None or self.n < 1:
                raise ValueError("ssk requires a positive subsequence length n")
            if self.lam is None or not (0.0 < self.lam < 1.0):
                raise ValueError("ssk requires a decay lambda strictly in (0, 1)")
        elif self.lam is not None or self.n is not None:
            raise ValueError(f"lambda/n are only valid for ssk, not {self.kind}")

    @classmethod
    def jaccard(cls) -> "SimilaritySpec":
        return cls(JACCARD_LCS)

    @classmethod
    def ssk(cls, n: int = DEFAULT_SSK_N, lam: float = DEFAULT_SSK_LAMBDA) -> "SimilaritySpec":
        return cls(SSK, n=n, lam=lam)

    @classmethod
    def lcs_min(cls) -> "SimilaritySpec":
        return cls(LCS_MIN)

    @property
    def symmetric(self) -> bool:
        return self.kind in SYMMETRIC_KINDS

    def describe(self) -> str:
        if self.kind == SF2:
            return f"sf2(gamma={self.gamma})"
        if self.kind == SSK:
            return f"ssk(n={self.n},lambda={self.lam})"
        return self.kind


def lcs_len(s: Sequence, t: Sequence) -> int:
    """Length of the longest common subsequence of ``s`` and ``t``."""
    a = np.asarray(s.items, dtype=np.int64)
    b = np.asarray(t.items, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        return 0
    # Row DP; the max with the left neighbour is a running maximum, so each
    # row collapses to vector ops plus one maximum.accumulate.
    prev = np.zeros(b.size + 1, dtype=np.int64)
    for x in a:
        cand = np.where(b == x, prev[:-1] + 1, 0)
        cur = np.maximum(prev[1:], cand)
        np.maximum.accumulate(cur, out=cur)
        prev[1:] = cur
    return int(prev[-1])


def edit_distance(a: Sequence, b: Sequence) -> int:
    """Levenshtein distance with unit-cost insert, delete and substitute."""
    xs = np.asarray(a.items, dtype=np.int64)
    ys = np.asarray(b.items, dtype=np.int64)
    if xs.size == 0:
        return int(ys.size)
    if ys.size == 0:
        return int(xs.size)
    m = ys.size
    idx = np.arange(m + 1, dtype=np.int64)
    prev = idx.copy()
    for i, x in enumerate(xs, start=1):
        cost = (ys != x).astype(np.int64)
        low = np.minimum(prev[1:] + 1, prev[:-1] + cost)
        # cur[j] = min(low[j], cur[j-1] + 1) unrolls to a prefix minimum of
        # low[k] - k (with the row boundary cur[0] = i included at k = 0).
        head = np.concatenate(([i], low))
        cur = np.minimum.accumulate(head - idx) + idx
        prev = cur
    return int(prev[-1])


def jaccard_lcs(s: Sequence, t: Sequence) -> float:
    """LCS-based Jaccard coefficient |LCS| / (|s| + |t| - |LCS|)."""
    if len(s) + len(t) == 0:
        raise ValueError("jaccard_lcs is undefined for two empty sequences")
    common = lcs_len(s, t)
    return common / (len(s) + len(t) - common)


def lcs_min_norm(s: Sequence, t: Sequence) -> float:
    """LCS length normalized by the shorter operand, |LCS| / min(|s|, |t|)."""
    if len(s) == 0 or len(t) == 0:
        raise ValueError("lcs_min_norm requires two non-empty sequences")
    return lcs_len(s, t) / min(len(s), len(t))


def ssk_raw(s: Sequence, t: Sequence, n: int, lam: float) -> float:
    """Gap-weighted subsequence kernel of order ``n``.

    Sums lambda**(span_s + span_t) over all pairs of length-``n`` embeddings
    of a common subsequence, where span is last index - first index + 1.
    Computed with the O(n * |s| * |t|) prefix recursion rather than by
    enumerating embeddings.
    """
    if n < 1:
        raise ValueError("ssk order n must be >= 1")
    if not (0.0 < lam < 1.0):
        raise ValueError("ssk decay lambda must lie strictly in (0, 1)")
    a = np.asarray(s.items, dtype=np.int64)
    b = np.asarray(t.items, dtype=np.int64)
    if a.size < n or b.size < n:
        return 0.0
    match = a[:, None] == b[None, :]
    lam2 = lam * lam
    # kp[i, j] carries the order-m prefix kernel where spans run to the end
    # of both prefixes; order 0 is identically 1.
    kp = np.ones((a.size + 1, b.size + 1))
    for m in range(1, n):
        kp_next = np.zeros_like(kp)
        for i in range(m, a.size + 1):
            contrib = np.where(match[i - 1], lam2 * kp[i - 1, :-1], 0.0)
            # running recursion row[j] = lam * row[j-1] + contrib[j]
            row = lfilter([1.0], [1.0, -lam], contrib)
            kp_next[i, 1:] = lam * kp_next[i - 1, 1:] + row
        kp = kp_next
    return float(lam2 * np.sum(np.where(match, kp[:-1, :-1], 0.0)))


def ssk_normalized(s: Sequence, t: Sequence, n: int, lam: float) -> float:
    """SSK normalized to [0, 1]: K(s,t) / sqrt(K(s,s) * K(t,t)).

    Returns 0 when either self-kernel vanishes (sequence shorter than n),
    so feature matrices stay total.
    """
    kss = ssk_raw(s, s, n, lam)
    ktt = ssk_raw(t, t, n, lam)
    if kss == 0.0 or ktt == 0.0:
        return 0.0
    return ssk_raw(s, t, n, lam) / np.sqrt(kss * ktt)


def _sf2_window_match(s: Sequence, t: Sequence, gamma: float) -> float:
    """1.0 iff some length-|t| contiguous window of s is within edit
    distance gamma * |t| of t. No window exists when |s| < |t|."""
    wlen = len(t)
    if wlen == 0 or wlen > len(s):
        return 0.0
    budget = gamma * wlen
    for start in range(len(s) - wlen + 1):
        window = Sequence(s.items[start : start + wlen])
        if edit_distance(window, t) <= budget:
            return 1.0
    return 0.0


def evaluate(spec: SimilaritySpec, s: Sequence, t: Sequence) -> float:
    """Similarity of data sequence ``s`` to reference ``t`` under ``spec``."""
    kind = spec.kind
    if kind == SF1:
        return 1.0 if is_subsequence(t, s) else 0.0
    if kind == SF2:
        return _sf2_window_match(s, t, spec.gamma)
    if kind == SF3:
        w = min_window(t, s)
        return len(t) / w if w is not None else 0.0
    if kind in (SF4, SF5):
        # occurrence count; counted non-overlapping for both kinds
        return float(occount_nonoverlap(t, s))
    if kind == SF6:
        denom = max(len(s), len(t))
        return lcs_len(s, t) / denom if denom else 0.0
    if kind == JACCARD_LCS:
        return jaccard_lcs(s, t)
    if kind == SSK:
        return ssk_normalized(s, t, spec.n, spec.lam)
    if kind == LCS_MIN:
        return lcs_min_norm(s, t)
    raise ValueError(f"unknown similarity kind {kind!r}")


@dataclass
class SimilarityMatrix:
    """Dense |A| x |B| similarity values; rows follow A, columns follow B."""

    values: np.ndarray
    spec: SimilaritySpec

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


#: kinds that reduce to an LCS length and batch across references
_LCS_BATCH_KINDS = frozenset({SF6, JACCARD_LCS, LCS_MIN})


def _lcs_row(a: np.ndarray, refs: np.ndarray) -> np.ndarray:
    """LCS length of ``a`` against every row of a padded reference matrix.

    Rows are padded with -1, which never matches an item id, so the final
    DP column holds each reference's true LCS length. Same integer
    recurrence as ``lcs_len``, vectorized across references.
    """
    prev = np.zeros((refs.shape[0], refs.shape[1] + 1), dtype=np.int64)
    for x in a:
        cand = np.where(refs == x, prev[:, :-1] + 1, 0)
        cur = np.maximum(prev[:, 1:], cand)
        np.maximum.accumulate(cur, axis=1, out=cur)
        prev[:, 1:] = cur
    return prev[:, -1]


def similarity_matrix(
    A: list[Sequence],
    B: list[Sequence],
    spec: SimilaritySpec,
    threads: int = 1,
) -> SimilarityMatrix:
    """Evaluate ``spec`` for every (A[i], B[j]) pair.

    Entry order is fixed by input order; results are identical for any
    ``threads`` setting since each entry is an independent pure call.
    """
    if not A or not B:
        raise ValueError("similarity_matrix requires non-empty sequence lists")
    values = np.zeros((len(A), len(B)))

    if spec.kind in _LCS_BATCH_KINDS:
        b_lens = np.asarray([len(t) for t in B], dtype=np.int64)
        refs = np.full((len(B), int(b_lens.max(initial=0))), -1, dtype=np.int64)
        for j, t in enumerate(B):
            refs[j, : len(t)] = t.items

        def fill_row(i: int) -> None:
            a = np.asarray(A[i].items, dtype=np.int64)
            common = _lcs_row(a, refs)
            la = a.size
            if spec.kind == JACCARD_LCS:
                if la == 0 and (b_lens == 0).any():
                    j = int(np.flatnonzero(b_lens == 0)[0])
                    raise ValueError(
                        f"similarity failed at entry ({i}, {j}): "
                        "jaccard_lcs is undefined for two empty sequences"
                    )
                values[i] = common / (la + b_lens - common)
            elif spec.kind == LCS_MIN:
                bad = b_lens == 0 if la else np.ones_like(b_lens, dtype=bool)
                if bad.any():
                    j = int(np.flatnonzero(bad)[0])
                    raise ValueError(
                        f"similarity failed at entry ({i}, {j}): "
                        "lcs_min_norm requires two non-empty sequences"
                    )
                values[i] = common / np.minimum(la, b_lens)
            else:  # sf6; max length 0 only when both sides are empty
                denom = np.maximum(la, b_lens)
                np.divide(common, denom, out=values[i], where=denom > 0)

    else:
        same = A is B and spec.symmetric

        def entry(i: int, j: int) -> float:
            try:
                return evaluate(spec, A[i], B[j])
            except ValueError as exc:
                raise ValueError(f"similarity failed at entry ({i}, {j}): {exc}") from exc

        def fill_row(i: int) -> None:
            start = i if same else 0
            for j in range(start, len(B)):
                v = entry(i, j)
                values[i, j] = v
                if same:
                    values[j, i] = v

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill_row, range(len(A))))
    else:
        for i in range(len(A)):
            fill_row(i)
    return SimilarityMatrix(values=values, spec=spec)
