"""Independent brute-force oracles for pinning expected values.

Everything here is deliberately naive (enumeration, memoized recursion,
full recomputation) and written without reference to the package internals,
so a test comparing the two is a genuine cross-check.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np


def contains(t: tuple, s: tuple) -> bool:
    it = iter(s)
    return all(x in it for x in t)


def all_embeddings(t: tuple, s: tuple):
    """Every increasing index tuple embedding t into s."""
    positions = [[i for i, x in enumerate(s) if x == item] for item in t]
    for combo in itertools.product(*positions):
        if all(a < b for a, b in zip(combo, combo[1:])):
            yield combo


def brute_lcs(a: tuple, b: tuple) -> int:
    small, big = (a, b) if len(a) <= len(b) else (b, a)
    for r in range(len(small), 0, -1):
        seen = set()
        for comb in itertools.combinations(small, r):
            if comb in seen:
                continue
            seen.add(comb)
            if contains(comb, big):
                return r
    return 0


def brute_edit(a: tuple, b: tuple) -> int:
    @lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            d(i - 1, j) + 1,
            d(i, j - 1) + 1,
            d(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )

    return d(len(a), len(b))


def brute_ssk(a: tuple, b: tuple, n: int, lam: float) -> float:
    def weights(seq: tuple) -> dict:
        acc: dict[tuple, float] = {}
        for comb in itertools.combinations(range(len(seq)), n):
            u = tuple(seq[i] for i in comb)
            span = comb[-1] - comb[0] + 1
            acc[u] = acc.get(u, 0.0) + lam**span
        return acc

    wa, wb = weights(a), weights(b)
    return sum(v * wb.get(u, 0.0) for u, v in wa.items())


def brute_embeds_with_gap(t: tuple, s: tuple, mingap: int, maxgap: int) -> bool:
    for combo in all_embeddings(t, s):
        if all(mingap <= j - i - 1 <= maxgap for i, j in zip(combo, combo[1:])):
            return True
    return False


def brute_min_window(t: tuple, s: tuple) -> int | None:
    spans = [combo[-1] - combo[0] + 1 for combo in all_embeddings(t, s)]
    return min(spans) if spans else None


def brute_occount(t: tuple, s: tuple) -> int:
    """Greedy-consumption count with explicit position bookkeeping."""
    alive = list(range(len(s)))
    count = 0
    while True:
        taken: list[int] = []
        k = 0
        for pos_idx, pos in enumerate(alive):
            if s[pos] == t[k]:
                taken.append(pos_idx)
                k += 1
                if k == len(t):
                    break
        if k < len(t):
            return count
        for pos_idx in reversed(taken):
            alive.pop(pos_idx)
        count += 1


def brute_mine(
    rows: list[tuple[int, tuple]],
    minsup: float,
    maxsize: int,
    gap: tuple[int, int] | None = None,
) -> set[tuple]:
    """Exhaustively enumerate every subsequence of length <= maxsize and keep
    those frequent in at least one class. ``rows`` are (label, items)."""
    candidates: set[tuple] = set()
    for _, items in rows:
        for r in range(1, min(maxsize, len(items)) + 1):
            candidates.update(itertools.combinations(items, r))
    labels = sorted({lab for lab, _ in rows})
    by_class = {lab: [items for l2, items in rows if l2 == lab] for lab in labels}

    def has(t: tuple, s: tuple) -> bool:
        if gap is None:
            return contains(t, s)
        return brute_embeds_with_gap(t, s, gap[0], gap[1])

    frequent: set[tuple] = set()
    for t in candidates:
        for lab in labels:
            seqs = by_class[lab]
            sup = sum(1 for s in seqs if has(t, s)) / len(seqs)
            if sup >= minsup:
                frequent.add(t)
                break
    return frequent


def brute_average_linkage(base: np.ndarray, pointnum: int):
    """Group-average agglomeration with per-step full recomputation.

    Mirrors the published bookkeeping (merged pair keeps the lower list
    slot) but recomputes every pair average in pure Python each round.
    Returns (final clusters as sorted member lists, merge trace of
    (similarity, min member of each side)).
    """
    clusters: list[list[int]] = [[i] for i in range(base.shape[0])]
    trace = []
    while len(clusters) > pointnum:
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                total = sum(base[a][b] for a in clusters[i] for b in clusters[j])
                avg = total / (len(clusters[i]) * len(clusters[j]))
                if best is None or avg > best[0] + 1e-12:
                    best = (avg, i, j)
        avg, i, j = best
        trace.append((avg, min(clusters[i]), min(clusters[j])))
        clusters[i] = clusters[i] + clusters[j]
        del clusters[j]
    return [sorted(c) for c in clusters], trace


def mht_selection(base: np.ndarray, labels: list[int], alpha: float, pvalue_fn) -> list[int]:
    """Independent re-run of the testing-based selection: per class, test each
    member's similarities to its class vs the rest, sort ascending, apply the
    step-up cutoff, keep the prefix. ``pvalue_fn`` supplies the two-sample
    test so the selection machinery is checked separately from it."""
    kept: list[int] = []
    for ci in sorted(set(labels)):
        pos = [k for k, lab in enumerate(labels) if lab == ci]
        neg = [k for k, lab in enumerate(labels) if lab != ci]
        scored = sorted(
            (pvalue_fn([base[k][j] for j in pos], [base[k][j] for j in neg]), k)
            for k in pos
        )
        m = len(scored)
        maxindex = 0
        for rank, (p, _) in enumerate(scored, start=1):
            if p <= alpha * rank / m:
                maxindex = rank
        kept.extend(k for _, k in scored[:maxindex])
    return kept


def mc_mann_whitney_two_sided(x: list, y: list, n_perm: int, seed: int) -> float:
    """Monte-Carlo permutation estimate of the two-sided rank-sum p-value."""
    from scipy.stats import rankdata

    combined = np.asarray(list(x) + list(y), dtype=float)
    ranks = rankdata(combined)
    n1, n = len(x), len(combined)
    mu = n1 * (n - n1) / 2.0
    u_obs = n1 * (n - n1) + n1 * (n1 + 1) / 2.0 - ranks[:n1].sum()
    rng = np.random.default_rng(seed)
    pick = np.argsort(rng.random((n_perm, n)), axis=1)[:, :n1]
    u_perm = n1 * (n - n1) + n1 * (n1 + 1) / 2.0 - ranks[pick].sum(axis=1)
    return float(np.mean(np.abs(u_perm - mu) >= np.abs(u_obs - mu)))
