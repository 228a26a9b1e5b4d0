"""Sequence data model and the containment / occurrence primitives.

Everything downstream (similarity functions, pattern mining, reference
selection) is built on the small set of exact operations defined here:
subsequence tests, gap-constrained embeddings, non-overlapping occurrence
counts and minimal containing windows. All types are immutable after
construction and all operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import accumulate
from typing import Iterable, Iterator


class Alphabet:
    """Bijection between item tokens (strings) and dense 0-based integer ids.

    Ids are assigned in first-appearance order. The mapping extends lazily:
    a token never seen during training simply gets a fresh id, so it can
    never match a training item and similarities degrade gracefully.
    """

    def __init__(self, tokens: Iterable[str] = ()) -> None:
        self._tokens: list[str] = []
        self._ids: dict[str, int] = {}
        for tok in tokens:
            self.intern(tok)

    def intern(self, token: str) -> int:
        """Return the id for ``token``, assigning a new one if unseen."""
        item_id = self._ids.get(token)
        if item_id is None:
            item_id = len(self._tokens)
            self._ids[token] = item_id
            self._tokens.append(token)
        return item_id

    def id_of(self, token: str) -> int:
        return self._ids[token]

    def token(self, item_id: int) -> str:
        return self._tokens[item_id]

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(self._tokens)

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids


@dataclass(frozen=True)
class Sequence:
    """An ordered list of item ids. Hashable, usable as a dict key."""

    items: tuple[int, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.items, tuple):
            object.__setattr__(self, "items", tuple(self.items))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[int]:
        return iter(self.items)

    def __getitem__(self, i: int) -> int:
        return self.items[i]

    def tokens(self, alphabet: Alphabet) -> tuple[str, ...]:
        return tuple(alphabet.token(i) for i in self.items)


@dataclass(frozen=True)
class LabeledSequence:
    """A sequence together with its class id."""

    sequence: Sequence
    label: int


@dataclass(frozen=True)
class GapBounds:
    """Inclusive bounds on the gap between consecutive matched positions."""

    mingap: int
    maxgap: int

    def __post_init__(self) -> None:
        if not (0 <= self.mingap <= self.maxgap):
            raise ValueError(
                f"gap bounds require 0 <= mingap <= maxgap, got ({self.mingap}, {self.maxgap})"
            )


@dataclass
class SequenceDataset:
    """A labeled set of sequences plus its class table and alphabet.

    ``classes[k]`` is the token of class id ``k``; labels index this table.
    """

    instances: list[LabeledSequence] = field(default_factory=list)
    classes: list[str] = field(default_factory=list)
    alphabet: Alphabet = field(default_factory=Alphabet)

    @classmethod
    def from_token_rows(
        cls,
        rows: Iterable[tuple[str, Iterable[str]]],
        alphabet: Alphabet | None = None,
        classes: Iterable[str] = (),
    ) -> "SequenceDataset":
        """Build a dataset from (class token, item tokens) rows.

        Classes and items are interned in first-appearance order. Passing an
        existing ``alphabet``/``classes`` (e.g. from a training set) keeps
        item and class ids compatible across files.
        """
        ds = cls(alphabet=alphabet if alphabet is not None else Alphabet())
        class_ids: dict[str, int] = {}
        for tok in classes:
            if tok not in class_ids:
                class_ids[tok] = len(ds.classes)
                ds.classes.append(tok)
        for label_tok, item_toks in rows:
            cid = class_ids.get(label_tok)
            if cid is None:
                cid = len(ds.classes)
                class_ids[label_tok] = cid
                ds.classes.append(label_tok)
            seq = Sequence(tuple(ds.alphabet.intern(tok) for tok in item_toks))
            ds.instances.append(LabeledSequence(seq, cid))
        return ds

    def sequences(self) -> list[Sequence]:
        return [inst.sequence for inst in self.instances]

    def labels(self) -> list[int]:
        return [inst.label for inst in self.instances]

    def subset(self, indices: Iterable[int]) -> list[LabeledSequence]:
        return [self.instances[i] for i in indices]

    def class_sizes(self) -> list[int]:
        sizes = [0] * len(self.classes)
        for inst in self.instances:
            sizes[inst.label] += 1
        return sizes

    def __len__(self) -> int:
        return len(self.instances)


def is_subsequence(t: Sequence, s: Sequence) -> bool:
    """True iff an increasing index embedding of ``t`` into ``s`` exists.

    A greedy left-to-right scan decides this exactly; the empty sequence is
    a subsequence of everything.
    """
    ti = t.items
    if not ti:
        return True
    k = 0
    last = len(ti)
    for x in s.items:
        if x == ti[k]:
            k += 1
            if k == last:
                return True
    return False


def embeds_with_gap(t: Sequence, s: Sequence, g: GapBounds) -> bool:
    """True iff some embedding of ``t`` into ``s`` satisfies the gap bounds.

    Every consecutive pair of matched positions i_k < i_{k+1} must have
    mingap <= i_{k+1} - i_k - 1 <= maxgap. Decided by a reachability DP
    over positions, not by enumerating embeddings.
    """
    ti, si = t.items, s.items
    if not ti:
        raise ValueError("gap-constrained embedding requires a non-empty pattern")
    n = len(si)
    cur = [x == ti[0] for x in si]
    for k in range(1, len(ti)):
        if not any(cur):
            return False
        # counts[j] = number of reachable positions < j, for O(1) window tests
        counts = [0, *accumulate(int(c) for c in cur)]
        nxt = [False] * n
        for j in range(n):
            if si[j] != ti[k]:
                continue
            hi = j - 1 - g.mingap
            lo = max(j - 1 - g.maxgap, 0)
            if hi >= lo and counts[hi + 1] - counts[lo] > 0:
                nxt[j] = True
        cur = nxt
    return any(cur)


def support(t: Sequence, seqs: list[Sequence]) -> tuple[int, float]:
    """Number and fraction of sequences in ``seqs`` containing ``t``."""
    if not seqs:
        raise ValueError("support requires a non-empty sequence set")
    count = sum(1 for s in seqs if is_subsequence(t, s))
    return count, count / len(seqs)


def occount_nonoverlap(t: Sequence, s: Sequence) -> int:
    """Number of disjoint embeddings of ``t`` in ``s``.

    Counted by repeated greedy leftmost matching: find the leftmost
    embedding, remove its matched positions, repeat until none remains.
    """
    ti = t.items
    if not ti:
        raise ValueError("occurrence counting requires a non-empty pattern")
    remaining = list(s.items)
    count = 0
    while len(remaining) >= len(ti):
        matched: list[int] = []
        k = 0
        for idx, x in enumerate(remaining):
            if x == ti[k]:
                matched.append(idx)
                k += 1
                if k == len(ti):
                    break
        if k < len(ti):
            break
        for idx in reversed(matched):
            del remaining[idx]
        count += 1
    return count


def min_window(t: Sequence, s: Sequence) -> int | None:
    """Minimal i_r - i_1 + 1 over all embeddings of ``t`` in ``s``.

    Returns None when ``t`` is not a subsequence of ``s``. For a fixed first
    position the greedy earliest completion yields the smallest window, so
    scanning all starts is exact.
    """
    ti, si = t.items, s.items
    if not ti:
        raise ValueError("min_window requires a non-empty pattern")
    best: int | None = None
    for start in range(len(si) - len(ti) + 1):
        if si[start] != ti[0]:
            continue
        k = 1
        end = start
        if k < len(ti):
            for j in range(start + 1, len(si)):
                if si[j] == ti[k]:
                    k += 1
                    end = j
                    if k == len(ti):
                        break
        if k == len(ti):
            width = end - start + 1
            if best is None or width < best:
                best = width
            if best == len(ti):
                break
    return best


def partition_by_class(dataset: SequenceDataset) -> dict[int, list[Sequence]]:
    """Disjoint, exhaustive, order-preserving split of sequences by class id."""
    groups: dict[int, list[Sequence]] = {cid: [] for cid in range(len(dataset.classes))}
    for inst in dataset.instances:
        groups[inst.label].append(inst.sequence)
    return groups
