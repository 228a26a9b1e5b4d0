"""Dataset text format and the seeded synthetic data generator.

One instance per line: ``label<TAB>item item item ...`` with items as
whitespace-separated tokens. Lines starting with ``#`` and blank lines are
ignored. Classes and items are interned in first-appearance order.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .seqcore import SequenceDataset

MOTIF_TOKENS = tuple(f"M{i}" for i in range(12))
NOISE_TOKENS = tuple(f"n{i}" for i in range(8))


class DatasetParseError(ValueError):
    """A malformed dataset line, reported with its line number."""


def parse_dataset(path: str | Path, vocab: SequenceDataset | None = None) -> SequenceDataset:
    """Read a dataset file; raises on malformed lines or an empty file.

    ``vocab`` shares an existing dataset's alphabet and class table, so a
    test file parses with ids compatible with its training file; unseen
    tokens extend the alphabet lazily.
    """
    path = Path(path)
    rows: list[tuple[str, list[str]]] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            if "\t" not in line:
                raise DatasetParseError(f"{path}:{lineno}: missing tab between label and items")
            label, rest = line.split("\t", 1)
            if not label:
                raise DatasetParseError(f"{path}:{lineno}: empty class label")
            rows.append((label, rest.split()))
    if not rows:
        raise ValueError(f"{path}: dataset contains no instances")
    if vocab is None:
        return SequenceDataset.from_token_rows(rows)
    return SequenceDataset.from_token_rows(rows, alphabet=vocab.alphabet, classes=vocab.classes)


def write_dataset(dataset: SequenceDataset, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for inst in dataset.instances:
            tokens = " ".join(inst.sequence.tokens(dataset.alphabet))
            fh.write(f"{dataset.classes[inst.label]}\t{tokens}\n")


def synth_gen(
    classes: int,
    per_class: int,
    motif_len: int,
    noise_len: int,
    seed: int,
) -> SequenceDataset:
    """Seeded synthetic dataset: one random motif per class, embedded at
    random positions among noise items from a shared noise alphabet.

    With ``noise_len`` 0 every instance equals its class motif.
    """
    if classes < 1 or per_class < 1 or motif_len < 1:
        raise ValueError("classes, per_class and motif_len must all be positive")
    if noise_len < 0:
        raise ValueError("noise_len must be >= 0")
    rng = np.random.default_rng(seed)
    motifs: list[tuple[str, ...]] = []
    attempts = 0
    while len(motifs) < classes:
        motif = tuple(
            MOTIF_TOKENS[i] for i in rng.integers(0, len(MOTIF_TOKENS), size=motif_len)
        )
        if motif not in motifs:
            motifs.append(motif)
        attempts += 1
        if attempts > 1000 * classes:
            raise ValueError("cannot draw enough distinct motifs; increase motif_len")
    rows: list[tuple[str, list[str]]] = []
    total = motif_len + noise_len
    for c in range(classes):
        for _ in range(per_class):
            positions = np.sort(rng.choice(total, size=motif_len, replace=False))
            tokens: list[str] = [""] * total
            for k, p in enumerate(positions):
                tokens[p] = motifs[c][k]
            for p in range(total):
                if not tokens[p]:
                    tokens[p] = NOISE_TOKENS[int(rng.integers(0, len(NOISE_TOKENS)))]
            rows.append((f"c{c}", tokens))
    return SequenceDataset.from_token_rows(rows)
