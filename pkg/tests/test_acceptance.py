"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).

Expected values come either from the worked examples pinned in the module
tests or from the independent brute-force oracles in ``oracles.py``.
"""

import json
import math
import os
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from seqref.classify import ClassifierConfig, CvConfig, cross_validate
from seqref.cli import main as cli_main
from seqref.datasets import parse_dataset, synth_gen, write_dataset
from seqref.features import transform
from seqref.patterns import MiningConfig, mine_frequent
from seqref.refselect import (
    SelectionMethod,
    _gahc_clusters,
    bh_select,
    mann_whitney_p,
    select_all,
    select_gahc,
    select_mht,
)
from seqref.seqcore import LabeledSequence, Sequence, SequenceDataset
from seqref.similarity import (
    SimilaritySpec,
    jaccard_lcs,
    lcs_len,
    lcs_min_norm,
    ssk_normalized,
    ssk_raw,
)

from oracles import (
    brute_average_linkage,
    brute_lcs,
    brute_mine,
    brute_ssk,
    mc_mann_whitney_two_sided,
)


@contextmanager
def criterion(number: int, title: str, budget_s: float | None = None):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[criterion {number}] FAIL - {title}")
        raise
    elapsed = time.perf_counter() - start
    print(f"[criterion {number}] PASS - {title} ({elapsed:.2f}s)")
    if budget_s is not None:
        assert elapsed < budget_s, f"criterion {number} exceeded its {budget_s}s budget"


def test_criterion_1_worked_examples():
    with criterion(1, "worked-example exactness (Jaccard-LCS, SSK, min-normalized LCS)"):
        s = Sequence((0, 1, 2, 3, 4))  # <a,b,c,d,e>
        t = Sequence((4, 2, 3, 2))  # <e,c,d,c>
        assert abs(jaccard_lcs(s, t) - 2 / 7) <= 1e-12
        for lam in (0.05, 0.25, 0.5, 0.9, 0.99):
            assert abs(ssk_normalized(s, t, 1, lam) - 4 / math.sqrt(30)) <= 1e-9
        assert lcs_min_norm(s, t) == 0.5


def test_criterion_2_lcs_oracle_equivalence():
    with criterion(2, "lcs_len equals subsequence-enumeration oracle on 1000 pairs", 10.0):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            a = tuple(rng.integers(0, 4, size=rng.integers(0, 13)))
            b = tuple(rng.integers(0, 4, size=rng.integers(0, 13)))
            assert lcs_len(Sequence(a), Sequence(b)) == brute_lcs(a, b)


def test_criterion_3_ssk_oracle_equivalence():
    with criterion(3, "ssk_raw equals embedding-enumeration oracle", 30.0):
        rng = np.random.default_rng(2025)
        pairs = [
            (
                tuple(rng.integers(0, 4, size=rng.integers(1, 9))),
                tuple(rng.integers(0, 4, size=rng.integers(1, 9))),
            )
            for _ in range(200)
        ]
        for n in (1, 2, 3):
            for lam in (0.25, 0.5, 0.9):
                for a, b in pairs:
                    got = ssk_raw(Sequence(a), Sequence(b), n, lam)
                    assert abs(got - brute_ssk(a, b, n, lam)) <= 1e-9


def test_criterion_4_mining_oracle_equivalence():
    with criterion(4, "mine_frequent equals exhaustive enumeration on 50 datasets", 30.0):
        rng = np.random.default_rng(2026)
        for _ in range(50):
            rows = [
                (int(rng.integers(0, 2)), tuple(rng.integers(0, 4, size=rng.integers(1, 9))))
                for _ in range(int(rng.integers(2, 9)))
            ]
            train = [LabeledSequence(Sequence(items), lab) for lab, items in rows]
            for minsup in (0.25, 0.5, 1.0):
                got = {p.items for p, _ in mine_frequent(train, MiningConfig(minsup, 3))}
                assert got == brute_mine(rows, minsup, 3)


def test_criterion_5_statistical_correctness():
    with criterion(5, "U test exact + Monte-Carlo agreement, BH step-up rule", 20.0):
        assert mann_whitney_p([1.0, 2.0, 3.0], [4.0, 5.0, 6.0]) == 0.1
        rng = np.random.default_rng(123)
        x = list(rng.normal(0.0, 1.0, 10))
        y = list(rng.normal(0.8, 1.0, 10))
        p = mann_whitney_p(x, y)
        p_mc = mc_mann_whitney_two_sided(x, y, n_perm=100_000, seed=99)
        assert abs(p - p_mc) <= 0.01
        assert bh_select([0.01, 0.02, 0.04, 0.5], 0.05) == 2


def test_criterion_6_framework_identities():
    with criterion(6, "GAHC/select-all identity, merge-order oracle, BH keep-all"):
        rng = np.random.default_rng(2027)
        train = [
            LabeledSequence(Sequence(tuple(rng.integers(0, 5, size=rng.integers(3, 9)))), k % 2)
            for k in range(12)
        ]
        spec = SimilaritySpec.jaccard()
        classes = ("c0", "c1")

        # pointnum = |CR| leaves every candidate as its own cluster
        seqs = [inst.sequence for inst in train]
        via_gahc = select_gahc(seqs, spec, pointnum=len(seqs))
        via_all = select_all(train)
        m_gahc = transform(train, via_gahc, spec, classes)
        m_all = transform(train, via_all, spec, classes)
        assert np.array_equal(m_gahc.values, m_all.values)

        # crafted 4-point instance: merges (0,1) at 0.9 then (2,3) at 0.8
        base = np.full((4, 4), 0.1)
        np.fill_diagonal(base, 1.0)
        base[0, 1] = base[1, 0] = 0.9
        base[2, 3] = base[3, 2] = 0.8
        clusters, trace = _gahc_clusters(base, 2)
        oracle_clusters, oracle_trace = brute_average_linkage(base, 2)
        assert [sorted(c) for c in clusters] == oracle_clusters == [[0, 1], [2, 3]]
        assert [(i, j) for _, i, j in trace] == [(i, j) for _, i, j in oracle_trace]
        cr = [Sequence((k,)) for k in range(4)]
        refs = select_gahc(cr, spec, 2, sim=base)
        assert refs.references == (cr[0], cr[2])

        # alpha -> 1 keeps every candidate in every class
        refs_all, report = select_mht(train, spec, alpha=1.0)
        assert len(refs_all) == len(train)
        assert all(entry.kept for entry in report.entries)


def _synth_shuffled(ds: SequenceDataset, seed: int) -> SequenceDataset:
    rng = np.random.default_rng(seed)
    perm = rng.permutation(ds.labels())
    return SequenceDataset(
        instances=[
            LabeledSequence(inst.sequence, int(lab))
            for inst, lab in zip(ds.instances, perm)
        ],
        classes=ds.classes,
        alphabet=ds.alphabet,
    )


def test_criterion_7_end_to_end_synthetic():
    with criterion(7, "synthetic pipeline: R-A >= 0.95, R-MHT >= 0.90, shuffled ~ 0.5", 120.0):
        ds = synth_gen(classes=2, per_class=40, motif_len=5, noise_len=10, seed=7)
        spec = SimilaritySpec.jaccard()
        clf = ClassifierConfig("knn", k=1)
        cv = CvConfig(folds=5, repeats=5, seed=42)

        ra = cross_validate(ds, SelectionMethod.ra(), spec, clf, cv)
        assert ra.mean_accuracy >= 0.95

        mht = cross_validate(ds, SelectionMethod.mht(alpha=0.05), spec, clf, cv)
        assert mht.mean_accuracy >= 0.90
        for detail in mht.fold_details:
            per_class = detail["references_per_class"]
            assert all(count >= 1 for count in per_class.values())

        control = cross_validate(_synth_shuffled(ds, 1234), SelectionMethod.ra(), spec, clf, cv)
        assert 0.40 <= control.mean_accuracy <= 0.60


GENE_PATH = os.environ.get("SEQREF_GENE", "data/gene.tsv")


@pytest.mark.skipif(
    not Path(GENE_PATH).exists(),
    reason="Gene dataset not supplied (set SEQREF_GENE or place data/gene.tsv); "
    "benchmark data is not redistributed with this package",
)
def test_criterion_8_gene_dataset_gated():
    with criterion(8, "Gene dataset: R-A + Jaccard + KNN reaches >= 0.99"):
        ds = parse_dataset(GENE_PATH)
        assert len(ds) == 2942 and len(ds.classes) == 2, "unexpected Gene dataset shape"
        report = cross_validate(
            ds,
            SelectionMethod.ra(),
            SimilaritySpec.jaccard(),
            ClassifierConfig("knn", k=1),
            CvConfig(folds=5, repeats=5, seed=42),
        )
        assert report.mean_accuracy >= 0.99


def test_criterion_9_determinism(tmp_path):
    with criterion(9, "same seed gives byte-identical reports across runs and threads"):
        ds = synth_gen(classes=2, per_class=40, motif_len=5, noise_len=10, seed=7)
        data = tmp_path / "data.tsv"
        write_dataset(ds, data)
        blobs = []
        for name, threads in (("one", 1), ("two", 1), ("four", 4)):
            out_json = tmp_path / f"{name}.json"
            out_tsv = tmp_path / f"{name}.tsv"
            code = cli_main(
                [
                    "cv", "--data", str(data), "--select", "ra", "--sim", "jaccard",
                    "--clf", "knn", "--k", "1", "--folds", "5", "--repeats", "5",
                    "--seed", "42", "--threads", str(threads),
                    "--json", str(out_json), "--tsv", str(out_tsv),
                ]
            )
            assert code == 0
            blobs.append(out_json.read_bytes() + out_tsv.read_bytes())
        assert blobs[0] == blobs[1] == blobs[2]
        doc = json.loads((tmp_path / "one.json").read_text())
        assert doc["mean_accuracy"] >= 0.95
