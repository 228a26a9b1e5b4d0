import numpy as np
import pytest

from seqref.refselect import (
    MhtReport,
    NoReferencesError,
    SelectionMethod,
    _gahc_clusters,
    bh_select,
    default_pointnum,
    mann_whitney_p,
    select_all,
    select_gahc,
    select_mht,
    select_references,
)
from seqref.seqcore import LabeledSequence, Sequence
from seqref.similarity import SimilaritySpec, similarity_matrix

from oracles import brute_average_linkage, mc_mann_whitney_two_sided, mht_selection

A, B, C, D, E, F = range(6)


def seq(*items: int) -> Sequence:
    return Sequence(tuple(items))


def labeled(rows):
    return [LabeledSequence(Sequence(tuple(items)), label) for label, items in rows]


class TestSelectAll:
    def test_order_preserved(self):
        train = labeled([(0, (A,)), (1, (B,)), (0, (C,))])
        refs = select_all(train)
        assert len(refs) == 3
        assert refs.references == tuple(inst.sequence for inst in train)
        assert refs.train_indices == (0, 1, 2)

    def test_duplicates_kept_with_distinct_provenance(self):
        train = labeled([(0, (A, B)), (0, (A, B))])
        refs = select_all(train)
        assert len(refs) == 2
        assert len(set(refs.provenance)) == 2

    def test_unit_diagonal_under_jaccard(self):
        train = labeled([(0, (A, B)), (1, (C,)), (0, (D, E, F))])
        refs = select_all(train)
        m = similarity_matrix(
            [i.sequence for i in train], list(refs.references), SimilaritySpec.jaccard()
        )
        assert np.allclose(np.diag(m.values), 1.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            select_all([])


def crafted_matrix():
    base = np.full((4, 4), 0.1)
    np.fill_diagonal(base, 1.0)
    base[0, 1] = base[1, 0] = 0.9
    base[2, 3] = base[3, 2] = 0.8
    return base


class TestSelectGahc:
    CR = [seq(A), seq(B), seq(C), seq(D)]

    def test_pointnum_equal_to_size_is_identity(self):
        refs = select_gahc(self.CR, SimilaritySpec.jaccard(), 4, sim=crafted_matrix())
        assert refs.references == tuple(self.CR)

    def test_pointnum_one_keeps_minimum_subscript(self):
        refs = select_gahc(self.CR, SimilaritySpec.jaccard(), 1, sim=crafted_matrix())
        assert refs.references == (self.CR[0],)

    def test_crafted_instance(self):
        refs = select_gahc(self.CR, SimilaritySpec.jaccard(), 2, sim=crafted_matrix())
        assert refs.references == (self.CR[0], self.CR[2])
        assert refs.train_indices == (0, 2)

    def test_merge_trace_matches_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(30):
            n = int(rng.integers(3, 9))
            raw = rng.random((n, n))
            base = (raw + raw.T) / 2.0
            np.fill_diagonal(base, 1.0)
            pointnum = int(rng.integers(1, n + 1))
            clusters, trace = _gahc_clusters(base, pointnum)
            oracle_clusters, oracle_trace = brute_average_linkage(base, pointnum)
            assert [sorted(c) for c in clusters] == oracle_clusters
            assert len(trace) == len(oracle_trace)
            for (got_sim, gi, gj), (exp_sim, ei, ej) in zip(trace, oracle_trace):
                assert (gi, gj) == (ei, ej)
                assert got_sim == pytest.approx(exp_sim, abs=1e-12)

    def test_cluster_count_decreases_by_one_per_merge(self):
        base = crafted_matrix()
        _, trace = _gahc_clusters(base, 1)
        assert len(trace) == 3

    def test_pointnum_out_of_range(self):
        with pytest.raises(ValueError):
            select_gahc(self.CR, SimilaritySpec.jaccard(), 0)
        with pytest.raises(ValueError):
            select_gahc(self.CR, SimilaritySpec.jaccard(), 5)

    def test_default_pointnum_is_tenth_rounded_up(self):
        assert default_pointnum(20) == 2
        assert default_pointnum(21) == 3
        assert default_pointnum(3) == 1


class TestMannWhitney:
    def test_exact_separated_samples(self):
        assert mann_whitney_p([1.0, 2.0, 3.0], [4.0, 5.0, 6.0]) == pytest.approx(0.1, abs=1e-15)

    def test_identical_multisets(self):
        assert mann_whitney_p([1.0, 2.0], [2.0, 1.0]) == 1.0

    def test_all_equal(self):
        assert mann_whitney_p([5.0] * 4, [5.0] * 6) == 1.0

    def test_empty_side_rejected(self):
        with pytest.raises(ValueError):
            mann_whitney_p([], [1.0])
        with pytest.raises(ValueError):
            mann_whitney_p([1.0], [])

    def test_close_to_monte_carlo_oracle(self):
        rng = np.random.default_rng(123)
        x = list(rng.normal(0.0, 1.0, 10))
        y = list(rng.normal(0.8, 1.0, 10))
        p = mann_whitney_p(x, y)
        p_mc = mc_mann_whitney_two_sided(x, y, n_perm=100_000, seed=99)
        assert p == pytest.approx(p_mc, abs=0.01)

    def test_matches_scipy_asymptotic_with_ties(self):
        from scipy.stats import mannwhitneyu

        rng = np.random.default_rng(44)
        for _ in range(50):
            x = list(rng.integers(0, 6, size=rng.integers(5, 20)).astype(float))
            y = list(rng.integers(0, 6, size=rng.integers(5, 20)).astype(float))
            if len(set(x + y)) == 1:
                continue
            got = mann_whitney_p(x, y)
            expected = mannwhitneyu(
                x, y, alternative="two-sided", method="asymptotic", use_continuity=True
            ).pvalue
            assert got == pytest.approx(min(1.0, expected), abs=1e-12)

    def test_matches_scipy_exact_small_samples(self):
        from scipy.stats import mannwhitneyu

        rng = np.random.default_rng(45)
        for _ in range(50):
            n1 = int(rng.integers(1, 7))
            n2 = int(rng.integers(1, 13 - n1))
            pool = rng.permutation(100)[: n1 + n2].astype(float)
            x, y = list(pool[:n1]), list(pool[n1:])
            got = mann_whitney_p(x, y)
            expected = mannwhitneyu(x, y, alternative="two-sided", method="exact").pvalue
            assert got == pytest.approx(expected, abs=1e-12)

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(46)
        x = list(rng.random(8))
        y = list(rng.random(11))
        base = mann_whitney_p(x, y)
        for f in (np.exp, lambda v: np.asarray(v) ** 3 + 2):
            assert mann_whitney_p(list(f(x)), list(f(y))) == pytest.approx(base, abs=1e-12)


class TestBhSelect:
    def test_step_up_example(self):
        assert bh_select([0.01, 0.02, 0.04, 0.5], 0.05) == 2

    def test_all_zero(self):
        assert bh_select([0.0] * 5, 0.05) == 5

    def test_all_one(self):
        assert bh_select([1.0] * 5, 0.5) == 0

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            bh_select([0.2, 0.1], 0.05)

    def test_bad_alpha_rejected(self):
        with pytest.raises(ValueError):
            bh_select([0.1], 0.0)

    def test_kept_set_monotone_in_alpha(self):
        rng = np.random.default_rng(47)
        for _ in range(50):
            pvals = sorted(rng.random(12))
            cuts = [bh_select(pvals, a) for a in (0.01, 0.05, 0.2, 0.5, 1.0)]
            assert cuts == sorted(cuts)


def two_block_train():
    """Two classes over disjoint alphabets, identical within class."""
    return labeled(
        [(0, (A, B, C))] * 3 + [(1, (D, E, F))] * 3
    )


class TestSelectMht:
    def test_disjoint_classes_keep_everything(self):
        train = two_block_train()
        refs, report = select_mht(train, SimilaritySpec.jaccard(), alpha=0.05)
        assert len(refs) == 6
        assert all(e.kept for e in report.entries)
        # oracle: recompute one candidate's test by hand
        base = similarity_matrix(
            [i.sequence for i in train], [i.sequence for i in train], SimilaritySpec.jaccard()
        ).values
        p_hand = mann_whitney_p(list(base[0, :3]), list(base[0, 3:]))
        assert report.entries[0].pvalue == pytest.approx(p_hand)

    def test_alpha_one_keeps_all_candidates(self):
        rng = np.random.default_rng(48)
        train = labeled(
            [(k % 2, tuple(rng.integers(0, 4, size=6))) for k in range(10)]
        )
        refs, report = select_mht(train, SimilaritySpec.jaccard(), alpha=1.0)
        assert len(refs) == len(train)

    def test_no_signal_keeps_almost_nothing(self):
        rng = np.random.default_rng(49)
        kept_total = 0
        candidates = 0
        for _ in range(10):
            train = labeled(
                [(int(rng.integers(0, 2)), tuple(rng.integers(0, 4, size=8))) for _ in range(20)]
            )
            try:
                refs, _ = select_mht(train, SimilaritySpec.jaccard(), alpha=0.05)
                kept_total += len(refs)
            except NoReferencesError:
                pass
            candidates += len(train)
        assert kept_total / candidates < 0.2

    def test_no_survivors_is_a_distinct_error(self):
        train = labeled([(0, (A, B)), (0, (A, B)), (1, (A, B)), (1, (A, B))])
        with pytest.raises(NoReferencesError, match="alpha"):
            select_mht(train, SimilaritySpec.jaccard(), alpha=0.05)

    def test_single_member_class_logged_not_fatal(self):
        train = labeled([(0, (A, B, C)), (1, (D, E)), (1, (D, F))])
        refs, report = select_mht(train, SimilaritySpec.jaccard(), alpha=1.0)
        assert any("single sample" in note for note in report.notes)
        assert len(refs) == 3

    def test_single_member_class_with_excluded_self_falls_back(self):
        train = labeled([(0, (A, B, C)), (1, (D, E)), (1, (D, F))])
        refs, report = select_mht(
            train, SimilaritySpec.jaccard(), alpha=1.0, include_self=False
        )
        assert any("fell back to self-similarity" in note for note in report.notes)
        assert len(refs) == 3

    def test_exclude_self_flag(self):
        train = two_block_train()
        refs, report = select_mht(
            train, SimilaritySpec.jaccard(), alpha=1.0, include_self=False
        )
        base = similarity_matrix(
            [i.sequence for i in train], [i.sequence for i in train], SimilaritySpec.jaccard()
        ).values
        p_hand = mann_whitney_p(list(base[0, 1:3]), list(base[0, 3:]))
        assert report.entries[0].pvalue == pytest.approx(p_hand)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            select_mht(labeled([(0, (A,)), (0, (B,))]), SimilaritySpec.jaccard(), 0.05)

    def test_deterministic(self):
        train = two_block_train()
        r1, _ = select_mht(train, SimilaritySpec.jaccard(), alpha=0.5)
        r2, _ = select_mht(train, SimilaritySpec.jaccard(), alpha=0.5)
        assert r1.references == r2.references

    def test_kept_set_matches_independent_selection_oracle(self):
        rng = np.random.default_rng(51)
        spec = SimilaritySpec.jaccard()
        for _ in range(10):
            # half noisy, half with a class-0 marker so some signal exists
            rows = []
            for k in range(14):
                items = list(rng.integers(0, 4, size=7))
                if k % 2 == 0:
                    items[:2] = [9, 9]
                rows.append((k % 2, tuple(items)))
            train = labeled(rows)
            base = similarity_matrix(
                [i.sequence for i in train], [i.sequence for i in train], spec
            ).values
            expected = mht_selection(base, [i.label for i in train], 0.3, mann_whitney_p)
            try:
                refs, _ = select_mht(train, spec, alpha=0.3)
                got = list(refs.train_indices)
            except NoReferencesError:
                got = []
            assert sorted(got) == sorted(expected)

    def test_report_tsv_shape(self):
        train = two_block_train()
        _, report = select_mht(train, SimilaritySpec.jaccard(), alpha=0.05)
        lines = report.to_tsv().strip().split("\n")
        assert lines[0] == "candidate\tclass\tpvalue\tkept"
        assert len(lines) == 1 + len(train)


class TestSelectReferences:
    def test_ra_dispatch(self):
        train = two_block_train()
        refs = select_references(train, SelectionMethod.ra(), SimilaritySpec.jaccard())
        assert len(refs) == len(train)

    def test_gahc_default_pointnum(self):
        rng = np.random.default_rng(50)
        train = labeled([(0, tuple(rng.integers(0, 5, size=6))) for _ in range(20)])
        refs = select_references(train, SelectionMethod.gahc(), SimilaritySpec.jaccard())
        assert len(refs) == 2

    def test_pattern_preset_dispatch(self):
        from seqref.patterns import PRESETS, preset_references

        train = labeled(
            [(0, (A, B, C)), (0, (A, B)), (1, (D, E)), (1, (D, F))]
        )
        refs = select_references(
            train, SelectionMethod.pattern("fsp"), SimilaritySpec("sf1")
        )
        expected = preset_references(train, PRESETS["fsp"])
        assert list(refs.references) == [p.sequence for p in expected]

    def test_method_validation(self):
        with pytest.raises(ValueError):
            SelectionMethod("bogus")
        with pytest.raises(ValueError):
            SelectionMethod.mht(alpha=0.0)
        with pytest.raises(ValueError):
            SelectionMethod.pattern("nope")
