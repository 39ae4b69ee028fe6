import numpy as np
import pytest

from vreader import decision, roc
from vreader.decision import DecisionConfig, FeatureRecord
from vreader.features import ComplexityFeatures, LesionFeatures


def make_record(stack_id, label="healthy", level=0, lesion=(0.0, 0.0, 0.0)):
    cf = ComplexityFeatures(b1=1.0, b2=1.0, b3=np.zeros(31), b4=np.zeros(31))
    return FeatureRecord(stack_id=stack_id, label=label, level=level,
                         lesion=LesionFeatures(*lesion), pre=cf, post=cf)


class TestRanking:
    def test_ascending_ranks(self):
        ranks = decision.rank_by_feature([0.3, 0.1, 0.9], [1, 2, 3])
        assert ranks.tolist() == [2, 1, 3]

    def test_tie_broken_by_stack_id(self):
        ranks = decision.rank_by_feature([1.0, 1.0, 0.0], [20, 10, 30])
        assert ranks.tolist() == [3, 2, 1]

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            decision.rank_by_feature([1.0, np.nan], [1, 2])


class TestMinRankCombine:
    def test_identical_rankings_preserved(self):
        r = [1, 2, 3, 4, 5]
        assert decision.min_rank_combine(r, r, r).tolist() == [1, 2, 3, 4, 5]

    def test_disagreement_piles_low(self):
        # three permuted sub-rankings put different stacks first
        r1 = [1, 2, 3, 4, 5]
        r2 = [2, 3, 1, 4, 5]
        r3 = [3, 1, 2, 4, 5]
        assert decision.min_rank_combine(r1, r2, r3).tolist() == [1, 1, 1, 4, 5]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            decision.min_rank_combine([1], [1, 2], [1])

    def test_permutation_bound_property(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(2, 30))
            perms = [rng.permutation(n) + 1 for _ in range(3)]
            combined = decision.min_rank_combine(*perms)
            assert (combined <= np.minimum.reduce(perms)).all()
            assert (combined >= 1).all()


class TestPerturbation:
    def test_zero_c_hat_is_identity(self):
        lf = LesionFeatures(1.0, 2.0, 3.0)
        rng = np.random.default_rng(0)
        out = decision.perturb_features(lf, 0.0, 8.0, [1.0, 1.0, 1.0], rng)
        assert out == lf

    def test_zero_kappa_is_identity(self):
        lf = LesionFeatures(1.0, 2.0, 3.0)
        rng = np.random.default_rng(0)
        out = decision.perturb_features(lf, 1.0, 0.0, [1.0, 1.0, 1.0], rng)
        assert out == lf

    def test_noise_std_matches_kappa(self):
        lf = LesionFeatures(0.0, 0.0, 0.0)
        rng = np.random.default_rng(1)
        scales = np.array([1.0, 2.0, 0.5])
        kappa, c_hat = 8.0, 0.5
        draws = np.array([
            decision.perturb_features(lf, c_hat, kappa, scales, rng).as_array()
            for _ in range(20000)])
        assert np.allclose(draws.mean(axis=0), 0.0, atol=0.1)
        assert np.allclose(draws.std(axis=0), kappa * c_hat * scales, rtol=0.03)

    def test_nonpositive_scales_rejected(self):
        with pytest.raises(ValueError):
            decision.perturb_features(LesionFeatures(0, 0, 0), 1.0, 8.0,
                                      [1.0, 0.0, 1.0], np.random.default_rng(0))


class TestComplexityEstimate:
    def test_none_mode(self):
        cfg = DecisionConfig(estimation_mode="none")
        assert decision.estimate_c_hat(make_record(1, level=4), cfg, None) == 0.0

    def test_ideal_mode_scales_level(self):
        cfg = DecisionConfig(estimation_mode="ideal", binary_complexity=False)
        for level, expected in [(0, 0.0), (2, 0.5), (4, 1.0)]:
            rec = make_record(1, level=level)
            assert decision.estimate_c_hat(rec, cfg, None) == expected

    def test_estimator_modes_need_model(self):
        cfg = DecisionConfig(estimation_mode="post_hvs")
        with pytest.raises(ValueError):
            decision.estimate_c_hat(make_record(1), cfg, None)

    def test_invalid_mode_rejected(self):
        with pytest.raises(ValueError):
            DecisionConfig(estimation_mode="psychic").validate()


class TestDecideDataset:
    def make_records(self, n=12, seed=0):
        rng = np.random.default_rng(seed)
        records = []
        for i in range(n):
            lesion = i >= n // 2
            base = 1.0 if lesion else 0.0
            records.append(make_record(
                i, label="lesion" if lesion else "healthy",
                lesion=tuple(base + rng.normal(0, 0.3, 3))))
        return records

    def test_scores_are_min_ranks(self):
        records = self.make_records()
        cfg = DecisionConfig(estimation_mode="none")
        scored = decision.decide_dataset(records, cfg, [1.0, 1.0, 1.0], 7)
        for s in scored:
            assert s.score == min(s.r1, s.r2, s.r3)
            assert 1 <= s.score <= len(records)

    def test_deterministic(self):
        records = self.make_records()
        cfg = DecisionConfig(estimation_mode="ideal")
        a = decision.decide_dataset(records, cfg, [1.0, 1.0, 1.0], 7)
        b = decision.decide_dataset(records, cfg, [1.0, 1.0, 1.0], 7)
        assert [s.score for s in a] == [s.score for s in b]

    def test_none_mode_unperturbed(self):
        records = self.make_records()
        cfg = DecisionConfig(estimation_mode="none")
        scored = decision.decide_dataset(records, cfg, [1.0, 1.0, 1.0], 7)
        for s, r in zip(scored, records):
            assert s.features == r.lesion
            assert s.c_hat == 0.0

    def detection_auc(self, records, scored):
        by_id = {r.stack_id: r for r in records}
        pos = [s.score for s in scored if by_id[s.stack_id].label == "lesion"]
        neg = [s.score for s in scored if by_id[s.stack_id].label == "healthy"]
        return roc.wilcoxon_auc(pos, neg)

    def test_degradation_monotone_in_kappa(self):
        # ideal mode on complex stacks: more confidence modulation, less AUC
        rng = np.random.default_rng(3)
        records = []
        for i in range(200):
            lesion = i >= 100
            base = 1.2 if lesion else 0.0
            records.append(make_record(
                i, label="lesion" if lesion else "healthy", level=4,
                lesion=tuple(base + rng.normal(0, 0.5, 3))))
        aucs = []
        for kappa in (0.0, 2.0, 8.0, 32.0):
            cfg = DecisionConfig(kappa=kappa, estimation_mode="ideal")
            scored = decision.decide_dataset(records, cfg, [1.0, 1.0, 1.0], 11)
            aucs.append(self.detection_auc(records, scored))
        assert aucs[0] > 0.85  # unmodulated observer is strong
        assert all(a >= b - 0.02 for a, b in zip(aucs, aucs[1:]))
        assert aucs[-1] < aucs[0] - 0.2


def test_lesion_feature_scales_level0_std():
    rng = np.random.default_rng(5)
    feats = rng.normal(0, [1.0, 2.0, 3.0], size=(40, 3))
    records = [make_record(i, lesion=tuple(f)) for i, f in enumerate(feats)]
    records.append(make_record(99, level=4, lesion=(100.0, 100.0, 100.0)))
    scales = decision.lesion_feature_scales(records)
    assert np.allclose(scales, feats.std(axis=0, ddof=1))


def test_lesion_feature_scales_needs_simple_stacks():
    with pytest.raises(ValueError):
        decision.lesion_feature_scales([make_record(0, level=4)])
