import numpy as np

from matchseg.config import RunConfig, SelectConfig
from matchseg.core import iou
from matchseg.pipeline import run_pipeline
from matchseg.segmenter import OracleSegmenter
from matchseg.synthetic import GridScene, identity_episode, two_instance_episode


class TestRunPipeline:
    def test_identity_episode(self):
        ep = identity_episode(0)
        cfg = RunConfig(task="semantic", seed=1)
        res = run_pipeline(ep.ref_features, ep.ref_mask, ep.target_features,
                           ep.image_id, ep.oracle, cfg)
        assert iou(res.mask, ep.ground_truth) >= 0.99
        assert res.kept

    def test_target_without_class_gives_empty_mask(self):
        ep = identity_episode(1)
        # a target of pure background: registered image has no shapes
        rng = np.random.default_rng(9)
        blank = GridScene(12, 12, 16, 8, rng)
        oracle = OracleSegmenter()
        oracle.register("blank", *blank.image_hw, [])
        cfg = RunConfig(task="semantic", seed=1)
        res = run_pipeline(ep.ref_features, ep.ref_mask, blank.feature_map("blank"),
                           "blank", oracle, cfg)
        assert res.mask.area == 0
        assert res.kept == []

    def test_two_disks_merge_to_union(self):
        ep = two_instance_episode(11, with_confusers=False)
        cfg = RunConfig(task="multi_instance",
                        select=SelectConfig(alpha=1.0, beta=1.0, lam=1.0, num_merged=2),
                        seed=4)
        res = run_pipeline(ep.ref_features, ep.ref_mask, ep.target_features,
                           ep.image_id, ep.oracle, cfg)
        assert iou(res.mask, ep.extra_truths["union"]) >= 0.9

    def test_num_merged_one_picks_single_instance(self):
        ep = two_instance_episode(12, with_confusers=False)
        cfg = RunConfig(task="multi_instance",
                        select=SelectConfig(alpha=1.0, beta=1.0, lam=1.0, num_merged=1),
                        seed=4)
        res = run_pipeline(ep.ref_features, ep.ref_mask, ep.target_features,
                           ep.image_id, ep.oracle, cfg)
        best = max(iou(res.mask, ep.extra_truths["instance_0"]),
                   iou(res.mask, ep.extra_truths["instance_1"]))
        assert best >= 0.9

    def test_deterministic_given_seed(self):
        ep = two_instance_episode(13, with_confusers=True)
        cfg = RunConfig(task="multi_instance",
                        select=SelectConfig(alpha=1.0, beta=1.0, lam=1.0, num_merged=2),
                        seed=21)
        a = run_pipeline(ep.ref_features, ep.ref_mask, ep.target_features,
                         ep.image_id, ep.oracle, cfg)
        b = run_pipeline(ep.ref_features, ep.ref_mask, ep.target_features,
                         ep.image_id, ep.oracle, cfg)
        assert np.array_equal(a.mask.bits, b.mask.bits)
        assert a.kept == b.kept
        assert [p.score for p in a.proposals] == [p.score for p in b.proposals]

    def test_reports_scores_for_all_proposals(self):
        ep = identity_episode(2)
        cfg = RunConfig(task="semantic", seed=1)
        res = run_pipeline(ep.ref_features, ep.ref_mask, ep.target_features,
                           ep.image_id, ep.oracle, cfg)
        assert res.proposals
        for p in res.proposals:
            assert 0.0 <= p.score.emd <= 1.0
            assert 0.0 <= p.score.coverage <= 1.0
            assert p.score.purity >= 0.0
