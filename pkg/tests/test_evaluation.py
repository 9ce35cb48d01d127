import pytest

from colontopo.errors import PipelineError, UnknownIdError
from colontopo.evaluation import (EvalCounts, GroundTruth, ablation_variants,
                                  classify_decision, classify_session,
                                  evaluate_session, precision_recall)
from colontopo.matching import CountDistribution, OracleMatchBackend
from colontopo.simulator import WorldConfig, generate_world, oracle_backends
from colontopo.slam import LocalizationDecision, SlamConfig, run_session

from oracles import brute_force_counts


def _merge(sid, node):
    return LocalizationDecision(submap_id=sid, outcome="merged", node_id=node,
                                trigger="retrieval", candidate_node=node)


def _new(sid, node):
    return LocalizationDecision(submap_id=sid, outcome="new_node", node_id=node,
                                trigger="none")


# -- ground truth ------------------------------------------------------------

def test_ground_truth_is_symmetric_and_reflexive():
    gt = GroundTruth([("a", "b")])
    assert gt.covisible("a", "b")
    assert gt.covisible("b", "a")
    assert gt.covisible("a", "a")
    assert not gt.covisible("a", "c")


def test_ground_truth_rejects_self_pairs():
    with pytest.raises(PipelineError, match="implied"):
        GroundTruth([("a", "a")])


def test_ground_truth_checks_id_universe():
    gt = GroundTruth([("a", "b")], known_ids=["a", "b", "c"])
    with pytest.raises(UnknownIdError, match="ghost"):
        gt.covisible("a", "ghost")
    with pytest.raises(UnknownIdError):
        GroundTruth([("a", "z")], known_ids=["a", "b"])


# -- single decisions --------------------------------------------------------

def test_merge_with_two_thirds_majority_is_tp():
    gt = GroundTruth([("s", "a"), ("s", "b")])
    decision = _merge("s", 0)
    assert classify_decision(decision, {0: ["a", "b", "c"]}, gt) == "TP"


def test_merge_with_exact_half_is_fp():
    gt = GroundTruth([("s", "a")])
    decision = _merge("s", 0)
    assert classify_decision(decision, {0: ["a", "b"]}, gt) == "FP"


def test_new_node_when_a_node_had_majority_is_fn():
    gt = GroundTruth([("s", "a"), ("s", "b"), ("s", "c")])
    decision = _new("s", 5)
    assert classify_decision(decision, {0: ["a", "b", "c"]}, gt) == "FN"


def test_new_node_with_no_covisible_majority_is_tn():
    gt = GroundTruth([("s", "a")])
    decision = _new("s", 5)
    assert classify_decision(decision, {0: ["a", "b", "c"]}, gt) == "TN"


def test_classification_uses_pre_merge_composition():
    # Node contains only non-covisible submaps; the merged submap must not
    # vote for itself after insertion.
    gt = GroundTruth([])
    decisions = [_new("a", 0), _merge("s", 0)]
    counts, labels = classify_session(decisions, gt)
    assert labels == [None, "FP"]
    assert counts.fp == 1


# -- precision / recall ------------------------------------------------------

def test_precision_recall_direct():
    assert precision_recall(EvalCounts(tp=9, fp=1, fn=3)) == (0.9, 0.75)


def test_precision_undefined_without_merges():
    precision, recall = precision_recall(EvalCounts(tp=0, fp=0, fn=2))
    assert precision is None
    assert recall == 0.0


def test_perfect_precision():
    assert precision_recall(EvalCounts(tp=7, fp=0, fn=3)) == (1.0, 0.7)


# -- session classification --------------------------------------------------

def test_count_conservation():
    world = generate_world(WorldConfig(num_places=9, seed=12,
                                       flip_probability=0.1, jitter_sigma=0.05))
    sim, match = oracle_backends(world)
    _, decisions = run_session(world.manifest.submaps, SlamConfig(), sim, match)
    counts, labels = classify_session(decisions, world.ground_truth)
    merges = sum(1 for d in decisions[1:] if d.outcome == "merged")
    news = sum(1 for d in decisions[1:] if d.outcome == "new_node")
    assert counts.tp + counts.fp == merges
    assert counts.fn + counts.tn == news
    assert counts.total == len(decisions) - 1
    assert labels[0] is None and len(labels) == len(decisions)


def test_counts_match_independent_brute_force():
    for seed in range(6):
        world = generate_world(WorldConfig(num_places=8, seed=seed,
                                           flip_probability=0.08,
                                           jitter_sigma=0.03))
        sim, match = oracle_backends(world)
        _, decisions = run_session(world.manifest.submaps, SlamConfig(), sim, match)
        counts, _ = classify_session(decisions, world.ground_truth)
        pairs = {frozenset(p) for p in world.ground_truth.pairs()}
        assert (counts.tp, counts.fp, counts.fn, counts.tn) == brute_force_counts(
            [d.to_dict() for d in decisions], pairs)


def test_perfect_world_scores_perfectly():
    world = generate_world(WorldConfig(num_places=10, seed=3, max_back_jump=3))
    sim, match = oracle_backends(world)
    results = evaluate_session(world.manifest.submaps, world.ground_truth,
                               [("full", SlamConfig())], sim, match)
    assert results[0].precision == 1.0
    assert results[0].recall == 1.0


def test_zero_recall_with_matcher_only_and_no_matches():
    world = generate_world(WorldConfig(num_places=6, seed=5))
    zero_match = OracleMatchBackend(world.place_of_keyframe,
                                    same_place=CountDistribution("constant", 0),
                                    different_place=CountDistribution("constant", 0))
    cfg = SlamConfig(retrieval_enabled=False)
    results = evaluate_session(world.manifest.submaps, world.ground_truth,
                               [("matcher-only", cfg)], None, zero_match)
    assert results[0].precision is None
    assert results[0].recall == 0.0
    assert results[0].counts.tp == 0


def test_report_has_one_row_per_variant():
    world = generate_world(WorldConfig(num_places=5, seed=7))
    sim, match = oracle_backends(world)
    variants = ablation_variants(SlamConfig())
    results = evaluate_session(world.manifest.submaps, world.ground_truth,
                               variants, sim, match)
    assert [r.name for r in results] == ["retrieval", "retrieval+prior",
                                         "retrieval+prior+matcher"]
    for result in results:
        assert result.counts.total == len(world.traversal) - 1
        for metric in (result.precision, result.recall):
            assert metric is None or 0.0 <= metric <= 1.0
