import json

import pytest

from colontopo.errors import ConfigError, PipelineError
from colontopo.graph import TopoGraph
from colontopo.matching import CountDistribution, TableMatchBackend
from colontopo.similarity import TableSimilarityBackend
from colontopo.simulator import WorldConfig, generate_world, oracle_backends
from colontopo.slam import (LocalizationDecision, SlamConfig, decide, node_score,
                            retrieval_localization, run_session, submap_score)

from helpers import make_submap, score_table


def _single_kf_submaps(ids):
    return {sid: make_submap(sid, 1, i) for i, sid in enumerate(ids)}


# -- score aggregation -------------------------------------------------------

def test_submap_score_mean_of_top_three():
    sm = make_submap("c", 4, 0)
    backend = score_table({("q", "c_k00"): 0.9, ("q", "c_k01"): 0.8,
                           ("q", "c_k02"): 0.7, ("q", "c_k03"): 0.1})
    assert submap_score("q", sm, backend) == pytest.approx(0.8, abs=1e-12)


def test_submap_score_fewer_than_three_keyframes():
    sm = make_submap("c", 2, 0)
    backend = score_table({("q", "c_k00"): 0.6, ("q", "c_k01"): 0.4})
    assert submap_score("q", sm, backend) == pytest.approx(0.5, abs=1e-12)


def test_submap_score_single_keyframe():
    sm = make_submap("c", 1, 0)
    backend = score_table({("q", "c_k00"): 0.3})
    assert submap_score("q", sm, backend) == 0.3


def test_submap_score_never_exceeds_best_pair():
    sm = make_submap("c", 5, 0)
    entries = {("q", f"c_k{j:02d}"): 0.1 * (j + 1) for j in range(5)}
    backend = score_table(entries)
    assert submap_score("q", sm, backend) <= max(entries.values()) + 1e-15


def test_node_score_is_max_over_submaps():
    submaps = {sid: make_submap(sid, 1, i)
               for i, sid in enumerate(["a", "b", "c"])}
    backend = score_table({("q", "a_k00"): 0.4, ("q", "b_k00"): 0.9,
                           ("q", "c_k00"): 0.7})
    assert node_score("q", ["a", "b", "c"], submaps, backend) == 0.9
    assert node_score("q", ["a"], submaps, backend) == 0.4
    backend_tied = score_table({("q", "a_k00"): 0.8, ("q", "b_k00"): 0.8})
    assert node_score("q", ["a", "b"], submaps, backend_tied) == 0.8


# -- retrieval voting --------------------------------------------------------

def _voting_setup(node_submaps, entries, query_kfs):
    """Graph with one single-keyframe submap per node, scores from a table."""
    graph = TopoGraph()
    submaps = {}
    for sid in node_submaps:
        submaps[sid] = make_submap(sid, 1, len(submaps))
        graph.create_node(sid)
    query = make_submap("q", query_kfs, len(submaps))
    table = score_table(entries)
    candidates = list(range(len(node_submaps)))
    distances = graph.hop_distances(graph.current_position)
    return query, candidates, distances, graph, submaps, table


def test_retrieval_majority_then_median():
    # votes: (n2, 0.9), (n2, 0.7), (n3, 0.95) -> n2 with median 0.8
    query, candidates, distances, graph, submaps, table = _voting_setup(
        ["a0", "a1", "a2", "a3"],
        {("q_k00", "a2_k00"): 0.9, ("q_k00", "a3_k00"): 0.5,
         ("q_k01", "a2_k00"): 0.7, ("q_k01", "a3_k00"): 0.3,
         ("q_k02", "a2_k00"): 0.2, ("q_k02", "a3_k00"): 0.95},
        query_kfs=3)
    node, score = retrieval_localization(query, [2, 3], distances, graph,
                                         submaps, table)
    assert node == 2
    assert score == pytest.approx(0.8, abs=1e-12)


def test_retrieval_single_keyframe():
    query, candidates, distances, graph, submaps, table = _voting_setup(
        ["a0", "a1"], {("q_k00", "a1_k00"): 0.9, ("q_k00", "a0_k00"): 0.2},
        query_kfs=1)
    assert retrieval_localization(query, candidates, distances, graph, submaps,
                                  table) == (1, 0.9)


def test_retrieval_vote_tie_higher_median_wins():
    # one vote each: (n1, 0.9) vs (n2, 0.8) -> n1
    query, candidates, distances, graph, submaps, table = _voting_setup(
        ["a0", "a1", "a2"],
        {("q_k00", "a1_k00"): 0.9, ("q_k00", "a2_k00"): 0.1,
         ("q_k01", "a1_k00"): 0.2, ("q_k01", "a2_k00"): 0.8},
        query_kfs=2)
    node, score = retrieval_localization(query, [1, 2], distances, graph,
                                         submaps, table)
    assert node == 1
    assert score == 0.9


def test_retrieval_vote_tie_equal_median_prefers_closer_node():
    # Chain 0-1-2, cursor at 2: node 1 is 1 hop away, node 0 two hops.
    query, candidates, distances, graph, submaps, table = _voting_setup(
        ["a0", "a1", "a2"],
        {("q_k00", "a0_k00"): 0.9, ("q_k00", "a1_k00"): 0.1,
         ("q_k01", "a0_k00"): 0.1, ("q_k01", "a1_k00"): 0.9},
        query_kfs=2)
    node, score = retrieval_localization(query, [0, 1], distances, graph,
                                         submaps, table)
    assert node == 1
    assert score == 0.9


def test_retrieval_argmax_tie_prefers_lower_node_id():
    query, candidates, distances, graph, submaps, table = _voting_setup(
        ["a0", "a1"],
        {("q_k00", "a0_k00"): 0.7, ("q_k00", "a1_k00"): 0.7},
        query_kfs=1)
    node, score = retrieval_localization(query, [0, 1], distances, graph,
                                         submaps, table)
    assert node == 0
    assert score == 0.7


def test_retrieval_empty_window_is_absent():
    query, candidates, distances, graph, submaps, table = _voting_setup(
        ["a0"], {}, query_kfs=1)
    assert retrieval_localization(query, [], distances, graph, submaps,
                                  table) is None


# -- decision rule -----------------------------------------------------------

def _decide_setup(sim_entries, count_entries, n_nodes=2, query_kfs=1):
    graph = TopoGraph()
    submaps = {}
    for i in range(n_nodes):
        sid = f"s{i}"
        submaps[sid] = make_submap(sid, 1, i)
        graph.create_node(sid)
    query = make_submap("q", query_kfs, n_nodes)
    submaps["q"] = query
    sim = score_table(sim_entries)
    match = TableMatchBackend(count_entries, missing=0)
    return query, graph, submaps, sim, match


def test_decide_geometric_trigger():
    query, graph, submaps, sim, match = _decide_setup(
        {}, {("q_k00", "s0_k00"): 120})
    cfg = SlamConfig(match_threshold=100)
    decision = decide(query, graph, submaps, cfg, sim, match)
    assert decision.outcome == "merged"
    assert decision.trigger == "geometric"
    assert decision.node_id == 0
    assert decision.best_match_count == 120


def test_decide_retrieval_trigger_above_threshold():
    query, graph, submaps, sim, match = _decide_setup(
        {("q_k00", "s1_k00"): 0.96}, {})
    cfg = SlamConfig(retrieval_threshold=0.95)
    decision = decide(query, graph, submaps, cfg, sim, match)
    assert decision.outcome == "merged"
    assert decision.trigger == "retrieval"
    assert decision.node_id == 1
    assert decision.retrieval_score == 0.96


def test_decide_retrieval_exactly_at_threshold_creates_node():
    query, graph, submaps, sim, match = _decide_setup(
        {("q_k00", "s1_k00"): 0.95}, {})
    cfg = SlamConfig(retrieval_threshold=0.95)
    decision = decide(query, graph, submaps, cfg, sim, match)
    assert decision.outcome == "new_node"
    assert decision.trigger == "none"
    assert decision.retrieval_score == 0.95
    assert decision.candidate_node == 1  # the near miss is still recorded


def test_decide_geometric_wins_over_retrieval():
    # matcher qualifies node 0, retrieval qualifies node 1
    query, graph, submaps, sim, match = _decide_setup(
        {("q_k00", "s1_k00"): 1.0}, {("q_k00", "s0_k00"): 150})
    cfg = SlamConfig()
    decision = decide(query, graph, submaps, cfg, sim, match)
    assert decision.trigger == "geometric"
    assert decision.node_id == 0
    # replay with the matcher disabled: retrieval picks node 1
    query2, graph2, submaps2, sim2, match2 = _decide_setup(
        {("q_k00", "s1_k00"): 1.0}, {("q_k00", "s0_k00"): 150})
    decision2 = decide(query2, graph2, submaps2, cfg.replace(matcher_enabled=False),
                       sim2, match2)
    assert decision2.trigger == "retrieval"
    assert decision2.node_id == 1


def test_decide_requires_enabled_backend():
    query, graph, submaps, sim, match = _decide_setup({}, {})
    with pytest.raises(ConfigError):
        decide(query, graph, submaps, SlamConfig(), None, match)


def test_config_validation():
    with pytest.raises(ConfigError):
        SlamConfig(retrieval_threshold=1.5).validate()
    with pytest.raises(ConfigError):
        SlamConfig(window_radius=-1).validate()
    with pytest.raises(ConfigError):
        SlamConfig(matcher_enabled=False, retrieval_enabled=False).validate()
    with pytest.raises(ConfigError, match="unknown"):
        SlamConfig.from_dict({"window": 3})


# -- full sessions -----------------------------------------------------------

def test_session_of_one_submap():
    world = generate_world(WorldConfig(traversal=[0], num_places=1, seed=0))
    sim, match = oracle_backends(world)
    graph, decisions = run_session(world.manifest.submaps, SlamConfig(), sim, match)
    assert len(graph) == 1
    assert graph.edges == set()
    assert len(decisions) == 1
    assert decisions[0].outcome == "new_node"


def test_linear_session_builds_a_chain():
    world = generate_world(WorldConfig(traversal=list(range(6)), num_places=6,
                                       seed=1))
    sim, match = oracle_backends(world)
    graph, decisions = run_session(world.manifest.submaps, SlamConfig(), sim, match)
    assert len(graph) == 6
    assert len(graph.edges) == 5
    assert all(d.outcome == "new_node" for d in decisions)


def test_back_and_forth_session_merges_revisits():
    # places A,B,C,B,A: 3 nodes, submaps 3 and 4 merged, edges {A,B},{B,C}
    world = generate_world(WorldConfig(traversal=[0, 1, 2, 1, 0], num_places=3,
                                       seed=2))
    sim, match = oracle_backends(world)
    graph, decisions = run_session(world.manifest.submaps, SlamConfig(), sim, match)
    assert len(graph) == 3
    assert [d.outcome for d in decisions] == ["new_node", "new_node", "new_node",
                                              "merged", "merged"]
    assert decisions[3].node_id == 1
    assert decisions[4].node_id == 0
    assert graph.edges == {(0, 1), (1, 2)}


def test_session_rejects_duplicate_submaps():
    submaps = [make_submap("a", 2, 0), make_submap("a", 2, 1)]
    with pytest.raises(PipelineError, match="duplicate"):
        run_session(submaps, SlamConfig(matcher_enabled=False),
                    score_table({}), None)


def test_merge_targets_stay_inside_the_window():
    cfg = SlamConfig(window_radius=2)
    world = generate_world(WorldConfig(num_places=10, seed=4, max_back_jump=2,
                                       revisit_probability=0.5))
    sim, match = oracle_backends(world)
    _, decisions = run_session(world.manifest.submaps, cfg, sim, match)
    replay = TopoGraph()
    for index, decision in enumerate(decisions):
        if index == 0:
            replay.create_node(decision.submap_id)
            continue
        window = replay.node_window(replay.current_position, cfg.window_radius)
        assert decision.window_size == len(window)
        assert decision.total_nodes == len(replay)
        if decision.outcome == "merged":
            assert decision.node_id in window
            replay.merge_into_node(decision.submap_id, decision.node_id)
        else:
            replay.create_node(decision.submap_id)


def test_raising_threshold_never_creates_new_merges():
    world = generate_world(WorldConfig(num_places=8, seed=6, flip_probability=0.05,
                                       jitter_sigma=0.02))
    sim, match = oracle_backends(world)
    merged_sets = []
    for th in (0.5, 0.7, 0.9, 0.99):
        cfg = SlamConfig(retrieval_threshold=th, matcher_enabled=False,
                         prior_enabled=False)
        _, decisions = run_session(world.manifest.submaps, cfg, sim, None)
        merged_sets.append({d.submap_id for d in decisions if d.outcome == "merged"})
    for lower, higher in zip(merged_sets, merged_sets[1:]):
        assert higher <= lower


def test_disabling_prior_scans_at_least_as_much():
    # Zero noise and near revisits: both runs take identical decisions, so
    # the per-decision comparison telemetry is directly comparable.
    world = generate_world(WorldConfig(num_places=8, seed=3, max_back_jump=2))
    sim, match = oracle_backends(world)
    cfg = SlamConfig(window_radius=5)
    _, with_prior = run_session(world.manifest.submaps, cfg, sim, match)
    _, without = run_session(world.manifest.submaps,
                             cfg.replace(prior_enabled=False), sim, match)
    assert [d.outcome for d in with_prior] == [d.outcome for d in without]
    for a, b in zip(with_prior, without):
        assert b.window_size >= a.window_size
        assert b.sim_calls >= a.sim_calls


def test_identical_runs_are_byte_identical():
    world = generate_world(WorldConfig(num_places=7, seed=8, flip_probability=0.1,
                                       jitter_sigma=0.05))
    sim, match = oracle_backends(world)
    cfg = SlamConfig()
    graph_a, decisions_a = run_session(world.manifest.submaps, cfg, sim, match)
    graph_b, decisions_b = run_session(world.manifest.submaps, cfg, sim, match)
    payload_a = json.dumps({"g": graph_a.to_payload(),
                            "d": [d.to_dict() for d in decisions_a]}, sort_keys=True)
    payload_b = json.dumps({"g": graph_b.to_payload(),
                            "d": [d.to_dict() for d in decisions_b]}, sort_keys=True)
    assert payload_a == payload_b


def test_decision_round_trip():
    decision = LocalizationDecision(submap_id="s1", outcome="merged", node_id=3,
                                    trigger="retrieval", retrieval_score=0.97,
                                    window_size=4, total_nodes=9, sim_calls=120)
    assert LocalizationDecision.from_dict(decision.to_dict()) == decision
