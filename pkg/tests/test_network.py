import math
import os
import subprocess
import sys
from itertools import combinations
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

from socialmuse.network.bipartite import (
    NETWORK_FEATURES,
    PAGERANK_DAMPING,
    PAGERANK_MAX_ITER,
    PAGERANK_TOL,
    BipartiteRound,
    FollowerShares,
    follower_counts,
    gini_by_network_size,
    gini_coefficient,
    initial_topology,
    project_onto_egos,
    structural_features,
    _eigenvector_in_component,
)
from socialmuse.utils.errors import DegenerateDistribution, InvalidInput, NotFound

ALTERS = ("a0", "a1", "a2", "a3", "a4", "a5")
EGOS = tuple(f"e{i:02d}" for i in range(18))


def pair_gini(counts):
    """Mean absolute difference over all ordered pairs, divided by twice the mean."""
    m = np.asarray(counts, dtype=float) / sum(counts)
    S = len(m)
    total = sum(abs(m[i] - m[j]) for i in range(S) for j in range(S))
    return total / (2 * S * m.sum())


def random_round(seed=0, n_egos=18):
    rng = np.random.default_rng(seed)
    egos = EGOS[:n_egos]
    choices = {e: tuple(ALTERS[i] for i in sorted(rng.choice(len(ALTERS), 2, replace=False))) for e in egos}
    return BipartiteRound.from_choices(2, ALTERS, choices, egos)


def three_ego_round():
    choices = {"e0": ("a0", "a1"), "e1": ("a0", "a1"), "e2": ("a1", "a2")}
    return BipartiteRound.from_choices(2, ("a0", "a1", "a2"), choices, ("e0", "e1", "e2"))


@pytest.mark.parametrize(
    "counts, expected",
    [
        ([36, 0, 0, 0, 0, 0], 5 / 6),
        ([2, 1], 1 / 6),
        ([6, 6, 6, 6, 6, 6], 0.0),
        ([5], 0.0),
    ],
)
def test_gini_known_values(counts, expected):
    assert gini_coefficient(FollowerShares.from_counts(counts)) == pytest.approx(expected)


def test_gini_matches_pair_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        counts = rng.integers(0, 20, size=int(rng.integers(1, 19)))
        counts[0] += 1
        assert abs(gini_coefficient(FollowerShares.from_counts(counts)) - pair_gini(counts)) < 1e-12


def test_gini_is_scale_invariant():
    rng = np.random.default_rng(1)
    for _ in range(100):
        counts = rng.integers(1, 20, size=6)
        scaled = gini_coefficient(FollowerShares.from_counts(7 * counts))
        assert abs(scaled - gini_coefficient(FollowerShares.from_counts(counts))) < 1e-12


def test_gini_all_zero_warns_and_returns_zero():
    with pytest.warns(DegenerateDistribution):
        assert gini_coefficient(FollowerShares.from_counts([0, 0, 0])) == 0.0


def test_gini_without_alters_is_invalid():
    with pytest.raises(InvalidInput):
        gini_coefficient(FollowerShares.from_counts([]))


def test_initial_topology_is_balanced():
    choices = initial_topology(ALTERS, EGOS)
    assert all(len(set(pair)) == 2 for pair in choices.values())
    round = BipartiteRound.from_choices(1, ALTERS, choices, EGOS)
    assert follower_counts(round).counts == (6, 6, 6, 6, 6, 6)
    assert gini_coefficient(follower_counts(round)) == 0.0


def test_round_rejects_wrong_out_degree():
    with pytest.raises(InvalidInput):
        BipartiteRound.from_choices(1, ALTERS, {"e00": ("a0", "a1", "a2")}, ("e00",))


def test_round_rejects_unknown_alter():
    with pytest.raises(InvalidInput):
        BipartiteRound.from_choices(1, ALTERS, {"e00": ("a0", "zz")}, ("e00",))


def test_prefix_only_sees_earlier_egos():
    round = three_ego_round()
    assert follower_counts(round, "e1").counts == (2, 2, 0)
    assert follower_counts(round).counts == (2, 3, 1)
    with pytest.raises(NotFound):
        round.prefix("e9")


def test_projection_weights_are_shared_alters():
    projection = project_onto_egos(three_ego_round(), "e2")
    assert projection.weight("e0", "e1") == 2
    assert projection.weight("e0", "e2") == 1
    assert projection.weight("e1", "e2") == 1
    assert projection.weight("e0", "e0") == 0


def test_structural_features_small_network():
    features = structural_features(three_ego_round(), "e2")
    assert tuple(features) == NETWORK_FEATURES
    assert features["network_size"] == 3
    assert features["gini"] == pytest.approx(2 / 9)
    assert features["triangle_count"] == 1
    assert features["transitivity"] == pytest.approx(1.0)
    # strength 2 out of a maximum of 2 neighbours times 2 shared alters
    assert features["degree_centrality"] == pytest.approx(0.5)
    # the direct edges are the shortest paths, so e2 brokers nothing
    assert features["betweenness_centrality"] == pytest.approx(0.0)
    assert 0.0 < features["pagerank_centrality"] < 1.0
    assert all(math.isfinite(v) for v in features.values())


def test_structural_features_first_ego():
    round = three_ego_round()
    features = structural_features(round, "e0")
    assert features["network_size"] == 1
    # one ego following a0 and a1 out of three alters
    assert features["gini"] == pytest.approx(pair_gini([1, 1, 0]))
    for name in NETWORK_FEATURES[2:]:
        assert features[name] == 0.0


def test_structural_features_isolated_ego():
    choices = {"e0": ("a0", "a1"), "e1": ("a2", "a3")}
    round = BipartiteRound.from_choices(1, ("a0", "a1", "a2", "a3"), choices, ("e0", "e1"))
    features = structural_features(round, "e1")
    assert features["network_size"] == 2
    assert features["degree_centrality"] == 0.0
    assert features["eigenvector_centrality"] == 0.0
    assert features["avg_neighbor_degree"] == 0.0


def test_structural_features_need_edges():
    round = BipartiteRound.from_choices(1, ALTERS, {"e00": ("a0", "a1")}, ("e00", "e01"))
    with pytest.raises(NotFound):
        structural_features(round, "e01")


def test_gini_by_network_size_grows_with_arrivals():
    series = gini_by_network_size(three_ego_round())
    assert list(series) == [1, 2, 3]
    assert series[3] == pytest.approx(2 / 9)


def test_all_pairs_projection_is_complete_graph():
    choices = {e: ("a0", "a1") for e in EGOS[:5]}
    projection = project_onto_egos(BipartiteRound.from_choices(1, ALTERS, choices, EGOS[:5]), EGOS[4])
    for a, b in combinations(EGOS[:5], 2):
        assert projection.weight(a, b) == 2


def test_projection_edges_follow_arrival_order():
    round = random_round()
    projection = project_onto_egos(round, EGOS[-1])
    rank = {e: i for i, e in enumerate(EGOS)}
    keys = list(projection.weights)
    assert all(rank[a] < rank[b] for a, b in keys)
    assert keys == sorted(keys, key=lambda ab: (rank[ab[0]], rank[ab[1]]))
    assert list(projection.to_networkx().nodes) == list(EGOS)


FEATURES_SCRIPT = """
import numpy as np
from socialmuse.network.bipartite import BipartiteRound, structural_features
rng = np.random.default_rng(4)
alters = tuple(f"alter-{i}" for i in range(6))
egos = tuple(f"ego-{i}" for i in range(18))
choices = {e: tuple(alters[i] for i in sorted(rng.choice(6, 2, replace=False))) for e in egos}
round = BipartiteRound.from_choices(2, alters, choices, egos)
for e in egos[1:]:
    print(repr(tuple(structural_features(round, e).values())))
"""


def test_features_do_not_depend_on_hash_seed():
    root = Path(__file__).resolve().parents[1]
    outputs = set()
    for hash_seed in ("0", "1", "2", "3"):
        env = dict(os.environ, PYTHONHASHSEED=hash_seed, PYTHONPATH=str(root))
        result = subprocess.run(
            [sys.executable, "-c", FEATURES_SCRIPT], env=env, capture_output=True, text=True, check=True
        )
        outputs.add(result.stdout)
    assert len(outputs) == 1


def test_pagerank_sums_to_one_and_eigenvector_has_unit_norm():
    round = random_round(seed=2)
    graph = project_onto_egos(round, EGOS[-1]).to_networkx()
    pagerank = nx.pagerank(graph, alpha=PAGERANK_DAMPING, tol=PAGERANK_TOL, max_iter=PAGERANK_MAX_ITER, weight="weight")
    assert sum(pagerank.values()) == pytest.approx(1.0, abs=1e-9)
    assert structural_features(round, EGOS[-1])["pagerank_centrality"] == pytest.approx(pagerank[EGOS[-1]])
    component = nx.node_connected_component(graph, EGOS[-1])
    norm = sum(_eigenvector_in_component(graph, e) ** 2 for e in component)
    assert norm == pytest.approx(1.0)
