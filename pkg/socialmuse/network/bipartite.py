"""Temporal bipartite ego-alter network, its one-mode ego projection and structural features.

A round snapshot holds every (ego, alter) follow edge for one round together with the order in
which egos arrived. Egos arrive asynchronously, so "the network an ego sees" is always the prefix
of the arrival order up to and including that ego.
"""
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from socialmuse.utils.errors import DegenerateDistribution, InvalidInput, NotFound

EgoId = str
AlterId = str

NETWORK_FEATURES = (
    "network_size",
    "gini",
    "global_clustering",
    "transitivity",
    "local_clustering",
    "degree_centrality",
    "betweenness_centrality",
    "eigenvector_centrality",
    "closeness_centrality",
    "pagerank_centrality",
    "avg_neighbor_degree",
    "triangle_count",
)

PAGERANK_DAMPING = 0.85
PAGERANK_TOL = 1e-10
PAGERANK_MAX_ITER = 200


@dataclass(frozen=True)
class BipartiteRound:
    round_index: int
    alter_ids: Tuple[AlterId, ...]
    follow_edges: FrozenSet[Tuple[EgoId, AlterId]]
    ego_arrival_order: Tuple[EgoId, ...]
    k: int = 2

    def __post_init__(self):
        if len(set(self.ego_arrival_order)) != len(self.ego_arrival_order):
            raise InvalidInput("ego_arrival_order lists an ego more than once")
        alters = set(self.alter_ids)
        followed: Dict[EgoId, set] = {}
        for ego, alter in self.follow_edges:
            if alter not in alters:
                raise InvalidInput(f"edge ({ego}, {alter}) points at an unknown alter")
            followed.setdefault(ego, set()).add(alter)
        for ego, alts in followed.items():
            if len(alts) != self.k:
                raise InvalidInput(f"ego {ego} follows {len(alts)} alters in round {self.round_index}, expected {self.k}")
        missing = set(followed) - set(self.ego_arrival_order)
        if missing:
            raise InvalidInput(f"egos {sorted(missing)} have edges but no arrival rank")

    @classmethod
    def from_choices(
        cls,
        round_index: int,
        alter_ids: Sequence[AlterId],
        choices: Mapping[EgoId, Iterable[AlterId]],
        ego_arrival_order: Sequence[EgoId],
        k: int = 2,
    ) -> "BipartiteRound":
        edges = frozenset((ego, alter) for ego, alts in choices.items() for alter in alts)
        return cls(round_index, tuple(alter_ids), edges, tuple(ego_arrival_order), k)

    def alters_of(self, ego: EgoId) -> FrozenSet[AlterId]:
        return frozenset(a for e, a in self.follow_edges if e == ego)

    def egos_upto(self, ego: EgoId) -> Tuple[EgoId, ...]:
        if ego not in self.ego_arrival_order:
            raise NotFound(f"ego {ego} is not in round {self.round_index}")
        rank = self.ego_arrival_order.index(ego)
        return self.ego_arrival_order[: rank + 1]

    def prefix(self, upto_ego: EgoId) -> "BipartiteRound":
        """The round as seen by `upto_ego`: only egos at or before it in arrival order."""
        egos = set(self.egos_upto(upto_ego))
        edges = frozenset((e, a) for e, a in self.follow_edges if e in egos)
        order = tuple(e for e in self.ego_arrival_order if e in egos)
        return BipartiteRound(self.round_index, self.alter_ids, edges, order, self.k)

    def to_records(self, trial: str, condition: str) -> list:
        rank = {e: i for i, e in enumerate(self.ego_arrival_order)}
        return [
            dict(trial=trial, condition=condition, round=self.round_index, ego_id=e, alter_id=a, arrival_rank=rank[e])
            for e, a in sorted(self.follow_edges, key=lambda ea: (rank[ea[0]], self.alter_ids.index(ea[1])))
        ]


@dataclass(frozen=True)
class EgoProjection:
    nodes: Tuple[EgoId, ...]
    weights: Mapping[Tuple[EgoId, EgoId], int] = field(default_factory=dict)
    """keyed by (earlier, later) in arrival order; iteration follows that order"""

    def weight(self, a: EgoId, b: EgoId) -> int:
        if a == b:
            return 0
        return self.weights.get((a, b), self.weights.get((b, a), 0))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.nodes)
        for (a, b), w in self.weights.items():
            graph.add_edge(a, b, weight=float(w), distance=1.0 / w)
        return graph


@dataclass(frozen=True)
class FollowerShares:
    counts: Tuple[int, ...]

    @classmethod
    def from_counts(cls, counts: Iterable[int]) -> "FollowerShares":
        return cls(tuple(int(c) for c in counts))

    @property
    def S(self) -> int:
        return len(self.counts)

    @property
    def shares(self) -> np.ndarray:
        d = np.asarray(self.counts, dtype=np.float64)
        total = d.sum()
        if total == 0:
            return np.zeros_like(d)
        return d / total


def initial_topology(alter_ids: Sequence[AlterId], ego_ids: Sequence[EgoId], k: int = 2) -> Dict[EgoId, Tuple[AlterId, AlterId]]:
    """Fixed round-1 assignment: position p follows alters (p mod S, (p + 1 + p // S) mod S).

    With 6 alters and 18 egos every alter starts with exactly 6 followers, so the round-1 Gini is 0.
    Callers shuffle `ego_ids` to randomise who takes which position.
    """
    if k != 2:
        raise InvalidInput("the initial topology is defined for k=2")
    S = len(alter_ids)
    choices = {}
    for p, ego in enumerate(ego_ids):
        first = p % S
        second = (p + 1 + (p // S) % (S - 1)) % S
        choices[ego] = (alter_ids[first], alter_ids[second])
    return choices


def follower_counts(round: BipartiteRound, upto_ego: Optional[EgoId] = None) -> FollowerShares:
    snapshot = round if upto_ego is None else round.prefix(upto_ego)
    counts = {a: 0 for a in snapshot.alter_ids}
    for _, alter in snapshot.follow_edges:
        counts[alter] += 1
    return FollowerShares.from_counts(counts[a] for a in snapshot.alter_ids)


def project_onto_egos(round: BipartiteRound, upto_ego: EgoId) -> EgoProjection:
    egos = round.egos_upto(upto_ego)
    followed = {e: round.alters_of(e) for e in egos}
    weights = {}
    for a, b in combinations(egos, 2):
        shared = len(followed[a] & followed[b])
        if shared:
            weights[(a, b)] = shared
    return EgoProjection(nodes=tuple(egos), weights=weights)


def gini_coefficient(shares: FollowerShares) -> float:
    if shares.S < 1:
        raise InvalidInput("gini needs at least one alter")
    if sum(shares.counts) == 0:
        warnings.warn("all follower counts are zero; gini defined as 0", DegenerateDistribution)
        return 0.0
    m = shares.shares
    return float(np.abs(m[:, None] - m[None, :]).sum() / (2 * shares.S * m.sum()))


def gini_by_network_size(round: BipartiteRound) -> Dict[int, float]:
    """Gini of the growing network after each arrival, keyed by network size."""
    return {
        size: gini_coefficient(follower_counts(round, ego))
        for size, ego in enumerate(round.ego_arrival_order, start=1)
        if round.alters_of(ego)
    }


def _eigenvector_in_component(graph: nx.Graph, focal: EgoId) -> float:
    component = nx.node_connected_component(graph, focal)
    if len(component) < 2:
        return 0.0
    nodes = sorted(component)
    A = nx.to_numpy_array(graph, nodelist=nodes, weight="weight")
    _, vecs = np.linalg.eigh(A)
    leading = np.abs(vecs[:, -1])
    leading /= np.linalg.norm(leading)
    return float(leading[nodes.index(focal)])


def structural_features(round: BipartiteRound, focal_ego: EgoId) -> Dict[str, float]:
    """The 12 network-structural features of `focal_ego`, in NETWORK_FEATURES order."""
    if not round.alters_of(focal_ego):
        raise NotFound(f"ego {focal_ego} has no edges in round {round.round_index}")
    projection = project_onto_egos(round, focal_ego)
    n = len(projection.nodes)
    features = dict.fromkeys(NETWORK_FEATURES, 0.0)
    features["network_size"] = float(n)
    features["gini"] = gini_coefficient(follower_counts(round, focal_ego))
    if n < 2:
        return features

    graph = projection.to_networkx()
    max_weight = float(round.k)
    strength = sum(d["weight"] for _, _, d in graph.edges(focal_ego, data=True))

    features["global_clustering"] = float(nx.average_clustering(graph, weight="weight"))
    features["transitivity"] = float(nx.transitivity(graph))
    features["local_clustering"] = float(nx.clustering(graph, focal_ego, weight="weight"))
    features["degree_centrality"] = strength / ((n - 1) * max_weight)
    features["betweenness_centrality"] = float(
        nx.betweenness_centrality(graph, weight="distance", normalized=True)[focal_ego]
    )
    features["eigenvector_centrality"] = _eigenvector_in_component(graph, focal_ego)
    features["closeness_centrality"] = float(
        nx.harmonic_centrality(graph, nbunch=[focal_ego], distance="distance")[focal_ego] / (n - 1)
    )
    features["pagerank_centrality"] = float(
        nx.pagerank(graph, alpha=PAGERANK_DAMPING, tol=PAGERANK_TOL, max_iter=PAGERANK_MAX_ITER, weight="weight")[focal_ego]
    )
    if graph.degree(focal_ego) > 0:
        features["avg_neighbor_degree"] = float(
            nx.average_neighbor_degree(graph, nodes=[focal_ego], weight="weight")[focal_ego]
        )
    features["triangle_count"] = float(nx.triangles(graph, focal_ego))
    return features
