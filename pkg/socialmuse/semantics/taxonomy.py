"""Concept taxonomy and the taxonomy-based Creativity Quotient.

Information content follows the intrinsic, hyponym-count definition: a concept with many
descendants says little, a leaf says the most. Similarity of two concepts is the information
they share through their most specific common abstraction, and an idea set's Creativity
Quotient is its concept count minus the weight of the maximum spanning tree over pairwise
similarities.
"""
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from socialmuse.utils.errors import InvalidInput, NotFound

ConceptId = str

VIRTUAL_ROOT = "__root__"


@dataclass(frozen=True)
class IdeaSetScore:
    N: int
    I_m: float
    Q: float


@dataclass(frozen=True, eq=False)
class Taxonomy:
    concepts: FrozenSet[ConceptId]
    parent_links: Mapping[ConceptId, FrozenSet[ConceptId]]
    hyponym_counts: Mapping[ConceptId, int]
    lexicon: Mapping[str, Tuple[ConceptId, ...]] = field(default_factory=dict)
    _subsumers: Mapping[ConceptId, FrozenSet[ConceptId]] = field(default_factory=dict, repr=False)
    _information: Mapping[ConceptId, float] = field(default_factory=dict, repr=False)

    @property
    def w(self) -> int:
        return len(self.concepts)

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[Tuple[ConceptId, ConceptId]],
        lexicon: Optional[Mapping[str, Iterable[ConceptId]]] = None,
        concepts: Iterable[ConceptId] = (),
    ) -> "Taxonomy":
        """Build from (child, parent) "is a" links; parentless concepts hang under a virtual root."""
        graph = nx.DiGraph()
        graph.add_nodes_from(concepts)
        for child, parent in edges:
            if child == parent:
                raise InvalidInput(f"concept {child} is its own parent")
            graph.add_edge(parent, child)
        lexicon = {tok: tuple(cs) for tok, cs in (lexicon or {}).items()}
        for cs in lexicon.values():
            graph.add_nodes_from(cs)
        if not nx.is_directed_acyclic_graph(graph):
            raise InvalidInput("taxonomy contains a cycle")
        for concept in [c for c in graph.nodes if graph.in_degree(c) == 0 and c != VIRTUAL_ROOT]:
            graph.add_edge(VIRTUAL_ROOT, concept)
        if VIRTUAL_ROOT not in graph:
            graph.add_node(VIRTUAL_ROOT)

        w = graph.number_of_nodes()
        hyponyms = {c: len(nx.descendants(graph, c)) for c in graph.nodes}
        parents = {c: frozenset(graph.predecessors(c)) for c in graph.nodes}
        subsumers = {c: frozenset(nx.ancestors(graph, c)) | {c} for c in graph.nodes}
        if w < 2:
            information = {c: 1.0 for c in graph.nodes}
        else:
            information = {c: 1.0 - math.log(h + 1) / math.log(w) for c, h in hyponyms.items()}
        return cls(
            concepts=frozenset(graph.nodes),
            parent_links=parents,
            hyponym_counts=hyponyms,
            lexicon=lexicon,
            _subsumers=subsumers,
            _information=information,
        )

    def subsumers(self, c: ConceptId) -> FrozenSet[ConceptId]:
        try:
            return self._subsumers[c]
        except KeyError:
            raise NotFound(f"unknown concept {c!r}") from None

    def concepts_for_token(self, token: str) -> Tuple[ConceptId, ...]:
        return self.lexicon.get(token, ())


def information_content(taxonomy: Taxonomy, c: ConceptId) -> float:
    try:
        return taxonomy._information[c]
    except KeyError:
        raise NotFound(f"unknown concept {c!r}") from None


def msca_similarity(taxonomy: Taxonomy, c1: ConceptId, c2: ConceptId) -> float:
    common = taxonomy.subsumers(c1) & taxonomy.subsumers(c2)
    return max(information_content(taxonomy, c) for c in common)


def pair_similarity(taxonomy: Taxonomy, c1: ConceptId, c2: ConceptId) -> float:
    # not clipped to [0, 1]
    i1 = information_content(taxonomy, c1)
    i2 = information_content(taxonomy, c2)
    return 1.0 - (i1 + i2 - 2.0 * msca_similarity(taxonomy, c1, c2)) / 2.0


def max_spanning_tree_weight(similarity: np.ndarray) -> float:
    """Weight of the maximum spanning tree of the complete graph with these edge weights."""
    similarity = np.asarray(similarity, dtype=np.float64)
    n = similarity.shape[0]
    if n < 2:
        return 0.0
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            graph.add_edge(i, j, weight=float(similarity[i, j]))
    tree = nx.maximum_spanning_tree(graph, weight="weight", algorithm="kruskal")
    return float(sum(d["weight"] for _, _, d in tree.edges(data=True)))


def creativity_quotient(taxonomy: Taxonomy, concepts: Iterable[ConceptId]) -> IdeaSetScore:
    distinct = sorted(set(concepts))
    N = len(distinct)
    if N == 0:
        return IdeaSetScore(N=0, I_m=0.0, Q=0.0)
    similarity = np.zeros((N, N))
    for i in range(N):
        for j in range(i + 1, N):
            similarity[i, j] = similarity[j, i] = pair_similarity(taxonomy, distinct[i], distinct[j])
    I_m = max_spanning_tree_weight(similarity)
    return IdeaSetScore(N=N, I_m=I_m, Q=N - I_m)


def load_taxonomy(edges_path: Union[str, Path], lexicon_path: Union[str, Path]) -> Taxonomy:
    """Read `child<TAB>parent` edges and a `token<TAB>concept_id` lexicon."""
    edges = []
    concepts = []
    with open(edges_path, "r") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) == 1:
                concepts.append(parts[0])
            else:
                edges.append((parts[0], parts[1]))
    lexicon: Dict[str, list] = {}
    with open(lexicon_path, "r") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            token, concept = line.split("\t")
            lexicon.setdefault(token.lower(), []).append(concept)
    return Taxonomy.from_edges(edges, lexicon, concepts)


def write_taxonomy(taxonomy: Taxonomy, edges_path: Union[str, Path], lexicon_path: Union[str, Path]) -> None:
    with open(edges_path, "w") as f:
        for child in sorted(taxonomy.concepts):
            if child == VIRTUAL_ROOT:
                continue
            parents = sorted(p for p in taxonomy.parent_links[child] if p != VIRTUAL_ROOT)
            if not parents:
                f.write(f"{child}\n")
            for parent in parents:
                f.write(f"{child}\t{parent}\n")
    with open(lexicon_path, "w") as f:
        for token in sorted(taxonomy.lexicon):
            for concept in taxonomy.lexicon[token]:
                f.write(f"{token}\t{concept}\n")


def most_specific_concept(taxonomy: Taxonomy, candidates: Sequence[ConceptId]) -> Optional[ConceptId]:
    """Polysemy rule: the most specific sense wins, ties by concept id."""
    if not candidates:
        return None
    return min(candidates, key=lambda c: (-information_content(taxonomy, c), c))
