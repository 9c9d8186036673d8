"""Synthetic world the simulated ideators share.

A random concept taxonomy with one word per concept, two embedding tables that are different noisy
projections of the same latent concept space, a prompt concept per round and, per round, a catalog
of idea bins. Each bin is a small cluster of related concepts with a Zipf popularity weight and
knows its nearest neighbouring bins, the ideas one is likely to think of after seeing it.
"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
from sklearn.neighbors import NearestNeighbors

from socialmuse.features.context import SemanticContext
from socialmuse.semantics.embeddings import EmbeddingTable, load_embeddings, write_embeddings
from socialmuse.semantics.taxonomy import Taxonomy, load_taxonomy, write_taxonomy
from socialmuse.utils.errors import InvalidConfig
from socialmuse.utils.rng import stream

TAXONOMY_FILE = "taxonomy.tsv"
LEXICON_FILE = "lexicon.tsv"
EMBEDDINGS_A_FILE = "embeddings_a.txt"
EMBEDDINGS_B_FILE = "embeddings_b.txt"
PROMPTS_FILE = "prompts.json"


@dataclass
class UniverseConfig:
    n_prompts: int = 5
    """number of rounds with their own prompt object"""
    n_bins: int = 120
    """idea bins per round"""
    zipf_alpha: float = 1.0
    """skew of bin popularity; popularity of the r-th most common bin is proportional to r^-alpha"""
    n_concepts: int = 400
    """taxonomy size, excluding the virtual root"""
    branching: int = 4
    """typical number of children per concept"""
    concepts_per_bin: int = 3
    """concepts describing one bin"""
    latent_dim: int = 8
    """dimension of the latent concept space"""
    table_a_dim: int = 16
    """dimension of embedding table A"""
    table_b_dim: int = 12
    """dimension of embedding table B"""
    table_noise: float = 0.2
    """noise added to each projected word vector"""
    neighborhood_size: int = 6
    """neighbouring bins reachable from a bin; small neighbourhoods make inspired ideas collide more"""

    def validate(self) -> None:
        if self.n_bins < 2 or self.n_concepts < 2:
            raise InvalidConfig("the universe needs at least two bins and two concepts")
        if not 0 < self.neighborhood_size < self.n_bins:
            raise InvalidConfig("neighborhood_size must be between 1 and n_bins - 1")
        if self.concepts_per_bin < 1 or self.zipf_alpha < 0:
            raise InvalidConfig("concepts_per_bin must be positive and zipf_alpha non-negative")


@dataclass(frozen=True, eq=False)
class RoundCatalog:
    round: int
    prompt_concept: str
    bin_ids: Tuple[str, ...]
    popularity: np.ndarray
    """normalized weights"""
    concepts: Tuple[Tuple[str, ...], ...]
    vectors: np.ndarray
    neighbors: np.ndarray
    """(n_bins, neighborhood_size) indices of the nearest other bins"""

    @property
    def rarity(self) -> np.ndarray:
        """-log popularity rescaled to [0, 1]."""
        surprise = -np.log(self.popularity)
        span = surprise.max() - surprise.min()
        return (surprise - surprise.min()) / span if span > 0 else np.zeros_like(surprise)


@dataclass(frozen=True, eq=False)
class IdeaUniverse:
    config: UniverseConfig
    taxonomy: Taxonomy
    tokens: Dict[str, str]
    """concept id -> its word"""
    tables: Dict[str, EmbeddingTable]
    catalogs: Tuple[RoundCatalog, ...]

    @classmethod
    def generate(cls, config: UniverseConfig, seed: int) -> "IdeaUniverse":
        config.validate()
        rng = stream(seed, "universe")
        n = config.n_concepts
        concepts = [f"c{i:04d}" for i in range(n)]
        parents = {0: None}
        for i in range(1, n):
            structured = (i - 1) // config.branching
            parents[i] = int(rng.integers(0, i)) if rng.random() < 0.2 else structured
        latent = np.zeros((n, config.latent_dim))
        latent[0] = rng.normal(size=config.latent_dim)
        depth = np.zeros(n, dtype=np.int64)
        for i in range(1, n):
            depth[i] = depth[parents[i]] + 1
            latent[i] = latent[parents[i]] + rng.normal(scale=1.0 / np.sqrt(depth[i]), size=config.latent_dim)

        tokens = {c: f"w{i:04d}" for i, c in enumerate(concepts)}
        edges = [(concepts[i], concepts[p]) for i, p in parents.items() if p is not None]
        taxonomy = Taxonomy.from_edges(edges, {tokens[c]: (c,) for c in concepts}, concepts)

        tables = {}
        for name, dim in (("A", config.table_a_dim), ("B", config.table_b_dim)):
            projection = rng.normal(size=(config.latent_dim, dim)) / np.sqrt(config.latent_dim)
            matrix = latent @ projection + rng.normal(scale=config.table_noise, size=(n, dim))
            tables[name] = EmbeddingTable.from_vectors(name, {tokens[c]: matrix[i] for i, c in enumerate(concepts)})

        children: Dict[int, List[int]] = {i: [] for i in range(n)}
        for i, p in parents.items():
            if p is not None:
                children[p].append(i)
        catalogs = []
        deep = np.flatnonzero(depth >= 1)
        for r in range(1, config.n_prompts + 1):
            prompt = int(rng.choice(deep))
            bin_concepts = []
            for _ in range(config.n_bins):
                anchor = int(rng.integers(0, n))
                family = [anchor] + children[anchor] + ([parents[anchor]] if parents[anchor] is not None else [])
                k = min(config.concepts_per_bin, len(family))
                picked = [anchor] + list(rng.choice(family[1:], k - 1, replace=False)) if k > 1 else [anchor]
                bin_concepts.append(tuple(concepts[int(c)] for c in picked))
            index = {c: i for i, c in enumerate(concepts)}
            vectors = np.stack([latent[[index[c] for c in cs]].mean(axis=0) for cs in bin_concepts])
            ranks = rng.permutation(config.n_bins)
            popularity = 1.0 / (ranks + 1.0) ** config.zipf_alpha
            popularity /= popularity.sum()
            nn = NearestNeighbors(n_neighbors=config.neighborhood_size + 1).fit(vectors)
            _, neighbors = nn.kneighbors(vectors)
            neighbors = np.stack([[j for j in row if j != b][: config.neighborhood_size] for b, row in enumerate(neighbors)])
            catalogs.append(
                RoundCatalog(
                    round=r,
                    prompt_concept=concepts[prompt],
                    bin_ids=tuple(f"r{r}b{b:03d}" for b in range(config.n_bins)),
                    popularity=popularity,
                    concepts=tuple(bin_concepts),
                    vectors=vectors,
                    neighbors=neighbors,
                )
            )
        return cls(config=config, taxonomy=taxonomy, tokens=tokens, tables=tables, catalogs=tuple(catalogs))

    def catalog(self, round: int) -> RoundCatalog:
        if not 1 <= round <= len(self.catalogs):
            raise InvalidConfig(f"the universe has prompts for rounds 1-{len(self.catalogs)}, not {round}")
        return self.catalogs[round - 1]

    def bin_text(self, round: int, b: int) -> str:
        return " ".join(self.tokens[c] for c in self.catalog(round).concepts[b])

    def prompt_tokens(self) -> Dict[int, str]:
        return {c.round: self.tokens[c.prompt_concept] for c in self.catalogs}

    def semantic_context(self) -> SemanticContext:
        return SemanticContext(self.taxonomy, self.tables)


def write_world(universe: IdeaUniverse, directory: Union[str, Path]) -> None:
    """The files a model needs to score this world's logs later."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_taxonomy(universe.taxonomy, directory / TAXONOMY_FILE, directory / LEXICON_FILE)
    write_embeddings(universe.tables["A"], directory / EMBEDDINGS_A_FILE)
    write_embeddings(universe.tables["B"], directory / EMBEDDINGS_B_FILE)
    with open(directory / PROMPTS_FILE, "w") as f:
        json.dump({str(r): t for r, t in universe.prompt_tokens().items()}, f, indent=2, sort_keys=True)


def load_world(directory: Union[str, Path]) -> Tuple[SemanticContext, Dict[int, str]]:
    directory = Path(directory)
    for name in (TAXONOMY_FILE, LEXICON_FILE, EMBEDDINGS_A_FILE, EMBEDDINGS_B_FILE):
        if not (directory / name).exists():
            raise FileNotFoundError(f"missing world file {directory / name}")
    taxonomy = load_taxonomy(directory / TAXONOMY_FILE, directory / LEXICON_FILE)
    tables = {
        "A": load_embeddings(directory / EMBEDDINGS_A_FILE, "A"),
        "B": load_embeddings(directory / EMBEDDINGS_B_FILE, "B"),
    }
    prompts = {}
    if (directory / PROMPTS_FILE).exists():
        with open(directory / PROMPTS_FILE, "r") as f:
            prompts = {int(r): t for r, t in json.load(f).items()}
    return SemanticContext(taxonomy, tables), prompts
