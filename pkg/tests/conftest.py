import numpy as np
import pytest

from socialmuse.data.records import IdeaRecord
from socialmuse.data.trial import TrialState
from socialmuse.envs.ideation_trial import AgentProfileConfig, TrialConfig
from socialmuse.envs.universe import IdeaUniverse, UniverseConfig
from socialmuse.features.context import SemanticContext
from socialmuse.semantics.embeddings import EmbeddingTable
from socialmuse.semantics.taxonomy import Taxonomy


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: runs for minutes; deselect with -m \"not slow\"")


@pytest.fixture
def taxonomy():
    """animal -> {dog -> {puppy, hound}, cat}, plus a separate "tool" tree with hammer."""
    edges = [
        ("dog", "animal"),
        ("cat", "animal"),
        ("puppy", "dog"),
        ("hound", "dog"),
        ("hammer", "tool"),
    ]
    lexicon = {
        "animal": ("animal",),
        "dog": ("dog",),
        "cat": ("cat",),
        "puppy": ("puppy",),
        "hound": ("hound",),
        "hammer": ("hammer",),
        "tool": ("tool",),
        # polysemous: the generic sense and the specific one
        "pup": ("dog", "puppy"),
    }
    return Taxonomy.from_edges(edges, lexicon)


@pytest.fixture
def tables():
    vectors_a = {
        "animal": [1.0, 0.0, 0.0],
        "dog": [0.9, 0.1, 0.0],
        "cat": [0.8, 0.0, 0.2],
        "puppy": [0.85, 0.15, 0.0],
        "hound": [0.9, 0.2, 0.0],
        "hammer": [0.0, 0.0, 1.0],
        "tool": [0.0, 0.1, 0.9],
    }
    vectors_b = {k: [v[1], v[0]] for k, v in vectors_a.items()}
    return {
        "A": EmbeddingTable.from_vectors("A", vectors_a),
        "B": EmbeddingTable.from_vectors("B", vectors_b),
    }


@pytest.fixture
def semantic(taxonomy, tables):
    return SemanticContext(taxonomy, tables)


def idea(author, round, attempt, bin_id, text, trial="t000", condition="control", n=0):
    return IdeaRecord(
        idea_id=f"{trial}-{condition}-{author}-r{round}-a{attempt}-{n}",
        author_id=author,
        trial=trial,
        condition=condition,
        round=round,
        attempt=attempt,
        bin_id=bin_id,
        concept_ids=tuple(text.split()),
        text=text,
    )


@pytest.fixture
def small_state():
    """Four alters, three egos; round 1 finished with ideas, round 2 half-chosen."""
    state = TrialState(
        trial="t000",
        condition="control",
        alter_ids=("a0", "a1", "a2", "a3"),
        ego_ids=("e0", "e1", "e2"),
        genders={"a0": "f", "a1": "m", "a2": "f", "a3": "m", "e0": "f", "e1": "m", "e2": "f"},
    )
    state.set_choice(1, "e0", ("a0", "a1"))
    state.set_choice(1, "e1", ("a2", "a3"))
    state.set_choice(1, "e2", ("a1", "a2"))
    state.add_ideas([
        idea("a0", 1, 1, "b0", "dog puppy"),
        idea("a1", 1, 1, "b1", "cat"),
        idea("a2", 1, 1, "b2", "hammer tool"),
        idea("a3", 1, 1, "b3", "hound"),
        idea("e0", 1, 1, "b0", "dog puppy"),
        idea("e0", 1, 2, "b4", "animal cat", n=1),
        idea("e1", 1, 1, "b2", "hammer"),
        idea("e1", 1, 2, "b5", "tool", n=1),
        idea("e2", 1, 1, "b1", "cat"),
        idea("e2", 1, 2, "b4", "animal", n=1),
    ])
    state.set_choice(2, "e0", ("a1", "a3"))
    return state


def tiny_trial_config(**overrides) -> TrialConfig:
    universe = UniverseConfig(n_prompts=3, n_bins=30, n_concepts=80, neighborhood_size=4)
    config = TrialConfig(n_alters=4, n_egos=6, rounds=3, seed=3, universe=universe, agents=AgentProfileConfig())
    for key, value in overrides.items():
        setattr(config, key, value)
    return config


@pytest.fixture
def trial_config():
    return tiny_trial_config()


@pytest.fixture
def universe(trial_config):
    return IdeaUniverse.generate(trial_config.universe, trial_config.seed)


def planted_data(n=240, d=6, seed=0):
    """y depends on columns 0 and 1 only."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = 3.0 * (X[:, 0] > 0) + X[:, 1] + rng.normal(scale=0.05, size=n)
    return X, y
