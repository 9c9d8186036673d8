import math

import numpy as np
import pandas as pd
import pytest

from socialmuse.features.context import (
    FEATURE_NAMES,
    NETWORK_MASK,
    SEMANTIC_FEATURES,
    SEMANTIC_MASK,
    ScalerParams,
    assemble,
    assemble_candidates,
    candidate_pairs,
    feature_dict,
    standardize,
    write_feature_matrix,
)
from socialmuse.network.bipartite import NETWORK_FEATURES
from socialmuse.semantics.taxonomy import creativity_quotient
from socialmuse.utils.errors import InvalidInput


def test_feature_schema():
    assert len(FEATURE_NAMES) == 36
    assert len(SEMANTIC_FEATURES) == 23
    assert len(NETWORK_FEATURES) == 12
    assert FEATURE_NAMES[-1] == "round_id"
    assert len(set(FEATURE_NAMES)) == 36
    assert not (SEMANTIC_MASK & NETWORK_MASK).any()
    assert SEMANTIC_MASK.sum() + NETWORK_MASK.sum() == 35


def test_candidate_pairs_are_lexicographic(small_state):
    assert candidate_pairs(small_state) == [
        ("a0", "a1"), ("a0", "a2"), ("a0", "a3"), ("a1", "a2"), ("a1", "a3"), ("a2", "a3"),
    ]


def test_assemble_has_36_dims(small_state, semantic):
    vec = assemble(small_state, semantic, "e1", 2, ("a0", "a2"))
    assert vec.shape == (36,)
    values = feature_dict(vec)
    assert values["round_id"] == 2.0
    # e0 already chose for round 2, so e1 sees a network of two egos
    assert values["network_size"] == 2.0


def test_assemble_is_symmetric_in_the_pair(small_state, semantic):
    forward = assemble(small_state, semantic, "e1", 2, ("a0", "a2"))
    backward = assemble(small_state, semantic, "e1", 2, ("a2", "a0"))
    np.testing.assert_array_equal(forward, backward)


def test_assemble_semantic_values(small_state, semantic, taxonomy):
    values = feature_dict(assemble(small_state, semantic, "e0", 2, ("a0", "a2")))
    assert values["cq_ego_attempt1"] == pytest.approx(creativity_quotient(taxonomy, ["dog", "puppy"]).Q)
    assert values["cq_ego_attempt2"] == pytest.approx(creativity_quotient(taxonomy, ["animal", "cat"]).Q)
    assert values["cq_ego_combined"] == pytest.approx(
        creativity_quotient(taxonomy, ["dog", "puppy", "animal", "cat"]).Q
    )
    assert values["cq_alter_sum"] == pytest.approx(
        creativity_quotient(taxonomy, ["dog", "puppy"]).Q + creativity_quotient(taxonomy, ["hammer", "tool"]).Q
    )
    # e0 and a0 wrote the same idea in round 1
    assert values["cosine_a_ego_alter_min"] == pytest.approx(0.0)
    assert values["cosine_a_ego_alter_min"] <= values["cosine_a_ego_alter_mean"] <= values["cosine_a_ego_alter_max"]
    assert values["wmd_a_ego_alter_std"] == pytest.approx(
        (values["wmd_a_ego_alter_max"] - values["wmd_a_ego_alter_min"]) / 2
    )


def test_gender_diversity(small_state, semantic):
    # e0 is female; a0 and a2 are female, a1 and a3 male
    assert feature_dict(assemble(small_state, semantic, "e0", 2, ("a0", "a2")))["gender_diversity"] == 0.0
    assert feature_dict(assemble(small_state, semantic, "e0", 2, ("a0", "a1")))["gender_diversity"] == 1.0
    assert feature_dict(assemble(small_state, semantic, "e0", 2, ("a1", "a3")))["gender_diversity"] == 2.0


def test_missing_vocabulary_is_nan(small_state, semantic, tables):
    from conftest import idea

    small_state.add_ideas([idea("e2", 2, 1, "b9", "zzz")])
    small_state.set_choice(2, "e1", ("a0", "a1"))
    small_state.set_choice(2, "e2", ("a0", "a1"))
    vec = feature_dict(assemble(small_state, semantic, "e2", 3, ("a0", "a1")))
    assert math.isnan(vec["cosine_a_ego_alter_min"])
    assert vec["round_id"] == 3.0


def test_assemble_rejects_round_one(small_state, semantic):
    with pytest.raises(InvalidInput):
        assemble(small_state, semantic, "e0", 1, ("a0", "a1"))


def test_assemble_candidates(small_state, semantic):
    pairs, X = assemble_candidates(small_state, semantic, "e1", 2)
    assert len(pairs) == 6
    assert X.shape == (6, 36)
    np.testing.assert_array_equal(X[1], assemble(small_state, semantic, "e1", 2, pairs[1]))


def test_scaler_handles_constant_and_missing_columns():
    X = np.array([[1.0, 5.0, np.nan], [3.0, 5.0, 2.0], [5.0, 5.0, 4.0]])
    params = ScalerParams.fit(X)
    np.testing.assert_allclose(params.mean, [3.0, 5.0, 3.0])
    assert params.scale[1] == 0.0
    Z = standardize(X, params)
    np.testing.assert_allclose(Z[:, 0], [-1.224744871, 0.0, 1.224744871], atol=1e-8)
    np.testing.assert_array_equal(Z[:, 1], [0.0, 0.0, 0.0])
    # the missing value is imputed with the mean
    assert Z[0, 2] == 0.0


def test_write_feature_matrix(tmp_path):
    X = np.arange(72, dtype=float).reshape(2, 36)
    write_feature_matrix(tmp_path / "X.csv", X, dict(ego=["e0", "e1"]))
    frame = pd.read_csv(tmp_path / "X.csv")
    assert list(frame.columns) == ["ego"] + list(FEATURE_NAMES)
    assert frame["round_id"].tolist() == [35.0, 71.0]
