import math

import numpy as np
import pytest

from conftest import idea
from socialmuse.data.records import IdeaRecord
from socialmuse.metrics.novelty import ProxyNoveltyScorer, best_novelty_score
from socialmuse.metrics.rarity import (
    DEGENERATE_BIN,
    RoundPool,
    bin_text_ideas,
    collective_distinct_count,
    marginal_distinct_count,
    marginal_distinct_series,
    nonredundant_count,
)
from socialmuse.utils.errors import InvalidInput, NotFound


def round_ideas():
    return [
        idea("a0", 1, 1, "x", "cat"),
        idea("e0", 1, 1, "p", "dog"),
        idea("e0", 1, 2, "q", "dog", n=1),
        idea("e1", 1, 1, "q", "cat"),
        idea("e1", 1, 2, "r", "cat", n=1),
        idea("e1", 1, 2, "x", "cat", n=2),
        idea("e2", 1, 2, "r", "cat"),
        idea("e2", 1, 2, "s", "cat", n=1),
        idea("e0", 2, 1, "zz", "dog"),
    ]


def test_pool_is_cumulative_in_arrival_order():
    pool = RoundPool.from_ideas(round_ideas(), 1, ("e0", "e1", "e2"))
    assert pool.before("e0") == frozenset()
    assert pool.before("e1") == {"p", "q"}
    assert pool.before("e2") == {"p", "q", "r", "x"}
    assert pool.union() == {"p", "q", "r", "s", "x"}
    with pytest.raises(NotFound):
        pool.before("a0")


def test_marginal_distinct_count():
    pool = RoundPool.from_ideas(round_ideas(), 1, ("e0", "e1", "e2"))
    assert marginal_distinct_count(pool, "e0", {"q"}) == 1
    # q was already in e0's ideas
    assert marginal_distinct_count(pool, "e1", {"q", "r", "x"}) == 2
    assert marginal_distinct_count(pool, "e2", {"r", "s"}) == 1


def test_marginal_distinct_with_alters_in_pool():
    pool = RoundPool.from_ideas(round_ideas(), 1, ("e0", "e1", "e2"), alter_ids=("a0",), include_alters=True)
    assert pool.before("e0") == {"x"}
    assert marginal_distinct_count(pool, "e1", {"r", "x"}) == 1


def test_marginal_series_matches_pointwise_counts():
    pool = RoundPool.from_ideas(round_ideas(), 1, ("e0", "e1", "e2"))
    attempt2 = {"e0": {"q"}, "e1": {"r", "x"}, "e2": {"r", "s"}}
    series = marginal_distinct_series(pool, attempt2)
    assert series == {e: marginal_distinct_count(pool, e, bins) for e, bins in attempt2.items()}
    with pytest.raises(NotFound):
        marginal_distinct_series(pool, {"e9": {"q"}})


def test_pool_needs_bins():
    unbinned = [IdeaRecord("i0", "e0", "t000", "control", 1, 1, text="cat")]
    with pytest.raises(InvalidInput):
        RoundPool.from_ideas(unbinned, 1, ("e0",))


def test_nonredundant_and_collective_counts():
    bins = {"e0": {"a", "b"}, "e1": {"b", "c"}, "e2": set()}
    assert nonredundant_count(bins, "e0") == 1
    assert nonredundant_count(bins, "e1") == 1
    assert nonredundant_count(bins, "e2") == 0
    assert collective_distinct_count(bins) == 3
    with pytest.raises(NotFound):
        nonredundant_count(bins, "e9")


def test_binning_by_normal_form():
    texts = ["paper weight", "paperweight", "use as a doorstop", "door stop", "the"]
    records = [IdeaRecord(f"i{n}", "e0", "t000", "control", 1, 1, text=t) for n, t in enumerate(texts)]
    binned = bin_text_ideas(records)
    assert binned[0].bin_id == binned[1].bin_id
    assert binned[2].bin_id == binned[3].bin_id
    assert binned[0].bin_id != binned[2].bin_id
    assert binned[4].bin_id == DEGENERATE_BIN


def test_binning_needs_text():
    with pytest.raises(InvalidInput):
        bin_text_ideas([IdeaRecord("i0", "e0", "t000", "control", 1, 1)])


def random_pool(rng, n_authors=6, n_bins=12):
    authors = [f"e{i}" for i in range(n_authors)]
    ideas = []
    for author in authors:
        for n, b in enumerate(rng.choice(n_bins, size=rng.integers(0, 5))):
            ideas.append(idea(author, 1, 2, f"b{b}", "cat", n=n))
    return RoundPool.from_ideas(ideas, 1, tuple(str(a) for a in rng.permutation(authors)))


def test_marginal_counts_add_up_to_the_pool():
    rng = np.random.default_rng(3)
    for _ in range(50):
        pool = random_pool(rng)
        series = marginal_distinct_series(pool, dict(pool.contributions))
        assert sum(series.values()) == len(pool.union())


def test_nonredundant_count_ignores_ego_order():
    rng = np.random.default_rng(4)
    for _ in range(20):
        bins = {f"e{i}": {f"b{b}" for b in rng.choice(8, size=rng.integers(0, 4))} for i in range(5)}
        shuffled = {str(e): bins[str(e)] for e in rng.permutation(list(bins))}
        assert {e: nonredundant_count(bins, e) for e in bins} == {e: nonredundant_count(shuffled, e) for e in bins}


def test_binning_is_idempotent_and_order_free():
    texts = ["paper weight", "paperweight", "use as a doorstop", "door stop", "the", "weight of paper"]
    records = [IdeaRecord(f"i{n}", "e0", "t000", "control", 1, 1, text=t) for n, t in enumerate(texts)]
    binned = bin_text_ideas(records)
    assert bin_text_ideas(binned) == binned
    reversed_bins = {r.idea_id: r.bin_id for r in bin_text_ideas(records[::-1])}
    assert reversed_bins == {r.idea_id: r.bin_id for r in binned}


def test_proxy_novelty(tables):
    scorer = ProxyNoveltyScorer(tables["A"], {1: "animal"})
    near = idea("e0", 1, 1, "p", "dog")
    far = idea("e0", 1, 1, "q", "hammer", n=1)
    unknown = idea("e0", 1, 2, "r", "zzz", n=2)
    assert scorer(near) < scorer(far)
    assert math.isnan(scorer(unknown))
    # no prompt for round 2
    assert math.isnan(scorer(idea("e0", 2, 1, "p", "dog")))
    assert best_novelty_score(scorer, [near, far, unknown]) == pytest.approx(scorer(far))
    assert best_novelty_score(scorer, [unknown]) == 0.0
    assert best_novelty_score(scorer, []) == 0.0
