"""Rarity-based creativity scores.

Ideas are compared by bin: two differently phrased ideas with the same meaning share a bin id.
Within a round the pool grows as egos arrive, and an ego's marginal distinct count is the number
of its attempt-2 bins nobody before it had submitted.
"""
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from socialmuse.data.records import IdeaRecord
from socialmuse.semantics.text import normal_form, stemmed_vocabulary
from socialmuse.utils.errors import InvalidInput, NotFound

DEGENERATE_BIN = "degenerate"


@dataclass(frozen=True)
class RoundPool:
    round: int
    contributions: Tuple[Tuple[str, FrozenSet[str]], ...]
    """(author_id, bins) in arrival order"""

    @classmethod
    def from_ideas(
        cls,
        ideas: Iterable[IdeaRecord],
        round: int,
        arrival_order: Sequence[str],
        alter_ids: Sequence[str] = (),
        include_alters: bool = False,
    ) -> "RoundPool":
        """Pool of one round. With `include_alters`, the alters' seed ideas are contributed first."""
        bins: Dict[str, Set[str]] = {}
        for idea in ideas:
            if idea.round != round:
                continue
            if idea.bin_id is None:
                raise InvalidInput(f"idea {idea.idea_id} has no bin id")
            bins.setdefault(idea.author_id, set()).add(idea.bin_id)
        contributions = []
        if include_alters:
            contributions.extend((a, frozenset(bins.get(a, ()))) for a in alter_ids)
        contributions.extend((e, frozenset(bins.get(e, ()))) for e in arrival_order)
        return cls(round, tuple(contributions))

    def before(self, author_id: str) -> FrozenSet[str]:
        """Cumulative union of every contribution that precedes `author_id`."""
        seen: Set[str] = set()
        for author, bins in self.contributions:
            if author == author_id:
                return frozenset(seen)
            seen |= bins
        raise NotFound(f"{author_id} has no contribution in round {self.round}")

    def union(self) -> FrozenSet[str]:
        return frozenset().union(*(b for _, b in self.contributions))


def marginal_distinct_count(pool: RoundPool, ego: str, attempt2_bins: Iterable[str]) -> int:
    return len(set(attempt2_bins) - pool.before(ego))


def marginal_distinct_series(
    pool: RoundPool, attempt2_bins: Mapping[str, Iterable[str]]
) -> Dict[str, int]:
    """Marginal distinct count of every ego in `attempt2_bins`, single pass over the pool."""
    out = {}
    seen: Set[str] = set()
    for author, bins in pool.contributions:
        if author in attempt2_bins:
            out[author] = len(set(attempt2_bins[author]) - seen)
        seen |= bins
    missing = set(attempt2_bins) - set(out)
    if missing:
        raise NotFound(f"{sorted(missing)} have no contribution in round {pool.round}")
    return out


def nonredundant_count(all_egos_bins: Mapping[str, Iterable[str]], ego: str) -> int:
    if ego not in all_egos_bins:
        raise NotFound(f"unknown ego {ego}")
    others: Set[str] = set()
    for other, bins in all_egos_bins.items():
        if other != ego:
            others |= set(bins)
    return len(set(all_egos_bins[ego]) - others)


def collective_distinct_count(all_egos_bins: Mapping[str, Iterable[str]]) -> int:
    return len(set().union(*(set(b) for b in all_egos_bins.values())))


def bin_text_ideas(records: Sequence[IdeaRecord], vocabulary: Optional[FrozenSet[str]] = None) -> List[IdeaRecord]:
    """Assign bins by normal form. The compound-merge vocabulary defaults to the stems of the corpus itself."""
    for r in records:
        if r.text is None:
            raise InvalidInput(f"idea {r.idea_id} has no text to bin")
    if vocabulary is None:
        vocabulary = stemmed_vocabulary([r.text for r in records])
    out = []
    for r in records:
        form = normal_form(r.text, vocabulary)
        out.append(replace(r, bin_id=" ".join(form) if form else DEGENERATE_BIN))
    return out
