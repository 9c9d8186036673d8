"""Indexed view over one (trial, condition) network, shared by the dataset builder, the
recommender and the simulator."""
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from socialmuse.data.records import ALTER, EGO, FollowEdge, IdeaRecord, Participant, TrialLog
from socialmuse.metrics.rarity import RoundPool, bin_text_ideas
from socialmuse.network.bipartite import BipartiteRound
from socialmuse.semantics.taxonomy import Taxonomy
from socialmuse.semantics.text import extract_concepts
from socialmuse.utils.errors import InvalidInput, NotFound

Pair = Tuple[str, str]


@dataclass
class TrialState:
    trial: str
    condition: str
    alter_ids: Tuple[str, ...]
    ego_ids: Tuple[str, ...]
    """arrival order"""
    genders: Dict[str, str]
    k: int = 2
    _ideas: Dict[Tuple[str, int, int], List[IdeaRecord]] = field(default_factory=lambda: defaultdict(list), repr=False)
    _choices: Dict[int, Dict[str, Pair]] = field(default_factory=lambda: defaultdict(dict), repr=False)
    _idea_rounds: Set[int] = field(default_factory=set, repr=False)

    @classmethod
    def from_log(cls, log: TrialLog, k: int = 2) -> "TrialState":
        alters = log.alters
        egos = log.egos
        if not alters:
            raise InvalidInput(f"trial {log.trial}/{log.condition} has no alters")
        state = cls(
            trial=log.trial,
            condition=log.condition,
            alter_ids=tuple(a.participant_id for a in alters),
            ego_ids=tuple(e.participant_id for e in egos),
            genders={p.participant_id: p.gender for p in log.participants},
            k=k,
        )
        state.add_ideas(log.ideas)
        by_round: Dict[int, Dict[str, List[str]]] = defaultdict(lambda: defaultdict(list))
        for edge in log.edges:
            by_round[edge.round][edge.ego_id].append(edge.alter_id)
        for t, choices in by_round.items():
            for ego, alters_followed in choices.items():
                state.set_choice(t, ego, alters_followed)
        return state

    def alter_index(self, alter: str) -> int:
        try:
            return self.alter_ids.index(alter)
        except ValueError:
            raise NotFound(f"unknown alter {alter}") from None

    def canonical_pair(self, alters: Iterable[str]) -> Pair:
        pair = tuple(sorted(set(alters), key=self.alter_index))
        if len(pair) != self.k:
            raise InvalidInput(f"expected {self.k} distinct alters, got {pair}")
        return pair

    def add_ideas(self, ideas: Iterable[IdeaRecord]) -> None:
        for idea in ideas:
            self._ideas[(idea.author_id, idea.round, idea.attempt)].append(idea)
            self._idea_rounds.add(idea.round)

    def set_choice(self, round: int, ego: str, alters: Iterable[str]) -> None:
        if ego not in self.ego_ids:
            raise NotFound(f"unknown ego {ego}")
        self._choices[round][ego] = self.canonical_pair(alters)

    def choice(self, round: int, ego: str) -> Optional[Pair]:
        return self._choices.get(round, {}).get(ego)

    def rounds_with_choices(self) -> List[int]:
        return sorted(t for t, c in self._choices.items() if c)

    def rounds_with_ideas(self) -> List[int]:
        return sorted(self._idea_rounds)

    def ideas_of(self, author: str, round: int, attempts: Sequence[int] = (1, 2)) -> List[IdeaRecord]:
        return [i for a in attempts for i in self._ideas.get((author, round, a), [])]

    def bins_of(self, author: str, round: int, attempts: Sequence[int] = (1, 2)) -> FrozenSet[str]:
        return frozenset(i.bin_id for i in self.ideas_of(author, round, attempts) if i.bin_id is not None)

    def concepts_of(self, author: str, round: int, attempts: Sequence[int] = (1, 2)) -> List[str]:
        return [c for i in self.ideas_of(author, round, attempts) for c in i.concept_ids]

    def tokens_of(self, author: str, round: int, attempts: Sequence[int] = (1, 2)) -> List[str]:
        return [t for i in self.ideas_of(author, round, attempts) for t in i.tokens]

    def has_completed(self, ego: str, round: int) -> bool:
        """The ego followed alters during `round` and the round's ideation ran. An ego that
        submitted no ideas still completed the round, with empty idea sets."""
        return self.choice(round, ego) is not None and round in self._idea_rounds

    def egos_before(self, ego: str) -> Tuple[str, ...]:
        if ego not in self.ego_ids:
            raise NotFound(f"unknown ego {ego}")
        return self.ego_ids[: self.ego_ids.index(ego)]

    def round_snapshot(self, round: int) -> BipartiteRound:
        choices = self._choices.get(round, {})
        return BipartiteRound.from_choices(round, self.alter_ids, choices, self.ego_ids, self.k)

    def hypothetical_round(self, round: int, ego: str, pair: Iterable[str]) -> BipartiteRound:
        """Prior egos' actual round choices plus `ego` following `pair`; later egos are not there yet."""
        prior = self.egos_before(ego)
        choices = {e: self._choices[round][e] for e in prior if e in self._choices.get(round, {})}
        choices[ego] = self.canonical_pair(pair)
        order = tuple(e for e in prior if e in choices) + (ego,)
        return BipartiteRound.from_choices(round, self.alter_ids, choices, order, self.k)

    def round_pool(self, round: int, include_alters: bool = False) -> RoundPool:
        ideas = [i for (author, t, _), ideas in self._ideas.items() if t == round for i in ideas]
        return RoundPool.from_ideas(ideas, round, self.ego_ids, self.alter_ids, include_alters)

    def to_log(self) -> TrialLog:
        """Participants and edges of the state; ideas in insertion order."""
        participants = [
            Participant(a, self.trial, self.condition, ALTER, self.genders.get(a, ""), alter_index=i)
            for i, a in enumerate(self.alter_ids)
        ] + [
            Participant(e, self.trial, self.condition, EGO, self.genders.get(e, ""), arrival_rank=r)
            for r, e in enumerate(self.ego_ids)
        ]
        rank = {e: r for r, e in enumerate(self.ego_ids)}
        edges = [
            FollowEdge(self.trial, self.condition, t, e, a, rank[e])
            for t in self.rounds_with_choices()
            for e in sorted(self._choices[t], key=rank.get)
            for a in self._choices[t][e]
        ]
        ideas = [i for ideas in self._ideas.values() for i in ideas]
        return TrialLog(self.trial, self.condition, participants, ideas, edges)


def prepare_logs(logs: Sequence[TrialLog], taxonomy: Optional[Taxonomy] = None) -> List[TrialLog]:
    """Fill in what text-only idea logs lack: bins by normal form (one vocabulary per round across
    all logs, since every network answered the same prompt) and concepts via the lexicon."""
    unbinned = [i for log in logs for i in log.ideas if i.bin_id is None]
    binned = {}
    for t in sorted({i.round for i in unbinned}):
        binned.update((i.idea_id, i) for i in bin_text_ideas([i for i in unbinned if i.round == t]))
    out = []
    for log in logs:
        ideas = []
        for idea in log.ideas:
            idea = binned.get(idea.idea_id, idea)
            if not idea.concept_ids and idea.text and taxonomy is not None:
                idea = replace(idea, concept_ids=extract_concepts(idea.text, taxonomy))
            ideas.append(idea)
        out.append(replace(log, ideas=ideas))
    return out
