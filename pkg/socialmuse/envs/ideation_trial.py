"""One simulated trial: 6 alters with pre-recorded ideas, 18 egos arriving one at a time, each round
an independent attempt, an inspired attempt and a rewiring choice.

Random draws come from streams keyed by (trial, participant, round, purpose) and never by
condition, so a treatment network whose egos ignore every recommendation replays its control
twin exactly.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from socialmuse.data.records import CONTROL, TREATMENT, IdeaRecord, Rating, TrialLog
from socialmuse.data.trial import Pair, TrialState
from socialmuse.envs.universe import IdeaUniverse, RoundCatalog, UniverseConfig
from socialmuse.features.context import SemanticContext
from socialmuse.model.gbt import TreeEnsemble
from socialmuse.network.bipartite import initial_topology
from socialmuse.recommender.engine import Recommendation, recommend
from socialmuse.utils.errors import InvalidConfig
from socialmuse.utils.rng import stream


@dataclass
class AgentProfileConfig:
    fluency_min: float = 2.0
    """lower bound of an ego's mean idea count per attempt"""
    fluency_max: float = 6.0
    """upper bound of an ego's mean idea count per attempt"""
    temperature_min: float = 0.8
    """lower bound of the exploration temperature; higher temperature flattens bin popularity"""
    temperature_max: float = 2.0
    """upper bound of the exploration temperature"""
    adherence: float = 0.8
    """probability that a treatment ego takes the recommended pair"""
    female_share: float = 0.5
    """probability that a participant is female"""
    rating_noise: float = 0.75
    """std of the noise on every 1-5 rating"""
    alter_ideas: int = 5
    """ideas an alter contributes per round"""
    alter_temperature_min: float = 0.8
    """lower bound of the alters' exploration temperature"""
    alter_temperature_max: float = 3.0
    """upper bound of the alters' exploration temperature"""

    def validate(self) -> None:
        if not 0.0 <= self.adherence <= 1.0:
            raise InvalidConfig(f"adherence must lie in [0, 1], got {self.adherence}")
        if self.fluency_min < 0 or self.fluency_max < self.fluency_min:
            raise InvalidConfig("fluency range must be non-negative and ordered")
        if self.temperature_min <= 0 or self.temperature_max < self.temperature_min:
            raise InvalidConfig("temperature range must be positive and ordered")
        if self.alter_temperature_min <= 0 or self.alter_temperature_max < self.alter_temperature_min:
            raise InvalidConfig("alter temperature range must be positive and ordered")
        if not 0.0 <= self.female_share <= 1.0 or self.rating_noise < 0 or self.alter_ideas < 1:
            raise InvalidConfig("female_share must lie in [0, 1], rating_noise >= 0 and alter_ideas >= 1")


@dataclass
class TrialConfig:
    n_alters: int = 6
    """number of alters"""
    n_egos: int = 18
    """egos per condition"""
    rounds: int = 5
    """ideation rounds; choices after the last round give one more topology"""
    k: int = 2
    """alters followed per ego and round"""
    seed: int = 0
    """seed of all random streams"""
    include_alters_in_pool: bool = False
    """if toggled, alters' ideas count towards the marginal pool"""
    universe: UniverseConfig = field(default_factory=UniverseConfig)
    """idea-universe parameters"""
    agents: AgentProfileConfig = field(default_factory=AgentProfileConfig)
    """agent-profile distributions"""

    def validate(self) -> None:
        if self.k != 2:
            raise InvalidConfig("only k=2 is supported")
        if self.n_alters < 3:
            raise InvalidConfig("need at least 3 alters")
        if self.n_egos < 1 or self.rounds < 0:
            raise InvalidConfig("n_egos must be positive and rounds non-negative")
        if self.rounds > self.universe.n_prompts:
            raise InvalidConfig(f"{self.rounds} rounds but the universe has {self.universe.n_prompts} prompts")
        self.universe.validate()
        self.agents.validate()


@dataclass(frozen=True)
class Participants:
    alter_ids: Tuple[str, ...]
    ego_ids: Tuple[str, ...]
    """arrival order"""
    initial_choices: Dict[str, Pair]
    genders: Dict[str, str]
    fluency: Dict[str, float]
    temperature: Dict[str, float]


def draw_participants(config: TrialConfig, trial: int) -> Participants:
    rng = stream(config.seed, trial, "participants")
    alters = tuple(f"a{i}" for i in range(config.n_alters))
    egos = [f"e{j:02d}" for j in range(config.n_egos)]
    arrival = tuple(egos[j] for j in rng.permutation(config.n_egos))
    positions = [egos[j] for j in rng.permutation(config.n_egos)]
    a = config.agents
    everyone = list(alters) + egos
    genders = {p: ("f" if rng.random() < a.female_share else "m") for p in everyone}
    fluency = {e: float(rng.uniform(a.fluency_min, a.fluency_max)) for e in egos}
    temperature = {e: float(rng.uniform(a.temperature_min, a.temperature_max)) for e in egos}
    temperature.update({x: float(rng.uniform(a.alter_temperature_min, a.alter_temperature_max)) for x in alters})
    return Participants(alters, arrival, initial_topology(alters, positions, config.k), genders, fluency, temperature)


def _tempered(popularity: np.ndarray, temperature: float) -> np.ndarray:
    w = popularity ** (1.0 / temperature)
    return w / w.sum()


def _sample_bins(rng: np.random.Generator, pool: np.ndarray, weights: np.ndarray, count: int) -> List[int]:
    count = min(count, len(pool))
    if count <= 0:
        return []
    p = weights[pool] / weights[pool].sum()
    return sorted(int(b) for b in rng.choice(pool, count, replace=False, p=p))


class IdeationTrial:
    def __init__(
        self,
        config: TrialConfig,
        universe: IdeaUniverse,
        trial: int,
        condition: str = CONTROL,
        ensemble: Optional[TreeEnsemble] = None,
        semantic: Optional[SemanticContext] = None,
    ):
        config.validate()
        if condition not in (CONTROL, TREATMENT):
            raise InvalidConfig(f"unknown condition {condition!r}")
        if condition == TREATMENT and ensemble is None:
            raise InvalidConfig("the treatment condition needs a trained model")
        if config.rounds > len(universe.catalogs):
            raise InvalidConfig(f"{config.rounds} rounds but the universe has {len(universe.catalogs)} prompts")
        self.config = config
        self.universe = universe
        self.trial = trial
        self.trial_id = f"t{trial:03d}"
        self.condition = condition
        self.ensemble = ensemble
        self.semantic = semantic if semantic is not None else universe.semantic_context()
        self.participants = draw_participants(config, trial)
        self.state = TrialState(
            trial=self.trial_id,
            condition=condition,
            alter_ids=self.participants.alter_ids,
            ego_ids=self.participants.ego_ids,
            genders=dict(self.participants.genders),
            k=config.k,
        )
        self.ratings: List[Rating] = []
        self.recommendations: List[Recommendation] = []

    def _stream(self, who: str, round: int, purpose: str) -> np.random.Generator:
        return stream(self.config.seed, self.trial, who, round, purpose)

    def _idea(self, author: str, round: int, attempt: int, n: int, b: int, catalog: RoundCatalog) -> IdeaRecord:
        return IdeaRecord(
            idea_id=f"{self.trial_id}-{self.condition}-{author}-r{round}-a{attempt}-{n}",
            author_id=author,
            trial=self.trial_id,
            condition=self.condition,
            round=round,
            attempt=attempt,
            bin_id=catalog.bin_ids[b],
            concept_ids=catalog.concepts[b],
            text=self.universe.bin_text(round, b),
        )

    def _alter_round(self, round: int, catalog: RoundCatalog) -> Dict[str, List[int]]:
        bins = {}
        for alter in self.participants.alter_ids:
            rng = self._stream(alter, round, "ideas")
            weights = _tempered(catalog.popularity, self.participants.temperature[alter])
            chosen = _sample_bins(rng, np.arange(len(catalog.bin_ids)), weights, self.config.agents.alter_ideas)
            bins[alter] = chosen
            self.state.add_ideas(self._idea(alter, round, 1, n, b, catalog) for n, b in enumerate(chosen))
        return bins

    def _ego_round(self, ego: str, round: int, catalog: RoundCatalog, alter_bins: Dict[str, List[int]]) -> None:
        fluency = self.participants.fluency[ego]
        weights = _tempered(catalog.popularity, self.participants.temperature[ego])
        all_bins = np.arange(len(catalog.bin_ids))

        rng = self._stream(ego, round, "attempt1")
        first = _sample_bins(rng, all_bins, weights, int(rng.poisson(fluency)))

        followed = self.state.choice(round, ego)
        seen = sorted({b for a in followed for b in alter_bins[a]})
        reachable = {int(n) for b in seen for n in catalog.neighbors[b]}
        reachable -= set(seen)
        reachable -= set(first)
        rng = self._stream(ego, round, "attempt2")
        second = _sample_bins(rng, np.array(sorted(reachable), dtype=np.int64), weights, int(rng.poisson(fluency)))

        self.state.add_ideas(self._idea(ego, round, 1, n, b, catalog) for n, b in enumerate(first))
        self.state.add_ideas(self._idea(ego, round, 2, n, b, catalog) for n, b in enumerate(second))

    def _rate(self, ego: str, round: int, catalog: RoundCatalog, alter_bins: Dict[str, List[int]]) -> Dict[str, float]:
        """Each ego rates every alter idea; an alter's perceived quality is its mean rating."""
        rng = self._stream(ego, round, "ratings")
        rarity = catalog.rarity
        quality = {}
        for alter in self.participants.alter_ids:
            scores = []
            for n, b in enumerate(alter_bins[alter]):
                score = float(np.clip(np.rint(1.0 + 4.0 * rarity[b] + rng.normal(scale=self.config.agents.rating_noise)), 1, 5))
                scores.append(score)
                self.ratings.append(
                    Rating(self.trial_id, self.condition, round, ego, alter,
                           f"{self.trial_id}-{self.condition}-{alter}-r{round}-a1-{n}", score)
                )
            quality[alter] = float(np.mean(scores)) if scores else 0.0
        return quality

    def _rewire(self, ego: str, round: int, quality: Dict[str, float]) -> None:
        """Choose the alters to follow in `round + 1`."""
        u = self._stream(ego, round, "adherence").random()
        alters = self.participants.alter_ids
        by_quality = sorted(alters, key=lambda a: (-quality[a], alters.index(a)))
        choice = tuple(by_quality[: self.config.k])
        if self.condition == TREATMENT:
            rec = recommend(self.state, self.semantic, ego, round + 1, self.ensemble)
            self.recommendations.append(rec)
            if u < self.config.agents.adherence:
                choice = rec.chosen_pair
        self.state.set_choice(round + 1, ego, choice)

    def run(self) -> TrialLog:
        for ego, pair in self.participants.initial_choices.items():
            self.state.set_choice(1, ego, pair)
        for t in range(1, self.config.rounds + 1):
            catalog = self.universe.catalog(t)
            alter_bins = self._alter_round(t, catalog)
            for ego in self.participants.ego_ids:
                self._ego_round(ego, t, catalog, alter_bins)
                quality = self._rate(ego, t, catalog, alter_bins)
                self._rewire(ego, t, quality)
        log = self.state.to_log()
        log.ratings = list(self.ratings)
        log.recommendations = [r.to_record() for r in self.recommendations]
        return log


def run_trial(
    config: TrialConfig,
    universe: IdeaUniverse,
    trial: int,
    condition: str = CONTROL,
    ensemble: Optional[TreeEnsemble] = None,
    semantic: Optional[SemanticContext] = None,
) -> Tuple[TrialLog, TrialState]:
    sim = IdeationTrial(config, universe, trial, condition, ensemble, semantic)
    log = sim.run()
    return log, sim.state
