from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from socialmuse.semantics.text import content_tokens

EGO = "ego"
ALTER = "alter"
CONTROL = "control"
TREATMENT = "treatment"


@dataclass(frozen=True)
class IdeaRecord:
    idea_id: str
    author_id: str
    trial: str
    condition: str
    round: int
    attempt: int
    bin_id: Optional[str] = None
    concept_ids: Tuple[str, ...] = ()
    text: Optional[str] = None

    @property
    def tokens(self) -> Tuple[str, ...]:
        return tuple(content_tokens(self.text)) if self.text else ()


@dataclass(frozen=True)
class Participant:
    participant_id: str
    trial: str
    condition: str
    role: str
    gender: str
    arrival_rank: Optional[int] = None
    """egos only: position in the asynchronous arrival order"""
    alter_index: Optional[int] = None
    """alters only: display order, also the tie-break order for alter pairs"""


@dataclass(frozen=True)
class FollowEdge:
    trial: str
    condition: str
    round: int
    ego_id: str
    alter_id: str
    arrival_rank: int


@dataclass(frozen=True)
class Rating:
    trial: str
    condition: str
    round: int
    ego_id: str
    alter_id: str
    idea_id: str
    rating: float


@dataclass
class TrialLog:
    """Everything one (trial, condition) network produced."""

    trial: str
    condition: str
    participants: List[Participant] = field(default_factory=list)
    ideas: List[IdeaRecord] = field(default_factory=list)
    edges: List[FollowEdge] = field(default_factory=list)
    ratings: List[Rating] = field(default_factory=list)
    recommendations: List[dict] = field(default_factory=list)

    @property
    def egos(self) -> List[Participant]:
        return sorted((p for p in self.participants if p.role == EGO), key=lambda p: p.arrival_rank)

    @property
    def alters(self) -> List[Participant]:
        return sorted((p for p in self.participants if p.role == ALTER), key=lambda p: p.alter_index)
