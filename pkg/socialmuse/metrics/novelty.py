"""Idea-level novelty scoring.

`ProxyNoveltyScorer` is a stand-in for a proper semantic-distance scorer: it measures how far an
idea's mean word vector sits from the round's prompt word. Its absolute values are only
comparable with each other.
"""
import math
from typing import Iterable, Mapping, Protocol

from socialmuse.data.records import IdeaRecord
from socialmuse.semantics.embeddings import EmbeddingTable, cosine_distance
from socialmuse.utils.errors import MissingVocabulary


class NoveltyScorer(Protocol):
    def __call__(self, idea: IdeaRecord) -> float:
        ...


class ProxyNoveltyScorer:
    def __init__(self, table: EmbeddingTable, prompt_tokens: Mapping[int, str]):
        self.table = table
        self.prompt_tokens = dict(prompt_tokens)

    def __call__(self, idea: IdeaRecord) -> float:
        """NaN when the idea or the prompt has no vector."""
        prompt = self.prompt_tokens.get(idea.round)
        if prompt is None or not idea.tokens:
            return math.nan
        try:
            return cosine_distance(self.table, idea.tokens, [prompt])
        except MissingVocabulary:
            return math.nan


def best_novelty_score(scorer: NoveltyScorer, ego_round_ideas: Iterable[IdeaRecord]) -> float:
    scores = [s for s in (scorer(i) for i in ego_round_ideas) if not math.isnan(s)]
    return max(scores) if scores else 0.0
