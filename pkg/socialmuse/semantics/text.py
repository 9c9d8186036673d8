"""Text normalization for concept extraction and idea binning."""
import re
from functools import lru_cache
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from nltk.stem import PorterStemmer

from socialmuse.semantics.taxonomy import ConceptId, Taxonomy, most_specific_concept

ASSETS = Path(__file__).parent / "assets"

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_stemmer = PorterStemmer()


@lru_cache(maxsize=None)
def stopwords() -> FrozenSet[str]:
    with open(ASSETS / "stopwords.txt", "r") as f:
        return frozenset(line.strip() for line in f if line.strip())


@lru_cache(maxsize=None)
def spelling_map() -> Dict[str, str]:
    mapping = {}
    with open(ASSETS / "spelling.txt", "r") as f:
        for line in f:
            if "\t" in line:
                wrong, right = line.rstrip("\n").split("\t")
                mapping[wrong] = right
    return mapping


def tokenize(text: str) -> List[str]:
    """Lowercase, strip punctuation and split on anything that is not a letter or digit."""
    return _TOKEN_RE.findall(text.lower())


def content_tokens(text: str) -> List[str]:
    """Tokens with stop-words removed and spelling normalized."""
    spelling = spelling_map()
    stop = stopwords()
    return [spelling.get(t, t) for t in tokenize(text) if t not in stop]


def stem(token: str) -> str:
    return _stemmer.stem(token)


def extract_concepts(text: str, taxonomy: Taxonomy) -> Tuple[ConceptId, ...]:
    """Map an idea's text to taxonomy concepts; unmapped tokens are dropped."""
    concepts = []
    for token in content_tokens(text):
        senses = taxonomy.concepts_for_token(token) or taxonomy.concepts_for_token(stem(token))
        concept = most_specific_concept(taxonomy, senses)
        if concept is not None:
            concepts.append(concept)
    return tuple(concepts)


def normal_form(text: str, vocabulary: Optional[FrozenSet[str]] = None) -> Tuple[str, ...]:
    """Sorted stemmed content tokens, with adjacent tokens merged when their concatenation is a
    known single word ("paper weight" -> "paperweight")."""
    tokens = [stem(t) for t in content_tokens(text)]
    if vocabulary:
        merged: List[str] = []
        i = 0
        while i < len(tokens):
            if i + 1 < len(tokens) and stem(tokens[i] + tokens[i + 1]) in vocabulary:
                merged.append(stem(tokens[i] + tokens[i + 1]))
                i += 2
            else:
                merged.append(tokens[i])
                i += 1
        tokens = merged
    return tuple(sorted(tokens))


def stemmed_vocabulary(texts: Sequence[str]) -> FrozenSet[str]:
    return frozenset(stem(t) for text in texts for t in content_tokens(text))
