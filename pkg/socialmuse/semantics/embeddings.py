"""Word-embedding tables and document distances.

Three distance methods are supported, named after the table they read:

- ``cosine-A``: 1 - cosine similarity of the mean token vectors from table A
- ``wmd-A``: word mover's distance over table A (uniform token mass, Euclidean ground cost)
- ``cosine-B``: as ``cosine-A`` but on table B

Out-of-vocabulary tokens are skipped; a document with no covered token raises MissingVocabulary.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Mapping, Sequence, Tuple, Union

import numpy as np
import ot

from socialmuse.utils.errors import InvalidInput, MissingVocabulary

DISTANCE_METHODS = ("cosine-A", "wmd-A", "cosine-B")


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    name: str
    dim: int
    tokens: Tuple[str, ...]
    matrix: np.ndarray
    _index: Mapping[str, int] = field(default_factory=dict, repr=False)

    @classmethod
    def from_vectors(cls, name: str, vectors: Mapping[str, Sequence[float]]) -> "EmbeddingTable":
        tokens = tuple(vectors)
        if len({t.lower() for t in tokens}) != len(tokens):
            raise InvalidInput(f"table {name} has duplicate tokens after lowercasing")
        matrix = np.asarray([vectors[t] for t in tokens], dtype=np.float64)
        if matrix.ndim != 2:
            raise InvalidInput(f"table {name} has vectors of differing length")
        tokens = tuple(t.lower() for t in tokens)
        return cls(name=name, dim=matrix.shape[1], tokens=tokens, matrix=matrix, _index={t: i for i, t in enumerate(tokens)})

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def vector(self, token: str) -> np.ndarray:
        return self.matrix[self._index[token]]

    def lookup(self, doc: Sequence[str]) -> np.ndarray:
        rows = [self._index[t] for t in doc if t in self._index]
        if not rows:
            raise MissingVocabulary(f"no token of the document is in table {self.name}")
        return self.matrix[rows]


def load_embeddings(path: Union[str, Path], name: str) -> EmbeddingTable:
    """Read `token v1 v2 ... vdim` lines."""
    vectors: Dict[str, list] = {}
    with open(path, "r") as f:
        for line in f:
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2:
                continue
            vectors[parts[0]] = [float(v) for v in parts[1:]]
    return EmbeddingTable.from_vectors(name, vectors)


def write_embeddings(table: EmbeddingTable, path: Union[str, Path]) -> None:
    with open(path, "w") as f:
        for token, row in zip(table.tokens, table.matrix):
            f.write(token + " " + " ".join(repr(float(v)) for v in row) + "\n")


def cosine_distance(table: EmbeddingTable, doc1: Sequence[str], doc2: Sequence[str]) -> float:
    u = table.lookup(doc1).mean(axis=0)
    v = table.lookup(doc2).mean(axis=0)
    denom = np.linalg.norm(u) * np.linalg.norm(v)
    if denom == 0:
        return 1.0
    return float(max(0.0, 1.0 - np.dot(u, v) / denom))


def word_movers_distance(table: EmbeddingTable, doc1: Sequence[str], doc2: Sequence[str]) -> float:
    tokens1 = [t for t in doc1 if t in table]
    tokens2 = [t for t in doc2 if t in table]
    if not tokens1 or not tokens2:
        raise MissingVocabulary(f"no token of the document is in table {table.name}")
    vocab1, counts1 = np.unique(tokens1, return_counts=True)
    vocab2, counts2 = np.unique(tokens2, return_counts=True)
    a = counts1 / counts1.sum()
    b = counts2 / counts2.sum()
    M = ot.dist(table.lookup(vocab1), table.lookup(vocab2), metric="euclidean")
    return float(max(0.0, ot.emd2(a, b, M)))


def doc_distance(method: str, tables: Mapping[str, EmbeddingTable], doc1: Sequence[str], doc2: Sequence[str]) -> float:
    kind, _, table_name = method.partition("-")
    if method not in DISTANCE_METHODS:
        raise InvalidInput(f"unknown distance method {method!r}, expected one of {DISTANCE_METHODS}")
    table = tables[table_name]
    if kind == "wmd":
        return word_movers_distance(table, doc1, doc2)
    return cosine_distance(table, doc1, doc2)
