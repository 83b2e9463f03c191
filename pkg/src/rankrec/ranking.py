"""Ranking candidate users against the active-user query.

The built-in backend scores sparse vectors by cosine similarity. Backends
are looked up by name so alternative scorers (spectral, probabilistic) can
be registered without touching the prediction pipeline; they only ever see
the weighted sparse vectors, never raw ratings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import UnknownBackendError
from .weighting import QueryVector, WeightedProfile


class RankingEntry(NamedTuple):
    user_id: int
    score: float
    rank: int


@dataclass(frozen=True)
class RankingList:
    """Candidates ordered most-similar first, ranks 0..len-1."""

    entries: tuple
    backend_name: str

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def cosine_score(query: QueryVector, doc: WeightedProfile) -> float:
    """Cosine similarity between the query and one candidate profile.

    Computed over the shared item dimensions, normalized by the full norms
    of both vectors. Returns 0.0 when either vector is empty or has zero
    norm. With non-negative weights the result lies in [0, 1]; it is capped
    at 1.0 to absorb last-bit float overshoot on collinear vectors.
    """
    doc_weights = doc.weights
    query_weights = query.weights
    if not doc_weights or not query_weights:
        return 0.0
    dot = 0.0
    doc_norm_sq = 0.0
    for item in sorted(doc_weights):
        w = doc_weights[item]
        q = query_weights.get(item)
        if q is not None:
            dot += q * w
        doc_norm_sq += w * w
    if dot == 0.0:
        return 0.0
    query_norm = query.norm()
    if query_norm == 0.0 or doc_norm_sq == 0.0:
        return 0.0
    return min(1.0, dot / (query_norm * math.sqrt(doc_norm_sq)))


class VectorSpaceBackend:
    """Scores candidates by cosine similarity in the shared item space."""

    name = "vsm"

    def score(self, query: QueryVector, doc: WeightedProfile) -> float:
        return cosine_score(query, doc)


BACKENDS = {VectorSpaceBackend.name: VectorSpaceBackend}


def register_backend(backend_class) -> None:
    """Register a backend class under its ``name`` attribute."""
    BACKENDS[backend_class.name] = backend_class


def get_backend(name: str):
    """Instantiate a registered backend, or raise UnknownBackendError."""
    try:
        backend_class = BACKENDS[name]
    except KeyError:
        raise UnknownBackendError(name, sorted(BACKENDS)) from None
    return backend_class()


def rank(query: QueryVector, docs, backend=None, *,
         keep_zero_similarity=False) -> RankingList:
    """Order candidate profiles by backend score, most similar first.

    Candidates scoring zero carry no evidence and are dropped; with
    keep_zero_similarity they are instead appended after the scored ones in
    ascending user-id order. Ties are broken by ascending user id, so the
    result is deterministic for a given input set regardless of docs order.
    """
    if backend is None:
        backend = VectorSpaceBackend()
    seen = set()
    scored = []
    zeros = []
    for doc in docs:
        if doc.user_id in seen:
            raise ValueError(f"duplicate candidate user id {doc.user_id}")
        seen.add(doc.user_id)
        score = backend.score(query, doc)
        if score > 0.0:
            scored.append((-score, doc.user_id))
        elif keep_zero_similarity:
            zeros.append((doc.user_id, score))
    scored.sort()
    entries = [
        RankingEntry(user_id=user_id, score=-neg_score, rank=r)
        for r, (neg_score, user_id) in enumerate(scored)
    ]
    if zeros:
        zeros.sort()
        offset = len(entries)
        entries.extend(
            RankingEntry(user_id=user_id, score=score, rank=offset + r)
            for r, (user_id, score) in enumerate(zeros)
        )
    return RankingList(entries=tuple(entries), backend_name=backend.name)
