"""Turning a ranking of similar users into a predicted rating.

The ranked candidates' training ratings for the target item are averaged
with linearly decaying weights (1 - rank/|R|), normalized by
(|R| + 1)/2 so a constant rating is reproduced exactly. Predictions are
rounded to the nearest integer, halves up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .dataset import RatingMatrix
from .errors import EmptyRankingError
from .ranking import RankingList, rank
from .weighting import build_profiles


class Fallback(Enum):
    """Which path produced a prediction value."""

    NONE = "none"
    GLOBAL_MEAN = "global_mean"
    ITEM_UNRATED = "item_unrated"


@dataclass(frozen=True)
class PredictionRecord:
    user_id: int
    item_id: int
    raw_prediction: float
    rounded_prediction: int
    candidate_count: int
    fallback_used: Fallback


def round_half_up(value: float) -> int:
    """Round to the nearest integer with halves going up (3.5 -> 4)."""
    return math.floor(value + 0.5)


def aggregate(ranking: RankingList, ratings_for_item: dict) -> float:
    """Rank-decayed weighted average of the ranked users' ratings.

    Each user at rank r contributes weight 1 - r/|R|; the weights sum to
    (|R| + 1)/2, which is divided back out so the result stays within the
    span of the contributing ratings. Every ranked user must have a rating
    in ratings_for_item.
    """
    size = len(ranking)
    if size == 0:
        raise EmptyRankingError("cannot aggregate an empty ranking")
    total = 0.0
    for entry in ranking:
        total += (1.0 - entry.rank / size) * ratings_for_item[entry.user_id]
    normalizer = (size + 1) / 2
    return total / normalizer


def predict(train: RatingMatrix, active_user: int, target_item: int,
            backend=None, *, keep_zero_similarity=False) -> PredictionRecord:
    """Predict one rating: build profiles, rank candidates, aggregate.

    Falls back to the rounded global training mean when the target item has
    no training raters (ITEM_UNRATED) or when no candidate scores above
    zero (GLOBAL_MEAN); the record says which path produced the value.
    Raises ColdStartError if the active user has no training ratings.
    """
    profiles, query = build_profiles(train, active_user, target_item)
    if not profiles:
        raw = train.global_mean()
        return PredictionRecord(
            user_id=active_user,
            item_id=target_item,
            raw_prediction=raw,
            rounded_prediction=round_half_up(raw),
            candidate_count=0,
            fallback_used=Fallback.ITEM_UNRATED,
        )
    ranking = rank(query, profiles, backend,
                   keep_zero_similarity=keep_zero_similarity)
    if len(ranking) == 0:
        raw = train.global_mean()
        return PredictionRecord(
            user_id=active_user,
            item_id=target_item,
            raw_prediction=raw,
            rounded_prediction=round_half_up(raw),
            candidate_count=0,
            fallback_used=Fallback.GLOBAL_MEAN,
        )
    raw = aggregate(ranking, train.raters_of(target_item))
    return PredictionRecord(
        user_id=active_user,
        item_id=target_item,
        raw_prediction=raw,
        rounded_prediction=round_half_up(raw),
        candidate_count=len(ranking),
        fallback_used=Fallback.NONE,
    )
