"""Sparse similarity weights relative to an active user.

For a fixed active user, each candidate user becomes a sparse vector of
rating-agreement weights over the items both rated, and the active user
becomes a sparse query of IDF-style rarity weights over their own rated
items. All float accumulation over these vectors happens in ascending
item-id order so results are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dataset import RatingMatrix
from .errors import ColdStartError


@dataclass(slots=True)
class WeightedProfile:
    """One candidate user's agreement weights, keyed by item id.

    A weight exists only for items rated by both the candidate and the
    active user; each weight lies in [0, 1] (1 = identical ratings,
    0 = ratings at opposite ends of the scale).
    """

    user_id: int
    weights: dict


@dataclass
class QueryVector:
    """The active user's rarity weights, keyed by item id.

    weights[i] = log2(num_users / corater_counts[i]) for items the active
    user rated that at least one other user also rated. Items with no
    co-raters are absent rather than stored as zero, as is the co-rater
    count itself.
    """

    active_user: int
    weights: dict
    corater_counts: dict = field(default_factory=dict)
    _norm: float = field(default=-1.0, repr=False, compare=False)

    def norm(self) -> float:
        """Euclidean norm over all query weights (cached)."""
        if self._norm < 0.0:
            total = 0.0
            weights = self.weights
            for item in sorted(weights):
                w = weights[item]
                total += w * w
            self._norm = math.sqrt(total)
        return self._norm


def document_weight(rating_a: int, rating_b: int, rating_range=(1, 5)) -> float:
    """Linear agreement between two ratings, scaled to [0, 1].

    Returns 1 - |rating_a - rating_b| / (max - min): 1 iff the ratings are
    equal, 0 iff they sit at opposite extremes of the range.
    """
    rating_min, rating_max = rating_range
    if rating_max <= rating_min:
        raise ValueError(f"rating range must satisfy min < max, got {rating_range!r}")
    if not rating_min <= rating_a <= rating_max:
        raise ValueError(f"rating {rating_a} outside [{rating_min}, {rating_max}]")
    if not rating_min <= rating_b <= rating_max:
        raise ValueError(f"rating {rating_b} outside [{rating_min}, {rating_max}]")
    return 1.0 - abs(rating_a - rating_b) / (rating_max - rating_min)


def build_profiles(train: RatingMatrix, active_user: int, target_item: int):
    """Build candidate profiles and the query for one (user, item) pair.

    Candidates are all users other than the active one holding a training
    rating for the target item; their profiles hold agreement weights for
    every item co-rated with the active user. Empty profiles are kept so
    downstream ranking can decide how to treat zero-similarity candidates.

    The query weight for item i is log2(num_users / n_co) where n_co counts
    the users other than the active one who also rated i; items with
    n_co = 0 carry no weight.

    Returns (profiles sorted by user id, QueryVector).
    Raises ColdStartError if the active user has no training ratings.
    """
    active_items = train.items_rated_by(active_user)
    if not active_items:
        raise ColdStartError(
            f"user {active_user} has no training ratings"
        )
    active_pairs = train.user_item_pairs(active_user)
    num_users = train.num_users
    denom = train.rating_max - train.rating_min

    corater_counts = {}
    query_weights = {}
    for item, _rating in active_pairs:
        # the active user is among the raters, so co-raters = raters - 1
        count = len(train.raters_of(item)) - 1
        if count >= 1:
            corater_counts[item] = count
            query_weights[item] = math.log2(num_users / count)

    profiles = []
    for candidate in sorted(train.raters_of(target_item)):
        if candidate == active_user:
            continue
        candidate_items = train.items_rated_by(candidate)
        # walk the shorter side (both are sorted by item id, so weights are
        # inserted in ascending order either way); mirrors document_weight
        if len(candidate_items) <= len(active_items):
            pairs, other = train.user_item_pairs(candidate), active_items
        else:
            pairs, other = active_pairs, candidate_items
        weights = {}
        for item, rating in pairs:
            other_rating = other.get(item)
            if other_rating is not None:
                weights[item] = 1.0 - abs(rating - other_rating) / denom
        profiles.append(WeightedProfile(user_id=candidate, weights=weights))

    query = QueryVector(
        active_user=active_user,
        weights=query_weights,
        corater_counts=corater_counts,
    )
    return profiles, query
