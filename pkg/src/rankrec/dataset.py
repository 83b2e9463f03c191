"""Loading MovieLens-format rating files into immutable sparse matrices.

Input format: one rating per line, four tab-separated integer fields
``user<TAB>item<TAB>rating<TAB>timestamp``. Timestamps are validated as
integers and discarded. An absent (user, item) entry means "not rated";
zero is never stored.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .errors import (
    DuplicateRatingError,
    ParseError,
    RatingRangeError,
    SplitOverlapError,
)

_EMPTY: dict = {}  # shared read-only default for absent users/items


class RatingMatrix:
    """Sparse items-by-users store of integer ratings.

    Immutable after construction; concurrent reads are safe. Accessors
    return internal containers for speed -- treat them as read-only.
    """

    __slots__ = (
        "num_users",
        "num_items",
        "rating_min",
        "rating_max",
        "_by_user",
        "_by_item",
        "_user_pairs",
        "_num_entries",
        "_rating_total",
    )

    def __init__(self, entries=(), num_users=None, num_items=None,
                 rating_range=(1, 5)):
        """Build the matrix from (user_id, item_id, rating) triples.

        Dimensions default to the maximum observed ids; pass num_users /
        num_items to fix them (e.g. so sibling splits share dimensions).
        """
        rating_min, rating_max = rating_range
        if rating_max <= rating_min:
            raise ValueError(
                f"rating range must satisfy min < max, got {rating_range!r}"
            )
        by_user: dict[int, dict[int, int]] = {}
        by_item: dict[int, dict[int, int]] = {}
        count = 0
        total = 0
        max_user = 0
        max_item = 0
        for user, item, rating in entries:
            if user < 1 or item < 1:
                raise ValueError(f"ids must be >= 1, got user={user} item={item}")
            if not rating_min <= rating <= rating_max:
                raise RatingRangeError(
                    f"rating {rating} for user {user}, item {item} outside "
                    f"[{rating_min}, {rating_max}]"
                )
            row = by_user.setdefault(user, {})
            if item in row:
                raise DuplicateRatingError(
                    f"duplicate rating for user {user}, item {item}"
                )
            row[item] = rating
            by_item.setdefault(item, {})[user] = rating
            count += 1
            total += rating
            if user > max_user:
                max_user = user
            if item > max_item:
                max_item = item

        if num_users is None:
            num_users = max_user
        elif max_user > num_users:
            raise ValueError(f"user id {max_user} exceeds num_users={num_users}")
        if num_items is None:
            num_items = max_item
        elif max_item > num_items:
            raise ValueError(f"item id {max_item} exceeds num_items={num_items}")

        self.num_users = num_users
        self.num_items = num_items
        self.rating_min = rating_min
        self.rating_max = rating_max
        self._by_user = by_user
        self._by_item = by_item
        # sorted (item, rating) pairs per user: gives the similarity code a
        # fixed ascending-item iteration order, which keeps float sums
        # reproducible across runs
        self._user_pairs = {u: sorted(d.items()) for u, d in by_user.items()}
        self._num_entries = count
        self._rating_total = total

    @property
    def num_entries(self) -> int:
        return self._num_entries

    def rating(self, user_id: int, item_id: int):
        """Return the stored rating, or None if the pair is unrated."""
        row = self._by_user.get(user_id)
        return None if row is None else row.get(item_id)

    def items_rated_by(self, user_id: int) -> dict:
        """Mapping item_id -> rating for one user ({} if none)."""
        return self._by_user.get(user_id, _EMPTY)

    def user_item_pairs(self, user_id: int) -> list:
        """(item_id, rating) pairs for one user, ascending by item id."""
        return self._user_pairs.get(user_id, [])

    def raters_of(self, item_id: int) -> dict:
        """Mapping user_id -> rating for one item ({} if unrated)."""
        return self._by_item.get(item_id, _EMPTY)

    def global_mean(self) -> float:
        """Mean of all stored ratings."""
        if self._num_entries == 0:
            raise ValueError("matrix has no ratings")
        return self._rating_total / self._num_entries

    def iter_entries(self):
        """Yield (user_id, item_id, rating) sorted by user then item."""
        for user in sorted(self._by_user):
            for item, rating in self._user_pairs[user]:
                yield user, item, rating

    def __eq__(self, other):
        if not isinstance(other, RatingMatrix):
            return NotImplemented
        return (
            self.num_users == other.num_users
            and self.num_items == other.num_items
            and self.rating_min == other.rating_min
            and self.rating_max == other.rating_max
            and self._by_user == other._by_user
        )

    def __repr__(self):
        return (
            f"RatingMatrix(users={self.num_users}, items={self.num_items}, "
            f"entries={self._num_entries})"
        )


@dataclass(frozen=True)
class SplitPair:
    """A training matrix plus the held-out (user, item, rating) triplets."""

    train: RatingMatrix
    test: tuple
    split_name: str = ""


@dataclass(frozen=True)
class MatrixStats:
    num_users: int
    num_items: int
    num_entries: int
    density: float
    raters_per_item: dict


def _iter_raw_lines(source):
    """Yield raw lines from a path, a file object, or an iterable of lines."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as handle:
            yield from handle
    elif hasattr(source, "read"):
        yield from source
    else:
        yield from source


def iter_rating_triplets(source, expected_range=(1, 5)):
    """Parse rating lines, yielding (user, item, rating, line_number).

    Raises ParseError for malformed lines and RatingRangeError for ratings
    outside expected_range, both with 1-based line numbers. Duplicate
    detection is left to the callers that accumulate entries.
    """
    rating_min, rating_max = expected_range
    for line_number, raw in enumerate(_iter_raw_lines(source), start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(f"undecodable bytes ({exc})", line_number) from None
        line = raw.rstrip("\r\n")
        fields = line.split("\t")
        if len(fields) != 4:
            raise ParseError(
                f"expected 4 tab-separated fields, got {len(fields)}", line_number
            )
        try:
            user, item, rating, _timestamp = (int(f) for f in fields)
        except ValueError:
            raise ParseError(f"non-integer field in {line!r}", line_number) from None
        if user < 1 or item < 1:
            raise ParseError(
                f"user and item ids must be >= 1, got user={user} item={item}",
                line_number,
            )
        if not rating_min <= rating <= rating_max:
            raise RatingRangeError(
                f"rating {rating} outside [{rating_min}, {rating_max}]", line_number
            )
        yield user, item, rating, line_number


def parse_ratings(source, expected_range=(1, 5), *, num_users=None, num_items=None):
    """Parse a rating stream into a RatingMatrix.

    Dimensions are the maximum observed ids unless overridden. Duplicate
    (user, item) lines raise DuplicateRatingError with the line number.
    """
    triplets = []
    seen = set()
    for user, item, rating, line_number in iter_rating_triplets(source, expected_range):
        pair = (user, item)
        if pair in seen:
            raise DuplicateRatingError(
                f"duplicate rating for user {user}, item {item}", line_number
            )
        seen.add(pair)
        if num_users is not None and user > num_users:
            raise ParseError(
                f"user id {user} exceeds num_users={num_users}", line_number
            )
        if num_items is not None and item > num_items:
            raise ParseError(
                f"item id {item} exceeds num_items={num_items}", line_number
            )
        triplets.append((user, item, rating))
    return RatingMatrix(
        triplets,
        num_users=num_users,
        num_items=num_items,
        rating_range=expected_range,
    )


def load_split(train_source, test_source, *, expected_range=(1, 5),
               num_users=None, num_items=None, split_name="") -> SplitPair:
    """Load a (train, test) pair in the same tab-separated format.

    Test triplets keep their file order. Without explicit dimensions the
    train matrix is sized to the maximum id observed in either portion, so
    the pair shares one user/item universe. A (user, item) pair present in
    both portions raises SplitOverlapError.
    """
    test = []
    test_seen = set()
    max_user = 0
    max_item = 0
    for user, item, rating, line_number in iter_rating_triplets(test_source, expected_range):
        pair = (user, item)
        if pair in test_seen:
            raise DuplicateRatingError(
                f"duplicate test rating for user {user}, item {item}", line_number
            )
        test_seen.add(pair)
        if num_users is not None and user > num_users:
            raise ParseError(
                f"test user id {user} exceeds num_users={num_users}", line_number
            )
        if num_items is not None and item > num_items:
            raise ParseError(
                f"test item id {item} exceeds num_items={num_items}", line_number
            )
        test.append((user, item, rating))
        if user > max_user:
            max_user = user
        if item > max_item:
            max_item = item

    train_triplets = []
    train_seen = set()
    for user, item, rating, line_number in iter_rating_triplets(train_source, expected_range):
        pair = (user, item)
        if pair in train_seen:
            raise DuplicateRatingError(
                f"duplicate rating for user {user}, item {item}", line_number
            )
        train_seen.add(pair)
        if num_users is not None and user > num_users:
            raise ParseError(
                f"user id {user} exceeds num_users={num_users}", line_number
            )
        if num_items is not None and item > num_items:
            raise ParseError(
                f"item id {item} exceeds num_items={num_items}", line_number
            )
        if pair in test_seen:
            raise SplitOverlapError(
                f"pair (user {user}, item {item}) appears in both train and test"
            )
        train_triplets.append((user, item, rating))
        if user > max_user:
            max_user = user
        if item > max_item:
            max_item = item

    train = RatingMatrix(
        train_triplets,
        num_users=num_users if num_users is not None else max_user,
        num_items=num_items if num_items is not None else max_item,
        rating_range=expected_range,
    )
    return SplitPair(train=train, test=tuple(test), split_name=split_name)


def stats(matrix: RatingMatrix) -> MatrixStats:
    """Summarize a matrix: counts, density, per-item rater counts."""
    cells = matrix.num_users * matrix.num_items
    density = matrix.num_entries / cells if cells else 0.0
    raters_per_item = {
        item: len(raters) for item, raters in matrix._by_item.items()
    }
    return MatrixStats(
        num_users=matrix.num_users,
        num_items=matrix.num_items,
        num_entries=matrix.num_entries,
        density=density,
        raters_per_item=raters_per_item,
    )


def to_lines(matrix: RatingMatrix):
    """Serialize back to the tab-separated format (timestamp written as 0)."""
    for user, item, rating in matrix.iter_entries():
        yield f"{user}\t{item}\t{rating}\t0"
