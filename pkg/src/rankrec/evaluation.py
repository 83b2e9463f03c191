"""Leave-n-out evaluation: RMSE of the ranked-retrieval predictor versus
the community-average baseline, with auditable per-prediction logs.

Test triplets are independent work units and may be predicted by parallel
worker processes; results are reassembled in test order and reduced with
compensated summation, so reports are byte-identical regardless of the
worker count.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP
from multiprocessing import get_context
from statistics import fmean

from .dataset import RatingMatrix, SplitPair
from .prediction import Fallback, predict, round_half_up
from .ranking import VectorSpaceBackend

REPORT_HEADER = (
    "split,backend,rmse_model,rmse_community,improvement_pct,"
    "n_test,fallback_count,wall_time_s"
)
LOG_HEADER = "user,item,actual,raw,rounded,candidates,fallback"


@dataclass(frozen=True)
class EvaluationReport:
    split_name: str
    backend_name: str
    rmse_model: float
    rmse_community: float
    improvement_pct: float
    n_test: int
    fallback_count: int
    wall_time: float


@dataclass(frozen=True)
class PredictionLogEntry:
    user: int
    item: int
    actual: int
    raw: float
    rounded: int
    candidates: int
    fallback: str


def rmse(predictions, actuals) -> float:
    """Root mean squared error between two equal-length rating lists."""
    if len(predictions) != len(actuals):
        raise ValueError(
            f"length mismatch: {len(predictions)} predictions vs "
            f"{len(actuals)} actuals"
        )
    if not predictions:
        raise ValueError("cannot compute RMSE of empty lists")
    total = math.fsum(
        (actual - predicted) ** 2 for predicted, actual in zip(predictions, actuals)
    )
    return math.sqrt(total / len(predictions))


def community_mean(train: RatingMatrix, item: int) -> float:
    """Mean training rating for an item; global mean if nobody rated it."""
    raters = train.raters_of(item)
    if raters:
        return sum(raters.values()) / len(raters)
    return train.global_mean()


def community_predict(train: RatingMatrix, item: int) -> int:
    """Community-average baseline: rounded (half-up) item mean."""
    return round_half_up(community_mean(train, item))


def improvement_pct(rmse_community: float, rmse_model: float) -> float:
    """Relative RMSE gain of the model over the community baseline."""
    if rmse_community == 0.0:
        return 0.0
    return 100.0 * (rmse_community - rmse_model) / rmse_community


# --- parallel worker plumbing -------------------------------------------

_WORKER_STATE = None


def _predict_rows(train, backend, keep_zero_similarity, triplets):
    rows = []
    for user, item, _actual in triplets:
        record = predict(train, user, item, backend,
                         keep_zero_similarity=keep_zero_similarity)
        rows.append((
            record.raw_prediction,
            record.rounded_prediction,
            record.candidate_count,
            record.fallback_used.value,
        ))
    return rows


def _init_worker(train, backend, keep_zero_similarity):
    global _WORKER_STATE
    _WORKER_STATE = (train, backend, keep_zero_similarity)


def _predict_batch(triplets):
    train, backend, keep_zero_similarity = _WORKER_STATE
    return _predict_rows(train, backend, keep_zero_similarity, triplets)


def _chunked(seq, chunk_count):
    size = max(1, math.ceil(len(seq) / chunk_count))
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def _model_predictions(split, backend, keep_zero_similarity, jobs):
    test = split.test
    if jobs <= 1 or len(test) < 2 * jobs:
        return _predict_rows(split.train, backend, keep_zero_similarity, test)
    try:
        context = get_context("fork")
    except ValueError:
        context = get_context()
    rows = []
    with ProcessPoolExecutor(
        max_workers=jobs,
        mp_context=context,
        initializer=_init_worker,
        initargs=(split.train, backend, keep_zero_similarity),
    ) as pool:
        # map preserves chunk order, so output order matches test order
        for batch in pool.map(_predict_batch, _chunked(test, jobs * 4)):
            rows.extend(batch)
    return rows


# --- the harness ---------------------------------------------------------


def evaluate_split(split: SplitPair, backend=None, *, round_community=True,
                   keep_zero_similarity=False, jobs=1):
    """Evaluate one train/test pair.

    Computes a model prediction and a community prediction for every test
    triplet, then both RMSEs and the improvement percentage. Returns
    (EvaluationReport, per-prediction log entries in test order).
    Prediction fallbacks are counted, never fatal.
    """
    start = time.perf_counter()
    model_rows = _model_predictions(split, backend, keep_zero_similarity, jobs)
    backend_name = backend.name if backend is not None else "vsm"

    train = split.train
    item_means: dict = {}
    community = []
    for _user, item, _actual in split.test:
        mean = item_means.get(item)
        if mean is None:
            mean = community_mean(train, item)
            item_means[item] = mean
        community.append(mean if not round_community else round_half_up(mean))

    actuals = [actual for _user, _item, actual in split.test]
    model_rounded = [row[1] for row in model_rows]
    rmse_model = rmse(model_rounded, actuals)
    rmse_community = rmse(community, actuals)

    log = [
        PredictionLogEntry(
            user=user,
            item=item,
            actual=actual,
            raw=raw,
            rounded=rounded,
            candidates=candidates,
            fallback=fallback,
        )
        for (user, item, actual), (raw, rounded, candidates, fallback)
        in zip(split.test, model_rows)
    ]
    fallback_count = sum(
        1 for entry in log if entry.fallback != Fallback.NONE.value
    )
    report = EvaluationReport(
        split_name=split.split_name,
        backend_name=backend_name,
        rmse_model=rmse_model,
        rmse_community=rmse_community,
        improvement_pct=improvement_pct(rmse_community, rmse_model),
        n_test=len(split.test),
        fallback_count=fallback_count,
        wall_time=time.perf_counter() - start,
    )
    return report, log


def mean_report(reports) -> EvaluationReport:
    """Aggregate row: arithmetic means of the RMSE and improvement columns.

    The improvement is averaged across splits (not recomputed from the
    averaged RMSEs); counts and wall times are summed.
    """
    if not reports:
        raise ValueError("need at least one report")
    return EvaluationReport(
        split_name="mean",
        backend_name=reports[0].backend_name,
        rmse_model=fmean(r.rmse_model for r in reports),
        rmse_community=fmean(r.rmse_community for r in reports),
        improvement_pct=fmean(r.improvement_pct for r in reports),
        n_test=sum(r.n_test for r in reports),
        fallback_count=sum(r.fallback_count for r in reports),
        wall_time=sum(r.wall_time for r in reports),
    )


def evaluate_all(splits, backend=None, *, round_community=True,
                 keep_zero_similarity=False, jobs=1):
    """Evaluate every split and append the mean row.

    Returns (reports, mean_row, logs) where logs[i] belongs to reports[i].
    """
    if not splits:
        raise ValueError("need at least one split")
    reports = []
    logs = []
    for split in splits:
        report, log = evaluate_split(
            split,
            backend,
            round_community=round_community,
            keep_zero_similarity=keep_zero_similarity,
            jobs=jobs,
        )
        reports.append(report)
        logs.append(log)
    return reports, mean_report(reports), logs


# --- CSV rendering -------------------------------------------------------


def format_float(value: float) -> str:
    """Fixed 4-decimal rendering, half-up on the printed digit."""
    return str(Decimal(repr(float(value))).quantize(
        Decimal("0.0001"), rounding=ROUND_HALF_UP))


def report_lines(reports, *, include_wall_time=False):
    """Render report rows as CSV lines (header first).

    Wall time is omitted from the rendered rows by default so that files
    produced by identical configurations are byte-identical; pass
    include_wall_time=True for human-facing output.
    """
    yield REPORT_HEADER
    for report in reports:
        wall = format_float(report.wall_time) if include_wall_time else ""
        yield (
            f"{report.split_name},{report.backend_name},"
            f"{format_float(report.rmse_model)},"
            f"{format_float(report.rmse_community)},"
            f"{format_float(report.improvement_pct)},"
            f"{report.n_test},{report.fallback_count},{wall}"
        )


def write_report_csv(reports, destination, *, include_wall_time=False):
    """Write the report CSV to a path or text file object."""
    _write_lines(report_lines(reports, include_wall_time=include_wall_time),
                 destination)


def log_lines(entries):
    yield LOG_HEADER
    for entry in entries:
        yield (
            f"{entry.user},{entry.item},{entry.actual},"
            f"{format_float(entry.raw)},{entry.rounded},"
            f"{entry.candidates},{entry.fallback}"
        )


def write_prediction_log(entries, destination):
    """Write the per-prediction log CSV to a path or text file object."""
    _write_lines(log_lines(entries), destination)


def _write_lines(lines, destination):
    if hasattr(destination, "write"):
        for line in lines:
            destination.write(line + "\n")
    else:
        with open(destination, "w", encoding="utf-8", newline="") as handle:
            for line in lines:
                handle.write(line + "\n")
