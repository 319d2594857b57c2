"""Exact AUC, GPA banding, difficulty tiers, and the band-by-tier grid.

AUC is the Mann-Whitney pairwise ranking statistic computed exactly via
midranks (ties credit 0.5), never a trapezoid approximation. The grid
experiment scores every validation student against one course combination
per difficulty tier and averages within GPA bands.
"""

from __future__ import annotations

import csv
import io
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from . import nnet
from .encoding import TrainExample, encode_query
from .transcripts import (
    WITHDRAW_TOKEN,
    CourseCatalog,
    GradeCategory,
    RawRecord,
    UnknownCourseError,
    bucket_grade,
)

FAILURE_RATE_THRESHOLD = 0.30
HARD_FRACTION = 0.80
MEDIUM_FRACTION = 0.50

TIERS = ("hard", "medium", "easy")
BANDS = ("below_12", "12_to_16", "over_16")


def auc(scores, labels) -> float:
    """Exact pairwise AUC: P(score_pos > score_neg) + 0.5 P(tie).

    Computed from midranks, which equals the all-pairs enumeration
    exactly. Raises ValueError unless both classes are present.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-d and the same length")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    if not set(np.unique(labels)) <= {0, 1}:
        raise ValueError("labels must be 0 or 1")
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined: need at least one positive and one negative")
    ranks = rankdata(scores, method="average")
    pos_rank_sum = float(np.sum(ranks[labels == 1]))
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def gpa_of(history: Iterable) -> float:
    """Arithmetic mean of a student's numeric grades, withdrawals excluded.

    Accepts RawRecord objects or bare grade values. Raises ValueError for
    an all-withdrawal history.
    """
    numeric = []
    for item in history:
        grade = item.grade if isinstance(item, RawRecord) else item
        if grade != WITHDRAW_TOKEN:
            numeric.append(float(grade))
    if not numeric:
        raise ValueError("GPA undefined: no numeric grades")
    return float(np.mean(numeric))


def gpa_band(gpa: float) -> int:
    """0 for GPA below 12, 1 for 12..16 inclusive, 2 above 16."""
    if gpa < 12.0:
        return 0
    if gpa <= 16.0:
        return 1
    return 2


def course_failure_rates(records: Iterable[RawRecord]) -> dict[str, float]:
    """Historical fraction of non-passing outcomes (fails + withdrawals)."""
    totals: dict[str, int] = {}
    failures: dict[str, int] = {}
    for r in records:
        totals[r.course_id] = totals.get(r.course_id, 0) + 1
        category = bucket_grade(r.grade)
        if category in (GradeCategory.WITHDRAW, GradeCategory.NOT_APPROVED):
            failures[r.course_id] = failures.get(r.course_id, 0) + 1
    return {course: failures.get(course, 0) / totals[course] for course in sorted(totals)}


def difficulty_tier(combo: Sequence[str], failure_rates: Mapping[str, float]) -> str:
    """Classify a combination by its share of high-failure-rate courses.

    hard: at least 80% of the courses fail above 30%; medium: at least
    50%; anything below 50% counts as easy.
    """
    if not combo:
        raise ValueError("a combination must contain at least one course")
    over = 0
    for course in combo:
        if course not in failure_rates:
            raise UnknownCourseError(course)
        if failure_rates[course] > FAILURE_RATE_THRESHOLD:
            over += 1
    fraction = over / len(combo)
    if fraction >= HARD_FRACTION:
        return "hard"
    if fraction >= MEDIUM_FRACTION:
        return "medium"
    return "easy"


def propose_tier_combos(
    failure_rates: Mapping[str, float], hard_size: int = 5, easy_size: int = 4
) -> dict[str, list[str]]:
    """Pick one representative combination per tier from historical rates.

    hard: the highest-failure courses (all above the 30% threshold);
    easy: the lowest-failure courses at or below it; medium: an even mix
    of both pools. Sizes shrink to what the corpus supports; raises
    ValueError when a tier cannot be formed at all.
    """
    by_rate = sorted(failure_rates, key=lambda c: (-failure_rates[c], c))
    over = [c for c in by_rate if failure_rates[c] > FAILURE_RATE_THRESHOLD]
    under = [c for c in reversed(by_rate) if failure_rates[c] <= FAILURE_RATE_THRESHOLD]
    if not over:
        raise ValueError("no courses above the failure-rate threshold; cannot form a hard tier")
    if not under:
        raise ValueError("no courses at or below the failure-rate threshold; cannot form an easy tier")

    hard = over[: min(hard_size, len(over))]
    easy = under[: min(easy_size, len(under))]
    k = min(len(over), len(under), 2)
    medium = over[:k] + under[:k]

    combos = {"hard": hard, "medium": medium, "easy": easy}
    for tier, combo in combos.items():
        got = difficulty_tier(combo, failure_rates)
        if got != tier:
            raise ValueError(f"proposed {tier} combination classified as {got}: {combo}")
    return combos


def success_grid(
    params: nnet.ModelParams,
    catalog: CourseCatalog,
    examples: Sequence[TrainExample],
    gpa_by_student: Mapping[str, float],
    tier_combos: Mapping[str, Sequence[str]],
    failure_rates: Mapping[str, float],
) -> np.ndarray:
    """3x3 grid of mean predicted success probability.

    Rows are GPA bands (below 12, 12..16, over 16); columns are the
    hard/medium/easy combinations. Each tier combination must classify to
    its claimed tier; every band must be populated.
    """
    for tier in TIERS:
        if tier not in tier_combos:
            raise ValueError(f"missing tier combination: {tier}")
        got = difficulty_tier(tier_combos[tier], failure_rates)
        if got != tier:
            raise ValueError(f"{tier} combination classified as {got}")

    queries = np.stack(
        [
            encode_query([catalog.index(c) for c in tier_combos[tier]], len(catalog))
            for tier in TIERS
        ]
    )

    sums = np.zeros((len(BANDS), len(TIERS)))
    counts = np.zeros(len(BANDS), dtype=int)
    for ex in examples:
        if ex.student_id not in gpa_by_student:
            continue
        band = gpa_band(gpa_by_student[ex.student_id])
        sums[band] += nnet.score_queries(params, ex.history, queries)
        counts[band] += 1
    if np.any(counts == 0):
        populations = dict(zip(BANDS, counts.tolist()))
        raise ValueError(f"empty GPA band(s): populations {populations}")
    return sums / counts[:, np.newaxis]


def grid_to_document(grid: np.ndarray, tier_combos: Mapping[str, Sequence[str]]) -> dict:
    return {
        "bands": list(BANDS),
        "tiers": list(TIERS),
        "combos": {tier: list(tier_combos[tier]) for tier in TIERS},
        "grid": [[float(v) for v in row] for row in grid],
    }


def grid_to_csv(grid: np.ndarray) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["band"] + list(TIERS))
    for band, row in zip(BANDS, grid):
        writer.writerow([band] + [f"{v:.6f}" for v in row])
    return out.getvalue()
