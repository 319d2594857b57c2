"""What-if query scoring: probabilities and a ranking per candidate combo.

Clients submit a raw-grade history (never one-hot vectors) plus up to 20
candidate course sets; each candidate gets the model's success
probability, and the ranking sorts candidates by descending probability
with ties kept in submission order.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from . import nnet
from .encoding import encode_query, encode_term
from .transcripts import (
    CourseCatalog,
    Grade,
    UnknownCourseError,
    bucket_grade,
    validate_grade,
)

MAX_CANDIDATES = 20
MAX_COURSES_PER_CANDIDATE = 12


class PlanError(ValueError):
    """Invalid plan query; ``code`` is a machine-readable error name."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class PlanQuery:
    """history: (period, [(course_id, grade)]) tuples; candidates: course sets."""

    history: list[tuple[str, list[tuple[str, Grade]]]]
    candidates: list[list[str]]


@dataclass
class PlanResponse:
    probabilities: list[float]  # in candidate submission order
    ranking: list[int]  # candidate indices, best first
    checkpoint: str

    def to_document(self) -> dict:
        return {
            "probabilities": self.probabilities,
            "ranking": self.ranking,
            "checkpoint": self.checkpoint,
        }


def _parse_grade_value(value) -> Grade:
    if isinstance(value, bool):
        raise PlanError("invalid_grade", f"invalid grade: {value!r}")
    if isinstance(value, (int, str)):
        try:
            return validate_grade(value)
        except ValueError:
            pass
    raise PlanError("invalid_grade", f"invalid grade: {value!r}")


def query_from_document(doc) -> PlanQuery:
    """Parse and validate the request body of a scoring call.

    Expected shape:
    {"history": [{"period": "2018-1", "grades": [{"course": "X", "grade": 15}]}],
     "candidates": [["A", "B"], ["A", "C"]]}
    """
    if not isinstance(doc, dict):
        raise PlanError("invalid_request", "request body must be a JSON object")
    history_doc = doc.get("history")
    candidates_doc = doc.get("candidates")
    if not isinstance(history_doc, list) or not history_doc:
        raise PlanError("empty_history", "history must be a non-empty list of periods")
    if not isinstance(candidates_doc, list) or not candidates_doc:
        raise PlanError("no_candidates", "candidates must be a non-empty list")
    if len(candidates_doc) > MAX_CANDIDATES:
        raise PlanError(
            "too_many_candidates",
            f"at most {MAX_CANDIDATES} candidates per request, got {len(candidates_doc)}",
        )

    history: list[tuple[str, list[tuple[str, Grade]]]] = []
    for entry in history_doc:
        if not isinstance(entry, dict) or "period" not in entry or "grades" not in entry:
            raise PlanError("invalid_request", "each history entry needs period and grades")
        period = entry["period"]
        grades_doc = entry["grades"]
        if not isinstance(period, str) or not period:
            raise PlanError("invalid_request", "period must be a non-empty string")
        if not isinstance(grades_doc, list) or not grades_doc:
            raise PlanError("invalid_request", f"period {period}: grades must be non-empty")
        grades: list[tuple[str, Grade]] = []
        for g in grades_doc:
            if not isinstance(g, dict) or "course" not in g or "grade" not in g:
                raise PlanError("invalid_request", "each grade entry needs course and grade")
            course = g["course"]
            if not isinstance(course, str) or not course:
                raise PlanError("invalid_request", "course must be a non-empty string")
            grades.append((course, _parse_grade_value(g["grade"])))
        history.append((period, grades))

    candidates: list[list[str]] = []
    for idx, combo in enumerate(candidates_doc):
        if not isinstance(combo, list) or not combo:
            raise PlanError("empty_candidate", f"candidate {idx} must be a non-empty list")
        if len(combo) > MAX_COURSES_PER_CANDIDATE:
            raise PlanError(
                "candidate_too_large",
                f"candidate {idx} has {len(combo)} courses, max {MAX_COURSES_PER_CANDIDATE}",
            )
        if any(not isinstance(c, str) or not c for c in combo):
            raise PlanError("invalid_request", f"candidate {idx} contains a non-string course")
        if len(set(combo)) != len(combo):
            raise PlanError("duplicate_course", f"candidate {idx} repeats a course")
        candidates.append(list(combo))
    return PlanQuery(history=history, candidates=candidates)


def _encode_history(catalog: CourseCatalog, query: PlanQuery) -> np.ndarray:
    steps = []
    for period, grades in sorted(query.history, key=lambda item: item[0]):
        seen = set()
        pairs = []
        for course, grade in grades:
            if course in seen:
                raise PlanError("duplicate_course", f"period {period} repeats course {course}")
            seen.add(course)
            pairs.append((catalog.index(course), bucket_grade(grade)))
        steps.append(encode_term(pairs, len(catalog)))
    if not steps:
        raise PlanError("empty_history", "history is empty after encoding")
    return np.stack(steps)


def score_plans(
    params: nnet.ModelParams,
    catalog: CourseCatalog,
    query: PlanQuery,
    checkpoint: str = "",
) -> PlanResponse:
    """Probability per candidate plus the stable descending ranking.

    Unknown courses raise UnknownCourseError naming the course; the
    recurrent pass over the history runs once and is shared by all
    candidates.
    """
    history = _encode_history(catalog, query)
    queries = np.stack(
        [
            encode_query([catalog.index(c) for c in combo], len(catalog))
            for combo in query.candidates
        ]
    )
    probs = nnet.score_queries(params, history, queries)
    ranking = np.argsort(-probs, kind="stable")
    return PlanResponse(
        probabilities=[float(p) for p in probs],
        ranking=[int(i) for i in ranking],
        checkpoint=checkpoint,
    )
