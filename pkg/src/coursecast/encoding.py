"""Term encoding and training-example assembly.

A student-term becomes a multi-label one-hot vector of size C*4 (C courses
by 4 grade categories); position ``course_index * 4 + category`` is set for
each course taken that term. A student's chronological sequence of term
vectors, minus the final term, is the model's history input; the final
term's course set becomes the query and its outcome the binary label
(1 iff every course in it has a passing category).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .transcripts import (
    NUM_CATEGORIES,
    CourseCatalog,
    GradeCategory,
    RawRecord,
    bucket_grade,
    is_passing,
)

DATASET_VERSION = 1


def term_vector_size(catalog_size: int) -> int:
    return catalog_size * NUM_CATEGORIES


def encode_term(
    term_records: Sequence[tuple[int, GradeCategory]], catalog_size: int
) -> np.ndarray:
    """One-hot encode a single term: ones at course_index*4 + category.

    Raises ValueError for an empty term, a repeated course, or an
    out-of-range course index.
    """
    if not term_records:
        raise ValueError("cannot encode an empty term")
    step = np.zeros(term_vector_size(catalog_size))
    seen: set[int] = set()
    for course_index, category in term_records:
        if not 0 <= course_index < catalog_size:
            raise ValueError(f"course index {course_index} outside catalog of size {catalog_size}")
        if course_index in seen:
            raise ValueError(f"course index {course_index} appears twice in one term")
        seen.add(course_index)
        step[course_index * NUM_CATEGORIES + int(category)] = 1.0
    return step


def decode_term(step: np.ndarray, catalog_size: int) -> list[tuple[int, GradeCategory]]:
    """Invert encode_term, recovering the (course_index, category) pairs."""
    if step.shape != (term_vector_size(catalog_size),):
        raise ValueError(f"expected vector of size {term_vector_size(catalog_size)}")
    pairs = []
    for pos in np.flatnonzero(step):
        course_index, category = divmod(int(pos), NUM_CATEGORIES)
        pairs.append((course_index, GradeCategory(category)))
    return pairs


def encode_query(course_indices: Iterable[int], catalog_size: int) -> np.ndarray:
    """Multi-hot course-set vector of size C for the term under prediction."""
    indices = list(course_indices)
    if not indices:
        raise ValueError("a query must contain at least one course")
    query = np.zeros(catalog_size)
    for idx in indices:
        if not 0 <= idx < catalog_size:
            raise ValueError(f"course index {idx} outside catalog of size {catalog_size}")
        if query[idx]:
            raise ValueError(f"course index {idx} appears twice in the query")
        query[idx] = 1.0
    return query


@dataclass
class TrainExample:
    """One student's history, their final-term course set, and its outcome.

    ``history`` has one row per pre-final term, in chronological order;
    ``query`` is the multi-hot course set of the final term; ``label`` is 1
    iff every course in the final term has a passing category.
    """

    student_id: str
    history: np.ndarray  # (num_terms, C*4)
    query: np.ndarray  # (C,)
    label: int


def build_examples(
    records: Iterable[RawRecord], catalog: CourseCatalog
) -> tuple[list[TrainExample], list[str]]:
    """Assemble one example per student with at least two distinct periods.

    Returns (examples, skipped), where ``skipped`` lists ids of students
    with a single period (no history to condition on). The output depends
    only on the record set, not its order.
    """
    by_student: dict[str, dict[str, list[tuple[str, object]]]] = {}
    for r in records:
        by_student.setdefault(r.student_id, {}).setdefault(r.period, []).append(
            (r.course_id, r.grade)
        )

    examples: list[TrainExample] = []
    skipped: list[str] = []
    for student_id in sorted(by_student):
        periods = sorted(by_student[student_id])
        if len(periods) < 2:
            skipped.append(student_id)
            continue

        steps = []
        for period in periods[:-1]:
            term = sorted(by_student[student_id][period])
            pairs = [(catalog.index(c), bucket_grade(g)) for c, g in term]
            steps.append(encode_term(pairs, len(catalog)))

        last_term = sorted(by_student[student_id][periods[-1]])
        query = encode_query([catalog.index(c) for c, _ in last_term], len(catalog))
        label = int(all(is_passing(bucket_grade(g)) for _, g in last_term))
        examples.append(TrainExample(student_id, np.stack(steps), query, label))
    return examples, skipped


@dataclass
class DatasetSplit:
    train: list[TrainExample]
    validation: list[TrainExample]
    seed: int


def split_dataset(
    examples: Sequence[TrainExample], validation_fraction: float, seed: int
) -> DatasetSplit:
    """Seeded, label-stratified student-level split.

    Each example is one student, so splitting examples splits students.
    Stratifying by label keeps the positive rate comparable on both sides;
    success labels are rare enough that a plain shuffle frequently starves
    a small validation side of positives entirely. The validation side
    gets round(n * fraction) examples. Degenerate splits (an empty side)
    raise ValueError.
    """
    if not 0.0 < validation_fraction < 1.0:
        raise ValueError("validation_fraction must be strictly between 0 and 1")
    n = len(examples)
    if n < 2:
        raise ValueError("need at least two examples to split")
    n_val = round(n * validation_fraction)
    if n_val == 0 or n_val == n:
        raise ValueError(f"degenerate split: {n} examples at fraction {validation_fraction}")

    rng = np.random.default_rng(seed)
    pos = [i for i, ex in enumerate(examples) if ex.label == 1]
    neg = [i for i, ex in enumerate(examples) if ex.label != 1]
    n_val_pos = _stratum_take(len(pos), len(neg), n_val, validation_fraction)
    n_val_neg = n_val - n_val_pos

    chosen: set[int] = set()
    for indices, take in ((pos, n_val_pos), (neg, n_val_neg)):
        order = rng.permutation(len(indices))
        chosen.update(indices[i] for i in order[:take])
    validation = [examples[i] for i in sorted(chosen)]
    train = [examples[i] for i in range(n) if i not in chosen]
    return DatasetSplit(train=train, validation=validation, seed=seed)


def _stratum_take(n_pos: int, n_neg: int, n_val: int, fraction: float) -> int:
    """Validation positives: proportional, then clamped so that both sides
    keep both classes whenever the data allows it."""
    take = round(n_pos * fraction)
    low = max(0, n_val - n_neg)
    high = min(n_pos, n_val)
    if n_pos >= 2:
        low = max(low, 1)
        high = min(high, n_pos - 1) if n_pos - 1 >= low else high
    if n_neg >= 2:
        if n_val - 1 >= low:  # leave >= 1 negative in validation
            high = min(high, n_val - 1)
        if n_val - (n_neg - 1) <= high:  # leave >= 1 negative in train
            low = max(low, n_val - (n_neg - 1))
    return int(min(max(take, low), high))


def dataset_to_document(catalog: CourseCatalog, examples: Sequence[TrainExample]) -> dict:
    """Versioned JSON document; sparse index lists store positions of ones."""
    return {
        "version": DATASET_VERSION,
        "catalog": list(catalog.courses),
        "examples": [
            {
                "student": ex.student_id,
                "history": [[int(i) for i in np.flatnonzero(step)] for step in ex.history],
                "query": [int(i) for i in np.flatnonzero(ex.query)],
                "label": int(ex.label),
            }
            for ex in examples
        ],
    }


def dataset_from_document(doc: dict) -> tuple[CourseCatalog, list[TrainExample]]:
    if doc.get("version") != DATASET_VERSION:
        raise ValueError(f"unsupported dataset version: {doc.get('version')!r}")
    catalog = CourseCatalog(doc["catalog"])
    size = term_vector_size(len(catalog))
    examples = []
    for i, entry in enumerate(doc["examples"]):
        history = np.zeros((len(entry["history"]), size))
        for t, ones in enumerate(entry["history"]):
            history[t, ones] = 1.0
        query = np.zeros(len(catalog))
        query[entry["query"]] = 1.0
        examples.append(
            TrainExample(entry.get("student", f"row{i}"), history, query, int(entry["label"]))
        )
    return catalog, examples
