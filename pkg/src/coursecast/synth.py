"""Synthetic transcript corpora with a known probabilistic ground truth.

Each student has a latent ability and each course a fixed latent
difficulty, both normal. An enrollment in a term of n courses first
withdraws with a fixed probability; otherwise it passes with

    sigmoid(ability - difficulty - load_penalty * max(0, n - 4))

so heavier terms and harder courses hurt, and the generating process is
fully known: the exact success probability of any (student, course set)
pair is computable and serves as the oracle the trained model is scored
against.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from .transcripts import GRADE_MAX, PASS_MARK, RawRecord, UnknownCourseError, WITHDRAW_TOKEN

LIGHT_LOAD = 4  # courses per term before the load penalty kicks in


@dataclass(frozen=True)
class SynthConfig:
    num_students: int = 800
    catalog_size: int = 40
    min_terms: int = 4
    max_terms: int = 10
    min_courses_per_term: int = 3
    max_courses_per_term: int = 6
    load_penalty: float = 0.15
    withdraw_prob: float = 0.05
    ability_mean: float = 0.0
    ability_std: float = 1.0
    difficulty_mean: float = 0.0
    difficulty_std: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.num_students < 1 or self.catalog_size < 1:
            raise ValueError("num_students and catalog_size must be positive")
        if not 1 <= self.min_terms <= self.max_terms:
            raise ValueError("terms range is empty")
        if not 1 <= self.min_courses_per_term <= self.max_courses_per_term:
            raise ValueError("courses-per-term range is empty")
        if self.max_courses_per_term > self.catalog_size:
            raise ValueError("courses per term cannot exceed the catalog size")
        if not 0.0 <= self.withdraw_prob <= 1.0:
            raise ValueError("withdraw_prob must lie in [0, 1]")
        if self.load_penalty < 0 or self.ability_std < 0 or self.difficulty_std < 0:
            raise ValueError("penalty and spreads must be non-negative")


@dataclass
class GroundTruth:
    """The latent variables and pass model used during generation."""

    abilities: dict[str, float]
    difficulties: dict[str, float]
    load_penalty: float
    withdraw_prob: float

    def pass_probability(self, student_id: str, course_id: str, load: int) -> float:
        if course_id not in self.difficulties:
            raise UnknownCourseError(course_id)
        margin = (
            self.abilities[student_id]
            - self.difficulties[course_id]
            - self.load_penalty * max(0, load - LIGHT_LOAD)
        )
        return float(expit(margin))


def true_success_probability(
    truth: GroundTruth, student_id: str, course_set: Sequence[str]
) -> float:
    """Oracle probability of passing every course in the set.

    Product over courses of (1 - withdraw_prob) * pass_probability at the
    set's load. Empty sets are rejected (they are invalid queries).
    """
    courses = list(course_set)
    if not courses:
        raise ValueError("course set must be non-empty")
    if len(set(courses)) != len(courses):
        raise ValueError("course set contains duplicates")
    if student_id not in truth.abilities:
        raise KeyError(f"unknown student: {student_id!r}")
    prob = 1.0
    for course in courses:
        prob *= (1.0 - truth.withdraw_prob) * truth.pass_probability(
            student_id, course, len(courses)
        )
    return prob


def _period_keys(count: int) -> list[str]:
    """Fixed-width period keys whose lexicographic order is chronological."""
    keys = []
    year, term = 2010, 1
    for _ in range(count):
        keys.append(f"{year}-{term}")
        year, term = (year, 2) if term == 1 else (year + 1, 1)
    return keys


def _draw_grade(rng: np.random.Generator, margin: float, passed: bool) -> int:
    # Grades track the latent margin so historical GPA reflects ability:
    # strong students in easy courses land near 20, near-misses near the
    # pass mark. Clipping keeps the 0..20 scale and the pass boundary.
    # The noise scale keeps single grades coarse; ability shows through
    # the mix of grade categories rather than any one number.
    if passed:
        center = 15.0 + 3.5 * margin
        low, high = PASS_MARK, GRADE_MAX
    else:
        center = 7.0 + 2.5 * margin
        low, high = 0, PASS_MARK - 1
    return int(np.clip(round(center + rng.normal(0.0, 4.0)), low, high))


def generate(config: SynthConfig) -> tuple[list[RawRecord], GroundTruth]:
    """Deterministic corpus for a seed, plus the generating ground truth."""
    config.validate()
    rng = np.random.default_rng(config.seed)

    course_ids = [f"C{i + 1:03d}" for i in range(config.catalog_size)]
    student_ids = [f"s{i + 1:04d}" for i in range(config.num_students)]
    difficulties = {
        c: config.difficulty_mean + config.difficulty_std * rng.standard_normal()
        for c in course_ids
    }
    abilities = {
        s: config.ability_mean + config.ability_std * rng.standard_normal()
        for s in student_ids
    }
    truth = GroundTruth(
        abilities=abilities,
        difficulties=difficulties,
        load_penalty=config.load_penalty,
        withdraw_prob=config.withdraw_prob,
    )

    periods = _period_keys(config.max_terms)
    records: list[RawRecord] = []
    for student in student_ids:
        num_terms = int(rng.integers(config.min_terms, config.max_terms + 1))
        for term_index in range(num_terms):
            load = int(
                rng.integers(config.min_courses_per_term, config.max_courses_per_term + 1)
            )
            chosen = sorted(rng.choice(config.catalog_size, size=load, replace=False))
            for course_index in chosen:
                course = course_ids[int(course_index)]
                margin = (
                    abilities[student]
                    - difficulties[course]
                    - config.load_penalty * max(0, load - LIGHT_LOAD)
                )
                if rng.random() < config.withdraw_prob:
                    grade = WITHDRAW_TOKEN
                else:
                    passed = rng.random() < expit(margin)
                    grade = _draw_grade(rng, margin, passed)
                records.append(RawRecord(student, course, periods[term_index], grade))
    return records, truth


def truth_to_document(truth: GroundTruth) -> dict:
    return {
        "abilities": {k: float(v) for k, v in truth.abilities.items()},
        "difficulties": {k: float(v) for k, v in truth.difficulties.items()},
        "lambda": truth.load_penalty,
        "withdraw_prob": truth.withdraw_prob,
    }


def truth_from_document(doc: dict) -> GroundTruth:
    return GroundTruth(
        abilities=dict(doc["abilities"]),
        difficulties=dict(doc["difficulties"]),
        load_penalty=float(doc["lambda"]),
        withdraw_prob=float(doc["withdraw_prob"]),
    )


def save_ground_truth(truth: GroundTruth, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(truth_to_document(truth), f)
        f.write("\n")


def load_ground_truth(path) -> GroundTruth:
    with open(path, encoding="utf-8") as f:
        return truth_from_document(json.load(f))
