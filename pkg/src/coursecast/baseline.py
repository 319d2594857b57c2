"""GPA-only logistic baseline.

A single-feature logistic regression on the student's pre-final-term GPA.
It cannot see the queried course combination, so it bounds what history
alone buys; the sequence model must beat it to justify its existence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import expit

from .encoding import TrainExample
from .metrics import auc, gpa_of
from .transcripts import RawRecord


def history_gpas(records: Iterable[RawRecord]) -> dict[str, float]:
    """GPA per student over everything before their final period.

    Students whose pre-final history is all withdrawals are omitted. The
    final period is excluded because it is the prediction target.
    """
    by_student: dict[str, dict[str, list]] = {}
    for r in records:
        by_student.setdefault(r.student_id, {}).setdefault(r.period, []).append(r.grade)
    gpas: dict[str, float] = {}
    for student, periods in by_student.items():
        ordered = sorted(periods)
        if len(ordered) < 2:
            continue
        grades = [g for period in ordered[:-1] for g in periods[period]]
        try:
            gpas[student] = gpa_of(grades)
        except ValueError:
            continue
    return gpas


@dataclass
class GpaLogistic:
    weight: float
    bias: float
    feature_mean: float
    feature_std: float

    def predict(self, gpas: Sequence[float]) -> np.ndarray:
        z = (np.asarray(gpas, dtype=np.float64) - self.feature_mean) / self.feature_std
        return expit(self.weight * z + self.bias)


def fit_gpa_logistic(gpas: Sequence[float], labels: Sequence[int], iterations: int = 50) -> GpaLogistic:
    """Newton-Raphson fit of p(success) = sigmoid(w * gpa_std + b).

    Deterministic; the feature is standardized internally for
    conditioning.
    """
    x = np.asarray(gpas, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("need matching 1-d gpas and labels with at least two rows")
    mean = float(np.mean(x))
    std = float(np.std(x)) or 1.0
    z = (x - mean) / std

    design = np.column_stack([z, np.ones_like(z)])
    theta = np.zeros(2)
    for _ in range(iterations):
        p = expit(design @ theta)
        gradient = design.T @ (p - y)
        weights = np.maximum(p * (1.0 - p), 1e-9)
        hessian = design.T @ (design * weights[:, np.newaxis]) + 1e-9 * np.eye(2)
        step = np.linalg.solve(hessian, gradient)
        theta -= step
        if float(np.max(np.abs(step))) < 1e-10:
            break
    return GpaLogistic(weight=float(theta[0]), bias=float(theta[1]), feature_mean=mean, feature_std=std)


def _features(
    examples: Sequence[TrainExample], gpas: Mapping[str, float], fallback: float
) -> np.ndarray:
    return np.asarray([gpas.get(ex.student_id, fallback) for ex in examples])


def baseline_validation_auc(
    train: Sequence[TrainExample],
    validation: Sequence[TrainExample],
    gpas: Mapping[str, float],
) -> float:
    """Fit on the train split's (GPA, label) pairs, score the validation."""
    known = [gpas[ex.student_id] for ex in train if ex.student_id in gpas]
    fallback = float(np.mean(known))
    x_train = _features(train, gpas, fallback)
    y_train = np.asarray([ex.label for ex in train])
    model = fit_gpa_logistic(x_train, y_train)
    scores = model.predict(_features(validation, gpas, fallback))
    return auc(scores, np.asarray([ex.label for ex in validation]))
