"""Optimization loop: micro-batching, Adam, clipping, early stopping.

Variable-length histories are grouped into micro-batches of equal length,
so no padding or masking is ever needed.

A student's encoded history contains far more supervision than the single
final-term example the dataset interface exposes: every term transition
(terms 1..k as history, term k+1's course set as query, all-passed as the
label) and every single-course outcome within it is a valid training pair
under the same semantics. By default the trainer expands the train side
into these views (validation students stay held out), which is the
difference between a model that memorizes ~700 students and one that
generalizes. Two noise sources fight fingerprint memorization further:
per-entry input dropout on history vectors and full-history blackout,
which forces the course-combination branch to carry signal on its own.

Model selection is by validation AUC, computed over the held-out
students' transition views (a far lower-variance estimate than their
final terms alone); the returned parameters are the best-validation
checkpoint, not the last. Every run is bit-reproducible given
(dataset, seed).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .encoding import DatasetSplit, TrainExample
from .metrics import auc
from .nnet import (
    DEFAULT_COMBO_SIZE,
    DEFAULT_HIDDEN_SIZE,
    DEFAULT_MERGE_SIZE,
    ModelDims,
    ModelParams,
    backward_batch,
    bce_loss,
    forward_batch,
    init_params,
    params_fingerprint,
    zero_gradients,
)
from .transcripts import NUM_CATEGORIES, GradeCategory


class TrainingDiverged(RuntimeError):
    """Non-finite loss or gradients; names the epoch and batch."""

    def __init__(self, epoch: int, batch: int, detail: str):
        super().__init__(f"training diverged at epoch {epoch}, batch {batch}: {detail}")
        self.epoch = epoch
        self.batch = batch


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 16
    max_epochs: int = 200
    patience: int = 20
    grad_clip_norm: float = 5.0
    seed: int = 0
    hidden_size: int = DEFAULT_HIDDEN_SIZE
    combo_size: int = DEFAULT_COMBO_SIZE
    merge_size: int = DEFAULT_MERGE_SIZE
    transition_views: bool = True  # expand train histories into per-term views
    input_dropout: float = 0.3  # per-entry dropout on history vectors
    history_blackout: float = 0.25  # chance to hide the whole history of an example

    def validate(self) -> None:
        if self.learning_rate <= 0 or self.grad_clip_norm <= 0 or self.adam_eps <= 0:
            raise ValueError("rates and norms must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("adam betas must lie in (0, 1)")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("batch_size and max_epochs must be positive")
        if not 0 <= self.patience < self.max_epochs:
            raise ValueError("patience must be non-negative and below max_epochs")
        if min(self.hidden_size, self.combo_size, self.merge_size) < 1:
            raise ValueError("model dimensions must be positive")
        if not (0.0 <= self.input_dropout < 1.0 and 0.0 <= self.history_blackout < 1.0):
            raise ValueError("dropout rates must lie in [0, 1)")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_auc: float
    val_auc: float


@dataclass
class TrainReport:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_val_auc: float = 0.0
    checkpoint: str = ""

    def to_jsonl(self) -> str:
        lines = [
            json.dumps(
                {
                    "epoch": e.epoch,
                    "train_loss": e.train_loss,
                    "train_auc": e.train_auc,
                    "val_auc": e.val_auc,
                }
            )
            for e in self.epochs
        ]
        return "\n".join(lines) + "\n"


_PASSING = (int(GradeCategory.BAD), int(GradeCategory.EXCELLENT))


def transition_views(
    examples: Sequence[TrainExample], include_single_courses: bool
) -> list[TrainExample]:
    """Per-term supervision views of encoded histories.

    For every term k+1 of a student: (terms 1..k, term k+1's course set,
    all-passed) — and optionally one view per individual course outcome
    in that term, which supervises per-course difficulty directly. The
    original final-term example is always included. Views share storage
    with the source arrays.
    """
    out: list[TrainExample] = []
    for ex in examples:
        C = ex.query.shape[0]
        for k in range(1, ex.history.shape[0]):
            ones = np.flatnonzero(ex.history[k])
            courses = ones // NUM_CATEGORIES
            passing = np.isin(ones % NUM_CATEGORIES, _PASSING)
            query = np.zeros(C)
            query[courses] = 1.0
            out.append(
                TrainExample(ex.student_id, ex.history[:k], query, int(passing.all()))
            )
            if include_single_courses and len(courses) > 1:
                for course, ok in zip(courses, passing):
                    single = np.zeros(C)
                    single[course] = 1.0
                    out.append(TrainExample(ex.student_id, ex.history[:k], single, int(ok)))
        out.append(ex)
    return out


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> dict[str, np.ndarray]:
    """Scale all entries by max_norm/|g| when the global L2 norm exceeds it."""
    if max_norm <= 0:
        raise ValueError("max_norm must be positive")
    total = 0.0
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient in {name}")
        total += float(np.sum(g * g))
    norm = math.sqrt(total)
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return grads


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0

    @classmethod
    def for_params(cls, params: ModelParams) -> "AdamState":
        return cls(m=zero_gradients(params), v=zero_gradients(params))


def adam_step(
    params: ModelParams,
    grads: dict[str, np.ndarray],
    state: AdamState,
    config: TrainConfig,
) -> tuple[ModelParams, AdamState]:
    """Standard Adam update with bias correction; mutates params in place."""
    state.step += 1
    t = state.step
    b1, b2 = config.beta1, config.beta2
    for name, array in params.named_tensors():
        g = grads[name]
        if g.shape != array.shape:
            raise ValueError(f"gradient shape mismatch for {name}")
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        array -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)
    return params, state


def _length_batches(
    examples: Sequence[TrainExample], order: np.ndarray, batch_size: int
) -> list[list[int]]:
    """Chunk a shuffled index order into micro-batches of equal history length."""
    buckets: dict[int, list[int]] = {}
    for idx in order:
        buckets.setdefault(examples[idx].history.shape[0], []).append(int(idx))
    batches = []
    for length in sorted(buckets):
        indices = buckets[length]
        for i in range(0, len(indices), batch_size):
            batches.append(indices[i : i + batch_size])
    return batches


def _stack_batch(
    examples: Sequence[TrainExample], indices: Sequence[int]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    histories = np.stack([examples[i].history for i in indices], axis=1)  # (L, B, D)
    queries = np.stack([examples[i].query for i in indices], axis=0)  # (B, C)
    labels = np.asarray([examples[i].label for i in indices], dtype=np.float64)
    return histories, queries, labels


def predict_proba(params: ModelParams, examples: Sequence[TrainExample]) -> np.ndarray:
    """Batched inference over a list of examples (any mix of lengths)."""
    probs = np.zeros(len(examples))
    order = np.arange(len(examples))
    for batch in _length_batches(examples, order, batch_size=256):
        xs, queries, _ = _stack_batch(examples, batch)
        trace = forward_batch(params, xs, queries)
        probs[batch] = trace.p
    return probs


def evaluate_auc(params: ModelParams, examples: Sequence[TrainExample]) -> float:
    labels = np.asarray([ex.label for ex in examples])
    return auc(predict_proba(params, examples), labels)


def _check_classes(name: str, examples: Sequence[TrainExample]) -> None:
    labels = {ex.label for ex in examples}
    if labels != {0, 1}:
        raise ValueError(f"{name} set needs both labels for AUC, got {sorted(labels)}")


def train(dataset: DatasetSplit, config: TrainConfig) -> tuple[ModelParams, TrainReport]:
    """Train on the split; returns the best-validation-AUC parameters.

    Deterministic given (dataset, config.seed): initialization is seeded,
    and each epoch's shuffle and dropout masks are drawn from a generator
    seeded by (seed, epoch) so any epoch is reproducible in isolation.
    Stops early when validation AUC has not improved for ``patience``
    epochs. Raises TrainingDiverged on a non-finite loss or gradient.

    Reported metrics per epoch: train_loss is the mean BCE over the
    training views as visited (dropout noise included); train_auc is
    computed on the original train examples; val_auc is the selection
    metric over validation transition views.
    """
    config.validate()
    if not dataset.train or not dataset.validation:
        raise ValueError("both train and validation sets must be non-empty")
    _check_classes("train", dataset.train)
    _check_classes("validation", dataset.validation)

    if config.transition_views:
        train_set = transition_views(dataset.train, include_single_courses=True)
        val_set = transition_views(dataset.validation, include_single_courses=False)
    else:
        train_set = list(dataset.train)
        val_set = list(dataset.validation)

    C = dataset.train[0].query.shape[0]
    dims = ModelDims(C=C, H=config.hidden_size, K=config.combo_size, M=config.merge_size)
    params = init_params(dims, config.seed)
    state = AdamState.for_params(params)

    report = TrainReport()
    best_params = params.copy()
    best_epoch = 0
    best_val = -np.inf
    epochs_since_best = 0

    for epoch in range(1, config.max_epochs + 1):
        rng = np.random.default_rng([config.seed, epoch])
        order = rng.permutation(len(train_set))
        batches = _length_batches(train_set, order, config.batch_size)
        batch_order = rng.permutation(len(batches))

        loss_sum = 0.0
        for batch_idx in batch_order:
            batch = batches[batch_idx]
            xs, queries, labels = _stack_batch(train_set, batch)
            if config.history_blackout > 0:
                hidden = rng.random(xs.shape[1]) < config.history_blackout
                xs = xs * (~hidden)[np.newaxis, :, np.newaxis]
            if config.input_dropout > 0:
                keep = rng.random(xs.shape) >= config.input_dropout
                xs = xs * keep / (1.0 - config.input_dropout)

            trace = forward_batch(params, xs, queries)
            losses = bce_loss(trace.p, labels)
            if not np.all(np.isfinite(losses)):
                raise TrainingDiverged(epoch, int(batch_idx), "non-finite loss")
            loss_sum += float(np.sum(losses))

            grads = backward_batch(params, trace, labels)
            for g in grads.values():
                g /= len(batch)
            try:
                clip_gradients(grads, config.grad_clip_norm)
            except FloatingPointError as err:
                raise TrainingDiverged(epoch, int(batch_idx), str(err)) from err
            adam_step(params, grads, state, config)

        record = EpochRecord(
            epoch=epoch,
            train_loss=loss_sum / len(train_set),
            train_auc=evaluate_auc(params, dataset.train),
            val_auc=evaluate_auc(params, val_set),
        )
        report.epochs.append(record)

        if record.val_auc > best_val:
            best_val = record.val_auc
            best_epoch = epoch
            best_params = params.copy()
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= config.patience:
                break

    report.best_epoch = best_epoch
    report.best_val_auc = float(best_val)
    report.checkpoint = params_fingerprint(best_params)
    return best_params, report
