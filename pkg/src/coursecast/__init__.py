"""Next-term course planning from grade transcripts.

A bidirectional LSTM is trained on chronologically ordered, bucketed
grade histories to predict the probability a student passes every course
in a candidate next-term combination; candidate combinations can then be
ranked for what-if planning, in-process or over HTTP.
"""

from .encoding import (
    DatasetSplit,
    TrainExample,
    build_examples,
    encode_query,
    encode_term,
    split_dataset,
)
from .metrics import auc, course_failure_rates, difficulty_tier, gpa_of, success_grid
from .nnet import (
    ModelDims,
    ModelParams,
    bce_loss,
    bidi_forward,
    init_params,
    load_checkpoint,
    save_checkpoint,
    score_queries,
)
from .planner import PlanQuery, PlanResponse, score_plans
from .synth import GroundTruth, SynthConfig, generate, true_success_probability
from .training import TrainConfig, TrainReport, train
from .transcripts import (
    CourseCatalog,
    GradeCategory,
    RawRecord,
    TranscriptError,
    UnknownCourseError,
    bucket_grade,
    build_catalog,
    is_passing,
    parse_transcript,
    serialize_transcript,
)

__version__ = "0.1.0"

__all__ = [
    "DatasetSplit",
    "TrainExample",
    "build_examples",
    "encode_query",
    "encode_term",
    "split_dataset",
    "auc",
    "course_failure_rates",
    "difficulty_tier",
    "gpa_of",
    "success_grid",
    "ModelDims",
    "ModelParams",
    "bce_loss",
    "bidi_forward",
    "init_params",
    "load_checkpoint",
    "save_checkpoint",
    "score_queries",
    "PlanQuery",
    "PlanResponse",
    "score_plans",
    "GroundTruth",
    "SynthConfig",
    "generate",
    "true_success_probability",
    "TrainConfig",
    "TrainReport",
    "train",
    "CourseCatalog",
    "GradeCategory",
    "RawRecord",
    "TranscriptError",
    "UnknownCourseError",
    "bucket_grade",
    "build_catalog",
    "is_passing",
    "parse_transcript",
    "serialize_transcript",
]
