"""Raw transcript parsing, grade bucketing, and course catalog construction.

The input is a CSV export of (student, course, period, grade) rows. Grades
are integers on a 0..20 scale, with 10 the pass mark, or the single
character ``R`` for a withdrawal. Period keys are opaque strings whose
lexicographic order is the chronological order (e.g. ``2018-1``).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import IntEnum
from typing import IO, Iterable, Union

WITHDRAW_TOKEN = "R"
GRADE_MIN = 0
GRADE_MAX = 20
PASS_MARK = 10

CSV_HEADER = ("student_id", "course_id", "period", "grade")

# An int in [0, 20] or the withdrawal token "R".
Grade = Union[int, str]


class TranscriptError(ValueError):
    """Malformed or invalid transcript data.

    ``line`` is the 1-based line number in the CSV source when known.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class UnknownCourseError(LookupError):
    """A course id that is not present in the catalog (or ground truth)."""

    def __init__(self, course_id: str):
        super().__init__(f"unknown course: {course_id!r}")
        self.course_id = course_id


class GradeCategory(IntEnum):
    """Grade buckets. The ordinal indices are fixed and persisted."""

    WITHDRAW = 0
    NOT_APPROVED = 1
    BAD = 2
    EXCELLENT = 3


NUM_CATEGORIES = len(GradeCategory)


@dataclass(frozen=True)
class RawRecord:
    """One (student, course, period, grade) row."""

    student_id: str
    course_id: str
    period: str
    grade: Grade


def validate_grade(value: Grade) -> Grade:
    """Return ``value`` if it is a legal grade, else raise TranscriptError."""
    if value == WITHDRAW_TOKEN:
        return value
    if isinstance(value, bool) or not isinstance(value, int):
        raise TranscriptError(f"grade must be an integer or {WITHDRAW_TOKEN!r}, got {value!r}")
    if not GRADE_MIN <= value <= GRADE_MAX:
        raise TranscriptError(f"grade {value} outside [{GRADE_MIN}, {GRADE_MAX}]")
    return value


def bucket_grade(grade: Grade) -> GradeCategory:
    """Map a raw grade to its category.

    Withdrawals map to WITHDRAW, 0..9 to NOT_APPROVED, 10..12 to BAD and
    13..20 to EXCELLENT. Total over the legal grade domain.
    """
    validate_grade(grade)
    if grade == WITHDRAW_TOKEN:
        return GradeCategory.WITHDRAW
    if grade < PASS_MARK:
        return GradeCategory.NOT_APPROVED
    if grade <= 12:
        return GradeCategory.BAD
    return GradeCategory.EXCELLENT


def is_passing(category: GradeCategory) -> bool:
    """True for BAD and EXCELLENT; withdrawals yield no passing grade."""
    return category in (GradeCategory.BAD, GradeCategory.EXCELLENT)


class CourseCatalog:
    """Dense course indexing, deterministic across runs.

    Indices follow lexicographic course_id order, so the catalog built from
    any permutation of the same records is identical.
    """

    def __init__(self, course_ids: Iterable[str]):
        self.courses: list[str] = sorted(set(course_ids))
        if not self.courses:
            raise ValueError("catalog requires at least one course")
        self._index = {course: i for i, course in enumerate(self.courses)}

    def __len__(self) -> int:
        return len(self.courses)

    def __contains__(self, course_id: str) -> bool:
        return course_id in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CourseCatalog) and self.courses == other.courses

    def __repr__(self) -> str:
        return f"CourseCatalog({len(self.courses)} courses)"

    def index(self, course_id: str) -> int:
        try:
            return self._index[course_id]
        except KeyError:
            raise UnknownCourseError(course_id) from None


def build_catalog(records: Iterable[RawRecord]) -> CourseCatalog:
    """Catalog of every distinct course id appearing in ``records``."""
    courses = {r.course_id for r in records}
    if not courses:
        raise ValueError("cannot build a catalog from an empty record list")
    return CourseCatalog(courses)


def _parse_grade_field(text: str, line: int) -> Grade:
    text = text.strip()
    if text == WITHDRAW_TOKEN:
        return text
    try:
        value = int(text)
    except ValueError:
        raise TranscriptError(
            f"grade must be an integer or {WITHDRAW_TOKEN!r}, got {text!r}", line
        ) from None
    if not GRADE_MIN <= value <= GRADE_MAX:
        raise TranscriptError(f"grade {value} outside [{GRADE_MIN}, {GRADE_MAX}]", line)
    return value


def parse_transcript(source: Union[str, IO[str]]) -> list[RawRecord]:
    """Parse a transcript CSV (text or text stream) into records.

    The first row must be the header ``student_id,course_id,period,grade``.
    Raises TranscriptError with the offending line number for a malformed
    row, an out-of-range grade, or a duplicate (student, course, period).
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.reader(stream)

    try:
        header = next(reader)
    except StopIteration:
        raise TranscriptError("empty transcript: missing header row", 1) from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise TranscriptError(f"expected header {','.join(CSV_HEADER)}, got {header!r}", 1)

    records: list[RawRecord] = []
    seen: set[tuple[str, str, str]] = set()
    for line, row in enumerate(reader, start=2):
        if len(row) != len(CSV_HEADER):
            raise TranscriptError(f"expected {len(CSV_HEADER)} columns, got {len(row)}", line)
        student, course, period, grade_text = (field.strip() for field in row)
        if not student or not course or not period:
            raise TranscriptError("student_id, course_id and period must be non-empty", line)
        key = (student, course, period)
        if key in seen:
            raise TranscriptError(f"duplicate (student, course, period) row: {key}", line)
        seen.add(key)
        records.append(RawRecord(student, course, period, _parse_grade_field(grade_text, line)))
    return records


def serialize_transcript(records: Iterable[RawRecord]) -> str:
    """Inverse of parse_transcript: CSV text with LF line endings."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([r.student_id, r.course_id, r.period, r.grade])
    return out.getvalue()


def load_transcript(path) -> list[RawRecord]:
    """Parse a transcript CSV file from disk."""
    with open(path, encoding="utf-8", newline="") as f:
        return parse_transcript(f)


def save_transcript(records: Iterable[RawRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(serialize_transcript(records))
