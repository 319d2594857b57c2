// Client-side parsing of the transcript CSV interchange format:
// header student_id,course_id,period,grade; grade is 0..20 or "R".
// Rows for a single student become history periods; a multi-student file
// is rejected (the explorer plans for one student at a time).

import type { GradeEntry, HistoryPeriod } from "./api.js";

export function parseTranscriptCsv(text: string): HistoryPeriod[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("empty file");
  }
  if (lines[0].trim() !== "student_id,course_id,period,grade") {
    throw new Error("expected header student_id,course_id,period,grade");
  }
  const byPeriod = new Map<string, GradeEntry[]>();
  let student: string | null = null;
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",").map((c) => c.trim());
    if (cells.length !== 4) {
      throw new Error(`line ${i + 1}: expected 4 columns`);
    }
    const [studentId, course, period, gradeText] = cells;
    if (student === null) student = studentId;
    if (studentId !== student) {
      throw new Error(`line ${i + 1}: found a second student (${studentId}); upload one student`);
    }
    let grade: number | "R";
    if (gradeText === "R") {
      grade = "R";
    } else {
      grade = Number(gradeText);
      if (!Number.isInteger(grade) || grade < 0 || grade > 20) {
        throw new Error(`line ${i + 1}: grade must be an integer 0..20 or R`);
      }
    }
    const grades = byPeriod.get(period) ?? [];
    grades.push({ course, grade });
    byPeriod.set(period, grades);
  }
  return [...byPeriod.entries()]
    .sort(([a], [b]) => (a < b ? -1 : 1))
    .map(([period, grades]) => ({ period, grades }));
}
