import { describe, expect, it } from "vitest";

import { parseTranscriptCsv } from "../src/csv.js";

const HEADER = "student_id,course_id,period,grade";

describe("parseTranscriptCsv", () => {
  it("groups one student's rows into sorted periods", () => {
    const text = [
      HEADER,
      "s1,MATH1,2020-2,12",
      "s1,ALG1,2020-1,15",
      "s1,BIO1,2020-1,R",
    ].join("\n");
    const history = parseTranscriptCsv(text);
    expect(history.map((p) => p.period)).toEqual(["2020-1", "2020-2"]);
    expect(history[0].grades).toEqual([
      { course: "ALG1", grade: 15 },
      { course: "BIO1", grade: "R" },
    ]);
  });

  it("rejects a missing header", () => {
    expect(() => parseTranscriptCsv("s1,A,2020-1,15")).toThrow(/header/);
  });

  it("rejects multi-student files", () => {
    const text = [HEADER, "s1,A,2020-1,15", "s2,A,2020-1,15"].join("\n");
    expect(() => parseTranscriptCsv(text)).toThrow(/second student/);
  });

  it("rejects out-of-range grades with the line number", () => {
    const text = [HEADER, "s1,A,2020-1,21"].join("\n");
    expect(() => parseTranscriptCsv(text)).toThrow(/line 2/);
  });

  it("rejects short rows", () => {
    const text = [HEADER, "s1,A,2020-1"].join("\n");
    expect(() => parseTranscriptCsv(text)).toThrow(/4 columns/);
  });
});
