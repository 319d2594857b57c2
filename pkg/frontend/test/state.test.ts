import { describe, expect, it } from "vitest";

import {
  addCandidate,
  addHistoryGrade,
  applyResponse,
  applyScoreError,
  beginRequest,
  initialState,
  rankedCandidates,
  removeCandidate,
  setCatalog,
  toggleCourse,
  validateForScoring,
  type SessionState,
} from "../src/state.js";

const CATALOG = ["ALG1", "BIO1", "CHEM1", "DATA1"];

function readyState(): SessionState {
  let s = setCatalog(initialState(), CATALOG, { ALG1: 0.45, BIO1: 0.1 });
  s = addHistoryGrade(s, "2020-1", { course: "ALG1", grade: 15 });
  s = addCandidate(s);
  s = toggleCourse(s, 0, "ALG1");
  s = addCandidate(s);
  s = toggleCourse(s, 1, "BIO1");
  return s;
}

function scored(state: SessionState, probabilities: number[]) {
  const begun = beginRequest(state);
  return applyResponse(begun.state, begun.requestId, {
    probabilities,
    ranking: [...probabilities.keys()].sort((a, b) => probabilities[b] - probabilities[a]),
    checkpoint: "sha256:test",
  });
}

describe("ranking display order", () => {
  it("orders candidates by descending probability", () => {
    const state = scored(readyState(), [0.4, 0.7]);
    const ranked = rankedCandidates(state);
    expect(ranked.map((r) => r.index)).toEqual([1, 0]);
    expect(ranked[0].probability).toBeCloseTo(0.7);
  });

  it("keeps ties in submission order", () => {
    let state = readyState();
    state = addCandidate(state);
    state = toggleCourse(state, 2, "CHEM1");
    state = scored(state, [0.5, 0.5, 0.5]);
    expect(rankedCandidates(state).map((r) => r.index)).toEqual([0, 1, 2]);
  });
});

describe("stale result clearing", () => {
  it("clears results when a candidate is edited", () => {
    const state = scored(readyState(), [0.4, 0.7]);
    expect(state.lastResponse).not.toBeNull();
    const edited = toggleCourse(state, 0, "CHEM1");
    expect(edited.lastResponse).toBeNull();
    expect(rankedCandidates(edited)).toEqual([]);
  });

  it("clears results when history changes", () => {
    const state = scored(readyState(), [0.4, 0.7]);
    const edited = addHistoryGrade(state, "2020-2", { course: "BIO1", grade: 9 });
    expect(edited.lastResponse).toBeNull();
  });

  it("clears results when a candidate is removed", () => {
    const state = scored(readyState(), [0.4, 0.7]);
    expect(removeCandidate(state, 0).lastResponse).toBeNull();
  });

  it("discards responses from superseded requests", () => {
    const first = beginRequest(readyState());
    const second = beginRequest(first.state);
    const afterStale = applyResponse(second.state, first.requestId, {
      probabilities: [0.9, 0.1],
      ranking: [0, 1],
      checkpoint: "old",
    });
    expect(afterStale.lastResponse).toBeNull();
    const afterFresh = applyResponse(afterStale, second.requestId, {
      probabilities: [0.2, 0.8],
      ranking: [1, 0],
      checkpoint: "new",
    });
    expect(afterFresh.lastResponse?.checkpoint).toBe("new");
  });

  it("ignores errors from superseded requests", () => {
    const first = beginRequest(readyState());
    const second = beginRequest(first.state);
    const state = applyScoreError(second.state, first.requestId, "boom");
    expect(state.scoreError).toBeNull();
  });

  it("discards in-flight responses once a draft is edited", () => {
    const begun = beginRequest(readyState());
    const edited = toggleCourse(begun.state, 0, "CHEM1");
    const landed = applyResponse(edited, begun.requestId, {
      probabilities: [0.9, 0.1],
      ranking: [0, 1],
      checkpoint: "pre-edit",
    });
    expect(landed.lastResponse).toBeNull();
  });
});

describe("validation", () => {
  it("requires history and candidates", () => {
    let s = setCatalog(initialState(), CATALOG, {});
    expect(validateForScoring(s)).toMatch(/history/);
    s = addHistoryGrade(s, "2020-1", { course: "ALG1", grade: 12 });
    expect(validateForScoring(s)).toMatch(/candidate/);
    s = addCandidate(s);
    expect(validateForScoring(s)).toMatch(/candidate/);
    s = toggleCourse(s, 0, "ALG1");
    expect(validateForScoring(s)).toBeNull();
  });

  it("rejects drafts with out-of-catalog courses", () => {
    let s = readyState();
    s = { ...s, candidates: [...s.candidates, ["GHOST"]] };
    expect(validateForScoring(s)).toMatch(/GHOST/);
  });
});

describe("unknown course errors", () => {
  it("records the offending course for inline display", () => {
    const begun = beginRequest(readyState());
    const state = applyScoreError(begun.state, begun.requestId, "unknown course: BIO1", "BIO1");
    expect(state.unknownCourse).toBe("BIO1");
    expect(state.scoreError).toMatch(/BIO1/);
  });
});
