// Session state and its transitions. Pure functions over immutable-ish
// snapshots so every invariant is testable without a DOM.
//
// Core invariant: displayed probabilities always belong to the currently
// displayed candidates. Editing anything that affects scoring clears the
// last response; responses are tagged with a request id and stale ones
// (an older id than the latest issued) are discarded.

import type { GradeEntry, HistoryPeriod, ScoreResponse } from "./api.js";

export type SessionState = {
  catalog: string[];
  failureRates: Record<string, number>;
  history: HistoryPeriod[];
  candidates: string[][];
  lastResponse: ScoreResponse | null;
  requestCounter: number;
  displayedRequest: number;
  catalogError: string | null;
  scoreError: string | null;
  unknownCourse: string | null;
};

export function initialState(): SessionState {
  return {
    catalog: [],
    failureRates: {},
    history: [],
    candidates: [],
    lastResponse: null,
    requestCounter: 0,
    displayedRequest: -1,
    catalogError: null,
    scoreError: null,
    unknownCourse: null,
  };
}

export function setCatalog(
  state: SessionState,
  courses: string[],
  failureRates: Record<string, number>,
): SessionState {
  return { ...state, catalog: courses, failureRates, catalogError: null };
}

export function setCatalogError(state: SessionState, detail: string): SessionState {
  return { ...state, catalogError: detail };
}

function clearResults(state: SessionState): SessionState {
  // Bumping the counter invalidates any in-flight request, so a response
  // computed for pre-edit drafts can never land on post-edit ones.
  return {
    ...state,
    lastResponse: null,
    scoreError: null,
    unknownCourse: null,
    requestCounter: state.requestCounter + 1,
  };
}

export function setHistory(state: SessionState, history: HistoryPeriod[]): SessionState {
  return clearResults({ ...state, history });
}

export function addHistoryGrade(
  state: SessionState,
  period: string,
  entry: GradeEntry,
): SessionState {
  const history = state.history.map((p) =>
    p.period === period ? { ...p, grades: [...p.grades, entry] } : p,
  );
  if (!history.some((p) => p.period === period)) {
    history.push({ period, grades: [entry] });
    history.sort((a, b) => (a.period < b.period ? -1 : 1));
  }
  return clearResults({ ...state, history });
}

export function addCandidate(state: SessionState): SessionState {
  return clearResults({ ...state, candidates: [...state.candidates, []] });
}

export function removeCandidate(state: SessionState, index: number): SessionState {
  const candidates = state.candidates.filter((_, i) => i !== index);
  return clearResults({ ...state, candidates });
}

export function toggleCourse(
  state: SessionState,
  candidateIndex: number,
  course: string,
): SessionState {
  const candidates = state.candidates.map((combo, i) => {
    if (i !== candidateIndex) return combo;
    return combo.includes(course) ? combo.filter((c) => c !== course) : [...combo, course];
  });
  return clearResults({ ...state, candidates });
}

// Scoring is submittable only with a non-empty history and >= 1 candidate;
// every draft must be non-empty (candidate indices must line up with the
// response) and every course must resolve in the fetched catalog.
export function validateForScoring(state: SessionState): string | null {
  if (state.history.length === 0 || state.history.every((p) => p.grades.length === 0)) {
    return "enter at least one term of grade history";
  }
  if (state.candidates.length === 0) {
    return "add at least one candidate combination";
  }
  for (const [i, combo] of state.candidates.entries()) {
    if (combo.length === 0) {
      return `candidate ${i + 1} is empty; pick courses or remove it`;
    }
    for (const course of combo) {
      if (!state.catalog.includes(course)) {
        return `course ${course} is not in the catalog`;
      }
    }
  }
  return null;
}

export function beginRequest(state: SessionState): { state: SessionState; requestId: number } {
  const requestId = state.requestCounter + 1;
  return { state: { ...state, requestCounter: requestId }, requestId };
}

// A response only lands if it answers the newest issued request and the
// drafts have not changed since (every edit bumps requestCounter, so an
// in-flight response for older drafts always loses).
export function applyResponse(
  state: SessionState,
  requestId: number,
  response: ScoreResponse,
): SessionState {
  if (requestId !== state.requestCounter) {
    return state; // stale: a newer submission superseded this one
  }
  return {
    ...state,
    lastResponse: response,
    displayedRequest: requestId,
    scoreError: null,
    unknownCourse: null,
  };
}

export function applyScoreError(
  state: SessionState,
  requestId: number,
  message: string,
  unknownCourse: string | null = null,
): SessionState {
  if (requestId !== state.requestCounter) {
    return state;
  }
  return { ...state, lastResponse: null, scoreError: message, unknownCourse };
}

export type RankedCandidate = {
  index: number;
  courses: string[];
  probability: number;
};

// Candidates in display order: descending probability, ties in submission
// order (the service ranking is stable; trust but rebuild locally so the
// UI invariant is self-contained).
export function rankedCandidates(state: SessionState): RankedCandidate[] {
  const response = state.lastResponse;
  if (!response) return [];
  const scored = state.candidates
    .map((courses, index) => ({
      index,
      courses,
      probability: response.probabilities[index] ?? NaN,
    }))
    .filter((c) => c.courses.length > 0 && Number.isFinite(c.probability));
  return scored.sort(
    (a, b) => b.probability - a.probability || a.index - b.index,
  );
}

export function highFailureRate(state: SessionState, course: string): boolean {
  return (state.failureRates[course] ?? 0) > 0.3;
}
