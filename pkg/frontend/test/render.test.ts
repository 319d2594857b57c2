import { describe, expect, it } from "vitest";

import { renderCandidateEditor, renderErrorBanner, renderResults } from "../src/render.js";
import {
  addCandidate,
  addHistoryGrade,
  applyScoreError,
  beginRequest,
  initialState,
  rankedCandidates,
  setCatalog,
  toggleCourse,
} from "../src/state.js";

function stateWithCandidates() {
  let s = setCatalog(initialState(), ["ALG1", "BIO1"], { ALG1: 0.45, BIO1: 0.05 });
  s = addHistoryGrade(s, "2020-1", { course: "ALG1", grade: 14 });
  s = addCandidate(s);
  s = toggleCourse(s, 0, "ALG1");
  s = addCandidate(s);
  s = toggleCourse(s, 1, "BIO1");
  return s;
}

describe("renderResults", () => {
  it("renders candidates in descending probability order", () => {
    let s = stateWithCandidates();
    const begun = beginRequest(s);
    s = {
      ...begun.state,
      lastResponse: { probabilities: [0.31, 0.72], ranking: [1, 0], checkpoint: "x" },
      displayedRequest: begun.requestId,
    };
    const html = renderResults(rankedCandidates(s), null);
    const first = html.indexOf("plan B");
    const second = html.indexOf("plan A");
    expect(first).toBeGreaterThan(-1);
    expect(second).toBeGreaterThan(first);
    expect(html).toContain("72.0%");
    expect(html).toContain("31.0%");
  });

  it("shows the placeholder when no results exist", () => {
    expect(renderResults([], null)).toContain("results appear here");
  });

  it("prefers the error banner over bars", () => {
    const html = renderResults([], "request rejected (empty_history)");
    expect(html).toContain("error");
    expect(html).not.toContain("result-row");
  });
});

describe("renderCandidateEditor", () => {
  it("flags high-failure-rate courses with a badge", () => {
    const html = renderCandidateEditor(stateWithCandidates());
    expect(html).toMatch(/ALG1<span class="badge"/);
    expect(html).not.toMatch(/BIO1<span class="badge"/);
  });

  it("surfaces unknown-course errors inline on the owning candidate", () => {
    let s = stateWithCandidates();
    const begun = beginRequest(s);
    s = applyScoreError(begun.state, begun.requestId, "unknown course: BIO1", "BIO1");
    const html = renderCandidateEditor(s);
    expect(html).toContain("unknown course: BIO1");
    const fieldsets = html.split("<fieldset").slice(1);
    const planA = fieldsets.find((f) => f.includes("plan A"))!;
    const planB = fieldsets.find((f) => f.includes("plan B"))!;
    expect(planA).not.toContain("has-error");
    expect(planB).toContain("has-error");
  });

  it("escapes markup in course ids", () => {
    let s = setCatalog(initialState(), ["<b>X</b>"], {});
    s = addCandidate(s);
    const html = renderCandidateEditor(s);
    expect(html).not.toContain("<b>X</b>");
    expect(html).toContain("&lt;b&gt;X&lt;/b&gt;");
  });
});

describe("renderErrorBanner", () => {
  it("renders a retry affordance when the catalog fails to load", () => {
    const html = renderErrorBanner("service unreachable: ECONNREFUSED", "reload-catalog");
    expect(html).toContain("retry");
    expect(html).toContain("reload-catalog");
  });

  it("renders nothing without an error", () => {
    expect(renderErrorBanner(null, "reload-catalog")).toBe("");
  });
});
