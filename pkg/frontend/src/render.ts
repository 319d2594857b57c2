// Pure render-to-HTML-string helpers; the DOM glue only assigns innerHTML.

import type { RankedCandidate, SessionState } from "./state.js";
import { highFailureRate } from "./state.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderErrorBanner(message: string | null, retryAction: string): string {
  if (!message) return "";
  return `
    <div class="banner error" role="alert">
      <span>${escapeHtml(message)}</span>
      <button data-action="${retryAction}">retry</button>
    </div>`;
}

export function renderCoursePicker(state: SessionState, candidateIndex: number): string {
  const buttons = state.catalog
    .map((course) => {
      const picked = state.candidates[candidateIndex]?.includes(course) ?? false;
      const risky = highFailureRate(state, course);
      const badge = risky ? `<span class="badge" title="historical failure rate over 30%">!</span>` : "";
      return `<button class="course${picked ? " picked" : ""}${risky ? " risky" : ""}"
        data-action="toggle-course" data-candidate="${candidateIndex}"
        data-course="${escapeHtml(course)}">${escapeHtml(course)}${badge}</button>`;
    })
    .join("");
  return `<div class="picker">${buttons}</div>`;
}

export function renderCandidateEditor(state: SessionState): string {
  if (state.candidates.length === 0) {
    return `<p class="hint">no candidate combinations yet</p>`;
  }
  return state.candidates
    .map((combo, i) => {
      const unknown = state.unknownCourse && combo.includes(state.unknownCourse);
      const inlineError = unknown
        ? `<span class="inline-error">unknown course: ${escapeHtml(state.unknownCourse!)}</span>`
        : "";
      return `
      <fieldset class="candidate${unknown ? " has-error" : ""}" data-candidate="${i}">
        <legend>plan ${String.fromCharCode(65 + i)} (${combo.length} courses)${inlineError}</legend>
        ${renderCoursePicker(state, i)}
        <button data-action="remove-candidate" data-candidate="${i}">remove</button>
      </fieldset>`;
    })
    .join("");
}

export function renderResults(ranked: RankedCandidate[], scoreError: string | null): string {
  if (scoreError) {
    return `<div class="banner error" role="alert">${escapeHtml(scoreError)}</div>`;
  }
  if (ranked.length === 0) {
    return `<p class="hint">results appear here after scoring</p>`;
  }
  const rows = ranked
    .map((candidate, position) => {
      const pct = Math.round(candidate.probability * 1000) / 10;
      const width = Math.max(2, Math.round(candidate.probability * 100));
      return `
      <div class="result-row" data-candidate="${candidate.index}">
        <span class="rank">#${position + 1}</span>
        <span class="name">plan ${String.fromCharCode(65 + candidate.index)}:
          ${candidate.courses.map(escapeHtml).join(", ")}</span>
        <div class="track"><div class="fill" style="width:${width}%"></div></div>
        <span class="value">${pct.toFixed(1)}%</span>
      </div>`;
    })
    .join("");
  return `<div class="results">${rows}</div>`;
}

export function renderHistory(state: SessionState): string {
  if (state.history.length === 0) {
    return `<p class="hint">no history yet; add grades or upload a transcript CSV</p>`;
  }
  return state.history
    .map(
      (period) => `
      <div class="period">
        <strong>${escapeHtml(period.period)}</strong>
        ${period.grades
          .map((g) => `<span class="grade">${escapeHtml(g.course)}: ${g.grade}</span>`)
          .join(" ")}
      </div>`,
    )
    .join("");
}
