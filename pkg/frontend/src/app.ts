// DOM glue: owns the single mutable state snapshot, re-renders after every
// transition, and sequences service calls (newest submission wins).

import { ServiceClient } from "./api.js";
import type { ApiError, HistoryPeriod } from "./api.js";
import { parseTranscriptCsv } from "./csv.js";
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
  setCatalogError,
  setHistory,
  toggleCourse,
  validateForScoring,
  type SessionState,
} from "./state.js";
import {
  renderCandidateEditor,
  renderErrorBanner,
  renderHistory,
  renderResults,
} from "./render.js";

function describeError(err: ApiError): string {
  switch (err.kind) {
    case "network":
      return `service unreachable: ${err.detail}`;
    case "bad_request":
      return `request rejected (${err.error})${err.detail ? `: ${err.detail}` : ""}`;
    case "unknown_course":
      return `unknown course: ${err.course}`;
    case "server":
      return `service error (HTTP ${err.status})`;
  }
}

export function startApp(root: HTMLElement, baseUrl: string): void {
  const client = new ServiceClient(baseUrl);
  let state: SessionState = initialState();

  function update(next: SessionState): void {
    state = next;
    render();
  }

  function render(): void {
    const banner = renderErrorBanner(state.catalogError, "reload-catalog");
    const validation = validateForScoring(state);
    root.innerHTML = `
      ${banner}
      <section>
        <h2>grade history</h2>
        <div id="history">${renderHistory(state)}</div>
        <form id="grade-form">
          <input name="period" placeholder="period e.g. 2023-1" required>
          <select name="course">${state.catalog
            .map((c) => `<option value="${c}">${c}</option>`)
            .join("")}</select>
          <input name="grade" placeholder="grade 0-20 or R" required>
          <button type="submit">add grade</button>
        </form>
        <label class="upload">upload transcript CSV
          <input type="file" id="csv-upload" accept=".csv,text/csv">
        </label>
      </section>
      <section>
        <h2>candidate combinations</h2>
        <div id="candidates">${renderCandidateEditor(state)}</div>
        <button data-action="add-candidate">add combination</button>
        <button data-action="score" ${validation ? "disabled" : ""}
          title="${validation ?? "score all candidates"}">compare plans</button>
      </section>
      <section>
        <h2>predicted success</h2>
        <div id="results">${renderResults(rankedCandidates(state), state.scoreError)}</div>
      </section>`;
    wire();
  }

  function wire(): void {
    root.querySelectorAll<HTMLElement>("[data-action]").forEach((el) => {
      el.addEventListener("click", (event) => {
        event.preventDefault();
        dispatch(el.dataset.action!, el.dataset);
      });
    });
    const form = root.querySelector<HTMLFormElement>("#grade-form");
    form?.addEventListener("submit", (event) => {
      event.preventDefault();
      const data = new FormData(form);
      const gradeText = String(data.get("grade") ?? "").trim();
      const grade = gradeText === "R" ? ("R" as const) : Number(gradeText);
      if (grade !== "R" && (!Number.isInteger(grade) || grade < 0 || grade > 20)) return;
      update(
        addHistoryGrade(state, String(data.get("period")), {
          course: String(data.get("course")),
          grade,
        }),
      );
    });
    const upload = root.querySelector<HTMLInputElement>("#csv-upload");
    upload?.addEventListener("change", async () => {
      const file = upload.files?.[0];
      if (!file) return;
      try {
        const history: HistoryPeriod[] = parseTranscriptCsv(await file.text());
        update(setHistory(state, history));
      } catch (err) {
        update(applyScoreError(state, state.requestCounter, String(err)));
      }
    });
  }

  function dispatch(action: string, data: DOMStringMap): void {
    switch (action) {
      case "reload-catalog":
        void loadCatalog();
        break;
      case "add-candidate":
        update(addCandidate(state));
        break;
      case "remove-candidate":
        update(removeCandidate(state, Number(data.candidate)));
        break;
      case "toggle-course":
        update(toggleCourse(state, Number(data.candidate), data.course!));
        break;
      case "score":
        void score();
        break;
    }
  }

  async function loadCatalog(): Promise<void> {
    try {
      const catalog = await client.fetchCatalog();
      update(setCatalog(state, catalog.courses, catalog.failure_rates));
    } catch (err) {
      update(setCatalogError(state, describeError(err as ApiError)));
    }
  }

  async function score(): Promise<void> {
    const invalid = validateForScoring(state);
    if (invalid) {
      update(applyScoreError(state, state.requestCounter, invalid));
      return;
    }
    const begun = beginRequest(state);
    update(begun.state);
    try {
      const response = await client.score({
        history: state.history,
        candidates: state.candidates,
      });
      update(applyResponse(state, begun.requestId, response));
    } catch (err) {
      const apiError = err as ApiError;
      update(
        applyScoreError(
          state,
          begun.requestId,
          describeError(apiError),
          apiError.kind === "unknown_course" ? apiError.course : null,
        ),
      );
    }
  }

  render();
  void loadCatalog();
}
