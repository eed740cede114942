/** Browser bootstrap: wires the session to the page. All review logic
 * lives in session.ts/marks.ts; this file only routes DOM events. */

import { ApiClient } from "./api";
import { ReviewSession, ValidationError } from "./session";
import {
  renderAggregatePanel,
  renderDone,
  renderFetchError,
  renderItem,
  renderScoreForm,
} from "./render";
import { ASPECTS, Aspect, ErrorDimension } from "./types";

const itemRoot = document.getElementById("item") as HTMLElement;
const formRoot = document.getElementById("form") as HTMLElement;
const panelRoot = document.getElementById("panel") as HTMLElement;
const statusRoot = document.getElementById("status") as HTMLElement;

const params = new URLSearchParams(window.location.search);
const evaluatorId =
  params.get("evaluator") || window.localStorage.getItem("evaluator_id") || "";

function boot(): void {
  if (!evaluatorId) {
    itemRoot.innerHTML =
      '<p class="error">append ?evaluator=&lt;your id&gt; to the URL to begin.</p>';
    return;
  }
  window.localStorage.setItem("evaluator_id", evaluatorId);
  const session = new ReviewSession(new ApiClient((u, i) => fetch(u, i)), evaluatorId);

  function paint(): void {
    if (session.done) {
      itemRoot.innerHTML = renderDone();
      formRoot.innerHTML = "";
    } else if (session.current) {
      itemRoot.innerHTML = renderItem(session.current, session.draft);
      formRoot.innerHTML = renderScoreForm(session.draft);
    }
    if (session.lastReport) panelRoot.innerHTML = renderAggregatePanel(session.lastReport);
    statusRoot.textContent = session.fieldError
      ? session.fieldError
      : session.pendingCount() > 0
        ? `${session.pendingCount()} submission(s) queued offline — will retry`
        : "";
  }

  async function load(): Promise<void> {
    try {
      await session.loadNext();
      await session.refreshReport();
      paint();
    } catch (err) {
      itemRoot.innerHTML = renderFetchError(err instanceof Error ? err.message : String(err));
    }
  }

  itemRoot.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.id === "retry") {
      void load();
      return;
    }
    if (target.classList.contains("w")) {
      const select = document.getElementById("dimension") as HTMLSelectElement | null;
      if (!select) return;
      const pane = target.dataset["pane"] ?? "";
      const start = Number(target.dataset["start"]);
      session.markWordAt(pane, start, select.value as ErrorDimension);
      paint();
    }
  });

  formRoot.addEventListener("change", (event) => {
    const target = event.target as HTMLInputElement;
    const row = target.closest("tr[data-aspect]") as HTMLElement | null;
    if (row) {
      const aspect = row.dataset["aspect"] as Aspect;
      if (!ASPECTS.includes(aspect)) return;
      try {
        if (target.classList.contains("na")) {
          if (target.checked) session.markNotApplicable(aspect);
          else session.clearScore(aspect);
          paint();
        } else if (target.classList.contains("score") && target.value !== "") {
          session.setScore(aspect, Number(target.value));
          statusRoot.textContent = "";
        }
      } catch (err) {
        if (err instanceof ValidationError) statusRoot.textContent = err.message;
        else throw err;
      }
      return;
    }
    if (target.id === "non-hadith") session.setNonHadith(target.checked);
    if (target.id === "notes") session.setNotes(target.value);
  });

  formRoot.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.id !== "submit") return;
    void (async () => {
      try {
        const result = await session.submit();
        if (result.status === "queued_offline") {
          window.setTimeout(() => void session.retryPending().then(paint), 2000);
        }
        paint();
      } catch (err) {
        if (err instanceof ValidationError) statusRoot.textContent = err.message;
        else if (err instanceof Error) statusRoot.textContent = err.message;
        paint();
      }
    })();
  });

  void load();
}

boot();
