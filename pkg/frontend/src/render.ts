/** Pure HTML-string builders, kept separate from DOM wiring so they can
 * be tested without a browser.
 *
 * Arabic panes render right-to-left with each value wrapped in an
 * isolating <bdi>; mixed-direction bleed would otherwise make what the
 * evaluator sees disagree with the character offsets their error marks
 * record.
 */

import { ErrorMark, wordSpans } from "./marks";
import { Draft } from "./session";
import {
  ASPECTS,
  ASPECT_LABELS,
  AggregateReport,
  DIMENSION_LABELS,
  ERROR_DIMENSIONS,
  QueueItem,
} from "./types";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function bidi(text: string): string {
  return `<bdi>${escapeHtml(text)}</bdi>`;
}

/** Render a pane's text with each word in a selectable span carrying its
 * character offsets, and mark classes where a mark covers the word. */
export function renderWords(pane: string, text: string, marks: ErrorMark[]): string {
  const parts: string[] = [];
  let cursor = 0;
  for (const span of wordSpans(text)) {
    parts.push(escapeHtml(text.slice(cursor, span.start)));
    const covering = marks.filter(
      (m) => m.pane === pane && m.start <= span.start && span.end <= m.end,
    );
    const classes = ["w", ...covering.map((m) => `marked dim-${m.dimension}`)];
    parts.push(
      `<span class="${classes.join(" ")}" data-pane="${escapeHtml(pane)}" ` +
        `data-start="${span.start}" data-end="${span.end}">` +
        `${escapeHtml(text.slice(span.start, span.end))}</span>`,
    );
    cursor = span.end;
  }
  parts.push(escapeHtml(text.slice(cursor)));
  return parts.join("");
}

function pane(title: string, body: string, rtl: boolean, paneClass = ""): string {
  const dir = rtl ? ' dir="rtl" lang="ar"' : ' dir="auto"';
  return (
    `<section class="pane ${paneClass}"><h3>${escapeHtml(title)}</h3>` +
    `<div class="pane-body"${dir}>${body}</div></section>`
  );
}

export function renderItem(item: QueueItem, draft: Draft): string {
  const { narration, bundle, neighbors } = item;
  const marks = draft.marks;
  const out: string[] = [];
  const flags = narration.qc_flags.length ? ` — flags: ${narration.qc_flags.join(", ")}` : "";
  const fidelity = narration.fidelity === null ? "–" : narration.fidelity.toFixed(3);
  out.push(
    `<header class="item-head"><code>${escapeHtml(narration.narration_id)}</code> ` +
      `(${escapeHtml(narration.book_id)}, pages ${narration.page_start}–${narration.page_end}, ` +
      `fidelity ${fidelity})${escapeHtml(flags)}</header>`,
  );
  out.push(pane("chain", renderWords("chain", narration.chain, marks), true, "pane-chain"));
  out.push(pane("text", renderWords("text", narration.text, marks), true, "pane-text"));
  if (bundle) {
    if (bundle.diacritized_chain) {
      out.push(
        pane("diacritized chain", renderWords("diacritized_chain", bundle.diacritized_chain, marks), true),
      );
    }
    if (bundle.diacritized_text) {
      out.push(
        pane("diacritized text", renderWords("diacritized_text", bundle.diacritized_text, marks), true),
      );
    }
    for (const [lang, text] of Object.entries(bundle.translations)) {
      out.push(
        pane(`translation (${lang})`, renderWords(`translation:${lang}`, text, marks), false, "pane-translation"),
      );
    }
    if (bundle.summary) {
      out.push(pane("summary", renderWords("summary", bundle.summary, marks), true));
    }
    if (bundle.key_points && bundle.key_points.length) {
      const items = bundle.key_points.map((p) => `<li>${bidi(p)}</li>`).join("");
      out.push(pane("key points", `<ul>${items}</ul>`, true));
    }
    if (bundle.tags && bundle.tags.length) {
      const tags = bundle.tags.map((t) => `<span class="tag">${bidi(t)}</span>`).join(" ");
      out.push(pane("tags", tags, false));
    }
  }
  if (neighbors.length) {
    const links = neighbors.map((n) => `<code>${escapeHtml(n)}</code>`).join(", ");
    out.push(pane("group members", links, false));
  }
  return out.join("\n");
}

export function renderScoreForm(draft: Draft): string {
  const rows = ASPECTS.map((aspect) => {
    const entry = draft.scores[aspect];
    const isNa = entry === "na";
    const value = typeof entry === "number" ? String(entry) : "";
    return (
      `<tr data-aspect="${aspect}"><th>${escapeHtml(ASPECT_LABELS[aspect])}</th>` +
      `<td><input type="number" class="score" min="0" max="10" step="0.5" ` +
      `value="${value}"${isNa ? " disabled" : ""}></td>` +
      `<td><label><input type="checkbox" class="na"${isNa ? " checked" : ""}> n/a</label></td></tr>`
    );
  }).join("");
  const dims = ERROR_DIMENSIONS.map(
    (d) => `<option value="${d}">${escapeHtml(DIMENSION_LABELS[d])}</option>`,
  ).join("");
  return (
    `<table class="scores"><tbody>${rows}</tbody></table>` +
    `<div class="mark-controls">mark words as <select id="dimension">${dims}</select></div>` +
    `<label class="non-hadith"><input type="checkbox" id="non-hadith"` +
    `${draft.nonHadith ? " checked" : ""}> not a narration</label>` +
    `<textarea id="notes" dir="auto" placeholder="notes">${escapeHtml(draft.notes)}</textarea>` +
    `<button id="submit">submit</button>`
  );
}

function fmt(value: number | null, digits = 2): string {
  return value === null ? "–" : value.toFixed(digits);
}

/** The live panel renders the service's aggregates verbatim; the UI
 * never derives a statistic of its own. */
export function renderAggregatePanel(report: AggregateReport): string {
  const aspectRows = Object.entries(report.aspect_means)
    .map(([k, v]) => `<tr><th>${escapeHtml(k)}</th><td>${fmt(v)}</td></tr>`)
    .join("");
  const rateRows = Object.entries(report.micro_rates)
    .map(
      ([k, v]) =>
        `<tr><th>${escapeHtml(k)}</th><td>${fmt(v)}</td>` +
        `<td>${fmt(report.macro_rates[k] ?? null)}</td></tr>`,
    )
    .join("");
  return (
    `<h2>live aggregates</h2>` +
    `<p class="sample-size">records: <strong id="sample-size">${report.sample_size}</strong> ` +
    `(narrations: ${report.n_narrations})</p>` +
    `<p>overall mean: <strong>${fmt(report.overall_mean)}</strong></p>` +
    `<p>non-narration: ${report.non_hadith_count} (${fmt(report.non_hadith_rate)}%) — ` +
    `critical: ${report.critical_count} (${fmt(report.critical_rate)}%)</p>` +
    `<table class="aspects"><caption>aspect means</caption><tbody>${aspectRows}</tbody></table>` +
    `<table class="rates"><caption>error rates (micro / macro %)</caption>` +
    `<tbody>${rateRows}</tbody></table>`
  );
}

export function renderDone(): string {
  return `<p class="done">queue complete — nothing left to review.</p>`;
}

export function renderFetchError(message: string): string {
  return (
    `<p class="error">could not reach the service: ${escapeHtml(message)}</p>` +
    `<button id="retry">retry</button>`
  );
}
