import { curvePolylinePoints, formatRate } from "./csv.js";
import { renderDiffHtml } from "./diff.js";
import type { ApiRecordDetail, CurvePoint, ReviewItemView, Stats } from "./types.js";
import { toReviewItem } from "./types.js";

const escapeHtml = (text: string): string =>
  text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");

export function renderQueueList(
  container: HTMLElement,
  items: ReviewItemView[],
  selectedIndex: number,
  total: number,
): void {
  const rows = items
    .map((item, index) => {
      const classes = ["queue-row"];
      if (index === selectedIndex) classes.push("selected");
      const badge = item.prediction === null ? item.error ?? item.gateVerdict : item.backendLabel;
      return `<li class="${classes.join(" ")}" data-index="${index}" data-id="${escapeHtml(item.id)}">
        <span class="queue-id">${escapeHtml(item.id)}</span>
        <span class="queue-badge">${escapeHtml(badge ?? "")}</span>
      </li>`;
    })
    .join("");
  container.innerHTML = `
    <div class="queue-header">${total} pending</div>
    <ul class="queue-list">${rows}</ul>`;
}

export function renderDetail(container: HTMLElement, detail: ApiRecordDetail): void {
  const item = toReviewItem(detail, detail);
  const referenceRows = item.references
    .map(
      (ref) => `<li class="${ref.resolved ? "ref-resolved" : "ref-unresolved"}">
        article ${escapeHtml(ref.articleId)}${ref.act ? ` — ${escapeHtml(ref.act)}` : " (act unresolved)"}
      </li>`,
    )
    .join("");
  const diffBlock =
    detail.diff !== null
      ? `<section class="pane diff-pane"><h3>Diff vs gold</h3><pre class="diff">${renderDiffHtml(detail.diff)}</pre></section>`
      : "";
  const predictionBlock =
    item.prediction !== null
      ? `<pre>${escapeHtml(item.prediction)}</pre>`
      : `<p class="error">no prediction — ${escapeHtml(item.error ?? item.gateVerdict)}</p>`;

  container.innerHTML = `
    <header class="detail-header">
      <span class="record-id">${escapeHtml(item.id)}</span>
      <span class="backend">${escapeHtml(item.backendLabel)}</span>
      <span class="state state-${item.reviewState}">${item.reviewState}</span>
    </header>
    <ul class="references">${referenceRows || "<li>no references extracted</li>"}</ul>
    <div class="panes">
      <section class="pane"><h3>Modification section</h3><pre>${escapeHtml(item.modificationSection)}</pre></section>
      <section class="pane"><h3>Existing article</h3><pre>${escapeHtml(item.existingArticle)}</pre></section>
      <section class="pane"><h3>Prediction</h3>${predictionBlock}</section>
    </div>
    ${diffBlock}
    <section class="amend-box">
      <h3>Amend (Ctrl+Enter to submit, identical text approves instead)</h3>
      <textarea id="amend-text" rows="6">${escapeHtml(item.prediction ?? "")}</textarea>
      <div class="actions">
        <button id="approve-button" ${item.prediction === null ? "disabled" : ""}>approve (a)</button>
        <button id="amend-button">amend (Ctrl+Enter)</button>
      </div>
    </section>`;
}

export function renderStats(container: HTMLElement, stats: Stats, curve: CurvePoint[]): void {
  const backendRows = Object.entries(stats.per_backend)
    .map(
      ([label, s]) => `<tr>
        <td>${escapeHtml(label)}</td>
        <td>${formatRate(s.possible_rate)}</td>
        <td>${formatRate(s.correctness_rate_among_possible)}</td>
      </tr>`,
    )
    .join("");
  const polyline = curvePolylinePoints(curve, 480, 160);
  const ticks = curve
    .map((p) => `${p.length_threshold}`)
    .join(", ");
  container.innerHTML = `
    <h2>Consolidation statistics</h2>
    <table class="stats-table">
      <thead><tr>
        <th>Model</th>
        <th>Rate of possible consolidations</th>
        <th>Correctness rate among possible consolidations</th>
      </tr></thead>
      <tbody>${backendRows || '<tr><td colspan="3">no records</td></tr>'}</tbody>
    </table>
    <h3>Correctness against prompt length</h3>
    <svg viewBox="0 0 480 160" class="curve" role="img" aria-label="correctness against prompt length">
      <polyline fill="none" points="${polyline}"></polyline>
    </svg>
    <p class="curve-legend">thresholds: ${escapeHtml(ticks) || "no scored samples yet"}</p>`;
}

export function renderMessage(container: HTMLElement, text: string, kind: "info" | "conflict" = "info"): void {
  container.innerHTML = `<span class="message message-${kind}">${escapeHtml(text)}</span>`;
}
