/** HTML-string rendering of a SessionView.  Kept free of DOM calls so the
 * templates are unit-testable; main.ts owns insertion and event wiring. */

import type { QueryView, SessionView } from "./api.js";
import {
  PendingCorrection,
  dashboardSeries,
  isSubmittableCorrection,
  polylinePoints,
  tripletChoices,
} from "./model.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function renderThresholdQuery(query: QueryView, pending: PendingCorrection | null): string {
  const points = [...query.points!].sort((a, b) => a.x - b.x);
  const marks = points
    .map((point) => {
      const armed = pending?.component === point.index;
      const shown = armed ? 1 - point.label : point.label;
      return `<button class="point${armed ? " armed" : ""}" data-component="${point.index}"
        style="left:${(point.x * 100).toFixed(1)}%" title="x=${point.x.toFixed(3)}">
        ${shown}</button>`;
    })
    .join("");
  return `
    <p class="hint">Each point shows the learner's proposed 0/1 label.
      Click a point to arm the flipped label as your correction.</p>
    <div class="numberline">${marks}</div>`;
}

function renderTripletQuery(query: QueryView, pending: PendingCorrection | null): string {
  const rows = query.triplets!
    .map((triplet) => {
      const choices = tripletChoices(query, triplet.index)
        .map((option) => {
          const armed =
            pending?.component === triplet.index && pending.value === option;
          const shown = option === triplet.displayed;
          return `<button class="topo${armed ? " armed" : ""}${shown ? " shown" : ""}"
            data-component="${triplet.index}" data-value="${escapeHtml(option)}"
            ${shown ? "disabled" : ""}>${escapeHtml(option)}</button>`;
        })
        .join("");
      return `<tr><td>{${triplet.leaves.join(", ")}}</td><td>${choices}</td></tr>`;
    })
    .join("");
  return `
    <p class="hint">The learner proposes the subtree
      <code>${escapeHtml(query.subtree ?? "")}</code>.
      Pick the true topology for one triplet it resolves wrongly.</p>
    <table class="triplets">
      <thead><tr><th>triplet</th><th>topology (shown first)</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>`;
}

function renderLabelsQuery(query: QueryView, pending: PendingCorrection | null): string {
  const cells = query.labels!
    .map((entry) => {
      const armed = pending?.component === entry.index;
      const shown = armed ? 1 - entry.label : entry.label;
      return `<button class="point${armed ? " armed" : ""}" data-component="${entry.index}">
        ${shown}</button>`;
    })
    .join("");
  return `<p class="hint">Click a component to arm the flipped label.</p>
    <div class="labelrow">${cells}</div>`;
}

export function renderQuery(query: QueryView, pending: PendingCorrection | null): string {
  if (query.kind === "threshold") return renderThresholdQuery(query, pending);
  if (query.kind === "triplet") return renderTripletQuery(query, pending);
  return renderLabelsQuery(query, pending);
}

export function renderDashboard(view: SessionView): string {
  const series = dashboardSeries(view.history);
  const sizeLine = polylinePoints(series.sizes, 360, 80);
  const errLine = series.errs ? polylinePoints(series.errs, 360, 80) : null;
  const latest = view.history[view.history.length - 1];
  const errText =
    typeof view.err === "number"
      ? ` · err ${view.err.toFixed(3)} · err_c ${view.err_c!.toFixed(4)}`
      : "";
  return `
    <div class="stats">step ${view.step} · version space ${latest.version_space_size}${errText}</div>
    <svg viewBox="0 0 360 80" class="chart" preserveAspectRatio="none">
      <polyline class="sizes" points="${sizeLine}" />
      ${errLine ? `<polyline class="errs" points="${errLine}" />` : ""}
    </svg>`;
}

export function renderFinalPanel(view: SessionView): string {
  const final = view.final_hypothesis!;
  return `
    <div class="final">
      <h2>Session terminated</h2>
      <p>Surviving hypothesis #${final.id}:</p>
      <code>${escapeHtml(final.label)}</code>
      <p>${view.version_space_size} hypothesis(es) remain consistent.</p>
    </div>`;
}

export function renderSession(view: SessionView, pending: PendingCorrection | null): string {
  const dashboard = renderDashboard(view);
  if (view.terminated) {
    return dashboard + renderFinalPanel(view);
  }
  const canCorrect = view.query ? isSubmittableCorrection(view.query, pending) : false;
  const acceptNote =
    view.mode === "authoritative"
      ? `<p class="warning">Accept asserts that <strong>all ${view.space.c} displayed
         values</strong> are correct; there is no undo.</p>`
      : "";
  return `
    ${dashboard}
    <div class="query">${view.query ? renderQuery(view.query, pending) : ""}</div>
    ${acceptNote}
    <div class="actions">
      <button id="accept">Accept</button>
      <button id="submit-correction" ${canCorrect ? "" : "disabled"}>
        Submit correction</button>
    </div>`;
}
