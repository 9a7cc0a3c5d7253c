/** Pure view-model logic: correction guards, payload construction, and the
 * dashboard series.  Everything here is testable without a DOM or server. */

import type { FeedbackPayload, HistoryPoint, QueryView, SessionView } from "./api.js";

/** A correction the user has armed but not yet submitted. */
export interface PendingCorrection {
  component: number;
  value: string | number;
}

/** Displayed value of one component of the current query. */
export function displayedValue(query: QueryView, component: number): string | number {
  if (query.kind === "threshold") {
    return query.points![component].label;
  }
  if (query.kind === "triplet") {
    return query.triplets![component].displayed;
  }
  return query.labels![component].label;
}

/**
 * Client-side mirror of the service's 422 rule: a correction proposing the
 * value already on display is not a correction and must never be submitted.
 */
export function isSubmittableCorrection(
  query: QueryView,
  pending: PendingCorrection | null,
): boolean {
  if (pending === null) return false;
  return String(displayedValue(query, pending.component)) !== String(pending.value);
}

/** Every submission carries the current step echo (stale-step guard). */
export function buildAcceptPayload(view: SessionView): FeedbackPayload {
  return { step: view.step, action: "accept" };
}

export function buildCorrectionPayload(
  view: SessionView,
  pending: PendingCorrection,
): FeedbackPayload {
  if (!view.query || !isSubmittableCorrection(view.query, pending)) {
    throw new Error("refusing to submit a non-correction");
  }
  return {
    step: view.step,
    action: "correct",
    component: pending.component,
    value: pending.value,
  };
}

/** For threshold points the only alternative label is the flipped bit. */
export function toggledLabel(query: QueryView, component: number): number {
  return 1 - query.points![component].label;
}

/** The three topology choices for a triplet, the displayed one first. */
export function tripletChoices(query: QueryView, component: number): string[] {
  const triplet = query.triplets![component];
  return [
    triplet.displayed,
    ...triplet.options.filter((option) => option !== triplet.displayed),
  ];
}

export interface DashboardSeries {
  steps: number[];
  sizes: number[];
  errs: number[] | null;
}

/** Per-step progress series for the chart; err only when the mode provides it. */
export function dashboardSeries(history: HistoryPoint[]): DashboardSeries {
  const steps = history.map((point) => point.step);
  const sizes = history.map((point) => point.version_space_size);
  const hasErr = history.every((point) => typeof point.err === "number");
  return {
    steps,
    sizes,
    errs: hasErr ? history.map((point) => point.err as number) : null,
  };
}

/** Backend invariant mirrored for display sanity: sizes never increase. */
export function isMonotoneShrinking(history: HistoryPoint[]): boolean {
  for (let i = 1; i < history.length; i += 1) {
    if (history[i].version_space_size > history[i - 1].version_space_size) {
      return false;
    }
  }
  return true;
}

/** Scale a series into an SVG polyline of the given pixel box. */
export function polylinePoints(
  values: number[],
  width: number,
  height: number,
): string {
  if (values.length === 0) return "";
  const max = Math.max(...values, 1);
  const dx = values.length > 1 ? width / (values.length - 1) : 0;
  return values
    .map((value, i) => `${(i * dx).toFixed(1)},${(height - (value / max) * height).toFixed(1)}`)
    .join(" ");
}
