import { describe, expect, it } from "vitest";

import type { HistoryPoint, QueryView, SessionView } from "../src/api.js";
import {
  buildAcceptPayload,
  buildCorrectionPayload,
  dashboardSeries,
  displayedValue,
  isMonotoneShrinking,
  isSubmittableCorrection,
  polylinePoints,
  toggledLabel,
  tripletChoices,
} from "../src/model.js";
import { renderSession } from "../src/render.js";

const thresholdQuery: QueryView = {
  id: 0,
  kind: "threshold",
  points: [
    { index: 0, x: 0.31, label: 1 },
    { index: 1, x: 0.74, label: 0 },
  ],
};

const tripletQuery: QueryView = {
  id: 2,
  kind: "triplet",
  leaves: ["a", "b", "c", "d"],
  subtree: "(((a,b),c),d)",
  triplets: [
    {
      index: 0,
      leaves: ["a", "b", "c"],
      displayed: "ab|c",
      options: ["ab|c", "ac|b", "bc|a"],
    },
  ],
};

function sessionView(query: QueryView): SessionView {
  return {
    id: "s1",
    mode: "oracle",
    step: 3,
    terminated: false,
    space: { kind: "triplet", n_hypotheses: 105, n_queries: 5, c: 4 },
    version_space_size: 12,
    history: [{ step: 0, version_space_size: 105 }],
    query,
    displayed: [],
  };
}

describe("correction guard", () => {
  it("blocks corrections equal to the displayed value", () => {
    expect(
      isSubmittableCorrection(thresholdQuery, { component: 0, value: 1 }),
    ).toBe(false);
    expect(
      isSubmittableCorrection(tripletQuery, { component: 0, value: "ab|c" }),
    ).toBe(false);
  });

  it("allows genuine corrections", () => {
    expect(
      isSubmittableCorrection(thresholdQuery, { component: 0, value: 0 }),
    ).toBe(true);
    expect(
      isSubmittableCorrection(tripletQuery, { component: 0, value: "bc|a" }),
    ).toBe(true);
  });

  it("requires an armed correction", () => {
    expect(isSubmittableCorrection(thresholdQuery, null)).toBe(false);
  });

  it("throws rather than build a non-correction payload", () => {
    const view = sessionView(thresholdQuery);
    expect(() =>
      buildCorrectionPayload(view, { component: 1, value: 0 }),
    ).toThrow(/non-correction/);
  });
});

describe("payloads", () => {
  it("echo the current step", () => {
    const view = sessionView(tripletQuery);
    expect(buildAcceptPayload(view)).toEqual({ step: 3, action: "accept" });
    expect(
      buildCorrectionPayload(view, { component: 0, value: "ac|b" }),
    ).toEqual({ step: 3, action: "correct", component: 0, value: "ac|b" });
  });
});

describe("query helpers", () => {
  it("reads displayed values per kind", () => {
    expect(displayedValue(thresholdQuery, 1)).toBe(0);
    expect(displayedValue(tripletQuery, 0)).toBe("ab|c");
  });

  it("flips threshold labels", () => {
    expect(toggledLabel(thresholdQuery, 0)).toBe(0);
    expect(toggledLabel(thresholdQuery, 1)).toBe(1);
  });

  it("lists the displayed topology first", () => {
    expect(tripletChoices(tripletQuery, 0)).toEqual(["ab|c", "ac|b", "bc|a"]);
  });
});

describe("dashboard", () => {
  const oracleHistory: HistoryPoint[] = [
    { step: 0, version_space_size: 105, err: 0.4, err_c: 0.1 },
    { step: 1, version_space_size: 40, err: 0.2, err_c: 0.05 },
    { step: 2, version_space_size: 12, err: 0.0, err_c: 0.0 },
  ];

  it("builds aligned series and keeps err only when present", () => {
    const series = dashboardSeries(oracleHistory);
    expect(series.steps).toEqual([0, 1, 2]);
    expect(series.sizes).toEqual([105, 40, 12]);
    expect(series.errs).toEqual([0.4, 0.2, 0.0]);
    const anonymous = dashboardSeries([{ step: 0, version_space_size: 9 }]);
    expect(anonymous.errs).toBeNull();
  });

  it("starts from a single initial point", () => {
    const series = dashboardSeries([{ step: 0, version_space_size: 105 }]);
    expect(series.sizes).toEqual([105]);
  });

  it("detects the monotone-shrinking invariant", () => {
    expect(isMonotoneShrinking(oracleHistory)).toBe(true);
    expect(
      isMonotoneShrinking([
        { step: 0, version_space_size: 10 },
        { step: 1, version_space_size: 12 },
      ]),
    ).toBe(false);
  });

  it("scales polylines into the pixel box", () => {
    expect(polylinePoints([2, 1], 100, 50)).toBe("0.0,0.0 100.0,25.0");
    expect(polylinePoints([], 100, 50)).toBe("");
  });
});

describe("rendering", () => {
  it("disables submit until a correction is armed", () => {
    const view = sessionView(tripletQuery);
    expect(renderSession(view, null)).toContain(
      '<button id="submit-correction" disabled>',
    );
    expect(renderSession(view, { component: 0, value: "bc|a" })).toContain(
      '<button id="submit-correction" >',
    );
  });

  it("offers the three topology options per triplet", () => {
    const html = renderSession(sessionView(tripletQuery), null);
    for (const option of ["ab|c", "ac|b", "bc|a"]) {
      expect(html).toContain(option);
    }
  });

  it("shows the final panel on terminated sessions", () => {
    const view = {
      ...sessionView(tripletQuery),
      terminated: true,
      version_space_size: 1,
      query: undefined,
      final_hypothesis: { id: 0, label: "((((a,b),c),d),e)" },
    };
    const html = renderSession(view, null);
    expect(html).toContain("Session terminated");
    expect(html).toContain("((((a,b),c),d),e)");
  });

  it("warns about authoritative accepts", () => {
    const view = { ...sessionView(thresholdQuery), mode: "authoritative" as const };
    expect(renderSession(view, null)).toContain("all 4 displayed");
  });
});
