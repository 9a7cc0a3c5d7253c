/**
 * UI round-trip against a live service: a scripted expert session on
 * TripletTree(n=5, m=4) in Oracle mode must shrink the version space to
 * exactly the target, the exported transcript must replay via the CLI to the
 * identical final state, and the stale-step / non-correction guards must fire.
 */

import { execFile, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, SessionApi, type SessionView } from "../src/api.js";
import { buildAcceptPayload, buildCorrectionPayload } from "../src/model.js";

const run = promisify(execFile);
const PORT = 8876;
const SPACE = "triplet:n=5,m=4";

let server: ChildProcess;
const api = new SessionApi(`http://127.0.0.1:${PORT}`);

async function waitForServer(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt += 1) {
    try {
      await api.listSpaces();
      return;
    } catch {
      await new Promise((resolve) => setTimeout(resolve, 150));
    }
  }
  throw new Error("session service did not come up");
}

/** Play one step as a perfect expert, probing topologies through the 422
 * guard exactly as a cautious human would. */
async function expertStep(id: string, view: SessionView): Promise<SessionView> {
  for (const triplet of view.query!.triplets!) {
    for (const option of triplet.options) {
      if (option === triplet.displayed) continue;
      try {
        return await api.submitFeedback(
          id,
          buildCorrectionPayload(view, { component: triplet.index, value: option }),
        );
      } catch (error) {
        if (error instanceof ApiError && error.status === 422) {
          continue; // this component (or value) is not a valid correction
        }
        throw error;
      }
    }
  }
  return api.submitFeedback(id, buildAcceptPayload(view));
}

beforeAll(async () => {
  server = spawn("pclab", ["serve", "--port", String(PORT)], {
    stdio: "ignore",
  });
  await waitForServer();
}, 30_000);

afterAll(() => {
  server.kill();
});

describe("oracle round-trip on the 5-leaf tree space", () => {
  let id: string;
  let view: SessionView;
  let transcript: string;

  it("creates a session with 105 candidate trees and 4 triplets per query", async () => {
    const created = await api.createSession({ space: SPACE, mode: "oracle", seed: 3 });
    id = created.id;
    view = created.view;
    expect(view.version_space_size).toBe(105);
    expect(view.space.c).toBe(4);
    expect(view.query!.triplets!).toHaveLength(4);
  });

  it("rejects a non-correction with 422", async () => {
    const shown = view.query!.triplets![0];
    await expect(
      api.submitFeedback(id, {
        step: view.step,
        action: "correct",
        component: shown.index,
        value: shown.displayed,
      }),
    ).rejects.toMatchObject({ status: 422, code: "not_a_correction" });
  });

  it("rejects a stale step echo with 409 and leaves state unchanged", async () => {
    const before = await api.getState(id);
    await expect(
      api.submitFeedback(id, { step: before.step + 5, action: "accept" }),
    ).rejects.toMatchObject({ status: 409, code: "stale_step" });
    const after = await api.getState(id);
    expect(after.step).toBe(before.step);
    expect(after.version_space_size).toBe(before.version_space_size);
  });

  it("shrinks the version space monotonically to exactly the target", async () => {
    const sizes = [view.version_space_size];
    while (!view.terminated) {
      view = await expertStep(id, view);
      sizes.push(view.version_space_size);
      expect(sizes[sizes.length - 1]).toBeLessThanOrEqual(sizes[sizes.length - 2]);
    }
    expect(view.version_space_size).toBe(1);
    expect(view.final_hypothesis).toBeDefined();
    expect(view.err).toBe(0);
  });

  it("exports a transcript that replays via the CLI to the identical state", async () => {
    transcript = await api.exportTranscript(id);
    expect(transcript.trim().length).toBeGreaterThan(0);
    const path = join(mkdtempSync(join(tmpdir(), "pclab-ui-")), "session.jsonl");
    writeFileSync(path, transcript);
    const { stdout } = await run("pclab", [
      "simulate", "--space", SPACE, "--replay", path,
    ]);
    const final = stdout.split("\n").find((line) => line.startsWith("final "));
    expect(final).toContain("version_space=1");
    expect(final).toContain(`hypothesis=${view.final_hypothesis!.id}`);
    const lastStep = stdout
      .split("\n")
      .filter((line) => line.startsWith("step="))
      .at(-1);
    expect(lastStep).toContain(`step=${view.step}`);
  });
});
