/** Page wiring: session setup, action round-trips, and error surfacing.
 * Every action round-trips to the service; a 409 refreshes the view. */

import { ApiError, SessionApi, SessionView } from "./api.js";
import {
  PendingCorrection,
  buildAcceptPayload,
  buildCorrectionPayload,
  displayedValue,
  toggledLabel,
} from "./model.js";
import { renderSession } from "./render.js";

const api = new SessionApi();

let sessionId: string | null = null;
let view: SessionView | null = null;
let pending: PendingCorrection | null = null;

function element<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function showError(message: string): void {
  element("error").textContent = message;
}

function redraw(): void {
  if (view === null) return;
  element("session").innerHTML = renderSession(view, pending);
  bindSessionActions();
}

function applyView(next: SessionView): void {
  view = next;
  pending = null;
  showError("");
  redraw();
}

async function refresh(): Promise<void> {
  if (sessionId === null) return;
  applyView(await api.getState(sessionId));
}

async function act(go: () => Promise<SessionView>): Promise<void> {
  try {
    applyView(await go());
  } catch (error) {
    if (error instanceof ApiError) {
      showError(`${error.code}: ${error.detail}`);
      if (error.status === 409) {
        await refresh(); // stale step: drop local state and re-sync
      }
    } else {
      showError(String(error));
    }
  }
}

function armCorrection(component: number, value: string | number): void {
  if (view?.query === undefined) return;
  const same = String(displayedValue(view.query, component)) === String(value);
  pending =
    same || (pending?.component === component && pending.value === value)
      ? null
      : { component, value };
  redraw();
}

function bindSessionActions(): void {
  const container = element("session");
  container.querySelectorAll<HTMLButtonElement>(".point").forEach((button) => {
    button.addEventListener("click", () => {
      const component = Number(button.dataset.component);
      armCorrection(component, toggledLabel(view!.query!, component));
    });
  });
  container.querySelectorAll<HTMLButtonElement>(".topo").forEach((button) => {
    button.addEventListener("click", () =>
      armCorrection(Number(button.dataset.component), button.dataset.value!),
    );
  });
  element("accept")?.addEventListener("click", () => {
    if (sessionId && view) {
      void act(() => api.submitFeedback(sessionId!, buildAcceptPayload(view!)));
    }
  });
  element("submit-correction")?.addEventListener("click", () => {
    if (sessionId && view && pending) {
      void act(() =>
        api.submitFeedback(sessionId!, buildCorrectionPayload(view!, pending!)),
      );
    }
  });
}

async function startSession(): Promise<void> {
  const space = element<HTMLInputElement>("space-spec").value.trim();
  const mode = element<HTMLSelectElement>("mode").value;
  const seed = Number(element<HTMLInputElement>("seed").value) || 0;
  try {
    const created = await api.createSession({ space, mode, seed });
    sessionId = created.id;
    applyView(created.view);
    element("export").removeAttribute("disabled");
  } catch (error) {
    showError(error instanceof ApiError ? `${error.code}: ${error.detail}` : String(error));
  }
}

async function exportTranscript(): Promise<void> {
  if (sessionId === null) return;
  const text = await api.exportTranscript(sessionId);
  const blob = new Blob([text], { type: "application/jsonl" });
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = `session-${sessionId}.jsonl`;
  link.click();
  URL.revokeObjectURL(link.href);
}

async function populateCatalog(): Promise<void> {
  const { spaces } = await api.listSpaces();
  const datalist = element<HTMLDataListElement>("space-examples");
  datalist.innerHTML = spaces
    .map((entry) => `<option value="${entry.example}">${entry.description}</option>`)
    .join("");
}

export function init(): void {
  element("start").addEventListener("click", () => void startSession());
  element("export").addEventListener("click", () => void exportTranscript());
  void populateCatalog();
}

if (typeof document !== "undefined" && document.getElementById("start")) {
  init();
}
