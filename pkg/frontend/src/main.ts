// Subject page wiring: fetch-render loop around the flow state machine.

import { Api } from "./api.js";
import { FlowState, SubjectFlow } from "./session.js";
import { renderCompletion, renderError, renderPair, renderProgress } from "./render.js";

function draw(root: HTMLElement, state: FlowState, flow: SubjectFlow): void {
  if (state.phase === "loading" || state.phase === "idle") {
    root.innerHTML = `<p class="loading">Preparing your session…</p>`;
    return;
  }
  if (state.phase === "error") {
    root.innerHTML = renderError(state.message);
    document.getElementById("retry")?.addEventListener("click", () => void flow.start());
    return;
  }
  if (state.phase === "done") {
    root.innerHTML = renderCompletion(state.posterior);
    return;
  }
  root.innerHTML = `
    ${renderProgress(state.k, state.budget)}
    ${renderPair(state.test)}
    <div class="choose">
      <button id="choose-1">Choose lottery 1</button>
      <button id="choose-2">Choose lottery 2</button>
    </div>
    <p class="hint">Dashboard: <a href="dashboard.html?session=${state.sessionId}" target="_blank">
      ${state.sessionId.slice(0, 8)}…</a></p>`;
  document.getElementById("choose-1")?.addEventListener("click", () => void flow.answer(1));
  document.getElementById("choose-2")?.addEventListener("click", () => void flow.answer(2));
}

export function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const flow: SubjectFlow = new SubjectFlow(new Api(), (state) => draw(root, state, flow));
  void flow.start();
}

if (typeof document !== "undefined") boot();
