// Dashboard page wiring: poll one session (from ?session=...) and plot it.

import { Api } from "./api.js";
import { DashboardState, followSession } from "./dashboard.js";
import { renderMarginals, renderSeries } from "./render.js";

function draw(root: HTMLElement, state: DashboardState): void {
  const latest = state.latest;
  if (!latest) return;
  root.innerHTML = `
    <h2>Session ${latest.session_id.slice(0, 8)}… (${latest.status},
      ${latest.history_length} answered)</h2>
    ${renderMarginals(latest.theory_marginals, latest.map_theory)}
    ${renderSeries(state.series)}`;
}

export function boot(): void {
  const root = document.getElementById("dashboard");
  if (!root) throw new Error("missing #dashboard container");
  const sessionId = new URLSearchParams(window.location.search).get("session");
  if (!sessionId) {
    root.innerHTML = `<p>Open this page with ?session=&lt;id&gt;.</p>`;
    return;
  }
  const state = new DashboardState();
  void followSession(new Api(), sessionId, state, (s) => draw(root, s));
}

if (typeof document !== "undefined") boot();
