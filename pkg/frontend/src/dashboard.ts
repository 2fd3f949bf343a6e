// Experimenter view: the evolving per-theory posterior of one session.
// Probabilities are recorded exactly as fetched, one snapshot per answered
// test (poll responses for an unchanged history length are dropped).

import { Api, PosteriorSummary } from "./api.js";

export class DashboardState {
  series: Record<string, number>[] = [];
  latest: PosteriorSummary | null = null;
  private seen = 0;

  /** Record a snapshot; returns true when it extended the series. */
  record(posterior: PosteriorSummary): boolean {
    this.latest = posterior;
    if (posterior.history_length <= this.seen) return false;
    this.seen = posterior.history_length;
    this.series.push({ ...posterior.theory_marginals });
    return true;
  }

  get completed(): boolean {
    return this.latest?.status === "completed";
  }
}

/** Poll until the session completes, recording each new answer's posterior. */
export async function followSession(
  api: Api,
  sessionId: string,
  state: DashboardState,
  onUpdate: (state: DashboardState) => void,
  intervalMs = 1500,
  sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
): Promise<DashboardState> {
  for (;;) {
    const posterior = await api.posterior(sessionId);
    if (state.record(posterior)) onUpdate(state);
    if (state.completed) return state;
    await sleep(intervalMs);
  }
}
