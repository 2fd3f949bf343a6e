// Subject-facing flow: one lottery pair at a time, server-driven.

import { Api, ApiError, PairView, PosteriorSummary } from "./api.js";

export type FlowState =
  | { phase: "idle" }
  | { phase: "loading" }
  | { phase: "question"; sessionId: string; budget: number; k: number; test: PairView }
  | { phase: "done"; sessionId: string; posterior: PosteriorSummary }
  | { phase: "error"; message: string };

export class SubjectFlow {
  state: FlowState = { phase: "idle" };
  private submitting = false;

  constructor(
    private readonly api: Api,
    private readonly onUpdate: (state: FlowState) => void = () => {},
  ) {}

  private transition(state: FlowState): FlowState {
    this.state = state;
    this.onUpdate(state);
    return state;
  }

  /** Create a session and show its first pair; on failure show the retry screen. */
  async start(config?: Record<string, unknown>): Promise<FlowState> {
    this.transition({ phase: "loading" });
    try {
      const created = await this.api.createSession(config);
      return this.transition({
        phase: "question",
        sessionId: created.session_id,
        budget: created.budget,
        k: created.k,
        test: created.test,
      });
    } catch (err) {
      return this.transition({ phase: "error", message: String(err) });
    }
  }

  /**
   * Submit the choice for the pair on screen. Re-entrant calls while a
   * submission is in flight, and stale submissions the server rejects as
   * conflicts, leave the view unchanged (double-click safety).
   */
  async answer(choice: 1 | 2): Promise<FlowState> {
    const current = this.state;
    if (current.phase !== "question" || this.submitting) return this.state;
    this.submitting = true;
    try {
      const result = await this.api.answer(current.sessionId, choice, current.k);
      if (result.completed) {
        return this.transition({
          phase: "done",
          sessionId: current.sessionId,
          posterior: result.posterior,
        });
      }
      return this.transition({
        phase: "question",
        sessionId: current.sessionId,
        budget: current.budget,
        k: result.posterior.history_length,
        test: result.next_test!,
      });
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        return this.state; // duplicate submit: ignore, keep the view
      }
      return this.transition({ phase: "error", message: String(err) });
    } finally {
      this.submitting = false;
    }
  }
}
