// Pure HTML renderers. Every probability these display was fetched from the
// service; exact values are carried in data-value attributes so views can be
// audited against the API responses.

import { LotteryView, PairView, PosteriorSummary } from "./api.js";

export const THEORY_ORDER = ["EV", "PT", "MVS", "CRRA"];

function pct(p: number): string {
  const whole = `${(100 * p).toFixed(0)}%`;
  return p > 0 && whole === "0%" ? `${(100 * p).toFixed(1)}%` : whole;
}

function money(x: number): string {
  return x < 0 ? `-$${Math.abs(x)}` : `$${x}`;
}

export function renderLotteryCard(lottery: LotteryView, label: string): string {
  const rows = lottery.payoffs
    .map((payoff, i) => {
      const p = lottery.probs[i] ?? 0;
      return `
      <div class="outcome">
        <span class="payoff">${money(payoff)}</span>
        <span class="bar"><span class="fill" style="width:${(100 * p).toFixed(2)}%"></span></span>
        <span class="prob" data-value="${p}">${pct(p)}</span>
      </div>`;
    })
    .join("");
  return `<div class="lottery-card" data-label="${label}">
    <h3>Lottery ${label}</h3>${rows}
  </div>`;
}

export function renderPair(test: PairView): string {
  return `<div class="pair" data-pair-index="${test.pair_index}">
    ${renderLotteryCard(test.lottery1, "1")}
    ${renderLotteryCard(test.lottery2, "2")}
  </div>`;
}

export function renderProgress(k: number, budget: number): string {
  return `<div class="progress">Question ${k + 1} of ${budget}</div>`;
}

/** Theory marginals table with a MAP badge; rejects non-normalized input. */
export function renderMarginals(
  marginals: Record<string, number>,
  mapTheory: string | null,
): string {
  const total = Object.values(marginals).reduce((a, b) => a + b, 0);
  if (Math.abs(total - 1) > 1e-9) {
    throw new Error(`marginals sum to ${total}, refusing to render`);
  }
  const rows = THEORY_ORDER.filter((t) => t in marginals)
    .map((theory) => {
      const p = marginals[theory] ?? 0;
      const badge = theory === mapTheory ? ` <span class="map-badge">MAP</span>` : "";
      return `<tr data-theory="${theory}">
        <td>${theory}${badge}</td>
        <td class="prob" data-value="${p}">${pct(p)}</td>
      </tr>`;
    })
    .join("");
  return `<table class="marginals"><tbody>${rows}</tbody></table>`;
}

/** One polyline per theory over the answered tests, as inline SVG. */
export function renderSeries(series: Record<string, number>[]): string {
  const width = 600;
  const height = 220;
  if (series.length === 0) {
    return `<svg class="series" viewBox="0 0 ${width} ${height}"></svg>`;
  }
  const step = series.length > 1 ? width / (series.length - 1) : 0;
  const lines = THEORY_ORDER.map((theory, idx) => {
    const pts = series
      .map((snap, i) => `${(i * step).toFixed(1)},${(height * (1 - (snap[theory] ?? 0))).toFixed(1)}`)
      .join(" ");
    return `<polyline class="theory-${idx}" data-theory="${theory}" fill="none" points="${pts}" />`;
  }).join("");
  return `<svg class="series" viewBox="0 0 ${width} ${height}" data-points="${series.length}">${lines}</svg>`;
}

export function renderCompletion(posterior: PosteriorSummary): string {
  return `<div class="completion">
    <h2>Session complete</h2>
    <p>Thank you! You answered ${posterior.history_length} questions.</p>
    ${renderMarginals(posterior.theory_marginals, posterior.map_theory)}
  </div>`;
}

export function renderError(message: string): string {
  return `<div class="error">
    <p>The session service is unreachable.</p>
    <pre>${message.replace(/&/g, "&amp;").replace(/</g, "&lt;")}</pre>
    <button id="retry">Retry</button>
  </div>`;
}
