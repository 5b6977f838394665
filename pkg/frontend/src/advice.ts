/** Render advice payloads and scan traces as HTML fragments.
 *
 * Pure string builders so the rendering contract is testable without a
 * browser; main.ts drops the fragments into the page.
 */

import type { AdviceResponse, TracePoint } from "./api";

function escapeHtml(text: string): string {
  const map: Record<string, string> = {
    "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;", "'": "&#39;",
  };
  return text.replace(/[&<>"']/g, (ch) => map[ch]);
}

/** JSON numbers arrive as plain JS numbers; default formatting already
 * drops trailing zeros (385 not 385.0), matching the service's summaries. */
function speed(value: number): string {
  return String(value);
}

/** One colored cell per scanned speed, clear vs predicted under-pickling,
 * over a labeled speed axis. */
export function traceStripHtml(trace: TracePoint[]): string {
  if (trace.length === 0) {
    return '<div class="strip strip-empty">no scan yet</div>';
  }
  const cells = trace.map((point) => {
    const cls = point.prediction === "defect" ? "cell-defect" : "cell-clear";
    const word = point.prediction === "defect" ? "under-pickling" : "clear";
    return `<span class="cell ${cls}" title="v=${speed(point.v)}: ${word}"></span>`;
  }).join("");
  const lo = speed(trace[0].v);
  const hi = speed(trace[trace.length - 1].v);
  return `<div class="strip">${cells}</div>`
    + `<div class="strip-axis"><span>${lo}</span>`
    + `<span>line speed</span><span>${hi}</span></div>`;
}

/** Advice panel body: the readout (or warning) plus the scan strip. */
export function adviceHtml(advice: AdviceResponse): string {
  let head: string;
  if (advice.kind === "max_speed") {
    head = `<div class="readout">${speed(advice.v_star)}</div>`
      + '<p class="note">maximum admissible line speed; first predicted defect at '
      + `<strong>${speed(advice.first_defect_speed)}</strong></p>`;
  } else if (advice.kind === "speed_range") {
    const [lo, hi] = advice.bounds;
    const range = hi === null
      ? `${speed(lo)} and above`
      : `${speed(lo)} – ${speed(hi)}`;
    head = `<div class="readout">${range}</div>`
      + '<p class="note">whole scan clear; admissible speed class '
      + `<strong>${escapeHtml(advice.class)}</strong></p>`;
  } else {
    head = '<div class="banner banner-warning">no admissible line speed: '
      + `${escapeHtml(advice.reason)}</div>`;
  }
  return head + traceStripHtml(advice.trace);
}

/** What-if readout: predicted class plus the winning score's share. */
export function predictionReadout(v: number, cls: string,
                                  scores: Record<string, number>): string {
  const total = Object.values(scores).reduce((acc, s) => acc + s, 0);
  const share = total > 0 ? scores[cls] / total : null;
  const confidence = share === null ? "n/a" : `${(share * 100).toFixed(0)}%`;
  const word = cls === "defect" ? "under-pickling" : "clear";
  const tone = cls === "defect" ? "verdict-defect" : "verdict-clear";
  return `<span class="verdict ${tone}">${word}</span>`
    + ` at <strong>${speed(v)}</strong>`
    + `<span class="confidence">confidence ${confidence}</span>`;
}
