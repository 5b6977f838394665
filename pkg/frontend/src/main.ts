/** Page wiring: form, advice panel, live scan strip and what-if slider.
 *
 * All state lives in the DOM and a handful of module locals; the modules
 * this file pulls in are pure, so everything interesting is testable
 * without a browser.
 */

import { ApiClient, ApiError } from "./api";
import type { ModelInfo } from "./api";
import {
  FIELD_LABELS, REQUIRED_FIELDS, SPEED_FIELD,
  advisePayload, boundText, predictPayload, readForm, scanPayload,
} from "./form";
import type { FormReading } from "./form";
import { adviceHtml, predictionReadout, traceStripHtml } from "./advice";
import { LatestWinsChannel } from "./slider";

const api = new ApiClient();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const banner = el<HTMLDivElement>("banner");
const bannerText = el<HTMLSpanElement>("banner-text");
const modelStatus = el<HTMLParagraphElement>("model-status");
const form = el<HTMLFormElement>("coil-form");
const fieldsBox = el<HTMLDivElement>("fields");
const submitButton = el<HTMLButtonElement>("submit");
const advicePanel = el<HTMLDivElement>("advice");
const adviceStale = el<HTMLParagraphElement>("advice-stale");
const scanStrip = el<HTMLDivElement>("scan-strip");
const slider = el<HTMLInputElement>("speed-slider");
const sliderReadout = el<HTMLDivElement>("what-if-readout");
const retryButton = el<HTMLButtonElement>("retry-model");

let model: ModelInfo | null = null;
let reading: FormReading = { values: {}, errors: {}, complete: false };
let scannedBath = "";
let advisedPayload = "";

function showBanner(message: string): void {
  bannerText.textContent = message;
  banner.hidden = false;
}

el<HTMLButtonElement>("banner-dismiss").addEventListener("click", () => {
  banner.hidden = true;
});

function describeError(error: unknown): string {
  if (error instanceof ApiError) {
    return error.status === 503
      ? "models not loaded on the service; train and reload, then retry"
      : error.message;
  }
  return error instanceof Error ? error.message : String(error);
}

/** Bath fields are whatever the network was trained on, minus speed. */
function bathFields(info: ModelInfo): string[] {
  return info.network.features.filter((name) => name !== SPEED_FIELD);
}

const scanChannel = new LatestWinsChannel<Record<string, number>, { trace: { v: number; prediction: "defect" | "no_defect" }[] }>({
  minIntervalMs: 250,
  send: (bath) => api.scan(bath),
  onResult: (_bath, result) => {
    scanStrip.innerHTML = traceStripHtml(result.trace);
  },
  onError: (_bath, error) => {
    scanStrip.innerHTML = '<div class="strip strip-empty">scan failed</div>';
    showBanner(`speed scan failed: ${describeError(error)}`);
  },
});

const predictChannel = new LatestWinsChannel<number, Awaited<ReturnType<ApiClient["predict"]>>>({
  minIntervalMs: 100,
  send: (v) => {
    if (model === null) {
      return Promise.reject(new Error("model metadata not loaded"));
    }
    return api.predict(predictPayload(reading.values, v, model.network.features));
  },
  onResult: (v, result) => {
    sliderReadout.innerHTML = predictionReadout(v, result.class, result.scores);
  },
  onError: (_v, error) => {
    sliderReadout.textContent = "prediction failed";
    showBanner(`what-if prediction failed: ${describeError(error)}`);
  },
});

function buildFields(info: ModelInfo): void {
  const names: string[] = [...REQUIRED_FIELDS, SPEED_FIELD];
  fieldsBox.innerHTML = "";
  for (const name of names) {
    const bound = info.bounds[name];
    const row = document.createElement("label");
    row.className = "field";
    row.innerHTML =
      `<span class="field-label">${FIELD_LABELS[name] ?? name}</span>`
      + `<input name="${name}" autocomplete="off" inputmode="decimal"`
      + ` placeholder="${bound ? boundText(bound) : ""}" />`
      + `<span class="field-hint">${bound ? boundText(bound) : ""}</span>`
      + '<span class="field-error"></span>';
    fieldsBox.appendChild(row);
  }
}

function rawValues(): Record<string, string> {
  const raw: Record<string, string> = {};
  for (const input of form.querySelectorAll<HTMLInputElement>("input[name]")) {
    raw[input.name] = input.value;
  }
  return raw;
}

function paintFieldErrors(): void {
  for (const row of fieldsBox.querySelectorAll<HTMLLabelElement>(".field")) {
    const input = row.querySelector<HTMLInputElement>("input");
    const errorBox = row.querySelector<HTMLSpanElement>(".field-error");
    if (!input || !errorBox) {
      continue;
    }
    const untouched = input.value.trim() === "";
    const message = reading.errors[input.name];
    const show = message !== undefined && !(untouched && input.name !== SPEED_FIELD);
    errorBox.textContent = show ? message : "";
    row.classList.toggle("field-bad", show);
  }
}

/** Re-read the form, gate the submit button and the slider, and keep the
 * live strip in step with the bath inputs. */
function refresh(): void {
  if (model === null) {
    return;
  }
  reading = readForm(rawValues(), model.bounds);
  paintFieldErrors();
  submitButton.disabled = !reading.complete;
  slider.disabled = !reading.complete;

  const bath = bathFields(model);
  const bathReady = bath.every((name) => name in reading.values);
  if (!bathReady) {
    scannedBath = "";
    scanChannel.reset();
    predictChannel.reset();
    scanStrip.innerHTML =
      '<div class="strip strip-empty">fill the tank conditions to scan</div>';
  } else {
    const payload = scanPayload(reading.values, model.network.features);
    const signature = JSON.stringify(payload);
    if (signature !== scannedBath) {
      scannedBath = signature;
      predictChannel.reset();
      scanChannel.set(payload);
      if (reading.complete) {
        predictChannel.set(Number(slider.value));
      }
    }
  }

  adviceStale.hidden = !(advisedPayload !== ""
    && reading.complete
    && JSON.stringify(advisePayload(reading.values)) !== advisedPayload);
}

async function submitAdvice(): Promise<void> {
  if (model === null || !reading.complete) {
    return;
  }
  const payload = advisePayload(reading.values);
  submitButton.disabled = true;
  submitButton.textContent = "advising…";
  try {
    const advice = await api.advise(payload);
    advicePanel.innerHTML = adviceHtml(advice);
    advisedPayload = JSON.stringify(payload);
    adviceStale.hidden = true;
  } catch (error) {
    showBanner(`advice request failed: ${describeError(error)}`);
  } finally {
    submitButton.textContent = "advise";
    submitButton.disabled = !reading.complete;
  }
}

function wireSlider(info: ModelInfo): void {
  slider.min = String(info.grid.v_min);
  slider.max = String(info.grid.v_max);
  slider.step = String(info.grid.step);
  slider.value = String((info.grid.v_min + info.grid.v_max) / 2);
  slider.addEventListener("input", () => {
    el<HTMLSpanElement>("slider-value").textContent = slider.value;
    if (reading.complete) {
      predictChannel.set(Number(slider.value));
    }
  });
  el<HTMLSpanElement>("slider-value").textContent = slider.value;
}

function paintModelStatus(info: ModelInfo): void {
  const net = info.network;
  const convergence = net.converged
    ? `converged in ${net.epochs} epochs`
    : `not converged (${net.residual_conflicts} conflicts)`;
  modelStatus.textContent =
    `tree: ${info.tree.size} nodes, depth ${info.tree.depth} · `
    + `network: ${net.units} units, ${convergence} · `
    + `scan ${info.grid.v_min}–${info.grid.v_max} step ${info.grid.step}`;
}

async function boot(): Promise<void> {
  retryButton.hidden = true;
  modelStatus.textContent = "loading model metadata…";
  try {
    model = await api.model();
  } catch (error) {
    modelStatus.textContent = "service unavailable";
    retryButton.hidden = false;
    showBanner(`could not load model metadata: ${describeError(error)}`);
    return;
  }
  paintModelStatus(model);
  buildFields(model);
  wireSlider(model);
  form.addEventListener("input", refresh);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void submitAdvice();
  });
  const speedInput = form.querySelector<HTMLInputElement>(
    `input[name="${SPEED_FIELD}"]`);
  speedInput?.addEventListener("change", () => {
    if (speedInput.value.trim() !== "" && SPEED_FIELD in reading.values) {
      slider.value = String(reading.values[SPEED_FIELD]);
      el<HTMLSpanElement>("slider-value").textContent = slider.value;
      if (reading.complete) {
        predictChannel.set(Number(slider.value));
      }
    }
  });
  refresh();
}

retryButton.addEventListener("click", () => {
  void boot();
});

void boot();
