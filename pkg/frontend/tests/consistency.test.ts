import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import type { FetchLike, FieldBound, ModelInfo, TracePoint } from "../src/api";
import { predictionReadout, traceStripHtml } from "../src/advice";
import {
  advisePayload, predictPayload, readForm, scanPayload,
} from "../src/form";
import { LatestWinsChannel } from "../src/slider";

/** Fake service: one ground truth drives /api/scan, /api/predict and
 * /api/advise, exactly like the real service feeds all three from the same
 * network. A hotter tank 3 moves the defect onset up. */
const GRID = { v_min: 100, v_max: 500, step: 5 };
const NETWORK_FEATURES = [
  "T_3", "HCl_1", "Fe2_1", "HCl_2", "Fe2_2", "HCl_3", "Fe2_3", "v",
];

function flipSpeed(bath: Record<string, number>): number {
  return bath.T_3 >= 90 ? 400 : 300;
}

function predictionAt(bath: Record<string, number>, v: number): "defect" | "no_defect" {
  return v >= flipSpeed(bath) ? "defect" : "no_defect";
}

function scanTrace(bath: Record<string, number>): TracePoint[] {
  const points: TracePoint[] = [];
  for (let v = GRID.v_min; v <= GRID.v_max; v += GRID.step) {
    points.push({ v, prediction: predictionAt(bath, v) });
  }
  return points;
}

function bound(lo: number, hi: number, loOpen = true, hiOpen = true): FieldBound {
  return { lo, hi, lo_open: loOpen, hi_open: hiOpen };
}

const MODEL: ModelInfo = {
  tree: { depth: 3, size: 7, features: [], training_samples: 100 },
  network: {
    units: 4, features: NETWORK_FEATURES, theta_plus: 0.4, theta_minus: 0.2,
    converged: true, epochs: 3, residual_conflicts: 0,
    scaler: Object.fromEntries(NETWORK_FEATURES.map((n) => [n, [0, 1] as [number, number]])),
  },
  grid: GRID,
  bounds: {
    W: bound(0, 60, true, false), t_s: bound(0, 30, true, false),
    w_s: bound(0, 2600, true, false),
    T_1: bound(20, 100), T_2: bound(20, 100), T_3: bound(20, 100),
    T_rinse: bound(20, 100), v: bound(0, 600),
    HCl_1: bound(0, 20, true, false), HCl_2: bound(0, 20, true, false),
    HCl_3: bound(0, 20, true, false),
    Fe2_1: bound(0, 250, false, true), Fe2_2: bound(0, 250, false, true),
    Fe2_3: bound(0, 250, false, true),
  },
};

function json(payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status: 200, headers: { "Content-Type": "application/json" },
  });
}

const fakeFetch: FetchLike = async (url, init) => {
  const body = init?.body
    ? (JSON.parse(init.body as string) as Record<string, number>)
    : {};
  if (url.endsWith("/api/model")) {
    return json(MODEL);
  }
  if (url.endsWith("/api/scan")) {
    return json({ trace: scanTrace(body) });
  }
  if (url.endsWith("/api/predict")) {
    const cls = predictionAt(body, body.v);
    const scores = cls === "defect"
      ? { defect: 2, no_defect: 0 }
      : { defect: 0, no_defect: 2 };
    return json({ class: cls, scores });
  }
  if (url.endsWith("/api/advise")) {
    const trace = scanTrace(body);
    const flip = trace.findIndex((p) => p.prediction === "defect");
    const vStar = trace[flip - 1].v;
    return json({
      kind: "max_speed",
      v_star: vStar,
      first_defect_speed: trace[flip].v,
      trace,
      summary: `MAX_SPEED ${vStar} (first defect at ${trace[flip].v})`,
    });
  }
  return new Response("not found", { status: 404 });
};

const RAW_FORM: Record<string, string> = {
  W: "25", t_s: "3", w_s: "1500",
  T_1: "74", T_2: "80", T_3: "85", T_rinse: "60",
  HCl_1: "5", HCl_2: "10", HCl_3: "15",
  Fe2_1: "5", Fe2_2: "5", Fe2_3: "5",
  v: "",
};

/** Class of the strip cell drawn for speed v. */
function stripCellAt(stripHtml: string, v: number): string {
  const classes = [...stripHtml.matchAll(/class="cell (cell-\w+)"/g)].map((m) => m[1]);
  return classes[(v - GRID.v_min) / GRID.step];
}

/** Run one speed through the slider channel and capture the readout. */
async function sliderReadout(client: ApiClient, values: Record<string, number>,
                             features: string[], v: number): Promise<string> {
  let html = "";
  let settle!: () => void;
  const done = new Promise<void>((resolve) => {
    settle = resolve;
  });
  const channel = new LatestWinsChannel<number, Awaited<ReturnType<ApiClient["predict"]>>>({
    send: (speed) => client.predict(predictPayload(values, speed, features)),
    onResult: (speed, result) => {
      html = predictionReadout(speed, result.class, result.scores);
      settle();
    },
    onError: (_speed, error) => {
      throw error;
    },
  });
  channel.set(v);
  await done;
  return html;
}

describe("console consistency", () => {
  it("slider readout at v* and at v*+step matches the scan strip", async () => {
    const client = new ApiClient(fakeFetch);
    const model = await client.model();
    const reading = readForm(RAW_FORM, model.bounds);
    expect(reading.complete).toBe(true);

    const advice = await client.advise(advisePayload(reading.values));
    expect(advice.kind).toBe("max_speed");
    if (advice.kind !== "max_speed") {
      return;
    }
    expect(advice.v_star).toBe(295);
    expect(advice.first_defect_speed).toBe(300);

    const { trace } = await client.scan(
      scanPayload(reading.values, model.network.features));
    const strip = traceStripHtml(trace);

    const atVStar = await sliderReadout(
      client, reading.values, model.network.features, advice.v_star);
    expect(atVStar).toContain("verdict-clear");
    expect(stripCellAt(strip, advice.v_star)).toBe("cell-clear");

    const pastVStar = await sliderReadout(
      client, reading.values, model.network.features, advice.first_defect_speed);
    expect(pastVStar).toContain("verdict-defect");
    expect(stripCellAt(strip, advice.first_defect_speed)).toBe("cell-defect");
  });

  it("form-submitted advice equals a direct API call's payload", async () => {
    const client = new ApiClient(fakeFetch);
    const model = await client.model();
    const reading = readForm(RAW_FORM, model.bounds);
    const viaConsole = await client.advise(advisePayload(reading.values));

    const direct = await fakeFetch("/api/advise", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(advisePayload(reading.values)),
    }).then((response) => response.json());

    expect(viaConsole).toEqual(direct);
  });

  it("strip and slider stay in step when bath inputs change", async () => {
    const client = new ApiClient(fakeFetch);
    const model = await client.model();
    const probe = 350;

    for (const t3 of ["85", "95"]) {
      const raw = { ...RAW_FORM, T_3: t3 };
      const reading = readForm(raw, model.bounds);
      // The console re-fetches the scan whenever a bath field changes.
      const { trace } = await client.scan(
        scanPayload(reading.values, model.network.features));
      const strip = traceStripHtml(trace);
      const readout = await sliderReadout(
        client, reading.values, model.network.features, probe);
      const stripSaysDefect = stripCellAt(strip, probe) === "cell-defect";
      const sliderSaysDefect = readout.includes("verdict-defect");
      expect(sliderSaysDefect).toBe(stripSaysDefect);
    }
  });
});
