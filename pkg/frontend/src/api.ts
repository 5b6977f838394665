/** Typed client for the advisory service HTTP API.
 *
 * The console talks to nothing else: every number shown in the UI comes
 * from one of these endpoints, so the form, the scan strip and the what-if
 * readout can never drift apart.
 */

export interface FieldBound {
  lo: number;
  hi: number;
  lo_open: boolean;
  hi_open: boolean;
}

export interface GridInfo {
  v_min: number;
  v_max: number;
  step: number;
}

export interface ModelInfo {
  tree: {
    depth: number;
    size: number;
    features: string[];
    training_samples: number;
  };
  network: {
    units: number;
    features: string[];
    theta_plus: number;
    theta_minus: number;
    converged: boolean;
    epochs: number;
    residual_conflicts: number;
    scaler: Record<string, [number, number]>;
  };
  grid: GridInfo;
  bounds: Record<string, FieldBound>;
}

export type Prediction = "defect" | "no_defect";

export interface TracePoint {
  v: number;
  prediction: Prediction;
}

export interface PredictResponse {
  class: Prediction;
  scores: Record<string, number>;
}

interface AdviceBase {
  trace: TracePoint[];
  summary: string;
}

export interface MaxSpeedAdvice extends AdviceBase {
  kind: "max_speed";
  v_star: number;
  first_defect_speed: number;
}

export interface SpeedRangeAdvice extends AdviceBase {
  kind: "speed_range";
  class: string;
  bounds: [number, number | null];
}

export interface InfeasibleAdvice extends AdviceBase {
  kind: "infeasible";
  reason: string;
}

export type AdviceResponse = MaxSpeedAdvice | SpeedRangeAdvice | InfeasibleAdvice;

export interface FieldError {
  field: string;
  message: string;
}

/** Non-2xx reply, keeping the service's per-field error list when present. */
export class ApiError extends Error {
  readonly status: number;
  readonly errors: FieldError[];

  constructor(status: number, errors: FieldError[], detail?: string) {
    super(detail
      ?? (errors.length
        ? errors.map((e) => `${e.field}: ${e.message}`).join("; ")
        : `request failed with HTTP ${status}`));
    this.status = status;
    this.errors = errors;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchFn: FetchLike;
  private readonly base: string;

  /** fetchFn is injectable so tests can stand in for the service. */
  constructor(fetchFn?: FetchLike, base = "") {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
    this.base = base;
  }

  model(): Promise<ModelInfo> {
    return this.request<ModelInfo>("/api/model");
  }

  predict(values: Record<string, number>): Promise<PredictResponse> {
    return this.request<PredictResponse>("/api/predict", values);
  }

  advise(values: Record<string, number>): Promise<AdviceResponse> {
    return this.request<AdviceResponse>("/api/advise", values);
  }

  scan(bath: Record<string, number>): Promise<{ trace: TracePoint[] }> {
    return this.request<{ trace: TracePoint[] }>("/api/scan", bath);
  }

  private async request<T>(path: string, body?: unknown): Promise<T> {
    const init: RequestInit = body === undefined
      ? {}
      : {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      };
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      throw await toApiError(response);
    }
    return (await response.json()) as T;
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let errors: FieldError[] = [];
  let detail: string | undefined;
  try {
    const payload: unknown = await response.json();
    if (payload && typeof payload === "object") {
      const record = payload as Record<string, unknown>;
      if (Array.isArray(record.errors)) {
        errors = record.errors as FieldError[];
      }
      if (typeof record.detail === "string") {
        detail = record.detail;
      }
    }
  } catch {
    // non-JSON error body; the status code is all we have
  }
  return new ApiError(response.status, errors, detail);
}
