/** Console form model: field list, range-hinted parsing, API payloads.
 *
 * Values travel as typed: what the operator sees in a field is exactly the
 * number sent to the service, with no unit conversion on the way.
 */

import type { FieldBound } from "./api";

/** Every coil and bath input except line speed; all must parse to submit. */
export const REQUIRED_FIELDS = [
  "W", "t_s", "w_s", "T_1", "T_2", "T_3", "T_rinse",
  "HCl_1", "HCl_2", "HCl_3", "Fe2_1", "Fe2_2", "Fe2_3",
] as const;

/** Optional current line speed; seeds the what-if slider when given. */
export const SPEED_FIELD = "v";

export type RequiredField = (typeof REQUIRED_FIELDS)[number];

export const FIELD_LABELS: Record<string, string> = {
  W: "coil weight (t)",
  t_s: "strip thickness (mm)",
  w_s: "strip width (mm)",
  T_1: "tank 1 temperature (°C)",
  T_2: "tank 2 temperature (°C)",
  T_3: "tank 3 temperature (°C)",
  T_rinse: "rinse temperature (°C)",
  HCl_1: "tank 1 acid (wt%)",
  HCl_2: "tank 2 acid (wt%)",
  HCl_3: "tank 3 acid (wt%)",
  Fe2_1: "tank 1 iron (g/L)",
  Fe2_2: "tank 2 iron (g/L)",
  Fe2_3: "tank 3 iron (g/L)",
  v: "current line speed (optional)",
};

/** Interval notation for a bound, open or closed per side. */
export function boundText(bound: FieldBound): string {
  const lo = bound.lo_open ? "(" : "[";
  const hi = bound.hi_open ? ")" : "]";
  return `${lo}${bound.lo}, ${bound.hi}${hi}`;
}

export type ParseResult =
  | { ok: true; value: number }
  | { ok: false; reason: string };

/** Parse one field against its hinted range. Empty input is "required";
 * the caller decides whether that matters for optional fields. */
export function parseField(raw: string, bound?: FieldBound): ParseResult {
  const text = raw.trim();
  if (text === "") {
    return { ok: false, reason: "required" };
  }
  const value = Number(text);
  if (!Number.isFinite(value)) {
    return { ok: false, reason: "not a number" };
  }
  if (bound) {
    const aboveLo = bound.lo_open ? value > bound.lo : value >= bound.lo;
    const belowHi = bound.hi_open ? value < bound.hi : value <= bound.hi;
    if (!aboveLo || !belowHi) {
      return { ok: false, reason: `must lie in ${boundText(bound)}` };
    }
  }
  return { ok: true, value };
}

export interface FormReading {
  /** Parsed value for every field that parsed clean. */
  values: Record<string, number>;
  /** Failure reason per offending field. */
  errors: Record<string, string>;
  /** True once every required field parses inside its hinted range and the
   * optional speed, if filled in at all, parses too. */
  complete: boolean;
}

export function readForm(raw: Record<string, string>,
                         bounds: Record<string, FieldBound>): FormReading {
  const values: Record<string, number> = {};
  const errors: Record<string, string> = {};
  for (const name of REQUIRED_FIELDS) {
    const result = parseField(raw[name] ?? "", bounds[name]);
    if (result.ok) {
      values[name] = result.value;
    } else {
      errors[name] = result.reason;
    }
  }
  if ((raw[SPEED_FIELD] ?? "").trim() !== "") {
    const result = parseField(raw[SPEED_FIELD], bounds[SPEED_FIELD]);
    if (result.ok) {
      values[SPEED_FIELD] = result.value;
    } else {
      errors[SPEED_FIELD] = result.reason;
    }
  }
  const complete = REQUIRED_FIELDS.every((name) => name in values)
    && !(SPEED_FIELD in errors);
  return { values, errors, complete };
}

/** Body for /api/advise: all required fields, plus the speed when given. */
export function advisePayload(values: Record<string, number>): Record<string, number> {
  const payload: Record<string, number> = {};
  for (const name of REQUIRED_FIELDS) {
    payload[name] = values[name];
  }
  if (SPEED_FIELD in values) {
    payload[SPEED_FIELD] = values[SPEED_FIELD];
  }
  return payload;
}

/** Body for /api/predict: the network's own feature list with the slider's
 * speed substituted in. The list comes from GET /api/model, not from here. */
export function predictPayload(values: Record<string, number>, v: number,
                               networkFeatures: string[]): Record<string, number> {
  const payload: Record<string, number> = {};
  for (const name of networkFeatures) {
    payload[name] = name === SPEED_FIELD ? v : values[name];
  }
  return payload;
}

/** Body for /api/scan: the network features minus line speed. */
export function scanPayload(values: Record<string, number>,
                            networkFeatures: string[]): Record<string, number> {
  const payload: Record<string, number> = {};
  for (const name of networkFeatures) {
    if (name !== SPEED_FIELD) {
      payload[name] = values[name];
    }
  }
  return payload;
}
