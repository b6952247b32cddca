/** Scenario builder form state and its translation to API requests.
 *
 * Validation here only checks that required fields are present for the
 * selected kind; all numeric interpretation and every outcome metric stay on
 * the server.
 */

import type { BandName, ScenarioRequest } from "./types.js";

export interface FormState {
  kind: string;
  band: BandName;
  aezCap: boolean;
  g: string; // raw input text; empty = unset
  target: string;
}

export const SCENARIO_CHOICES: ReadonlyArray<{ value: string; label: string }> = [
  { value: "sc1", label: "Sc1: Current trajectory" },
  { value: "sc2", label: "Sc2: National SDG (uniform growth)" },
  { value: "sc3", label: "Sc3: Village SDG (every village doubles)" },
  { value: "sc4", label: "Sc4: Equitable (match top producers)" },
  { value: "sc5", label: "Sc5: Equitable + National SDG" },
  { value: "sc6", label: "Sc6: Equitable + Village SDG" },
  { value: "sc7", label: "Sc7: Max achieved growth rate" },
  { value: "custom_uniform", label: "Custom: uniform growth rate" },
  { value: "custom_target", label: "Custom: common 2030 target" },
];

export const BAND_CHOICES: ReadonlyArray<{ value: BandName; label: string }> = [
  { value: "mean", label: "Mean estimate" },
  { value: "lower", label: "Lower band (conservative)" },
  { value: "upper", label: "Upper band (optimistic)" },
];

export function defaultFormState(): FormState {
  return { kind: "sc1", band: "mean", aezCap: false, g: "", target: "" };
}

export function needsUniformRate(kind: string): boolean {
  return kind === "custom_uniform";
}

export function needsTarget(kind: string): boolean {
  return kind === "custom_target";
}

export interface FormValidation {
  ok: boolean;
  fieldErrors: Record<string, string>;
}

export function validateForm(state: FormState): FormValidation {
  const fieldErrors: Record<string, string> = {};
  if (needsUniformRate(state.kind)) {
    if (state.g.trim() === "" || Number.isNaN(Number(state.g))) {
      fieldErrors["g"] = "a numeric growth rate is required";
    }
  }
  if (needsTarget(state.kind)) {
    const value = Number(state.target);
    if (state.target.trim() === "" || Number.isNaN(value)) {
      fieldErrors["target"] = "a numeric 2030 target is required";
    } else if (value <= 0) {
      fieldErrors["target"] = "the target must be positive";
    }
  }
  return { ok: Object.keys(fieldErrors).length === 0, fieldErrors };
}

/** Build the POST /api/scenario body. The request round-trips the selected
 * spec exactly: nothing besides these fields influences the outcome. */
export function toRequest(state: FormState): ScenarioRequest {
  const body: ScenarioRequest = {
    kind: state.kind,
    band: state.band,
    aez_cap: state.aezCap,
  };
  if (needsUniformRate(state.kind)) {
    body.g = Number(state.g);
  }
  if (needsTarget(state.kind)) {
    body.target = Number(state.target);
  }
  return body;
}

/** Distribute server-side 400 field errors onto form fields; unknown fields
 * fall through to the general slot (shown verbatim near the submit button). */
export function assignFieldErrors(
  errors: ReadonlyArray<{ field: string; message: string }>,
): { fieldErrors: Record<string, string>; general: string[] } {
  const known = new Set(["kind", "band", "aez_cap", "g", "target"]);
  const fieldErrors: Record<string, string> = {};
  const general: string[] = [];
  for (const err of errors) {
    if (known.has(err.field)) {
      fieldErrors[err.field] = err.message;
    } else {
      general.push(`${err.field}: ${err.message}`);
    }
  }
  return { fieldErrors, general };
}
