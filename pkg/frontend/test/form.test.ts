import { describe, expect, it } from "vitest";

import {
  assignFieldErrors,
  defaultFormState,
  needsTarget,
  needsUniformRate,
  toRequest,
  validateForm,
} from "../src/form.js";

describe("scenario request round-trip", () => {
  it("serializes the default state to a plain sc1 request", () => {
    const body = toRequest(defaultFormState());
    expect(body).toEqual({ kind: "sc1", band: "mean", aez_cap: false });
  });

  it("round-trips every selectable field", () => {
    const body = toRequest({
      kind: "sc5",
      band: "lower",
      aezCap: true,
      g: "",
      target: "",
    });
    expect(body).toEqual({ kind: "sc5", band: "lower", aez_cap: true });
  });

  it("includes g only for the custom uniform kind", () => {
    const state = { ...defaultFormState(), kind: "custom_uniform", g: "212.5" };
    expect(toRequest(state)).toEqual({
      kind: "custom_uniform",
      band: "mean",
      aez_cap: false,
      g: 212.5,
    });
    // a leftover g value on a named scenario is not sent
    expect(toRequest({ ...state, kind: "sc2" })).toEqual({
      kind: "sc2",
      band: "mean",
      aez_cap: false,
    });
  });

  it("includes target only for the custom target kind", () => {
    const state = { ...defaultFormState(), kind: "custom_target", target: "3063" };
    expect(toRequest(state)).toEqual({
      kind: "custom_target",
      band: "mean",
      aez_cap: false,
      target: 3063,
    });
  });
});

describe("client-side required-field validation", () => {
  it("accepts named scenarios without extras", () => {
    expect(validateForm(defaultFormState()).ok).toBe(true);
  });

  it("requires a numeric growth rate for custom_uniform", () => {
    const state = { ...defaultFormState(), kind: "custom_uniform" };
    const result = validateForm(state);
    expect(result.ok).toBe(false);
    expect(result.fieldErrors["g"]).toMatch(/required/);
    expect(validateForm({ ...state, g: "abc" }).ok).toBe(false);
    expect(validateForm({ ...state, g: "0" }).ok).toBe(true);
  });

  it("requires a positive target for custom_target", () => {
    const state = { ...defaultFormState(), kind: "custom_target" };
    expect(validateForm(state).ok).toBe(false);
    expect(validateForm({ ...state, target: "-5" }).fieldErrors["target"]).toMatch(
      /positive/,
    );
    expect(validateForm({ ...state, target: "2500" }).ok).toBe(true);
  });

  it("exposes the per-kind extra-field predicates", () => {
    expect(needsUniformRate("custom_uniform")).toBe(true);
    expect(needsUniformRate("sc3")).toBe(false);
    expect(needsTarget("custom_target")).toBe(true);
    expect(needsTarget("sc4")).toBe(false);
  });
});

describe("server 400 errors land beside their fields", () => {
  it("maps known fields and collects the rest", () => {
    const { fieldErrors, general } = assignFieldErrors([
      { field: "kind", message: "unknown scenario kind 'sc99'" },
      { field: "g", message: "must be finite" },
      { field: "body", message: "malformed JSON" },
    ]);
    expect(fieldErrors["kind"]).toMatch(/sc99/);
    expect(fieldErrors["g"]).toBe("must be finite");
    expect(general).toEqual(["body: malformed JSON"]);
  });
});
