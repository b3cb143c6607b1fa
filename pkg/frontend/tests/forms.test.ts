import { describe, expect, it } from "vitest";
import { Schema } from "../src/api.js";
import { RunFormModel, toChangeSpec, validateChange } from "../src/forms.js";

// Shape mirrors GET /api/v1/schema; the form must take all limits from it.
const SCHEMA: Schema = {
  config: {
    employees: { type: "integer", min: 2, max: 48, default: 12 },
    weeks: { type: "integer", min: 1, max: 16, default: 8 },
    gap_target: { type: "number", min: 0.001, max: 1.0, default: 0.05 },
    time_limit: { type: "number", min: 1, max: 3600, default: 300 },
    mode: { type: "string", enum: ["hybrid", "milp_alone"], default: "hybrid" },
    use_relax_and_fix: { type: "boolean", default: true },
    lam: { type: "array", items: 3, min: 0.0, max: 100.0, default: [1, 1, 1] },
  },
  job_kinds: ["optimize", "event_reoptimize"],
  job_states: ["queued", "running", "done", "failed", "cancelled"],
};

describe("RunFormModel", () => {
  it("starts from the schema defaults and validates clean", () => {
    const form = new RunFormModel(SCHEMA);
    expect(form.values.employees).toBe(12);
    expect(form.values.lam).toEqual([1, 1, 1]);
    expect(form.validate()).toEqual([]);
  });

  it("enforces the fetched ranges, not hard-coded ones", () => {
    const form = new RunFormModel(SCHEMA);
    form.set("employees", 1);
    expect(form.validate()).toContainEqual({
      field: "employees",
      message: "must be >= 2",
    });
    form.set("employees", 49);
    expect(form.validate()[0].message).toBe("must be <= 48");
    form.set("employees", 12.5);
    expect(form.validate()[0].message).toBe("must be an integer");
    form.set("employees", 12);
    expect(form.validate()).toEqual([]);
  });

  it("checks enums, booleans, and fixed-length arrays", () => {
    const form = new RunFormModel(SCHEMA);
    form.set("mode", "greedy");
    form.set("use_relax_and_fix", "yes");
    form.set("lam", [1, 2]);
    const fields = form.validate().map((e) => e.field);
    expect(fields).toEqual(["mode", "use_relax_and_fix", "lam"]);
    form.set("mode", "milp_alone");
    form.set("use_relax_and_fix", false);
    form.set("lam", [0, 50, 100]);
    expect(form.validate()).toEqual([]);
    form.set("lam", [0, 50, 101]);
    expect(form.validate()[0].message).toBe("entries must be <= 100");
  });

  it("rejects fields the schema does not define", () => {
    const form = new RunFormModel(SCHEMA);
    expect(() => form.set("threads", 8)).toThrow(/unknown config field/);
  });

  it("builds a job payload only when valid", () => {
    const form = new RunFormModel(SCHEMA);
    form.set("weeks", 1);
    expect(form.toPayload(true)).toEqual({
      toy: true,
      config: { ...form.values },
    });
    form.set("weeks", 0);
    expect(() => form.toPayload()).toThrow(/invalid form/);
  });
});

describe("change request validation", () => {
  const good = {
    employee: 1,
    kind: "vacation",
    blocks: [15, 16, 17],
    values: [1, 1, 1],
    effective_from: 12,
  };

  it("accepts a well-formed vacation change", () => {
    expect(validateChange(good)).toEqual([]);
    expect(toChangeSpec(good)).toEqual(good);
  });

  it("rejects unknown kinds, past blocks, and bad values", () => {
    expect(validateChange({ ...good, kind: "holiday" })[0].field).toBe("kind");
    expect(validateChange({ ...good, blocks: [3, 16, 17] })[0].field).toBe("blocks");
    expect(validateChange({ ...good, values: [1, 1, 2] })[0].field).toBe("values");
    expect(validateChange({ ...good, values: [1, 1] })[0].field).toBe("values");
    expect(validateChange({ ...good, blocks: [] }).length).toBeGreaterThan(0);
  });

  it("allows clearing a preference with -1 but not vacations", () => {
    const pref = { ...good, kind: "preference", values: [-1, 0, 1] };
    expect(validateChange(pref)).toEqual([]);
    expect(validateChange({ ...good, values: [-1, 1, 1] })[0].field).toBe("values");
  });

  it("toChangeSpec throws on invalid input", () => {
    expect(() => toChangeSpec({ ...good, kind: "holiday" })).toThrow(/invalid change/);
  });
});
