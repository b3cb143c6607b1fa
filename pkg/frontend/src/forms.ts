/**
 * Form models for submitting jobs and change requests.
 *
 * The run form takes its field list, ranges, and defaults verbatim from the
 * schema endpoint, so client-side validation can never drift from what the
 * server accepts — there are no hard-coded limits here.
 */

import { ChangeSpec, FieldSpec, Schema } from "./api.js";

export interface FieldError {
  field: string;
  message: string;
}

function checkScalar(name: string, spec: FieldSpec, value: unknown): FieldError | null {
  switch (spec.type) {
    case "integer":
      if (typeof value !== "number" || !Number.isInteger(value)) {
        return { field: name, message: "must be an integer" };
      }
      break;
    case "number":
      if (typeof value !== "number" || Number.isNaN(value)) {
        return { field: name, message: "must be a number" };
      }
      break;
    case "boolean":
      if (typeof value !== "boolean") {
        return { field: name, message: "must be true or false" };
      }
      return null;
    case "string":
      if (typeof value !== "string" || !spec.enum?.includes(value)) {
        return { field: name, message: `must be one of ${spec.enum?.join(", ")}` };
      }
      return null;
    case "array": {
      if (!Array.isArray(value) || value.length !== spec.items) {
        return { field: name, message: `must be a list of ${spec.items} numbers` };
      }
      for (const v of value) {
        const err = checkScalar(name, { type: "number" }, v);
        if (err) return err;
        if (spec.min !== undefined && (v as number) < spec.min) {
          return { field: name, message: `entries must be >= ${spec.min}` };
        }
        if (spec.max !== undefined && (v as number) > spec.max) {
          return { field: name, message: `entries must be <= ${spec.max}` };
        }
      }
      return null;
    }
  }
  const num = value as number;
  if (spec.min !== undefined && num < spec.min) {
    return { field: name, message: `must be >= ${spec.min}` };
  }
  if (spec.max !== undefined && num > spec.max) {
    return { field: name, message: `must be <= ${spec.max}` };
  }
  return null;
}

export class RunFormModel {
  readonly values: Record<string, unknown>;

  constructor(private schema: Schema) {
    this.values = Object.fromEntries(
      Object.entries(schema.config).map(([k, spec]) => [
        k,
        Array.isArray(spec.default) ? [...spec.default] : spec.default,
      ]),
    );
  }

  fieldSpec(name: string): FieldSpec | undefined {
    return this.schema.config[name];
  }

  set(name: string, value: unknown): void {
    if (!(name in this.schema.config)) {
      throw new Error(`unknown config field '${name}'`);
    }
    this.values[name] = value;
  }

  validate(): FieldError[] {
    const errors: FieldError[] = [];
    for (const [name, spec] of Object.entries(this.schema.config)) {
      const err = checkScalar(name, spec, this.values[name]);
      if (err) errors.push(err);
    }
    return errors;
  }

  /** Payload for POST /jobs; throws if the form is invalid. */
  toPayload(toy = false): { toy?: boolean; config: Record<string, unknown> } {
    const errors = this.validate();
    if (errors.length) {
      throw new Error(
        "invalid form: " + errors.map((e) => `${e.field} ${e.message}`).join("; "),
      );
    }
    return toy ? { toy: true, config: { ...this.values } } : { config: { ...this.values } };
  }
}

export const CHANGE_KINDS = ["vacation", "availability", "preference"] as const;

export interface ChangeFormInput {
  employee: number;
  kind: string;
  blocks: number[];
  values: number[];
  effective_from: number;
}

/** Validate a change request before submission; mirrors the server's gate. */
export function validateChange(input: ChangeFormInput): FieldError[] {
  const errors: FieldError[] = [];
  if (!Number.isInteger(input.employee) || input.employee < 0) {
    errors.push({ field: "employee", message: "must be a non-negative integer" });
  }
  if (!(CHANGE_KINDS as readonly string[]).includes(input.kind)) {
    errors.push({ field: "kind", message: `must be one of ${CHANGE_KINDS.join(", ")}` });
  }
  if (!input.blocks.length) {
    errors.push({ field: "blocks", message: "must list at least one block" });
  }
  if (input.blocks.length !== input.values.length) {
    errors.push({ field: "values", message: "must match blocks in length" });
  }
  if (input.blocks.some((b) => !Number.isInteger(b) || b < 0)) {
    errors.push({ field: "blocks", message: "must be non-negative integers" });
  }
  if (input.blocks.some((b) => b < input.effective_from)) {
    errors.push({
      field: "blocks",
      message: "must not precede the effective_from block",
    });
  }
  const allowed = input.kind === "preference" ? [0, 1, -1] : [0, 1];
  if (input.values.some((v) => !allowed.includes(v))) {
    errors.push({ field: "values", message: `entries must be in {${allowed.join(", ")}}` });
  }
  return errors;
}

export function toChangeSpec(input: ChangeFormInput): ChangeSpec {
  const errors = validateChange(input);
  if (errors.length) {
    throw new Error(
      "invalid change: " + errors.map((e) => `${e.field} ${e.message}`).join("; "),
    );
  }
  return { ...input, blocks: [...input.blocks], values: [...input.values] };
}
