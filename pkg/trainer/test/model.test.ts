import { describe, expect, it } from "vitest";

import { DEFAULT_SPEC, SpecError, buildModel, validateSpec } from "../dist/model.js";
import { shuffledIndices } from "../dist/train.js";

describe("model spec", () => {
  it("accepts the default spec", () => {
    expect(() => validateSpec(DEFAULT_SPEC)).not.toThrow();
    expect(DEFAULT_SPEC.lstmUnits).toEqual([128, 128]);
    expect(DEFAULT_SPEC.lossDelta).toBe(1.0);
    expect(DEFAULT_SPEC.learningRate).toBe(5e-6);
    expect(DEFAULT_SPEC.epochs).toBe(50);
  });

  it("rejects any output width other than four", () => {
    for (const width of [1, 3, 5, 8]) {
      expect(() => validateSpec({ ...DEFAULT_SPEC, outputWidth: width })).toThrowError(
        SpecError,
      );
    }
  });

  it("rejects empty or non-positive layer sizes", () => {
    expect(() => validateSpec({ ...DEFAULT_SPEC, lstmUnits: [] })).toThrowError(SpecError);
    expect(() => validateSpec({ ...DEFAULT_SPEC, lstmUnits: [0] })).toThrowError(SpecError);
  });

  it("builds a model with a variable-length scalar input and 4 outputs", () => {
    const model = buildModel({ ...DEFAULT_SPEC, lstmUnits: [8], dropout: 0.1, seed: 3 });
    expect(model.inputs[0].shape).toEqual([null, null, 1]);
    expect(model.outputs[0].shape).toEqual([null, 4]);
  });
});

describe("deterministic shuffling", () => {
  it("is stable for a given seed and differs across seeds", () => {
    expect(shuffledIndices(10, 42)).toEqual(shuffledIndices(10, 42));
    expect(shuffledIndices(10, 42)).not.toEqual(shuffledIndices(10, 43));
    expect([...shuffledIndices(10, 42)].sort((a, b) => a - b)).toEqual(
      Array.from({ length: 10 }, (_, i) => i),
    );
  });
});
