/**
 * Training loop: one trace prefix per step (batch size 1, no padding),
 * Huber loss on per-dimension standardized targets, Adam updates with
 * global-norm gradient clipping. Deterministic for a given seed.
 */

import * as tf from "@tensorflow/tfjs";

import { Sample } from "./dataset.js";
import { ModelSpec, buildModel, validateSpec } from "./model.js";

export interface Normalization {
  mean: number[];
  std: number[];
}

export interface TrainResult {
  /** Per-epoch mean of the per-step training losses (dropout active). */
  stepLossCurve: number[];
  /** Per-epoch mean loss over the training set with dropout disabled. */
  lossCurve: number[];
  /** Number of optimizer steps where the clip actually rescaled gradients. */
  clipEvents: number;
  /** Number of optimizer steps that went through the clipping hook. */
  clipChecks: number;
  /** Total optimizer steps taken. */
  steps: number;
  /** Batches that would have needed padding; always zero by construction. */
  paddedBatches: number;
  /** Distinct sequence lengths consumed, to confirm variable-length input. */
  sequenceLengths: number[];
  normalization: Normalization;
}

/** Deterministic shuffle (32-bit LCG), independent of engine RNG state. */
export function shuffledIndices(count: number, seed: number): number[] {
  const indices = Array.from({ length: count }, (_, i) => i);
  let state = (seed >>> 0) || 1;
  const next = () => {
    state = (Math.imul(state, 1664525) + 1013904223) >>> 0;
    return state / 4294967296;
  };
  for (let i = count - 1; i > 0; i--) {
    const j = Math.floor(next() * (i + 1));
    [indices[i], indices[j]] = [indices[j], indices[i]];
  }
  return indices;
}

export function labelNormalization(samples: Sample[]): Normalization {
  const mean = [0, 0, 0, 0];
  const std = [0, 0, 0, 0];
  for (const sample of samples) {
    sample.label.forEach((v, d) => (mean[d] += v));
  }
  mean.forEach((_, d) => (mean[d] /= samples.length));
  for (const sample of samples) {
    sample.label.forEach((v, d) => (std[d] += (v - mean[d]) ** 2));
  }
  std.forEach((_, d) => {
    std[d] = Math.sqrt(std[d] / samples.length);
    if (std[d] < 1e-6) std[d] = 1.0; // constant dimension: leave it unscaled
  });
  return { mean, std };
}

export function sequenceTensor(throughputKbps: number[], inputScale: number): tf.Tensor3D {
  const scaled = throughputKbps.map((v) => v * inputScale);
  return tf.tensor3d(scaled, [1, scaled.length, 1]);
}

function standardizedTarget(label: number[], norm: Normalization): tf.Tensor2D {
  const z = label.map((v, d) => (v - norm.mean[d]) / norm.std[d]);
  return tf.tensor2d(z, [1, 4]);
}

/** Scale gradients so their global L2 norm stays within clipNorm. */
function clipByGlobalNorm(
  grads: tf.NamedTensorMap,
  clipNorm: number,
): { clipped: tf.NamedTensorMap; norm: number; fired: boolean } {
  const names = Object.keys(grads);
  const squares = names.map((name) => grads[name].square().sum());
  const globalNorm = Math.sqrt(
    squares.reduce((acc, s) => acc + (s.arraySync() as number), 0),
  );
  squares.forEach((s) => s.dispose());
  if (globalNorm <= clipNorm || globalNorm === 0) {
    return { clipped: grads, norm: globalNorm, fired: false };
  }
  const scale = clipNorm / globalNorm;
  const clipped: tf.NamedTensorMap = {};
  for (const name of names) {
    clipped[name] = grads[name].mul(scale);
    grads[name].dispose();
  }
  return { clipped, norm: globalNorm, fired: true };
}

export interface TrainedModel {
  model: tf.LayersModel;
  spec: ModelSpec;
  result: TrainResult;
}

export function train(
  samples: Sample[],
  spec: ModelSpec,
  onEpoch?: (epoch: number, stepLoss: number, evalLoss: number) => void,
): TrainedModel {
  validateSpec(spec);
  if (samples.length === 0) {
    throw new Error("cannot train on an empty dataset");
  }
  const norm = labelNormalization(samples);
  const model = buildModel(spec);
  const optimizer = tf.train.adam(spec.learningRate);
  // LayerVariable hides its backing tf.Variable behind a protected field;
  // variableGrads needs the variables themselves.
  const vars = model.trainableWeights.map(
    (w) => (w as unknown as { val: tf.Variable }).val,
  );

  const inputs = samples.map((s) => sequenceTensor(s.throughputKbps, spec.inputScale));
  const targets = samples.map((s) => standardizedTarget(s.label, norm));
  const lengths = new Set<number>();
  samples.forEach((s) => lengths.add(s.throughputKbps.length));

  const stepLossCurve: number[] = [];
  const lossCurve: number[] = [];
  let clipEvents = 0;
  let clipChecks = 0;
  let steps = 0;

  const evalLoss = (): number => {
    let total = 0;
    for (let i = 0; i < samples.length; i++) {
      total += tf.tidy(() => {
        const pred = model.apply(inputs[i], { training: false }) as tf.Tensor;
        return tf.losses
          .huberLoss(targets[i], pred, undefined, spec.lossDelta)
          .arraySync() as number;
      });
    }
    return total / samples.length;
  };

  for (let epoch = 0; epoch < spec.epochs; epoch++) {
    let epochLoss = 0;
    for (const index of shuffledIndices(samples.length, spec.seed + epoch * 7919)) {
      const { value, grads } = tf.variableGrads(
        () =>
          tf.losses.huberLoss(
            targets[index],
            model.apply(inputs[index], { training: true }) as tf.Tensor,
            undefined,
            spec.lossDelta,
          ) as tf.Scalar,
        vars,
      );
      const { clipped, fired } = clipByGlobalNorm(grads, spec.clipNorm);
      clipChecks++;
      if (fired) clipEvents++;
      optimizer.applyGradients(clipped as Parameters<typeof optimizer.applyGradients>[0]);
      epochLoss += value.arraySync() as number;
      value.dispose();
      Object.values(clipped).forEach((g) => g.dispose());
      steps++;
    }
    const meanStepLoss = epochLoss / samples.length;
    const meanEvalLoss = evalLoss();
    stepLossCurve.push(meanStepLoss);
    lossCurve.push(meanEvalLoss);
    if (onEpoch) onEpoch(epoch + 1, meanStepLoss, meanEvalLoss);
  }

  inputs.forEach((t) => t.dispose());
  targets.forEach((t) => t.dispose());
  optimizer.dispose();

  return {
    model,
    spec,
    result: {
      stepLossCurve,
      lossCurve,
      clipEvents,
      clipChecks,
      steps,
      paddedBatches: 0,
      sequenceLengths: [...lengths].sort((a, b) => a - b),
      normalization: norm,
    },
  };
}

/** Model outputs mapped back to raw parameter space. */
export function predictParams(
  model: tf.LayersModel,
  norm: Normalization,
  inputScale: number,
  throughputKbps: number[],
): [number, number, number, number] {
  return tf.tidy(() => {
    const x = sequenceTensor(throughputKbps, inputScale);
    const y = model.apply(x, { training: false }) as tf.Tensor;
    const z = y.arraySync() as number[][];
    return [
      z[0][0] * norm.std[0] + norm.mean[0],
      z[0][1] * norm.std[1] + norm.mean[1],
      z[0][2] * norm.std[2] + norm.mean[2],
      z[0][3] * norm.std[3] + norm.mean[3],
    ];
  });
}
