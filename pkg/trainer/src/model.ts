/**
 * Recurrent regression model: stacked LSTM layers over a variable-length
 * throughput sequence, dropout after each layer, linear head of width 4
 * (switch penalty, stall penalty, threshold 1, threshold 2).
 */

import * as tf from "@tensorflow/tfjs";

export interface ModelSpec {
  /** Hidden size per stacked LSTM layer. */
  lstmUnits: number[];
  /** Dropout rate applied after each layer. */
  dropout: number;
  /** Must be 4: one output per adaptation parameter. */
  outputWidth: number;
  /** Huber loss transition point. */
  lossDelta: number;
  learningRate: number;
  epochs: number;
  /** Global-norm gradient clip threshold. */
  clipNorm: number;
  /** Throughput values are multiplied by this before entering the network. */
  inputScale: number;
  seed: number;
}

export const DEFAULT_SPEC: ModelSpec = {
  lstmUnits: [128, 128],
  dropout: 0.2,
  outputWidth: 4,
  lossDelta: 1.0,
  learningRate: 5e-6,
  epochs: 50,
  clipNorm: 1.0,
  inputScale: 0.001,
  seed: 0,
};

export class SpecError extends Error {}

export function validateSpec(spec: ModelSpec): void {
  if (spec.outputWidth !== 4) {
    throw new SpecError(`output width must be exactly 4, got ${spec.outputWidth}`);
  }
  if (spec.lstmUnits.length < 1 || spec.lstmUnits.some((u) => !Number.isInteger(u) || u < 1)) {
    throw new SpecError("lstmUnits must be a non-empty list of positive integers");
  }
  if (spec.dropout < 0 || spec.dropout >= 1) {
    throw new SpecError("dropout must lie in [0, 1)");
  }
  if (spec.lossDelta <= 0) throw new SpecError("loss delta must be positive");
  if (spec.learningRate <= 0) throw new SpecError("learning rate must be positive");
  if (spec.epochs < 1) throw new SpecError("epochs must be >= 1");
  if (spec.clipNorm <= 0) throw new SpecError("clip norm must be positive");
  if (spec.inputScale <= 0) throw new SpecError("input scale must be positive");
}

export function buildModel(spec: ModelSpec): tf.LayersModel {
  validateSpec(spec);
  const model = tf.sequential();
  spec.lstmUnits.forEach((units, index) => {
    model.add(
      tf.layers.lstm({
        units,
        returnSequences: index < spec.lstmUnits.length - 1,
        inputShape: index === 0 ? [null, 1] : undefined,
        kernelInitializer: tf.initializers.glorotUniform({ seed: spec.seed + 11 * index + 1 }),
        recurrentInitializer: tf.initializers.orthogonal({ seed: spec.seed + 11 * index + 2 }),
      }),
    );
    if (spec.dropout > 0) {
      model.add(tf.layers.dropout({ rate: spec.dropout, seed: spec.seed + 11 * index + 3 }));
    }
  });
  model.add(
    tf.layers.dense({
      units: spec.outputWidth,
      kernelInitializer: tf.initializers.glorotUniform({ seed: spec.seed + 101 }),
    }),
  );
  return model;
}
