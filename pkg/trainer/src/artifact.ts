/**
 * Single-file model artifact: topology, weights (base64), the model spec and
 * the label normalization constants it was trained with.
 */

import { readFileSync, writeFileSync } from "node:fs";

import * as tf from "@tensorflow/tfjs";

import { ModelSpec } from "./model.js";
import { Normalization } from "./train.js";

export interface ModelArtifact {
  format: "lstm-param-predictor";
  version: 1;
  spec: ModelSpec;
  normalization: Normalization;
  lossCurve: number[];
  modelTopology: unknown;
  weightSpecs: unknown;
  weightDataBase64: string;
}

export async function saveModelArtifact(
  path: string,
  model: tf.LayersModel,
  spec: ModelSpec,
  normalization: Normalization,
  lossCurve: number[],
): Promise<void> {
  let captured: tf.io.ModelArtifacts | null = null;
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      captured = artifacts;
      return { modelArtifactsInfo: { dateSaved: new Date(0), modelTopologyType: "JSON" } };
    }),
  );
  if (!captured) throw new Error("model save handler captured nothing");
  const arts = captured as tf.io.ModelArtifacts;
  const weightData = arts.weightData as ArrayBuffer;
  const artifact: ModelArtifact = {
    format: "lstm-param-predictor",
    version: 1,
    spec,
    normalization,
    lossCurve,
    modelTopology: arts.modelTopology,
    weightSpecs: arts.weightSpecs,
    weightDataBase64: Buffer.from(weightData).toString("base64"),
  };
  writeFileSync(path, JSON.stringify(artifact));
}

export interface LoadedArtifact {
  model: tf.LayersModel;
  spec: ModelSpec;
  normalization: Normalization;
  lossCurve: number[];
}

export async function loadModelArtifact(path: string): Promise<LoadedArtifact> {
  const raw = JSON.parse(readFileSync(path, "utf8")) as ModelArtifact;
  if (raw.format !== "lstm-param-predictor") {
    throw new Error(`${path}: not a model artifact`);
  }
  const weightData = Buffer.from(raw.weightDataBase64, "base64");
  const model = await tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: raw.modelTopology as object,
      weightSpecs: raw.weightSpecs as tf.io.WeightsManifestEntry[],
      weightData: weightData.buffer.slice(
        weightData.byteOffset,
        weightData.byteOffset + weightData.byteLength,
      ),
    }),
  );
  return {
    model,
    spec: raw.spec,
    normalization: raw.normalization,
    lossCurve: raw.lossCurve,
  };
}
