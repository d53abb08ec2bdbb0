/**
 * Trainer CLI: `train` fits the model on an oracle dataset and writes the
 * model artifact; `predict` loads an artifact and emits a prediction table
 * for the simulator.
 */

import { writeFileSync } from "node:fs";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { loadModelArtifact, saveModelArtifact } from "./artifact.js";
import { loadDataset } from "./dataset.js";
import { DEFAULT_SPEC, ModelSpec } from "./model.js";
import { formatTable, loadTraceFile, predictionRecords } from "./predict.js";
import { train } from "./train.js";

async function cmdTrain(argv: Record<string, unknown>): Promise<void> {
  const spec: ModelSpec = {
    ...DEFAULT_SPEC,
    lstmUnits: String(argv.units)
      .split(",")
      .map((u) => Number(u.trim())),
    dropout: Number(argv.dropout),
    learningRate: Number(argv.lr),
    epochs: Number(argv.epochs),
    clipNorm: Number(argv.clipNorm),
    seed: Number(argv.seed),
  };
  const dataset = loadDataset(String(argv.dataset));
  console.log(`loaded ${dataset.samples.length} samples from ${argv.dataset}`);
  const trained = train(dataset.samples, spec, (epoch, stepLoss, evalLoss) => {
    console.log(
      `epoch ${epoch}/${spec.epochs}  step-loss ${stepLoss.toFixed(6)}  ` +
        `eval-loss ${evalLoss.toFixed(6)}`,
    );
  });
  await saveModelArtifact(
    String(argv.outModel),
    trained.model,
    spec,
    trained.result.normalization,
    trained.result.lossCurve,
  );
  if (argv.lossCsv) {
    const rows = trained.result.lossCurve
      .map((loss, i) => `${i + 1},${trained.result.stepLossCurve[i]},${loss}`)
      .join("\n");
    writeFileSync(String(argv.lossCsv), `epoch,step_loss,eval_loss\n${rows}\n`);
  }
  console.log(
    `clip fired on ${trained.result.clipEvents}/${trained.result.steps} steps; ` +
      `wrote ${argv.outModel}`,
  );
}

async function cmdPredict(argv: Record<string, unknown>): Promise<void> {
  const { model, spec, normalization } = await loadModelArtifact(String(argv.model));
  const tracePaths = String(argv.traces)
    .split(",")
    .map((p) => p.trim())
    .filter(Boolean);
  const traces = tracePaths.map(loadTraceFile);
  const interval = Number(argv.interval);
  const records = predictionRecords(model, normalization, spec.inputScale, traces, interval);
  writeFileSync(String(argv.out), formatTable(records, interval));
  console.log(`wrote ${records.length} prediction records to ${argv.out}`);
}

export async function main(args: string[]): Promise<number> {
  await yargs(args)
    .command(
      "train",
      "fit the parameter predictor on an oracle dataset",
      (cmd) =>
        cmd
          .option("dataset", { type: "string", demandOption: true })
          .option("out-model", { type: "string", demandOption: true })
          .option("loss-csv", { type: "string" })
          .option("epochs", { type: "number", default: DEFAULT_SPEC.epochs })
          .option("lr", { type: "number", default: DEFAULT_SPEC.learningRate })
          .option("units", { type: "string", default: DEFAULT_SPEC.lstmUnits.join(",") })
          .option("dropout", { type: "number", default: DEFAULT_SPEC.dropout })
          .option("clip-norm", { type: "number", default: DEFAULT_SPEC.clipNorm })
          .option("seed", { type: "number", default: 0 }),
      async (argv) => cmdTrain(argv as Record<string, unknown>),
    )
    .command(
      "predict",
      "emit a prediction table for the simulator",
      (cmd) =>
        cmd
          .option("model", { type: "string", demandOption: true })
          .option("traces", {
            type: "string",
            demandOption: true,
            describe: "comma-separated trace files",
          })
          .option("interval", { type: "number", default: 10 })
          .option("out", { type: "string", demandOption: true }),
      async (argv) => cmdPredict(argv as Record<string, unknown>),
    )
    .demandCommand(1)
    .strict()
    .parseAsync();
  return 0;
}

main(hideBin(process.argv)).catch((err) => {
  console.error(`error: ${err.message ?? err}`);
  process.exit(1);
});
