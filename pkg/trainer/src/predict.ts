/**
 * Prediction-table emission: one record per reprediction instant per trace
 * (seconds 5, 5+interval, ...), in the table format the simulator loads.
 */

import { readFileSync } from "node:fs";
import { basename } from "node:path";

import * as tf from "@tensorflow/tfjs";

import { MIN_SEQUENCE_SECONDS } from "./dataset.js";
import { Normalization, predictParams } from "./train.js";

export interface TraceInput {
  id: string;
  samplesKbps: number[];
}

export interface TableRecord {
  traceId: string;
  second: number;
  params: [number, number, number, number];
}

/** Plain text radio trace: one throughput sample (kbps) per line. */
export function loadTraceFile(path: string): TraceInput {
  const lines = readFileSync(path, "utf8").split("\n");
  const samples: number[] = [];
  lines.forEach((raw, index) => {
    const line = raw.trim();
    if (!line) return;
    const value = Number(line.split(/\s+/)[0]);
    if (!Number.isFinite(value)) {
      if (samples.length === 0 && index === 0) return; // header line
      throw new Error(`${path}:${index + 1}: cannot parse throughput sample`);
    }
    if (value < 0) throw new Error(`${path}:${index + 1}: negative throughput sample`);
    samples.push(value);
  });
  if (samples.length === 0) throw new Error(`${path}: no throughput samples found`);
  const stem = basename(path).replace(/\.[^.]+$/, "");
  return { id: stem, samplesKbps: samples };
}

export function predictionSeconds(traceLength: number, intervalS: number): number[] {
  const seconds: number[] = [];
  for (let s = MIN_SEQUENCE_SECONDS; s <= traceLength; s += intervalS) {
    seconds.push(s);
  }
  return seconds;
}

export function predictionRecords(
  model: tf.LayersModel,
  normalization: Normalization,
  inputScale: number,
  traces: TraceInput[],
  intervalS: number,
): TableRecord[] {
  const records: TableRecord[] = [];
  for (const trace of traces) {
    if (trace.samplesKbps.length < MIN_SEQUENCE_SECONDS) {
      throw new Error(
        `trace ${trace.id} has ${trace.samplesKbps.length} seconds; ` +
          `predictions need at least ${MIN_SEQUENCE_SECONDS}`,
      );
    }
    for (const second of predictionSeconds(trace.samplesKbps.length, intervalS)) {
      const params = predictParams(
        model,
        normalization,
        inputScale,
        trace.samplesKbps.slice(0, second),
      );
      if (params.some((v) => !Number.isFinite(v))) {
        throw new Error(`trace ${trace.id}@${second}: model emitted a non-finite parameter`);
      }
      records.push({ traceId: trace.id, second, params });
    }
  }
  return records;
}

export function formatTable(records: TableRecord[], intervalS: number): string {
  const header = {
    format: "prediction-table",
    version: 1,
    source: "lstm-trainer",
    interval_s: intervalS,
  };
  const lines = [JSON.stringify(header)];
  for (const record of records) {
    lines.push(
      JSON.stringify({
        trace_id: record.traceId,
        second: record.second,
        params: record.params,
      }),
    );
  }
  return lines.join("\n") + "\n";
}
