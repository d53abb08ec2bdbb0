/**
 * Oracle dataset parsing.
 *
 * The simulator's labeling oracle writes JSON lines: a header object with a
 * `format` key, then one record per labeled trace prefix carrying the
 * throughput sequence, the four winning parameters and the achieved QoE.
 */

import { readFileSync } from "node:fs";

export const MIN_SEQUENCE_SECONDS = 5;

export interface Sample {
  traceId: string;
  uptoSecond: number;
  throughputKbps: number[];
  label: [number, number, number, number];
  achievedQoe: number;
}

export interface Dataset {
  header: Record<string, unknown>;
  samples: Sample[];
}

export class DatasetError extends Error {}

export function parseDataset(text: string, sourceName = "dataset"): Dataset {
  const lines = text.split("\n");
  let header: Record<string, unknown> | null = null;
  const samples: Sample[] = [];

  lines.forEach((raw, index) => {
    const line = raw.trim();
    if (!line) return;
    let record: Record<string, unknown>;
    try {
      record = JSON.parse(line);
    } catch (err) {
      throw new DatasetError(`${sourceName}:${index + 1}: invalid JSON record: ${err}`);
    }
    if ("format" in record && !("trace_id" in record)) {
      header = record;
      return;
    }
    samples.push(toSample(record, `${sourceName}:${index + 1}`));
  });

  if (header === null) {
    throw new DatasetError(`${sourceName}: missing dataset header line`);
  }
  return { header, samples };
}

function toSample(record: Record<string, unknown>, where: string): Sample {
  const traceId = String(record.trace_id ?? "");
  const uptoSecond = Number(record.upto_second);
  const throughput = record.throughput_kbps;
  const label = record.label;
  if (!traceId || !Number.isInteger(uptoSecond)) {
    throw new DatasetError(`${where}: record needs trace_id and integer upto_second`);
  }
  if (!Array.isArray(throughput) || !Array.isArray(label)) {
    throw new DatasetError(`${where}: record needs throughput_kbps and label arrays`);
  }
  if (throughput.length < MIN_SEQUENCE_SECONDS) {
    throw new DatasetError(
      `${where}: sample ${traceId}@${uptoSecond} has ${throughput.length} seconds, ` +
        `minimum is ${MIN_SEQUENCE_SECONDS}`,
    );
  }
  if (throughput.length !== uptoSecond) {
    throw new DatasetError(
      `${where}: sample ${traceId}@${uptoSecond} sequence length ${throughput.length} ` +
        "does not match upto_second",
    );
  }
  if (label.length !== 4) {
    throw new DatasetError(`${where}: sample ${traceId}@${uptoSecond} label must have 4 values`);
  }
  const values = throughput.map(Number);
  if (values.some((v) => !Number.isFinite(v) || v < 0)) {
    throw new DatasetError(`${where}: sample ${traceId}@${uptoSecond} has invalid throughput`);
  }
  return {
    traceId,
    uptoSecond,
    throughputKbps: values,
    label: [Number(label[0]), Number(label[1]), Number(label[2]), Number(label[3])],
    achievedQoe: Number(record.achieved_qoe ?? NaN),
  };
}

export function loadDataset(path: string): Dataset {
  return parseDataset(readFileSync(path, "utf8"), path);
}
