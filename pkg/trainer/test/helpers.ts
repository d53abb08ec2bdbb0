import { Sample } from "../dist/dataset.js";

/** Deterministic 32-bit LCG so fixtures are identical across runs. */
export function lcg(seed: number): () => number {
  let state = seed >>> 0 || 1;
  return () => {
    state = (Math.imul(state, 1664525) + 1013904223) >>> 0;
    return state / 4294967296;
  };
}

/** Toy labeled dataset: labels follow the mean throughput of each prefix. */
export function toyDataset(count = 50, seed = 12345): Sample[] {
  const rnd = lcg(seed);
  const samples: Sample[] = [];
  for (let i = 0; i < count; i++) {
    const len = 5 + Math.floor(rnd() * 16);
    const base = 500 + rnd() * 8000;
    const seq = Array.from({ length: len }, () => Math.max(0, base * (0.5 + rnd())));
    const mean = seq.reduce((a, b) => a + b, 0) / len;
    const fast = mean > 4000;
    samples.push({
      traceId: `toy${i}`,
      uptoSecond: len,
      throughputKbps: seq,
      label: fast ? [0, 1, 2, 6] : [2, 4, 3, 8],
      achievedQoe: 3.0,
    });
  }
  return samples;
}

export function datasetFileText(samples: Sample[]): string {
  const lines = [
    JSON.stringify({ format: "oracle-dataset", version: 1, samples: samples.length, seed: 0 }),
  ];
  for (const s of samples) {
    lines.push(
      JSON.stringify({
        trace_id: s.traceId,
        upto_second: s.uptoSecond,
        throughput_kbps: s.throughputKbps,
        label: s.label,
        achieved_qoe: s.achievedQoe,
      }),
    );
  }
  return lines.join("\n") + "\n";
}

/** Synthetic radio trace with alternating high/low throughput phases. */
export function syntheticTrace(length: number, seed: number): number[] {
  const rnd = lcg(seed);
  const samples: number[] = [];
  for (let i = 0; i < length; i++) {
    const high = Math.floor(i / 12) % 2 === 0;
    samples.push(Math.round((high ? 5000 : 700) * (0.8 + 0.4 * rnd())));
  }
  return samples;
}
