#!/usr/bin/env python3
"""End-to-end demo: synthesize traces, build a config, compare all algorithms.

Mirrors the evaluation workflow: an eight-client mix (half 1080p, half 2160p
screens) streams over a shared backhaul while each algorithm takes a turn.
Outputs land under --out (metrics.csv, summary.csv, event logs, buffer series).
"""

import argparse
import subprocess
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent

CONFIG_TEMPLATE = """\
session:
  duration_s: {duration}
  max_buffer_s: 20
  start_offset_max_s: 1.0
network:
  latency_ms: 40
  backhaul_capacity_kbps: 60000
ladder:
  segment_length_s: 2
clients:
{clients}
baselines:
  tba_safety_factor: 0.9
oracle:
  grid:
    switches_penalty_factor: [0, 1, 4]
    stalls_penalty_factor: [0, 2]
    buffer_threshold_1: [2, 3]
    buffer_threshold_2: [6]
"""


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="comparison_out")
    parser.add_argument("--duration", type=int, default=120)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--algorithms", default="ecas-static,tba,bba,sara,gbba,eadas"
    )
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    traces_dir = out / "traces"

    subprocess.run(
        [sys.executable, str(HERE / "make_traces.py"),
         "--out", str(traces_dir), "--seed", str(args.seed),
         "--length", str(args.duration), "--per-shape", "3"],
        check=True,
    )

    trace_files = sorted(traces_dir.glob("*.txt"))[:8]
    rows = []
    for i, path in enumerate(trace_files):
        resolution = "1080p" if i % 2 == 0 else "2160p"
        category = path.stem.split("_")[0]
        rows.append(
            f"  - trace: {path.resolve()}\n"
            f"    category: {category}\n"
            f"    resolution: {resolution}\n"
            f"    id: c{i}"
        )
    config_path = out / "experiment.yaml"
    config_path.write_text(
        CONFIG_TEMPLATE.format(duration=args.duration, clients="\n".join(rows))
    )
    print(f"wrote {config_path} with {len(trace_files)} clients")

    subprocess.run(
        [sys.executable, "-m", "hassim", "run",
         "--config", str(config_path),
         "--algorithms", args.algorithms,
         "--out", str(out),
         "--seed", str(args.seed)],
        check=True,
    )


if __name__ == "__main__":
    main()
