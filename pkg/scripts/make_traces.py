#!/usr/bin/env python3
"""Generate synthetic radio trace files (one throughput sample per line, kbps).

Shapes: steady links, random walks, and periodic deep fades -- enough variety
to exercise every adaptation algorithm without the real 4G corpus.
"""

import argparse
import random
from pathlib import Path


def steady(rng, length, level):
    return [max(0.0, rng.gauss(level, level * 0.05)) for _ in range(length)]


def walk(rng, length, start=3000.0, lo=100.0, hi=12000.0):
    samples, level = [], start
    for _ in range(length):
        level = min(hi, max(lo, level * rng.uniform(0.6, 1.6)))
        samples.append(level)
    return samples


def fades(rng, length, high=4000.0, low=50.0, high_s=20, fade_s=8):
    samples = []
    while len(samples) < length:
        samples.extend([high + rng.uniform(-200, 200)] * high_s)
        samples.extend([low] * fade_s)
    return samples[:length]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="traces", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--length", type=int, default=120, help="trace length in seconds")
    parser.add_argument("--per-shape", type=int, default=2, help="traces per shape")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    shapes = {
        "static_steady": lambda: steady(rng, args.length, rng.choice([2000, 5000, 9000])),
        "car_walk": lambda: walk(rng, args.length),
        "train_fades": lambda: fades(rng, args.length),
    }
    for shape, generate in shapes.items():
        for i in range(args.per_shape):
            path = out / f"{shape}_{i}.txt"
            path.write_text("".join(f"{sample:.1f}\n" for sample in generate()))
            print(f"wrote {path}")


if __name__ == "__main__":
    main()
