"""Brute-force search for the best adaptation parameters per trace prefix.

Each trace prefix is simulated as a single-client session once per grid
point; the point with the best composite QoE becomes the label for that
prefix. The labeled prefixes form the training dataset for the external
parameter predictor.
"""

import itertools
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

from .core import (
    MIN_PREDICTION_SECONDS,
    BitrateLadder,
    EcasParams,
    InputVector,
    RadioTrace,
    ScreenResolution,
    TraceTooShortError,
    default_ladder,
)
from .metrics import QoeWeights
from .predictor import StaticParams
from .simulation import ClientSpec, NetworkPath, SessionConfig, run_session

DATASET_FORMAT = "oracle-dataset"


@dataclass(frozen=True)
class ParamGrid:
    """Integer search ranges for the four adaptation parameters."""

    switches_penalty_factor: tuple[int, ...] = (0, 1, 2, 4, 8)
    stalls_penalty_factor: tuple[int, ...] = (0, 1, 2, 4, 8)
    buffer_threshold_1: tuple[int, ...] = (1, 2, 3, 4)
    buffer_threshold_2: tuple[int, ...] = (4, 6, 8, 10)

    def __post_init__(self):
        if not any(True for _ in self.points()):
            raise ValueError("grid is empty after applying threshold ordering")

    def points(self) -> Iterator[EcasParams]:
        """Lexicographic iteration over valid 4-tuples (threshold 1 < threshold 2)."""
        for sw, st, t1, t2 in itertools.product(
            self.switches_penalty_factor,
            self.stalls_penalty_factor,
            self.buffer_threshold_1,
            self.buffer_threshold_2,
        ):
            if t1 < t2:
                yield EcasParams(sw, st, t1, t2)

    def size(self) -> int:
        return sum(1 for _ in self.points())


@dataclass(frozen=True)
class TrainingSample:
    vector: InputVector
    label: EcasParams
    achieved_qoe: float


@dataclass(frozen=True)
class OracleSimConfig:
    """Single-client session settings used for every grid evaluation."""

    ladder: BitrateLadder = field(default_factory=default_ladder)
    resolution: ScreenResolution = ScreenResolution.R1080P
    max_buffer_s: float = 20.0
    startup_segments: int = 1
    est_window_s: int = 5
    window_segments: int = 4
    network: NetworkPath = field(default_factory=lambda: NetworkPath(latency_ms=40.0))
    qoe_weights: QoeWeights = field(default_factory=QoeWeights)

    def session_for(self, trace: RadioTrace, params: EcasParams) -> SessionConfig:
        return SessionConfig(
            clients=(
                ClientSpec(
                    client_id="oracle",
                    trace=trace,
                    resolution=self.resolution,
                    algorithm="ecas-static",
                ),
            ),
            ladder=self.ladder,
            duration_s=float(len(trace)),
            max_buffer_s=self.max_buffer_s,
            startup_segments=self.startup_segments,
            est_window_s=self.est_window_s,
            window_segments=self.window_segments,
            bootstrap_params=params,
            network=self.network,
            qoe_weights=self.qoe_weights,
        )


def evaluate_point(
    trace: RadioTrace, upto_second: int, params: EcasParams, sim: OracleSimConfig
) -> float:
    """Composite QoE of one grid point on one trace prefix."""
    prefix = trace.prefix(upto_second)
    config = sim.session_for(prefix, params)
    result = run_session(config, StaticParams(params))
    return result.metrics["oracle"].composite_qoe


def grid_search(
    trace: RadioTrace,
    upto_second: int,
    grid: ParamGrid,
    sim: OracleSimConfig,
) -> tuple[EcasParams, float]:
    """Best grid point for a trace prefix; ties keep the earlier grid point."""
    if upto_second < MIN_PREDICTION_SECONDS:
        raise TraceTooShortError(
            f"prefix of {upto_second} s is below the {MIN_PREDICTION_SECONDS}-second minimum"
        )
    best_params = None
    best_qoe = float("-inf")
    for params in grid.points():
        qoe = evaluate_point(trace, upto_second, params, sim)
        if qoe > best_qoe:
            best_qoe = qoe
            best_params = params
    return best_params, best_qoe


def _label_one(args) -> tuple[str, int, tuple[int, int, int, int], float]:
    trace, upto, grid, sim = args
    params, qoe = grid_search(trace, upto, grid, sim)
    return trace.id, upto, params.as_tuple(), qoe


def label_dataset(
    traces: Sequence[RadioTrace],
    grid: ParamGrid,
    sim: OracleSimConfig,
    out_path: str | Path,
    seed: int = 0,
    jobs: int = 1,
    done: dict | None = None,
    progress=None,
) -> list[TrainingSample]:
    """Label every prefix of every trace and write the dataset file.

    Samples are shuffled with the recorded seed before writing, so reruns
    with the same inputs produce byte-identical files. ``done`` maps
    (trace id, second) to previously computed (label tuple, qoe) pairs and
    lets an interrupted run resume without re-simulating.
    """
    done = dict(done) if done else {}
    tasks = []
    for trace in traces:
        for upto in range(MIN_PREDICTION_SECONDS, len(trace) + 1):
            if (trace.id, upto) not in done:
                tasks.append((trace, upto, grid, sim))

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for trace_id, upto, label, qoe in pool.map(_label_one, tasks, chunksize=4):
                done[(trace_id, upto)] = (label, qoe)
                if progress is not None:
                    progress(trace_id, upto, label, qoe)
    else:
        for task in tasks:
            trace_id, upto, label, qoe = _label_one(task)
            done[(trace_id, upto)] = (label, qoe)
            if progress is not None:
                progress(trace_id, upto, label, qoe)

    samples = []
    for trace in traces:
        for upto in range(MIN_PREDICTION_SECONDS, len(trace) + 1):
            label, qoe = done[(trace.id, upto)]
            samples.append(
                TrainingSample(
                    vector=InputVector(
                        trace_id=trace.id, upto_second=upto, values=trace.samples[:upto]
                    ),
                    label=EcasParams(*label),
                    achieved_qoe=qoe,
                )
            )
    random.Random(seed).shuffle(samples)
    write_dataset(samples, out_path, seed=seed, grid=grid)
    return samples


def write_dataset(
    samples: Sequence[TrainingSample], path: str | Path, seed: int, grid: ParamGrid
) -> None:
    header = {
        "format": DATASET_FORMAT,
        "version": 1,
        "samples": len(samples),
        "seed": seed,
        "grid": {
            "switches_penalty_factor": list(grid.switches_penalty_factor),
            "stalls_penalty_factor": list(grid.stalls_penalty_factor),
            "buffer_threshold_1": list(grid.buffer_threshold_1),
            "buffer_threshold_2": list(grid.buffer_threshold_2),
        },
    }
    with open(Path(path), "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for sample in samples:
            fh.write(
                json.dumps(
                    {
                        "trace_id": sample.vector.trace_id,
                        "upto_second": sample.vector.upto_second,
                        "throughput_kbps": list(sample.vector.values),
                        "label": list(sample.label.as_tuple()),
                        "achieved_qoe": sample.achieved_qoe,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def read_dataset(path: str | Path) -> tuple[dict, list[TrainingSample]]:
    """Parse a dataset file back into training samples (header, samples)."""
    path = Path(path)
    samples: list[TrainingSample] = []
    header: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise ValueError(f"{path}:{lineno}: invalid record: {err}") from None
            if "format" in record and "trace_id" not in record:
                header = record
                continue
            try:
                vector = InputVector(
                    trace_id=str(record["trace_id"]),
                    upto_second=int(record["upto_second"]),
                    values=tuple(float(v) for v in record["throughput_kbps"]),
                )
                label = EcasParams(*[int(v) for v in record["label"]])
                samples.append(
                    TrainingSample(
                        vector=vector,
                        label=label,
                        achieved_qoe=float(record["achieved_qoe"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as err:
                raise ValueError(f"{path}:{lineno}: bad sample record: {err}") from None
    if not header:
        raise ValueError(f"{path}: missing dataset header line")
    return header, samples
