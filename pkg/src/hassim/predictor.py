"""Parameter sources for the adaptation algorithm.

A session obtains its four adaptation parameters either from a constant
(static runs), or from a precomputed prediction table keyed by
(trace id, second). Table entries hold between reprediction instants, and
before the first predictable second the configured bootstrap parameters
apply. No external process is ever called at decision time.
"""

import json
import logging
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path

from .core import MIN_PREDICTION_SECONDS, EcasParams

log = logging.getLogger(__name__)

#: Parameters used before the first prediction exists.
DEFAULT_BOOTSTRAP_PARAMS = EcasParams(1, 1, 3, 6)


class PredictionLookupError(KeyError):
    """A trace id is absent from the prediction table."""


@dataclass(frozen=True)
class StaticParams:
    """Constant parameter source."""

    params: EcasParams = DEFAULT_BOOTSTRAP_PARAMS

    def params_at(self, trace_id: str, second: float) -> EcasParams:
        return self.params


@dataclass
class PredictionTable:
    """Step-hold map from (trace id, second) to adaptation parameters."""

    entries: dict[str, list[tuple[int, EcasParams]]] = field(default_factory=dict)
    bootstrap: EcasParams = DEFAULT_BOOTSTRAP_PARAMS
    repair_count: int = 0
    record_count: int = 0

    def add(self, trace_id: str, second: int, params: EcasParams) -> None:
        rows = self.entries.setdefault(trace_id, [])
        rows.append((second, params))
        rows.sort(key=lambda row: row[0])

    def params_at(self, trace_id: str, second: float) -> EcasParams:
        """Entry at the greatest key <= second; bootstrap before the first key."""
        if second < 0:
            raise ValueError(f"second must be >= 0, got {second}")
        if trace_id not in self.entries:
            raise PredictionLookupError(
                f"trace {trace_id!r} has no entries in the prediction table"
            )
        rows = self.entries[trace_id]
        keys = [key for key, _ in rows]
        pos = bisect_right(keys, second)
        if pos == 0:
            return self.bootstrap
        return rows[pos - 1][1]


def params_at(source, trace_id: str, second: float) -> EcasParams:
    """Parameters governing a trace at a given session second."""
    return source.params_at(trace_id, second)


def round_half_away(x: float) -> int:
    """Round to the nearest integer, halves away from zero."""
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def repair_params(values: tuple[float, float, float, float], max_threshold_2: int | None = None) -> tuple[EcasParams, bool]:
    """Coerce four real-valued predictions into valid parameters.

    Rounds half-away, clamps factors to >= 0 and thresholds to >= 1, swaps
    descending thresholds into ascending order (bumping threshold 2 by one
    when they collide). Returns the parameters and whether a threshold
    repair was needed.
    """
    sw = max(0, round_half_away(values[0]))
    st = max(0, round_half_away(values[1]))
    thr1 = max(1, round_half_away(values[2]))
    thr2 = max(1, round_half_away(values[3]))
    repaired = False
    if thr1 >= thr2:
        repaired = True
        thr1, thr2 = min(thr1, thr2), max(thr1, thr2)
        if thr1 == thr2:
            thr2 += 1
    if max_threshold_2 is not None:
        if thr2 > max_threshold_2:
            repaired = True
            thr2 = max_threshold_2
            thr1 = min(thr1, thr2 - 1)
    return EcasParams(sw, st, thr1, thr2), repaired


def load_prediction_table(
    path: str | Path,
    bootstrap: EcasParams = DEFAULT_BOOTSTRAP_PARAMS,
    max_threshold_2: int | None = None,
) -> PredictionTable:
    """Parse a prediction-table file (JSON lines).

    Each record is an object with ``trace_id``, ``second`` and ``params``
    (four reals). A leading object carrying a ``format`` key is treated as a
    file header. Invalid parameter vectors are repaired with a logged
    warning; unparseable lines raise with their line number.
    """
    path = Path(path)
    table = PredictionTable(bootstrap=bootstrap)
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise ValueError(f"{path}:{lineno}: invalid record: {err}") from None
            if not isinstance(record, dict):
                raise ValueError(f"{path}:{lineno}: expected an object per line")
            if "format" in record and "trace_id" not in record:
                continue  # header line
            try:
                trace_id = str(record["trace_id"])
                second = int(record["second"])
                values = tuple(float(v) for v in record["params"])
            except (KeyError, TypeError, ValueError) as err:
                raise ValueError(
                    f"{path}:{lineno}: record needs trace_id, second and 4 params: {err}"
                ) from None
            if len(values) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 parameters, got {len(values)}")
            if second < MIN_PREDICTION_SECONDS:
                raise ValueError(
                    f"{path}:{lineno}: prediction second {second} is below the "
                    f"minimum of {MIN_PREDICTION_SECONDS}"
                )
            params, repaired = repair_params(values, max_threshold_2=max_threshold_2)
            if repaired:
                table.repair_count += 1
                log.warning(
                    "%s:%d: repaired invalid thresholds %r -> (%d, %d)",
                    path, lineno, values[2:], params.buffer_threshold_1, params.buffer_threshold_2,
                )
            table.record_count += 1
            table.add(trace_id, second, params)
    return table


def write_prediction_table(
    path: str | Path,
    records: list[tuple[str, int, tuple[float, float, float, float]]],
    metadata: dict | None = None,
) -> None:
    """Write prediction records in the table file format (with header line)."""
    path = Path(path)
    header = {"format": "prediction-table", "version": 1}
    if metadata:
        header.update(metadata)
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for trace_id, second, values in records:
            fh.write(
                json.dumps(
                    {"trace_id": trace_id, "second": second, "params": list(values)},
                    sort_keys=True,
                )
                + "\n"
            )
