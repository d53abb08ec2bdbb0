"""Core domain types: bitrate ladders, radio traces, adaptation parameters.

Everything here is immutable after construction and safe to share across
concurrent workers.
"""

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence


class ScreenResolution(Enum):
    """Device screen resolutions with a known bitrate/MOS curve constant."""

    R240P = "240p"
    R360P = "360p"
    R480P = "480p"
    R720P = "720p"
    R1080P = "1080p"
    R2160P = "2160p"

    @classmethod
    def parse(cls, text: str) -> "ScreenResolution":
        for member in cls:
            if member.value == text.strip().lower():
                return member
        raise ValueError(
            f"unknown screen resolution {text!r}; expected one of "
            f"{[m.value for m in cls]}"
        )


# Exponent constants of the bitrate-vs-MOS saturation curve, one per
# supported screen resolution. No interpolation for other resolutions.
_BETA = {
    ScreenResolution.R240P: 8.17,
    ScreenResolution.R360P: 3.73,
    ScreenResolution.R480P: 2.75,
    ScreenResolution.R720P: 1.89,
    ScreenResolution.R1080P: 0.78,
    ScreenResolution.R2160P: 0.5,
}


def beta_for_resolution(resolution: ScreenResolution) -> float:
    """Return the MOS-curve exponent for a screen resolution (total function)."""
    return _BETA[resolution]


class TraceCategory(Enum):
    BUS = "bus"
    CAR = "car"
    PEDESTRIAN = "pedestrian"
    STATIC = "static"
    TRAIN = "train"

    @classmethod
    def parse(cls, text: str) -> "TraceCategory":
        for member in cls:
            if member.value == text.strip().lower():
                return member
        raise ValueError(f"unknown trace category {text!r}")


@dataclass(frozen=True)
class Representation:
    """One rung of the bitrate ladder."""

    index: int
    bitrate_kbps: float
    width: int
    height: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"representation index must be >= 0, got {self.index}")
        if self.bitrate_kbps <= 0:
            raise ValueError(f"bitrate must be positive, got {self.bitrate_kbps}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("representation dimensions must be positive")

    @property
    def resolution_str(self) -> str:
        return f"{self.width}x{self.height}"


@dataclass(frozen=True)
class BitrateLadder:
    """Ordered quality levels plus the fixed segment duration."""

    representations: tuple[Representation, ...]
    segment_length_s: float

    def __post_init__(self):
        if len(self.representations) < 1:
            raise ValueError("ladder needs at least one representation")
        if self.segment_length_s <= 0:
            raise ValueError("segment length must be positive")
        for i, rep in enumerate(self.representations):
            if rep.index != i:
                raise ValueError(
                    f"representation indices must be contiguous from 0; "
                    f"position {i} has index {rep.index}"
                )
        bitrates = [rep.bitrate_kbps for rep in self.representations]
        if any(b2 <= b1 for b1, b2 in zip(bitrates, bitrates[1:])):
            raise ValueError("bitrates must strictly increase with index")

    def __len__(self) -> int:
        return len(self.representations)

    def __getitem__(self, index: int) -> Representation:
        return self.representations[index]

    @property
    def bitrates_kbps(self) -> tuple[float, ...]:
        return tuple(rep.bitrate_kbps for rep in self.representations)

    @property
    def min_bitrate_kbps(self) -> float:
        return self.representations[0].bitrate_kbps

    @property
    def max_bitrate_kbps(self) -> float:
        return self.representations[-1].bitrate_kbps

    def segment_kbits(self, quality_index: int) -> float:
        """Size of one segment at a quality level, in kilobits."""
        return self.representations[quality_index].bitrate_kbps * self.segment_length_s


#: The 20-level ladder used as the simulator default (2-second segments).
DEFAULT_LADDER_KBPS = (
    50, 100, 150, 200, 250, 300, 400, 500, 600, 700,
    900, 1200, 1500, 2000, 2500, 3000, 4000, 5000, 6000, 8000,
)


def _default_encode_dimensions(bitrate_kbps: float) -> tuple[int, int]:
    # Typical DASH encode sizes from 320x240 up to 1920x1080.
    if bitrate_kbps <= 100:
        return 320, 240
    if bitrate_kbps <= 250:
        return 480, 360
    if bitrate_kbps <= 500:
        return 854, 480
    if bitrate_kbps <= 900:
        return 1280, 720
    return 1920, 1080


def make_ladder(
    bitrates_kbps: Sequence[float],
    segment_length_s: float = 2.0,
    resolutions: Sequence[tuple[int, int]] | None = None,
) -> BitrateLadder:
    """Build a ladder from bitrates, deriving encode sizes when not given."""
    if resolutions is not None and len(resolutions) != len(bitrates_kbps):
        raise ValueError("resolutions list must match bitrates list length")
    reps = []
    for i, kbps in enumerate(bitrates_kbps):
        if resolutions is not None:
            w, h = resolutions[i]
        else:
            w, h = _default_encode_dimensions(kbps)
        reps.append(Representation(index=i, bitrate_kbps=float(kbps), width=w, height=h))
    return BitrateLadder(representations=tuple(reps), segment_length_s=float(segment_length_s))


def default_ladder(segment_length_s: float = 2.0) -> BitrateLadder:
    return make_ladder(DEFAULT_LADDER_KBPS, segment_length_s)


class TraceError(ValueError):
    """Base class for radio-trace ingestion failures."""


class TraceParseError(TraceError):
    pass


class TraceValidationError(TraceError):
    pass


class TraceTooShortError(TraceError):
    pass


#: Shortest trace prefix the parameter predictor can consume, in seconds.
MIN_PREDICTION_SECONDS = 5


@dataclass(frozen=True)
class RadioTrace:
    """Per-second downlink throughput samples for one client mobility pattern."""

    id: str
    category: TraceCategory
    samples: tuple[float, ...]

    def __post_init__(self):
        for i, s in enumerate(self.samples):
            if s < 0 or math.isnan(s) or math.isinf(s):
                raise TraceValidationError(
                    f"trace {self.id!r}: sample {i + 1} is {s!r}, "
                    "throughput must be a finite non-negative number"
                )

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> int:
        return len(self.samples)

    def sample_at(self, second_bucket: int) -> float:
        """Throughput for a wall-clock second bucket, wrapping past the end."""
        return self.samples[second_bucket % len(self.samples)]

    def prefix(self, upto_second: int) -> "RadioTrace":
        """The first `upto_second` samples as a trace of their own."""
        if upto_second < 1 or upto_second > len(self.samples):
            raise ValueError(
                f"prefix length {upto_second} out of range 1..{len(self.samples)}"
            )
        return RadioTrace(
            id=self.id, category=self.category, samples=self.samples[:upto_second]
        )


def load_trace(
    path: str | Path,
    category: TraceCategory,
    trace_id: str | None = None,
) -> RadioTrace:
    """Read a radio trace file: one throughput sample (kbps) per line.

    A single leading non-numeric line is tolerated as a header. Blank lines
    are skipped. Raises TraceParseError/TraceValidationError naming the
    offending line.
    """
    path = Path(path)
    samples: list[float] = []
    seen_data = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                value = float(line.split()[0].replace(",", ""))
            except ValueError:
                if not seen_data and lineno == 1:
                    continue  # header line
                raise TraceParseError(
                    f"{path}:{lineno}: cannot parse throughput sample from {line!r}"
                ) from None
            if math.isnan(value) or math.isinf(value):
                raise TraceParseError(f"{path}:{lineno}: non-finite sample {line!r}")
            if value < 0:
                raise TraceValidationError(
                    f"{path}:{lineno}: negative throughput sample {value}"
                )
            samples.append(value)
            seen_data = True
    if not samples:
        raise TraceParseError(f"{path}: no throughput samples found")
    return RadioTrace(
        id=trace_id if trace_id is not None else path.stem,
        category=category,
        samples=tuple(samples),
    )


@dataclass(frozen=True)
class InputVector:
    """Throughput prefix of a trace, the predictor's input at one instant."""

    trace_id: str
    upto_second: int
    values: tuple[float, ...]

    def __post_init__(self):
        if self.upto_second < MIN_PREDICTION_SECONDS:
            raise ValueError(
                f"input vector needs at least {MIN_PREDICTION_SECONDS} seconds, "
                f"got {self.upto_second}"
            )
        if len(self.values) != self.upto_second:
            raise ValueError(
                f"input vector length {len(self.values)} != upto_second {self.upto_second}"
            )


def extract_input_vectors(trace: RadioTrace) -> list[InputVector]:
    """All prediction inputs for a trace: prefixes of length 5..len(trace)."""
    if len(trace) < MIN_PREDICTION_SECONDS:
        raise TraceTooShortError(
            f"trace {trace.id!r} has {len(trace)} samples; "
            f"need at least {MIN_PREDICTION_SECONDS} for prediction"
        )
    return [
        InputVector(
            trace_id=trace.id,
            upto_second=upto,
            values=trace.samples[:upto],
        )
        for upto in range(MIN_PREDICTION_SECONDS, len(trace) + 1)
    ]


@dataclass(frozen=True)
class EcasParams:
    """The four tunables of the edge adaptation algorithm.

    Thresholds are expressed in segment lengths: the high-risk buffer area
    ends at buffer_threshold_1 * L seconds and the medium-risk area at
    buffer_threshold_2 * L seconds.
    """

    switches_penalty_factor: int
    stalls_penalty_factor: int
    buffer_threshold_1: int
    buffer_threshold_2: int

    def __post_init__(self):
        for name in ("switches_penalty_factor", "stalls_penalty_factor"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
        for name in ("buffer_threshold_1", "buffer_threshold_2"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.buffer_threshold_1 >= self.buffer_threshold_2:
            raise ValueError(
                f"buffer_threshold_1 ({self.buffer_threshold_1}) must be below "
                f"buffer_threshold_2 ({self.buffer_threshold_2})"
            )

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (
            self.switches_penalty_factor,
            self.stalls_penalty_factor,
            self.buffer_threshold_1,
            self.buffer_threshold_2,
        )
