"""Edge-side per-request quality selection.

Every candidate quality gets a score built from a resolution-weighted
bitrate term, a switching penalty against the running bitrate window, and a
buffer-risk term driven by the predicted post-download buffer level. The
request goes to the first quality attaining the maximum score.
"""

import math
from dataclasses import dataclass
from enum import Enum

from .core import BitrateLadder, EcasParams, Representation, ScreenResolution, beta_for_resolution

#: Estimated throughput is clamped to this floor before any division, which
#: pushes every candidate into the high-risk area and yields the index-0
#: fallback instead of a division error.
THROUGHPUT_FLOOR_KBPS = 1.0

#: Default switching-window size N (the window spans N+1 segments).
DEFAULT_WINDOW_SEGMENTS = 4

NEG_INF = float("-inf")


class RiskArea(Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"


@dataclass(frozen=True)
class PlayerView:
    """Per-client player state as visible at the edge when a request arrives."""

    buffer_s: float
    window_mean_kbps: float
    window_fill: int
    resolution: ScreenResolution
    next_segment_index: int
    last_quality_index: int | None = None

    def __post_init__(self):
        if self.buffer_s < 0:
            raise ValueError(f"buffer level cannot be negative: {self.buffer_s}")
        if self.window_fill < 0:
            raise ValueError("window fill cannot be negative")


@dataclass(frozen=True)
class CandidateScore:
    """Scoring breakdown for one candidate quality level."""

    quality_index: int
    bitrate_score_kbps: float
    switches_penalty: float
    stalls_penalty: float
    download_time_s: float
    predicted_buffer_s: float
    risk_area: RiskArea
    qoe_score: float

    def __post_init__(self):
        if (self.risk_area is RiskArea.HIGH) != (self.qoe_score == NEG_INF):
            raise ValueError("high risk and the -inf sentinel must coincide")
        if self.stalls_penalty > 0 and self.risk_area is not RiskArea.MEDIUM:
            raise ValueError("stall penalty applies only in the medium-risk area")


def bitrate_score(bitrate_kbps: float, resolution: ScreenResolution) -> float:
    """Perceptual value of a bitrate on a given screen: r * (1 - e^(-beta*r/1000)).

    Strictly increasing in the bitrate and bounded above by it.
    """
    beta = beta_for_resolution(resolution)
    return bitrate_kbps * (1.0 - math.exp(-beta * bitrate_kbps * 0.001))


def updated_window_mean(window_mean_kbps: float, window_segments: int, candidate_kbps: float) -> float:
    """Window mean after appending the candidate to the last N+1 segments."""
    n = window_segments
    return (window_mean_kbps * (n + 1) + candidate_kbps) / (n + 2)


def switches_penalty(new_mean_kbps: float, candidate_kbps: float, factor: int) -> float:
    """Penalty proportional to the candidate's distance from the updated mean."""
    return abs(new_mean_kbps - candidate_kbps) * factor


def predicted_buffer(
    buffer_s: float,
    segment_length_s: float,
    candidate_kbps: float,
    est_throughput_kbps: float,
) -> tuple[float, float]:
    """Download time at the estimated throughput and the resulting buffer level.

    The predicted buffer may be negative; risk classification handles that.
    """
    tput = max(est_throughput_kbps, THROUGHPUT_FLOOR_KBPS)
    download_time_s = candidate_kbps * segment_length_s / tput
    return download_time_s, buffer_s + segment_length_s - download_time_s


def candidate_score(
    view: PlayerView,
    rep: Representation,
    params: EcasParams,
    segment_length_s: float,
    window_segments: int,
    est_throughput_kbps: float,
) -> CandidateScore:
    """Score one candidate quality for the next segment request."""
    length = segment_length_s
    r = rep.bitrate_kbps
    r_score = bitrate_score(r, view.resolution)
    new_mean = updated_window_mean(view.window_mean_kbps, window_segments, r)
    sw_penalty = switches_penalty(new_mean, r, params.switches_penalty_factor)
    dt, buf = predicted_buffer(view.buffer_s, length, r, est_throughput_kbps)

    if buf < length * params.buffer_threshold_1:
        risk = RiskArea.HIGH
        stall_penalty = 0.0
        score = NEG_INF
    elif buf < length * params.buffer_threshold_2:
        risk = RiskArea.MEDIUM
        shortfall = length * params.buffer_threshold_2 - buf
        stall_penalty = shortfall * new_mean * params.stalls_penalty_factor
        score = r_score - sw_penalty - stall_penalty
    else:
        risk = RiskArea.LOW
        stall_penalty = 0.0
        score = r_score - sw_penalty

    return CandidateScore(
        quality_index=rep.index,
        bitrate_score_kbps=r_score,
        switches_penalty=sw_penalty,
        stalls_penalty=stall_penalty,
        download_time_s=dt,
        predicted_buffer_s=buf,
        risk_area=risk,
        qoe_score=score,
    )


def score_candidates(
    view: PlayerView,
    ladder: BitrateLadder,
    params: EcasParams,
    window_segments: int,
    est_throughput_kbps: float,
) -> list[CandidateScore]:
    """Score every ladder level for the next request."""
    return [
        candidate_score(view, rep, params, ladder.segment_length_s, window_segments, est_throughput_kbps)
        for rep in ladder.representations
    ]


def select_quality(
    view: PlayerView,
    ladder: BitrateLadder,
    params: EcasParams,
    window_segments: int = DEFAULT_WINDOW_SEGMENTS,
    est_throughput_kbps: float = THROUGHPUT_FLOOR_KBPS,
) -> int:
    """Pick the quality index to request: first maximum of the candidate scores.

    Ties keep the lower index (strict-improvement update); if every candidate
    sits in the high-risk area the lowest quality is requested.
    """
    scores = score_candidates(view, ladder, params, window_segments, est_throughput_kbps)
    best_score = scores[0].qoe_score
    quality_to_request = 0
    for cand in scores[1:]:
        if cand.qoe_score > best_score:
            best_score = cand.qoe_score
            quality_to_request = cand.quality_index
    return quality_to_request
