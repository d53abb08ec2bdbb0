"""Comparison ABR algorithms.

Client-side: throughput-based (TBA), buffer-based (BBA), hybrid (SARA).
Edge-side: greedy shared-capacity allocation (GBBA) and a bounded on-the-fly
correction of a client's choice (EADAS). All are documented simplifications,
not faithful reproductions of the original designs.
"""

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import BitrateLadder, EcasParams
from .ecas import DEFAULT_WINDOW_SEGMENTS, PlayerView, bitrate_score, score_candidates

#: Default parameters used by the edge correction step.
EADAS_DEFAULT_PARAMS = EcasParams(1, 1, 3, 6)


@dataclass(frozen=True)
class BaselineConfig:
    """Knobs for the baseline algorithms, recorded in the experiment config."""

    tba_safety_factor: float = 0.9
    bba_reservoir_s: float = 4.0
    bba_cushion_s: float = 16.0
    sara_window: int = 5
    gbba_capacity_kbps: float | None = None
    eadas_adjust_range: int = 1

    def __post_init__(self):
        if not 0 < self.tba_safety_factor <= 1:
            raise ValueError("tba_safety_factor must lie in (0, 1]")
        if self.bba_reservoir_s >= self.bba_cushion_s:
            raise ValueError("bba reservoir must be below the cushion")
        if self.sara_window < 1:
            raise ValueError("sara_window must be >= 1")
        if self.gbba_capacity_kbps is not None and self.gbba_capacity_kbps <= 0:
            raise ValueError("gbba capacity must be positive")
        if self.eadas_adjust_range < 0:
            raise ValueError("eadas_adjust_range must be >= 0")


def tba_select(
    est_throughput_kbps: float,
    ladder: BitrateLadder,
    safety_factor: float = 0.9,
) -> int:
    """Highest quality whose bitrate fits under the discounted throughput estimate."""
    budget = safety_factor * est_throughput_kbps
    choice = 0
    for rep in ladder.representations:
        if rep.bitrate_kbps <= budget:
            choice = rep.index
    return choice


def bba_select(
    buffer_s: float,
    ladder: BitrateLadder,
    reservoir_s: float = 4.0,
    cushion_s: float = 16.0,
) -> int:
    """Map the buffer level linearly onto the ladder between reservoir and cushion."""
    top = len(ladder) - 1
    if buffer_s <= reservoir_s:
        return 0
    if buffer_s >= cushion_s:
        return top
    frac = (buffer_s - reservoir_s) / (cushion_s - reservoir_s)
    return min(top, int(math.floor(frac * top)))


def sara_select(
    view: PlayerView,
    ladder: BitrateLadder,
    weighted_harmonic_throughput_kbps: float,
    segment_size_bits: Sequence[float] | None = None,
) -> int:
    """Hybrid rule: highest quality whose predicted download fits the buffer slack.

    The weighted harmonic throughput comes from the download history (weights
    are segment sizes). With an empty history, or with throughput below the
    lowest rung, the lowest quality is requested. Below the fast-start
    threshold the step up is limited to one level above the last download.
    """
    if view.window_fill == 0 or weighted_harmonic_throughput_kbps <= 0:
        return 0
    if weighted_harmonic_throughput_kbps < ladder.min_bitrate_kbps:
        return 0

    length = ladder.segment_length_s
    if segment_size_bits is None:
        segment_size_bits = [ladder.segment_kbits(i) * 1000.0 for i in range(len(ladder))]
    if len(segment_size_bits) != len(ladder):
        raise ValueError("segment_size_bits must carry one size per quality level")

    fast_start_s = 3 * length
    # One segment must always remain; above the fast-start area the remainder
    # of the buffer is spendable on the download.
    slack_s = max(0.0, view.buffer_s - length)
    if view.buffer_s < fast_start_s:
        cap = min(len(ladder) - 1, (view.last_quality_index or 0) + 1)
    else:
        cap = len(ladder) - 1

    choice = 0
    for index in range(cap + 1):
        download_time_s = segment_size_bits[index] / (weighted_harmonic_throughput_kbps * 1000.0)
        if download_time_s <= slack_s:
            choice = index
    return choice


def weighted_harmonic_mean_kbps(
    sizes_kbits: Sequence[float], rates_kbps: Sequence[float]
) -> float:
    """Size-weighted harmonic mean of realized download rates."""
    if not sizes_kbits:
        return 0.0
    denom = sum(size / max(rate, 1e-9) for size, rate in zip(sizes_kbits, rates_kbps))
    if denom <= 0:
        return 0.0
    return sum(sizes_kbits) / denom


def gbba_allocate(
    views: Mapping[str, PlayerView],
    ladder: BitrateLadder,
    shared_capacity_kbps: float,
) -> dict[str, int]:
    """Greedy shared-capacity allocation across all clients.

    Everyone starts at the lowest quality; the client with the best marginal
    bitrate-score gain per kbps is upgraded one level at a time while the
    summed bitrate stays within capacity. Ties go to the smaller client id.
    """
    if shared_capacity_kbps <= 0:
        raise ValueError("shared capacity must be positive")
    allocation = {client_id: 0 for client_id in views}
    order = sorted(views)
    total = ladder.min_bitrate_kbps * len(views)

    while True:
        best_gain = 0.0
        best_client = None
        for client_id in order:
            level = allocation[client_id]
            if level >= len(ladder) - 1:
                continue
            current = ladder[level].bitrate_kbps
            upgraded = ladder[level + 1].bitrate_kbps
            if total - current + upgraded > shared_capacity_kbps:
                continue
            resolution = views[client_id].resolution
            gain = (
                bitrate_score(upgraded, resolution) - bitrate_score(current, resolution)
            ) / (upgraded - current)
            if gain > best_gain:
                best_gain = gain
                best_client = client_id
        if best_client is None:
            return allocation
        level = allocation[best_client]
        total += ladder[level + 1].bitrate_kbps - ladder[level].bitrate_kbps
        allocation[best_client] = level + 1


def eadas_adjust(
    client_choice: int,
    view: PlayerView,
    ladder: BitrateLadder,
    est_throughput_kbps: float,
    adjust_range: int = 1,
    params: EcasParams = EADAS_DEFAULT_PARAMS,
    window_segments: int = DEFAULT_WINDOW_SEGMENTS,
) -> int:
    """Edge correction of a client's pick within +/- adjust_range levels.

    Returns the index in the window with the best candidate score, keeping
    the first maximum on ties.
    """
    if not 0 <= client_choice < len(ladder):
        raise ValueError(f"client choice {client_choice} outside the ladder")
    low = max(0, client_choice - adjust_range)
    high = min(len(ladder) - 1, client_choice + adjust_range)
    scores = score_candidates(view, ladder, params, window_segments, est_throughput_kbps)
    best = scores[low].qoe_score
    choice = low
    for index in range(low + 1, high + 1):
        if scores[index].qoe_score > best:
            best = scores[index].qoe_score
            choice = index
    return choice
