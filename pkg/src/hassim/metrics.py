"""Session metrics from event logs and the composite QoE surrogate.

The composite score maps a bitrate-value term against switching and stall
penalties onto the 1..5 opinion scale. It stands in for standardized
audiovisual models internally; sessions are also exportable as a
measurement log for external scoring tools.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import eventlog as ev
from .core import ScreenResolution
from .ecas import bitrate_score


@dataclass(frozen=True)
class QoeWeights:
    """Weights of the composite score terms (all non-negative)."""

    bitrate: float = 1.0
    switches: float = 0.3
    stalls: float = 2.0

    def __post_init__(self):
        if min(self.bitrate, self.switches, self.stalls) < 0:
            raise ValueError("QoE weights must be non-negative")

    def as_dict(self) -> dict:
        return {"bitrate": self.bitrate, "switches": self.switches, "stalls": self.stalls}

    @classmethod
    def from_dict(cls, data: dict) -> "QoeWeights":
        return cls(
            bitrate=float(data.get("bitrate", 1.0)),
            switches=float(data.get("switches", 0.3)),
            stalls=float(data.get("stalls", 2.0)),
        )


@dataclass(frozen=True)
class SessionMetrics:
    mean_bitrate_kbps: float
    mean_switch_magnitude_kbps: float
    mean_switch_magnitude_index: float
    stall_count: int
    mean_stall_duration_ms: float
    startup_delay_ms: float
    composite_qoe: float


class IncompleteLogError(ValueError):
    pass


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def composite_qoe(
    segment_bitrates_kbps: Sequence[float],
    resolution: ScreenResolution,
    ladder_bitrates_kbps: Sequence[float],
    stall_time_s: float,
    play_time_s: float,
    weights: QoeWeights = QoeWeights(),
) -> float:
    """Composite opinion score in [1, 5].

    Monotone increasing in the per-segment bitrate value, non-increasing in
    switching magnitude and in the stall ratio. A session that never plays
    scores 1.0; a max-bitrate zero-switch zero-stall session scores 5.0.
    """
    r_max = max(ladder_bitrates_kbps)
    r_min = min(ladder_bitrates_kbps)

    if segment_bitrates_kbps:
        top_value = bitrate_score(r_max, resolution)
        mean_value = math.fsum(
            bitrate_score(r, resolution) for r in segment_bitrates_kbps
        ) / len(segment_bitrates_kbps)
        bitrate_term = mean_value / top_value
    else:
        bitrate_term = 0.0

    if len(segment_bitrates_kbps) >= 2 and r_max > r_min:
        deltas = [
            abs(b - a)
            for a, b in zip(segment_bitrates_kbps, segment_bitrates_kbps[1:])
        ]
        switch_term = (math.fsum(deltas) / len(deltas)) / (r_max - r_min)
    else:
        switch_term = 0.0

    active = stall_time_s + play_time_s
    stall_term = (stall_time_s / active) if active > 0 else 1.0

    raw = weights.bitrate * bitrate_term - weights.switches * switch_term - weights.stalls * stall_term
    return 1.0 + 4.0 * _clamp01(raw)


@dataclass
class _ClientTrack:
    resolution: ScreenResolution | None = None
    bitrates: list = field(default_factory=list)
    qualities: list = field(default_factory=list)
    stall_durations_s: list = field(default_factory=list)
    startup_s: float | None = None


def compute_metrics(events: list[ev.Event], weights: QoeWeights | None = None) -> dict[str, SessionMetrics]:
    """Recompute per-client session metrics from an event log.

    Pure function of the log: replaying a written log reproduces the
    metrics exactly. Switch magnitudes average over switching pairs only.
    """
    if not events:
        raise IncompleteLogError("empty event log")
    if events[-1].event != ev.SESSION_END and not any(e.event == ev.SESSION_END for e in events):
        raise IncompleteLogError(f"no session end; last event was {events[-1].event!r} at {events[-1].time_s}")

    duration_s = None
    ladder_bitrates: list[float] = []
    log_weights = QoeWeights()
    tracks: dict[str, _ClientTrack] = {}

    for event in events:
        if event.event == ev.SESSION_START:
            duration_s = float(event.payload["duration_s"])
            ladder_bitrates = [float(row[0]) for row in event.payload["ladder"]]
            log_weights = QoeWeights.from_dict(event.payload.get("qoe_weights", {}))
        elif event.event == ev.CLIENT_START:
            track = tracks.setdefault(event.client, _ClientTrack())
            track.resolution = ScreenResolution.parse(event.payload["resolution"])
        elif event.event == ev.DOWNLOAD_END:
            track = tracks.setdefault(event.client, _ClientTrack())
            track.bitrates.append(float(event.payload["bitrate_kbps"]))
            track.qualities.append(int(event.payload["quality"]))
        elif event.event == ev.STALL_END:
            track = tracks.setdefault(event.client, _ClientTrack())
            track.stall_durations_s.append(float(event.payload["duration_s"]))
        elif event.event == ev.PLAYBACK_START:
            track = tracks.setdefault(event.client, _ClientTrack())
            track.startup_s = event.time_s

    if duration_s is None:
        raise IncompleteLogError("no session start event found")
    if weights is None:
        weights = log_weights

    result: dict[str, SessionMetrics] = {}
    for client_id in sorted(tracks):
        track = tracks[client_id]
        result[client_id] = _client_metrics(track, duration_s, ladder_bitrates, weights)
    return result


def _switch_magnitudes(values: Sequence[float]) -> list[float]:
    return [abs(b - a) for a, b in zip(values, values[1:]) if b != a]


def _client_metrics(
    track: _ClientTrack,
    duration_s: float,
    ladder_bitrates: Sequence[float],
    weights: QoeWeights,
) -> SessionMetrics:
    mean_bitrate = math.fsum(track.bitrates) / len(track.bitrates) if track.bitrates else 0.0

    kbps_switches = _switch_magnitudes(track.bitrates)
    index_switches = _switch_magnitudes([float(q) for q in track.qualities])
    mean_switch_kbps = math.fsum(kbps_switches) / len(kbps_switches) if kbps_switches else 0.0
    mean_switch_index = math.fsum(index_switches) / len(index_switches) if index_switches else 0.0

    stall_count = len(track.stall_durations_s)
    stall_total_s = math.fsum(track.stall_durations_s)
    mean_stall_ms = (stall_total_s / stall_count * 1000.0) if stall_count else 0.0

    startup_s = track.startup_s if track.startup_s is not None else duration_s
    play_time_s = max(0.0, duration_s - startup_s - stall_total_s)

    qoe = composite_qoe(
        track.bitrates,
        track.resolution if track.resolution is not None else ScreenResolution.R1080P,
        ladder_bitrates if ladder_bitrates else [1.0],
        stall_time_s=stall_total_s,
        play_time_s=play_time_s,
        weights=weights,
    )
    return SessionMetrics(
        mean_bitrate_kbps=mean_bitrate,
        mean_switch_magnitude_kbps=mean_switch_kbps,
        mean_switch_magnitude_index=mean_switch_index,
        stall_count=stall_count,
        mean_stall_duration_ms=mean_stall_ms,
        startup_delay_ms=startup_s * 1000.0,
        composite_qoe=qoe,
    )


# -- measurement-log export ----------------------------------------------


def export_p1203_log(events: list[ev.Event], path: str | Path) -> None:
    """Write a per-segment measurement bundle for external QoE tooling.

    One JSON document: per client, ``I13.segments`` records (start, duration,
    bitrate, resolution, codec, quality index) and ``I23.stalling`` intervals
    as [start, duration] pairs, plus the display size and enough session
    context to recompute the session metrics on re-import.
    """
    duration_s = None
    segment_length_s = None
    ladder: list = []
    weights: dict = {}
    clients: dict[str, dict] = {}
    rep_resolution: dict[int, str] = {}
    open_stalls: dict[str, float] = {}

    for event in events:
        if event.event == ev.SESSION_START:
            duration_s = event.payload["duration_s"]
            segment_length_s = event.payload["segment_length_s"]
            ladder = event.payload["ladder"]
            weights = event.payload.get("qoe_weights", {})
            rep_resolution = {i: f"{row[1]}x{row[2]}" for i, row in enumerate(ladder)}
        elif event.event == ev.CLIENT_START:
            clients[event.client] = {
                "IGen": {"displaySize": _display_size(event.payload["resolution"])},
                "I13": {"segments": []},
                "I23": {"stalling": [], "playbackStart": None},
            }
        elif event.event == ev.DOWNLOAD_END:
            entry = clients[event.client]
            quality = int(event.payload["quality"])
            entry["I13"]["segments"].append(
                {
                    "start": event.time_s,
                    "duration": segment_length_s,
                    "bitrate": event.payload["bitrate_kbps"],
                    "resolution": rep_resolution.get(quality, "unknown"),
                    "codec": "h264",
                    "qualityIndex": quality,
                }
            )
        elif event.event == ev.PLAYBACK_START:
            clients[event.client]["I23"]["playbackStart"] = event.time_s
        elif event.event == ev.STALL_START:
            open_stalls[event.client] = event.time_s
        elif event.event == ev.STALL_END:
            start = open_stalls.pop(event.client, event.time_s - event.payload["duration_s"])
            clients[event.client]["I23"]["stalling"].append([start, event.payload["duration_s"]])

    if duration_s is None:
        raise IncompleteLogError("no session start event found")

    bundle = {
        "format": "p1203-measurement-bundle",
        "version": 1,
        "session": {
            "duration_s": duration_s,
            "segment_length_s": segment_length_s,
            "ladder": ladder,
            "qoe_weights": weights,
        },
        "clients": clients,
    }
    with open(Path(path), "w") as fh:
        json.dump(bundle, fh, sort_keys=True, indent=1)


_DISPLAY_SIZES = {
    "240p": "426x240",
    "360p": "640x360",
    "480p": "854x480",
    "720p": "1280x720",
    "1080p": "1920x1080",
    "2160p": "3840x2160",
}

_DISPLAY_TO_RESOLUTION = {size: name for name, size in _DISPLAY_SIZES.items()}


def _display_size(resolution: str) -> str:
    return _DISPLAY_SIZES[resolution]


def import_p1203_log(path: str | Path, weights: QoeWeights | None = None) -> dict[str, SessionMetrics]:
    """Recompute session metrics from an exported measurement bundle."""
    with open(Path(path)) as fh:
        bundle = json.load(fh)
    if bundle.get("format") != "p1203-measurement-bundle":
        raise ValueError(f"{path}: not a measurement bundle")
    session = bundle["session"]
    duration_s = float(session["duration_s"])
    ladder_bitrates = [float(row[0]) for row in session["ladder"]]
    if weights is None:
        weights = QoeWeights.from_dict(session.get("qoe_weights", {}))

    result: dict[str, SessionMetrics] = {}
    for client_id in sorted(bundle["clients"]):
        record = bundle["clients"][client_id]
        track = _ClientTrack()
        track.resolution = ScreenResolution.parse(
            _DISPLAY_TO_RESOLUTION[record["IGen"]["displaySize"]]
        )
        for segment in record["I13"]["segments"]:
            track.bitrates.append(float(segment["bitrate"]))
            track.qualities.append(int(segment["qualityIndex"]))
        track.stall_durations_s = [float(d) for _, d in record["I23"]["stalling"]]
        start = record["I23"]["playbackStart"]
        track.startup_s = float(start) if start is not None else None
        result[client_id] = _client_metrics(track, duration_s, ladder_bitrates, weights)
    return result
