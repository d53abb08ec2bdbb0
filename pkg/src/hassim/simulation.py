"""Deterministic discrete-event simulation of the delivery chain.

Clients request segments through an edge node; each request runs an ABR
decision, the download drains trace-driven radio throughput (capped by the
backhaul share), and buffer/stall dynamics are accounted in continuous time.
Radio samples define piecewise-constant throughput per one-second wall-clock
bucket; traces shorter than the session wrap around.
"""

import heapq
import math
import random
from collections import deque
from dataclasses import dataclass, field, replace

from . import eventlog as ev
from .baselines import (
    EADAS_DEFAULT_PARAMS,
    BaselineConfig,
    bba_select,
    eadas_adjust,
    gbba_allocate,
    sara_select,
    tba_select,
    weighted_harmonic_mean_kbps,
)
from .core import MIN_PREDICTION_SECONDS, BitrateLadder, EcasParams, RadioTrace, ScreenResolution
from .ecas import THROUGHPUT_FLOOR_KBPS, PlayerView, RiskArea, score_candidates
from .metrics import QoeWeights, compute_metrics
from .predictor import DEFAULT_BOOTSTRAP_PARAMS, StaticParams

ALGORITHMS = ("ecas-static", "ecas-table", "tba", "bba", "sara", "gbba", "eadas")

_EPS = 1e-9
_TIME_TOL = 1e-6


class ConfigError(ValueError):
    """Session configuration is inconsistent; raised before any event runs."""


@dataclass(frozen=True)
class NetworkPath:
    """Latency and backhaul capacity of the server-to-client path."""

    latency_ms: float = 40.0
    capacity_kbps: float = 1_000_000.0

    def __post_init__(self):
        if self.latency_ms < 0:
            raise ConfigError("latency cannot be negative")
        if self.capacity_kbps <= 0:
            raise ConfigError("backhaul capacity must be positive")

    @property
    def latency_s(self) -> float:
        return self.latency_ms / 1000.0


@dataclass(frozen=True)
class ClientSpec:
    client_id: str
    trace: RadioTrace
    resolution: ScreenResolution
    algorithm: str


@dataclass(frozen=True)
class SessionConfig:
    clients: tuple[ClientSpec, ...]
    ladder: BitrateLadder
    duration_s: float
    max_buffer_s: float = 20.0
    startup_segments: int = 1
    repredict_interval_s: float = 10.0
    est_window_s: int = 5
    window_segments: int = 4
    bootstrap_params: EcasParams = DEFAULT_BOOTSTRAP_PARAMS
    network: NetworkPath = field(default_factory=NetworkPath)
    baselines: BaselineConfig = field(default_factory=BaselineConfig)
    qoe_weights: QoeWeights = field(default_factory=QoeWeights)
    seed: int = 0
    start_offset_max_s: float = 0.0

    def validate(self) -> None:
        if not self.clients:
            raise ConfigError("session needs at least one client")
        ids = [c.client_id for c in self.clients]
        if len(set(ids)) != len(ids):
            raise ConfigError("client ids must be unique")
        if self.duration_s <= 0:
            raise ConfigError("session duration must be positive")
        if self.startup_segments < 1:
            raise ConfigError("startup_segments must be >= 1")
        if self.est_window_s < 1:
            raise ConfigError("throughput estimate window must be >= 1 second")
        if self.window_segments < 0:
            raise ConfigError("switching window size must be >= 0")
        if self.repredict_interval_s <= 0:
            raise ConfigError("reprediction interval must be positive")
        if self.start_offset_max_s < 0:
            raise ConfigError("start offset bound cannot be negative")
        length = self.ladder.segment_length_s
        if self.max_buffer_s < 2 * length:
            raise ConfigError("max buffer must hold at least two segments")
        for client in self.clients:
            if client.algorithm not in ALGORITHMS:
                raise ConfigError(
                    f"client {client.client_id!r}: unknown algorithm "
                    f"{client.algorithm!r}; expected one of {ALGORITHMS}"
                )
            if len(client.trace) < 1:
                raise ConfigError(f"client {client.client_id!r}: empty trace")
            if client.algorithm.startswith("ecas"):
                thr2_s = self.bootstrap_params.buffer_threshold_2 * length
                if thr2_s > self.max_buffer_s + _EPS:
                    raise ConfigError(
                        f"buffer threshold 2 spans {thr2_s} s but the max buffer "
                        f"is {self.max_buffer_s} s"
                    )


@dataclass
class DownloadRecord:
    segment_index: int
    quality: int
    bitrate_kbps: float
    start_s: float
    end_s: float
    kbits: float
    realized_kbps: float


@dataclass
class ClientState:
    """Mutable per-client simulation state; PlayerView is its edge-visible slice."""

    spec: ClientSpec
    max_buffer_s: float
    window_maxlen: int
    lowest_bitrate_kbps: float
    buffer_s: float = 0.0
    last_sync_s: float = 0.0
    started: bool = False
    stalled: bool = False
    stall_started_at: float | None = None
    playback_position_s: float = 0.0
    stall_clock_s: float = 0.0
    startup_delay_s: float | None = None
    next_segment_index: int = 0
    window: deque = field(default_factory=deque)
    downloads: list = field(default_factory=list)
    wraps: int = 0
    area_time_s: dict = field(default_factory=lambda: {"high": 0.0, "medium": 0.0, "low": 0.0})
    current_params: EcasParams = DEFAULT_BOOTSTRAP_PARAMS
    empty_seq: int = 0

    def __post_init__(self):
        if self.window.maxlen != self.window_maxlen:
            self.window = deque(self.window, maxlen=self.window_maxlen)

    @property
    def window_mean_kbps(self) -> float:
        if not self.window:
            return self.lowest_bitrate_kbps
        return sum(self.window) / len(self.window)

    @property
    def window_fill(self) -> int:
        return len(self.window)

    @property
    def last_quality_index(self) -> int | None:
        return self.downloads[-1].quality if self.downloads else None

    def view(self) -> PlayerView:
        return PlayerView(
            buffer_s=max(0.0, self.buffer_s),
            window_mean_kbps=self.window_mean_kbps,
            window_fill=self.window_fill,
            resolution=self.spec.resolution,
            next_segment_index=self.next_segment_index,
            last_quality_index=self.last_quality_index,
        )

    def clone(self) -> "ClientState":
        dup = replace(self)
        dup.window = deque(self.window, maxlen=self.window_maxlen)
        dup.downloads = list(self.downloads)
        dup.area_time_s = dict(self.area_time_s)
        return dup


def transferred_kbits(trace: RadioTrace, t0: float, t1: float, cap_kbps: float) -> float:
    """Kilobits delivered between t0 and t1 at min(radio sample, cap)."""
    total = 0.0
    t = t0
    while t < t1 - _EPS:
        bucket = int(math.floor(t + _EPS))
        seg_end = min(bucket + 1.0, t1)
        rate = min(trace.sample_at(bucket), cap_kbps)
        total += rate * (seg_end - t)
        t = seg_end
    return total


def completion_time(
    trace: RadioTrace, t0: float, kbits: float, cap_kbps: float, horizon_s: float
) -> float | None:
    """Instant at which kbits finish transferring, or None past the horizon."""
    t = t0
    remaining = kbits
    while t < horizon_s:
        if remaining <= _EPS:
            return t
        bucket = int(math.floor(t + _EPS))
        seg_end = bucket + 1.0
        rate = min(trace.sample_at(bucket), cap_kbps)
        span = seg_end - t
        if rate > 0 and rate * span >= remaining - _EPS:
            return t + remaining / rate
        remaining -= rate * span
        t = seg_end
    return None


def harmonic_window_estimate(trace: RadioTrace, now_s: float, window_s: int) -> float:
    """Harmonic mean of the radio samples in the last window_s second buckets."""
    bucket = int(math.floor(now_s + _EPS))
    lo = max(0, bucket - window_s + 1)
    inverse_sum = 0.0
    count = 0
    for b in range(lo, bucket + 1):
        inverse_sum += 1.0 / max(trace.sample_at(b), THROUGHPUT_FLOOR_KBPS)
        count += 1
    return count / inverse_sum


def estimate_throughput(
    trace: RadioTrace,
    path: NetworkPath,
    now_s: float,
    window_s: int,
    active_downloaders: int,
) -> float:
    """Edge throughput estimate: radio harmonic mean capped by the backhaul share."""
    radio = harmonic_window_estimate(trace, now_s, window_s)
    share = path.capacity_kbps / max(1, active_downloaders)
    return max(THROUGHPUT_FLOOR_KBPS, min(radio, share))


class DownloadNeverCompletes(RuntimeError):
    pass


def step_download(
    client: ClientState,
    bitrate_kbps: float,
    segment_length_s: float,
    path: NetworkPath,
    now_s: float,
    horizon_s: float = 1e6,
) -> tuple[float, ClientState]:
    """Single-client one-shot download with buffer/stall accounting.

    Transfers the segment against the client's own radio trace with the full
    backhaul available, returns (download time including latency, new state).
    The buffer drains by wall-clock playback during the download, floors at
    zero with stall time accrued, and is credited one segment at completion.
    """
    if client.buffer_s + segment_length_s > client.max_buffer_s + _EPS:
        raise ValueError("request violates the buffer-fit policy")
    kbits = bitrate_kbps * segment_length_s
    bits_start = now_s + path.latency_s
    done = completion_time(client.spec.trace, bits_start, kbits, path.capacity_kbps, now_s + horizon_s)
    if done is None:
        raise DownloadNeverCompletes(
            f"segment of {kbits} kbits not transferable within {horizon_s} s"
        )
    dt = done - now_s
    new = client.clone()
    if new.started:
        drain = min(dt, new.buffer_s)
        stall = dt - drain
        new.playback_position_s += drain
        new.stall_clock_s += stall
        new.buffer_s = new.buffer_s - drain
    new.buffer_s += segment_length_s
    new.last_sync_s = done
    transfer_s = max(done - bits_start, _EPS)
    new.window.append(bitrate_kbps)
    new.downloads.append(
        DownloadRecord(
            segment_index=new.next_segment_index,
            quality=-1,
            bitrate_kbps=bitrate_kbps,
            start_s=now_s,
            end_s=done,
            kbits=kbits,
            realized_kbps=kbits / transfer_s,
        )
    )
    new.next_segment_index += 1
    return dt, new


@dataclass
class SessionResult:
    events: list
    metrics: dict


@dataclass
class _Download:
    client_id: str
    segment_index: int
    quality: int
    bitrate_kbps: float
    kbits_total: float
    remaining_kbits: float
    request_time: float
    bits_start: float
    last_settle: float
    complete_seq: int = 0


_SESSION_END = "session-end"
_REQUEST = "request"
_COMPLETE = "complete"
_BUFFER_EMPTY = "buffer-empty"


class _Session:
    def __init__(self, config: SessionConfig, params_source):
        self.cfg = config
        self.source = params_source
        self.ladder = config.ladder
        self.length = config.ladder.segment_length_s
        self.duration = config.duration_s
        self.events: list[ev.Event] = []
        self.heap: list = []
        self.seq = 0
        self.in_flight: dict[str, _Download] = {}
        self.clients: dict[str, ClientState] = {}
        self.finished = False
        for spec in config.clients:
            self.clients[spec.client_id] = ClientState(
                spec=spec,
                max_buffer_s=config.max_buffer_s,
                window_maxlen=config.window_segments + 1,
                lowest_bitrate_kbps=config.ladder.min_bitrate_kbps,
                current_params=config.bootstrap_params,
            )

    # -- plumbing ---------------------------------------------------------

    def log(self, time_s: float, client: str | None, event: str, **payload) -> None:
        self.events.append(ev.Event(time_s=time_s, client=client, event=event, payload=payload))

    def push(self, time_s: float, kind: str, client_id: str | None = None, version: int = 0) -> None:
        heapq.heappush(self.heap, (time_s, self.seq, kind, client_id, version))
        self.seq += 1

    # -- transfer bookkeeping ---------------------------------------------

    def settle_all(self, now: float) -> None:
        if not self.in_flight:
            return
        cap = self.cfg.network.capacity_kbps / len(self.in_flight)
        for d in self.in_flight.values():
            t0 = max(d.last_settle, d.bits_start)
            t1 = max(now, d.bits_start)
            if t1 > t0:
                trace = self.clients[d.client_id].spec.trace
                d.remaining_kbits -= transferred_kbits(trace, t0, t1, cap)
                d.remaining_kbits = max(0.0, d.remaining_kbits)
            d.last_settle = now

    def reschedule_all(self, now: float) -> None:
        if not self.in_flight:
            return
        cap = self.cfg.network.capacity_kbps / len(self.in_flight)
        for d in self.in_flight.values():
            d.complete_seq += 1
            trace = self.clients[d.client_id].spec.trace
            start = max(now, d.bits_start)
            done = completion_time(trace, start, d.remaining_kbits, cap, self.duration + 1.0)
            if done is not None and done <= self.duration:
                self.push(done, _COMPLETE, d.client_id, d.complete_seq)

    # -- playback accounting ----------------------------------------------

    def _account_drain(self, c: ClientState, b_hi: float, b_lo: float) -> None:
        thr1 = c.current_params.buffer_threshold_1 * self.length
        thr2 = c.current_params.buffer_threshold_2 * self.length
        c.area_time_s["low"] += max(0.0, b_hi - max(b_lo, thr2))
        c.area_time_s["medium"] += max(0.0, min(b_hi, thr2) - max(b_lo, thr1))
        c.area_time_s["high"] += max(0.0, min(b_hi, thr1) - b_lo)

    def sync_client(self, c: ClientState, now: float) -> None:
        if now <= c.last_sync_s + _EPS:
            c.last_sync_s = max(c.last_sync_s, now)
            return
        dt = now - c.last_sync_s
        if c.started:
            if c.stalled:
                c.stall_clock_s += dt
                c.area_time_s["high"] += dt
            else:
                if dt > c.buffer_s + _TIME_TOL:
                    raise AssertionError(
                        f"client {c.spec.client_id}: buffer underrun of "
                        f"{dt - c.buffer_s:.6f} s escaped the event scheduler"
                    )
                drain = min(dt, c.buffer_s)
                self._account_drain(c, c.buffer_s, c.buffer_s - drain)
                c.buffer_s -= drain
                c.playback_position_s += drain
        c.last_sync_s = now

    def schedule_buffer_empty(self, c: ClientState, now: float) -> None:
        if not c.started or c.stalled or c.spec.client_id not in self.in_flight:
            return
        c.empty_seq += 1
        empty_at = now + c.buffer_s
        if empty_at < self.duration:
            self.push(empty_at, _BUFFER_EMPTY, c.spec.client_id, c.empty_seq)

    # -- decisions ---------------------------------------------------------

    def _estimate_for(self, c: ClientState, now: float) -> float:
        return estimate_throughput(
            c.spec.trace,
            self.cfg.network,
            now,
            self.cfg.est_window_s,
            active_downloaders=len(self.in_flight) + 1,
        )

    def decide(self, c: ClientState, now: float, est: float) -> tuple[int, dict]:
        """Run the client's ABR algorithm; returns (quality index, log payload)."""
        cfg = self.cfg
        algo = c.spec.algorithm
        view = c.view()
        extra: dict = {"est_kbps": est}

        if algo in ("ecas-static", "ecas-table"):
            params = self.source.params_at(c.spec.trace.id, math.floor(now))
            if params != c.current_params:
                self.log(now, c.spec.client_id, ev.REPREDICTION, params=list(params.as_tuple()))
                c.current_params = params
            scores = score_candidates(view, self.ladder, params, cfg.window_segments, est)
            best = scores[0].qoe_score
            quality = 0
            for cand in scores[1:]:
                if cand.qoe_score > best:
                    best = cand.qoe_score
                    quality = cand.quality_index
            extra["params"] = list(params.as_tuple())
            extra["candidates"] = [
                {
                    "quality": s.quality_index,
                    "score": None if s.risk_area is RiskArea.HIGH else s.qoe_score,
                    "predicted_buffer_s": s.predicted_buffer_s,
                    "risk": s.risk_area.value,
                }
                for s in scores
            ]
            return quality, extra

        if algo == "tba":
            return tba_select(est, self.ladder, cfg.baselines.tba_safety_factor), extra
        if algo == "bba":
            return (
                bba_select(view.buffer_s, self.ladder, cfg.baselines.bba_reservoir_s, cfg.baselines.bba_cushion_s),
                extra,
            )
        if algo == "sara":
            recent = c.downloads[-cfg.baselines.sara_window:]
            whm = weighted_harmonic_mean_kbps(
                [d.kbits for d in recent], [d.realized_kbps for d in recent]
            )
            extra["whm_kbps"] = whm
            return sara_select(view, self.ladder, whm), extra
        if algo == "gbba":
            group = {
                other.spec.client_id: other.view()
                for other in self.clients.values()
                if other.spec.algorithm == "gbba"
            }
            capacity = cfg.baselines.gbba_capacity_kbps or cfg.network.capacity_kbps
            allocation = gbba_allocate(group, self.ladder, capacity)
            extra["allocation"] = {cid: allocation[cid] for cid in sorted(allocation)}
            return allocation[c.spec.client_id], extra
        if algo == "eadas":
            client_choice = tba_select(est, self.ladder, cfg.baselines.tba_safety_factor)
            adjusted = eadas_adjust(
                client_choice,
                view,
                self.ladder,
                est,
                adjust_range=cfg.baselines.eadas_adjust_range,
                params=EADAS_DEFAULT_PARAMS,
                window_segments=cfg.window_segments,
            )
            extra["client_choice"] = client_choice
            return adjusted, extra
        raise ConfigError(f"unhandled algorithm {algo!r}")

    # -- event handlers -----------------------------------------------------

    def handle_request(self, c: ClientState, now: float) -> None:
        self.sync_client(c, now)
        trace_len = len(c.spec.trace)
        wraps = int(math.floor((now + _EPS) / trace_len))
        if wraps > c.wraps:
            c.wraps = wraps
            self.log(now, c.spec.client_id, ev.TRACE_WRAP, wraps=wraps)
        if c.buffer_s + self.length > c.max_buffer_s + _TIME_TOL:
            raise AssertionError("request issued while the buffer cannot fit a segment")

        est = self._estimate_for(c, now)
        quality, extra = self.decide(c, now, est)
        rep = self.ladder[quality]

        self.log(now, c.spec.client_id, ev.REQUEST, segment=c.next_segment_index, buffer_s=c.buffer_s)
        self.log(
            now,
            c.spec.client_id,
            ev.DECISION,
            segment=c.next_segment_index,
            algorithm=c.spec.algorithm,
            quality=quality,
            bitrate_kbps=rep.bitrate_kbps,
            buffer_s=c.buffer_s,
            **extra,
        )

        download = _Download(
            client_id=c.spec.client_id,
            segment_index=c.next_segment_index,
            quality=quality,
            bitrate_kbps=rep.bitrate_kbps,
            kbits_total=rep.bitrate_kbps * self.length,
            remaining_kbits=rep.bitrate_kbps * self.length,
            request_time=now,
            bits_start=now + self.cfg.network.latency_s,
            last_settle=now,
        )
        self.settle_all(now)
        self.in_flight[c.spec.client_id] = download
        self.reschedule_all(now)
        self.log(
            now,
            c.spec.client_id,
            ev.DOWNLOAD_START,
            segment=download.segment_index,
            quality=quality,
            bitrate_kbps=rep.bitrate_kbps,
            kbits=download.kbits_total,
        )
        self.schedule_buffer_empty(c, now)

    def handle_complete(self, c: ClientState, version: int, now: float) -> None:
        download = self.in_flight.get(c.spec.client_id)
        if download is None or download.complete_seq != version:
            return
        self.settle_all(now)
        if download.remaining_kbits > 1e-6:
            # Float drift between settling and projection; re-project.
            self.in_flight[c.spec.client_id] = download
            cap = self.cfg.network.capacity_kbps / len(self.in_flight)
            done = completion_time(
                c.spec.trace, max(now, download.bits_start), download.remaining_kbits, cap, self.duration + 1.0
            )
            download.complete_seq += 1
            if done is not None and done <= self.duration:
                self.push(done, _COMPLETE, c.spec.client_id, download.complete_seq)
            return
        del self.in_flight[c.spec.client_id]
        self.reschedule_all(now)

        self.sync_client(c, now)
        if c.stalled:
            self.log(
                now,
                c.spec.client_id,
                ev.STALL_END,
                duration_s=now - c.stall_started_at,
            )
            c.stalled = False
            c.stall_started_at = None

        c.buffer_s += self.length
        if c.buffer_s > c.max_buffer_s + _TIME_TOL:
            raise AssertionError("buffer exceeded its maximum after a segment credit")
        transfer_s = max(now - download.bits_start, _EPS)
        record = DownloadRecord(
            segment_index=download.segment_index,
            quality=download.quality,
            bitrate_kbps=download.bitrate_kbps,
            start_s=download.request_time,
            end_s=now,
            kbits=download.kbits_total,
            realized_kbps=download.kbits_total / transfer_s,
        )
        c.window.append(download.bitrate_kbps)
        c.downloads.append(record)
        c.next_segment_index += 1
        c.empty_seq += 1
        self.log(
            now,
            c.spec.client_id,
            ev.DOWNLOAD_END,
            segment=record.segment_index,
            quality=record.quality,
            bitrate_kbps=record.bitrate_kbps,
            download_time_s=now - download.request_time,
            transfer_time_s=transfer_s,
            realized_kbps=record.realized_kbps,
            buffer_s=c.buffer_s,
        )
        if not c.started and c.buffer_s + _EPS >= self.cfg.startup_segments * self.length:
            c.started = True
            c.startup_delay_s = now
            c.last_sync_s = now
            self.log(now, c.spec.client_id, ev.PLAYBACK_START, startup_delay_s=now)

        if now >= self.duration - _EPS:
            return
        if c.buffer_s + self.length <= c.max_buffer_s + _TIME_TOL:
            self.push(now, _REQUEST, c.spec.client_id)
        else:
            wait = c.buffer_s + self.length - c.max_buffer_s
            if now + wait < self.duration:
                self.push(now + wait, _REQUEST, c.spec.client_id)

    def handle_buffer_empty(self, c: ClientState, version: int, now: float) -> None:
        if version != c.empty_seq:
            return
        if not c.started or c.stalled or c.spec.client_id not in self.in_flight:
            return
        self.sync_client(c, now)
        if c.buffer_s > _TIME_TOL:
            return
        c.buffer_s = 0.0
        c.stalled = True
        c.stall_started_at = now
        self.log(now, c.spec.client_id, ev.STALL_START, segment_in_flight=self.in_flight[c.spec.client_id].segment_index)

    def handle_session_end(self, now: float) -> None:
        self.settle_all(now)
        for client_id in sorted(self.clients):
            c = self.clients[client_id]
            self.sync_client(c, now)
            if c.stalled:
                self.log(now, client_id, ev.STALL_END, duration_s=now - c.stall_started_at, truncated=True)
                c.stalled = False
            startup = c.startup_delay_s if c.startup_delay_s is not None else now
            self.log(
                now,
                client_id,
                ev.CLIENT_SUMMARY,
                playback_s=c.playback_position_s,
                stall_s=c.stall_clock_s,
                startup_s=startup,
                segments=len(c.downloads),
                buffer_final_s=c.buffer_s,
                area_time_s=dict(c.area_time_s),
                trace_wraps=c.wraps,
            )
        self.log(now, None, ev.SESSION_END)
        self.finished = True

    # -- main loop -----------------------------------------------------------

    def run(self) -> list[ev.Event]:
        cfg = self.cfg
        rng = random.Random(cfg.seed)
        offsets = {
            spec.client_id: (rng.uniform(0.0, cfg.start_offset_max_s) if cfg.start_offset_max_s > 0 else 0.0)
            for spec in cfg.clients
        }
        self.log(
            0.0,
            None,
            ev.SESSION_START,
            duration_s=cfg.duration_s,
            segment_length_s=self.length,
            ladder=[[rep.bitrate_kbps, rep.width, rep.height] for rep in self.ladder.representations],
            max_buffer_s=cfg.max_buffer_s,
            startup_segments=cfg.startup_segments,
            est_window_s=cfg.est_window_s,
            window_segments=cfg.window_segments,
            repredict_interval_s=cfg.repredict_interval_s,
            latency_ms=cfg.network.latency_ms,
            capacity_kbps=cfg.network.capacity_kbps,
            qoe_weights=cfg.qoe_weights.as_dict(),
            seed=cfg.seed,
        )
        self.push(cfg.duration_s, _SESSION_END)
        for spec in cfg.clients:
            self.log(
                0.0,
                spec.client_id,
                ev.CLIENT_START,
                trace_id=spec.trace.id,
                trace_category=spec.trace.category.value,
                trace_len_s=len(spec.trace),
                resolution=spec.resolution.value,
                algorithm=spec.algorithm,
                start_offset_s=offsets[spec.client_id],
                bootstrap_params=list(cfg.bootstrap_params.as_tuple()),
            )
            self.push(offsets[spec.client_id], _REQUEST, spec.client_id)

        while self.heap and not self.finished:
            now, _, kind, client_id, version = heapq.heappop(self.heap)
            if kind == _SESSION_END:
                self.handle_session_end(now)
            elif kind == _REQUEST:
                self.handle_request(self.clients[client_id], now)
            elif kind == _COMPLETE:
                self.handle_complete(self.clients[client_id], version, now)
            elif kind == _BUFFER_EMPTY:
                self.handle_buffer_empty(self.clients[client_id], version, now)
        return self.events


def run_session(config: SessionConfig, params_source=None) -> SessionResult:
    """Simulate one streaming session; returns the event log and per-client metrics.

    Deterministic for a given configuration: the only randomness is the
    seeded draw of client start offsets.
    """
    config.validate()
    if params_source is None:
        params_source = StaticParams(config.bootstrap_params)
    for spec in config.clients:
        if spec.algorithm == "ecas-table":
            # Fail fast on a missing trace rather than mid-session.
            params_source.params_at(spec.trace.id, MIN_PREDICTION_SECONDS)
    session = _Session(config, params_source)
    events = session.run()
    return SessionResult(events=events, metrics=compute_metrics(events))
