"""Experiment configuration file handling.

A single YAML (or JSON) document describes the ladder, network path,
clients, algorithm knobs, QoE weights and the oracle grid. Trace paths are
resolved relative to the config file.
"""

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .baselines import BaselineConfig
from .core import (
    DEFAULT_LADDER_KBPS,
    BitrateLadder,
    EcasParams,
    RadioTrace,
    ScreenResolution,
    TraceCategory,
    load_trace,
    make_ladder,
)
from .metrics import QoeWeights
from .oracle import OracleSimConfig, ParamGrid
from .simulation import ClientSpec, ConfigError, NetworkPath, SessionConfig


@dataclass(frozen=True)
class ClientRow:
    client_id: str
    trace_path: Path
    category: TraceCategory
    resolution: ScreenResolution
    algorithm: str | None = None


@dataclass
class ExperimentConfig:
    path: Path
    ladder: BitrateLadder
    network: NetworkPath
    client_rows: tuple[ClientRow, ...]
    duration_s: float
    max_buffer_s: float
    startup_segments: int
    repredict_interval_s: float
    est_window_s: int
    window_segments: int
    start_offset_max_s: float
    bootstrap_params: EcasParams
    baselines: BaselineConfig
    qoe_weights: QoeWeights
    grid: ParamGrid
    oracle_resolution: ScreenResolution
    max_trace_len_s: int | None
    _traces: dict = field(default_factory=dict)

    def load_traces(self) -> dict[str, RadioTrace]:
        if not self._traces:
            for row in self.client_rows:
                trace = load_trace(row.trace_path, row.category)
                self._traces[row.client_id] = trace
        return self._traces

    def oracle_traces(self) -> list[RadioTrace]:
        """Unique traces for labeling, honoring the optional length cutoff."""
        traces = []
        seen = set()
        for trace in self.load_traces().values():
            if trace.id in seen:
                continue
            seen.add(trace.id)
            if self.max_trace_len_s is not None and len(trace) > self.max_trace_len_s:
                continue
            traces.append(trace)
        return traces

    def session_config(self, algorithm: str, seed: int = 0) -> SessionConfig:
        """Session with every configured client running one algorithm."""
        traces = self.load_traces()
        clients = tuple(
            ClientSpec(
                client_id=row.client_id,
                trace=traces[row.client_id],
                resolution=row.resolution,
                algorithm=algorithm,
            )
            for row in self.client_rows
        )
        return SessionConfig(
            clients=clients,
            ladder=self.ladder,
            duration_s=self.duration_s,
            max_buffer_s=self.max_buffer_s,
            startup_segments=self.startup_segments,
            repredict_interval_s=self.repredict_interval_s,
            est_window_s=self.est_window_s,
            window_segments=self.window_segments,
            bootstrap_params=self.bootstrap_params,
            network=self.network,
            baselines=self.baselines,
            qoe_weights=self.qoe_weights,
            seed=seed,
            start_offset_max_s=self.start_offset_max_s,
        )

    def oracle_sim_config(self) -> OracleSimConfig:
        return OracleSimConfig(
            ladder=self.ladder,
            resolution=self.oracle_resolution,
            max_buffer_s=self.max_buffer_s,
            startup_segments=self.startup_segments,
            est_window_s=self.est_window_s,
            window_segments=self.window_segments,
            network=self.network,
            qoe_weights=self.qoe_weights,
        )


def _parse_resolution_pair(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise ConfigError(f"bad encode resolution {text!r}; expected WIDTHxHEIGHT") from None


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh) or {}
    except yaml.YAMLError as err:
        raise ConfigError(f"{path}: cannot parse config: {err}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config root must be a mapping")

    session = doc.get("session", {})
    network = doc.get("network", {})
    ladder_doc = doc.get("ladder", {})
    ecas = doc.get("ecas", {})
    baselines_doc = doc.get("baselines", {})
    qoe_doc = doc.get("qoe_weights", {})
    oracle_doc = doc.get("oracle", {})

    bitrates = ladder_doc.get("bitrates_kbps", list(DEFAULT_LADDER_KBPS))
    resolutions = ladder_doc.get("resolutions")
    if resolutions is not None:
        resolutions = [_parse_resolution_pair(r) for r in resolutions]
    try:
        ladder = make_ladder(
            bitrates,
            segment_length_s=float(ladder_doc.get("segment_length_s", 2.0)),
            resolutions=resolutions,
        )
    except ValueError as err:
        raise ConfigError(f"{path}: bad ladder: {err}") from None

    rows = []
    client_docs = doc.get("clients", [])
    if not client_docs:
        raise ConfigError(f"{path}: config lists no clients")
    for i, entry in enumerate(client_docs):
        if not isinstance(entry, dict) or "trace" not in entry:
            raise ConfigError(f"{path}: client {i}: needs at least a 'trace' path")
        try:
            resolution = ScreenResolution.parse(str(entry.get("resolution", "1080p")))
            category = TraceCategory.parse(str(entry.get("category", "static")))
        except ValueError as err:
            raise ConfigError(f"{path}: client {i}: {err}") from None
        trace_path = Path(entry["trace"])
        if not trace_path.is_absolute():
            trace_path = path.parent / trace_path
        rows.append(
            ClientRow(
                client_id=str(entry.get("id", f"c{i}")),
                trace_path=trace_path,
                category=category,
                resolution=resolution,
                algorithm=entry.get("algorithm"),
            )
        )

    bootstrap_raw = ecas.get("bootstrap_params", [1, 1, 3, 6])
    try:
        bootstrap = EcasParams(*[int(v) for v in bootstrap_raw])
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{path}: bad bootstrap params: {err}") from None

    try:
        baselines = BaselineConfig(
            tba_safety_factor=float(baselines_doc.get("tba_safety_factor", 0.9)),
            bba_reservoir_s=float(baselines_doc.get("bba_reservoir_s", 4.0)),
            bba_cushion_s=float(baselines_doc.get("bba_cushion_s", 16.0)),
            sara_window=int(baselines_doc.get("sara_window", 5)),
            gbba_capacity_kbps=(
                float(baselines_doc["gbba_capacity_kbps"])
                if baselines_doc.get("gbba_capacity_kbps") is not None
                else None
            ),
            eadas_adjust_range=int(baselines_doc.get("eadas_adjust_range", 1)),
        )
        weights = QoeWeights(
            bitrate=float(qoe_doc.get("bitrate", 1.0)),
            switches=float(qoe_doc.get("switches", 0.3)),
            stalls=float(qoe_doc.get("stalls", 2.0)),
        )
        net = NetworkPath(
            latency_ms=float(network.get("latency_ms", 40.0)),
            capacity_kbps=float(network.get("backhaul_capacity_kbps", 1_000_000.0)),
        )
    except ValueError as err:
        raise ConfigError(f"{path}: {err}") from None

    grid_doc = oracle_doc.get("grid", {})
    try:
        grid = ParamGrid(
            switches_penalty_factor=tuple(
                int(v) for v in grid_doc.get("switches_penalty_factor", (0, 1, 2, 4, 8))
            ),
            stalls_penalty_factor=tuple(
                int(v) for v in grid_doc.get("stalls_penalty_factor", (0, 1, 2, 4, 8))
            ),
            buffer_threshold_1=tuple(
                int(v) for v in grid_doc.get("buffer_threshold_1", (1, 2, 3, 4))
            ),
            buffer_threshold_2=tuple(
                int(v) for v in grid_doc.get("buffer_threshold_2", (4, 6, 8, 10))
            ),
        )
        oracle_resolution = ScreenResolution.parse(str(oracle_doc.get("resolution", "1080p")))
    except ValueError as err:
        raise ConfigError(f"{path}: bad oracle section: {err}") from None

    max_trace_len = oracle_doc.get("max_trace_len_s")

    return ExperimentConfig(
        path=path,
        ladder=ladder,
        network=net,
        client_rows=tuple(rows),
        duration_s=float(session.get("duration_s", 120.0)),
        max_buffer_s=float(session.get("max_buffer_s", 20.0)),
        startup_segments=int(session.get("startup_segments", 1)),
        repredict_interval_s=float(session.get("repredict_interval_s", 10.0)),
        est_window_s=int(session.get("est_window_s", 5)),
        window_segments=int(session.get("window_segments", 4)),
        start_offset_max_s=float(session.get("start_offset_max_s", 0.0)),
        bootstrap_params=bootstrap,
        baselines=baselines,
        qoe_weights=weights,
        grid=grid,
        oracle_resolution=oracle_resolution,
        max_trace_len_s=int(max_trace_len) if max_trace_len is not None else None,
    )


def validate_experiment_config(path: str | Path) -> ExperimentConfig:
    """Full validation: parse the config, load every trace, check a session builds."""
    config = load_experiment_config(path)
    config.load_traces()
    config.session_config("ecas-static").validate()
    return config
