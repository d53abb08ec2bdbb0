"""Trace-driven simulator for edge-assisted HTTP adaptive streaming."""

from .baselines import BaselineConfig, bba_select, eadas_adjust, gbba_allocate, sara_select, tba_select
from .core import (
    BitrateLadder,
    EcasParams,
    InputVector,
    RadioTrace,
    Representation,
    ScreenResolution,
    TraceCategory,
    beta_for_resolution,
    default_ladder,
    extract_input_vectors,
    load_trace,
    make_ladder,
)
from .ecas import (
    CandidateScore,
    PlayerView,
    RiskArea,
    bitrate_score,
    candidate_score,
    predicted_buffer,
    select_quality,
    switches_penalty,
    updated_window_mean,
)
from .metrics import QoeWeights, SessionMetrics, composite_qoe, compute_metrics, export_p1203_log
from .oracle import OracleSimConfig, ParamGrid, TrainingSample, grid_search, label_dataset
from .predictor import PredictionTable, StaticParams, load_prediction_table, params_at
from .simulation import (
    ALGORITHMS,
    ClientSpec,
    ClientState,
    NetworkPath,
    SessionConfig,
    SessionResult,
    estimate_throughput,
    run_session,
    step_download,
)

__version__ = "0.1.0"
