"""Experiment runner.

Subcommands: ``run`` (sessions + comparison table), ``oracle`` (brute-force
labeling), ``metrics`` (recompute from event logs), ``validate-config``.
"""

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import eventlog as ev
from .config import load_experiment_config, validate_experiment_config
from .metrics import SessionMetrics, compute_metrics, export_p1203_log
from .oracle import label_dataset
from .predictor import StaticParams, load_prediction_table
from .simulation import ALGORITHMS, ConfigError, run_session

METRIC_COLUMNS = [
    "algorithm",
    "client",
    "trace",
    "resolution",
    "mean_bitrate_kbps",
    "mean_switch_magnitude_kbps",
    "mean_switch_magnitude_index",
    "stall_count",
    "mean_stall_duration_ms",
    "composite_qoe",
    "startup_delay_ms",
    "time_share_high",
    "time_share_medium",
    "time_share_low",
]

SUMMARY_ROWS = [
    ("Mean bitrate (kbps)", "mean_bitrate_kbps"),
    ("Mean switching magnitude (kbps)", "mean_switch_magnitude_kbps"),
    ("Mean switching magnitude (quality index)", "mean_switch_magnitude_index"),
    ("Number of stalls", "stall_count"),
    ("Mean stall duration (ms)", "mean_stall_duration_ms"),
    ("QoE score (composite)", "composite_qoe"),
]


def _common_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config file (YAML)")
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument("--seed", type=int, default=0, help="seed for offsets/shuffling")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hassim",
        description="Trace-driven simulator for edge-assisted adaptive streaming",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run sessions and emit comparison tables")
    _common_args(p_run)
    p_run.add_argument(
        "--algorithms",
        default="ecas-static",
        help=f"comma-separated list from {', '.join(ALGORITHMS)}",
    )
    p_run.add_argument("--table", help="prediction table file (required for ecas-table)")
    p_run.add_argument(
        "--export-p1203", action="store_true", help="also write measurement bundles"
    )

    p_oracle = sub.add_parser("oracle", help="brute-force parameter labeling")
    _common_args(p_oracle)

    p_metrics = sub.add_parser("metrics", help="recompute metrics from event logs")
    p_metrics.add_argument("events", nargs="+", help="event log files (JSON lines)")
    p_metrics.add_argument("--out", default="out", help="output directory")
    p_metrics.add_argument("--export-p1203", action="store_true")

    p_validate = sub.add_parser("validate-config", help="check a config file")
    p_validate.add_argument("--config", required=True)
    return parser


def _client_extras(events) -> dict[str, dict]:
    """Per-client summary payloads (area shares, startup) from the event log."""
    info: dict[str, dict] = {}
    duration = None
    for event in events:
        if event.event == ev.SESSION_START:
            duration = event.payload["duration_s"]
        elif event.event == ev.CLIENT_START:
            info.setdefault(event.client, {})
            info[event.client]["trace"] = event.payload["trace_id"]
            info[event.client]["resolution"] = event.payload["resolution"]
        elif event.event == ev.CLIENT_SUMMARY:
            entry = info.setdefault(event.client, {})
            area = event.payload["area_time_s"]
            active = max(1e-9, duration - event.payload["startup_s"])
            for name in ("high", "medium", "low"):
                entry[f"time_share_{name}"] = area[name] / active
    return info


def _metric_row(algorithm: str, client: str, metrics: SessionMetrics, extras: dict) -> dict:
    return {
        "algorithm": algorithm,
        "client": client,
        "trace": extras.get("trace", ""),
        "resolution": extras.get("resolution", ""),
        "mean_bitrate_kbps": metrics.mean_bitrate_kbps,
        "mean_switch_magnitude_kbps": metrics.mean_switch_magnitude_kbps,
        "mean_switch_magnitude_index": metrics.mean_switch_magnitude_index,
        "stall_count": metrics.stall_count,
        "mean_stall_duration_ms": metrics.mean_stall_duration_ms,
        "composite_qoe": metrics.composite_qoe,
        "startup_delay_ms": metrics.startup_delay_ms,
        "time_share_high": extras.get("time_share_high", ""),
        "time_share_medium": extras.get("time_share_medium", ""),
        "time_share_low": extras.get("time_share_low", ""),
    }


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def _write_buffer_series(events, path: Path) -> None:
    rows = []
    for event in events:
        if "buffer_s" in event.payload:
            rows.append(
                {"time_s": event.time_s, "client": event.client, "buffer_s": event.payload["buffer_s"]}
            )
    _write_csv(path, ["time_s", "client", "buffer_s"], rows)


def _run_one_algorithm(args):
    config_path, algorithm, seed, table_path = args
    config = load_experiment_config(config_path)
    session = config.session_config(algorithm, seed=seed)
    if algorithm == "ecas-table":
        source = load_prediction_table(
            table_path,
            bootstrap=config.bootstrap_params,
            max_threshold_2=int(config.max_buffer_s // config.ladder.segment_length_s),
        )
    else:
        source = StaticParams(config.bootstrap_params)
    result = run_session(session, source)
    return algorithm, result


def cmd_run(args) -> int:
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    if not algorithms:
        print("error: no algorithms given", file=sys.stderr)
        return 2
    for algorithm in algorithms:
        if algorithm not in ALGORITHMS:
            print(f"error: unknown algorithm {algorithm!r}", file=sys.stderr)
            return 2
    try:
        config = validate_experiment_config(args.config)
    except (ConfigError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    if "ecas-table" in algorithms:
        if not args.table:
            print("error: ecas-table requires --table", file=sys.stderr)
            return 2
        try:
            table = load_prediction_table(args.table)
            for row in config.client_rows:
                trace_id = row.trace_path.stem
                if trace_id not in table.entries:
                    print(
                        f"error: prediction table lacks trace {trace_id!r}", file=sys.stderr
                    )
                    return 2
        except (OSError, ValueError) as err:
            print(f"error: cannot load prediction table: {err}", file=sys.stderr)
            return 2

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    tasks = [(str(args.config), algorithm, args.seed, args.table) for algorithm in algorithms]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one_algorithm, tasks))
    else:
        results = [_run_one_algorithm(task) for task in tasks]

    rows = []
    summary: dict[str, dict[str, float]] = {}
    for algorithm, result in results:
        ev.write_event_log(result.events, out_dir / f"events_{algorithm}.jsonl")
        _write_buffer_series(result.events, out_dir / f"buffer_{algorithm}.csv")
        if args.export_p1203:
            export_p1203_log(result.events, out_dir / f"p1203_{algorithm}.json")
        extras = _client_extras(result.events)
        for client_id in sorted(result.metrics):
            rows.append(
                _metric_row(algorithm, client_id, result.metrics[client_id], extras.get(client_id, {}))
            )
        n = len(result.metrics)
        summary[algorithm] = {
            key: sum(getattr(m, key) for m in result.metrics.values()) / n
            for _, key in SUMMARY_ROWS
        }

    _write_csv(out_dir / "metrics.csv", METRIC_COLUMNS, rows)

    summary_columns = ["metric"] + algorithms
    summary_rows = []
    for label, key in SUMMARY_ROWS:
        row = {"metric": label}
        for algorithm in algorithms:
            row[algorithm] = summary[algorithm][key]
        summary_rows.append(row)
    _write_csv(out_dir / "summary.csv", summary_columns, summary_rows)

    width = max(len(label) for label, _ in SUMMARY_ROWS) + 2
    print("metric".ljust(width) + "".join(a.rjust(14) for a in algorithms))
    for label, key in SUMMARY_ROWS:
        cells = "".join(f"{summary[a][key]:14.2f}" for a in algorithms)
        print(label.ljust(width) + cells)
    print(f"\nwrote {out_dir / 'metrics.csv'} ({len(rows)} rows)")
    return 0


def cmd_oracle(args) -> int:
    try:
        config = validate_experiment_config(args.config)
    except (ConfigError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    traces = config.oracle_traces()
    dataset_path = out_dir / "dataset.jsonl"
    if not traces:
        grid = config.grid
        from .oracle import write_dataset

        write_dataset([], dataset_path, seed=args.seed, grid=grid)
        print("warning: no traces to label; wrote empty dataset")
        return 0

    progress_path = out_dir / "oracle_progress.jsonl"
    done: dict = {}
    if progress_path.exists():
        with open(progress_path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                done[(record["trace_id"], record["upto_second"])] = (
                    tuple(record["label"]),
                    record["achieved_qoe"],
                )
        if done:
            print(f"resuming: {len(done)} prefixes already labeled")

    progress_fh = open(progress_path, "a")

    def record_progress(trace_id, upto, label, qoe):
        progress_fh.write(
            json.dumps(
                {"trace_id": trace_id, "upto_second": upto, "label": list(label), "achieved_qoe": qoe},
                sort_keys=True,
            )
            + "\n"
        )
        progress_fh.flush()

    try:
        samples = label_dataset(
            traces,
            config.grid,
            config.oracle_sim_config(),
            dataset_path,
            seed=args.seed,
            jobs=args.jobs,
            done=done,
            progress=record_progress,
        )
    finally:
        progress_fh.close()

    label_counts: dict[tuple, list] = {}
    for sample in samples:
        entry = label_counts.setdefault(sample.label.as_tuple(), [0, 0.0])
        entry[0] += 1
        entry[1] += sample.achieved_qoe
    summary_rows = [
        {
            "label": " ".join(str(v) for v in label),
            "count": count,
            "mean_qoe": total / count,
        }
        for label, (count, total) in sorted(label_counts.items())
    ]
    _write_csv(out_dir / "label_summary.csv", ["label", "count", "mean_qoe"], summary_rows)

    print(f"labeled {len(samples)} prefixes from {len(traces)} traces")
    print(f"distinct labels: {len(label_counts)}")
    for row in sorted(summary_rows, key=lambda r: -r["count"])[:5]:
        print(f"  {row['label']}: {row['count']} prefixes, mean QoE {row['mean_qoe']:.3f}")
    print(f"wrote {dataset_path}")
    return 0


def cmd_metrics(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for log_path in args.events:
        log_path = Path(log_path)
        if not log_path.exists():
            print(f"error: no such event log: {log_path}", file=sys.stderr)
            return 2
        events = ev.read_event_log(log_path)
        metrics = compute_metrics(events)
        extras = _client_extras(events)
        for client_id in sorted(metrics):
            rows.append(
                _metric_row(log_path.stem, client_id, metrics[client_id], extras.get(client_id, {}))
            )
        if args.export_p1203:
            export_p1203_log(events, out_dir / f"p1203_{log_path.stem}.json")
    _write_csv(out_dir / "metrics.csv", METRIC_COLUMNS, rows)
    print(f"wrote {out_dir / 'metrics.csv'} ({len(rows)} rows)")
    return 0


def cmd_validate(args) -> int:
    try:
        config = validate_experiment_config(args.config)
    except (ConfigError, OSError, ValueError) as err:
        print(f"invalid: {err}", file=sys.stderr)
        return 1
    print(
        f"ok: {len(config.client_rows)} clients, {len(config.ladder)} ladder levels, "
        f"duration {config.duration_s}s, grid size {config.grid.size()}"
    )
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "oracle":
        return cmd_oracle(args)
    if args.command == "metrics":
        return cmd_metrics(args)
    if args.command == "validate-config":
        return cmd_validate(args)
    return 2


if __name__ == "__main__":
    sys.exit(main())
