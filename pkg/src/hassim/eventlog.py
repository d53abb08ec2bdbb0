"""Line-delimited session event log.

One JSON object per line with fields ``time_s``, ``client``, ``event`` and
``payload``. The stream is time-ordered and deterministic for a given
configuration and seed, so byte-identical logs imply identical sessions.
Consumed by the metrics module and exportable for external QoE tooling.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

SESSION_START = "session_start"
CLIENT_START = "client_start"
REQUEST = "request"
DECISION = "decision"
DOWNLOAD_START = "download_start"
DOWNLOAD_END = "download_end"
PLAYBACK_START = "playback_start"
STALL_START = "stall_start"
STALL_END = "stall_end"
REPREDICTION = "reprediction"
TRACE_WRAP = "trace_wrap"
CLIENT_SUMMARY = "client_summary"
SESSION_END = "session_end"


@dataclass(frozen=True)
class Event:
    time_s: float
    client: str | None
    event: str
    payload: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "time_s": self.time_s,
                "client": self.client,
                "event": self.event,
                "payload": self.payload,
            },
            sort_keys=True,
        )


def write_event_log(events: Iterable[Event], path: str | Path) -> None:
    path = Path(path)
    with open(path, "w") as fh:
        for event in events:
            fh.write(event.to_json() + "\n")


def read_event_log(path: str | Path) -> list[Event]:
    path = Path(path)
    events: list[Event] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                events.append(
                    Event(
                        time_s=float(record["time_s"]),
                        client=record["client"],
                        event=str(record["event"]),
                        payload=record.get("payload", {}),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
                raise ValueError(f"{path}:{lineno}: bad event record: {err}") from None
    return events
