"""JSON-Lines episode logs.

Every step of a run emits one record carrying the decision-time state
digest, the labels, the full shield (permitted actions, chosen and all
proper scenarios, background used), the executed action, the reward and
any verdict.  Records are serialized canonically (sorted keys, fixed
separators) so two replays of the same run are byte-identical; wall
clock only ever appears in the header record, which comparisons skip.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable


def canonical(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


class JsonlWriter:
    def __init__(self, path):
        self.path = Path(path)
        self._fh = open(self.path, "w")

    def write(self, record: dict) -> None:
        self._fh.write(canonical(record) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "JsonlWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class ListWriter:
    """In-memory stand-in for JsonlWriter, used by tests and the service."""

    def __init__(self):
        self.records: list[dict] = []

    def write(self, record: dict) -> None:
        self.records.append(record)

    def close(self) -> None:
        pass


def read_jsonl(path) -> list[dict]:
    out = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            out.append(json.loads(line))
    return out


def step_records(records: Iterable[dict]) -> list[dict]:
    return [r for r in records if r.get("type") == "step"]


def header_record(records: Iterable[dict]) -> dict:
    for r in records:
        if r.get("type") == "header":
            return r
    raise ValueError("log has no header record")
