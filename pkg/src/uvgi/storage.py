"""File-backed persistence: a directory of JSON documents keyed by id.

Layout under the data directory:

    profiles/<id>.json
    scenes/<id>.json
    runs/<id>/record.json          run state machine document
    runs/<id>/heatmap.json         result artifacts, written once on
    runs/<id>/report.json          completion and then immutable, so
    runs/<id>/sensors.csv          repeated reads are byte-identical
    runs/<id>/traces.csv
    runs/<id>/telemetry.jsonl
    runs/<id>/events.jsonl

Writes go through a temp file + rename so readers never see partial JSON.
"""

from __future__ import annotations

import json
import os
import uuid
from pathlib import Path


def new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


class DocumentStore:
    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        for sub in ("profiles", "scenes", "runs"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)

    def _doc_path(self, kind: str, doc_id: str) -> Path:
        if kind == "runs":
            return self.root / "runs" / doc_id / "record.json"
        return self.root / kind / f"{doc_id}.json"

    def save(self, kind: str, doc_id: str, doc: dict) -> None:
        path = self._doc_path(kind, doc_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        self._write_atomic(path, json.dumps(doc, indent=2).encode())

    def load(self, kind: str, doc_id: str) -> dict | None:
        path = self._doc_path(kind, doc_id)
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def list_ids(self, kind: str) -> list[str]:
        base = self.root / kind
        if kind == "runs":
            return sorted(p.name for p in base.iterdir() if p.is_dir())
        return sorted(p.stem for p in base.glob("*.json"))

    def run_dir(self, run_id: str) -> Path:
        return self.root / "runs" / run_id

    def save_artifact(self, run_id: str, name: str, data: str | bytes) -> None:
        path = self.run_dir(run_id) / name
        path.parent.mkdir(parents=True, exist_ok=True)
        self._write_atomic(path, data.encode() if isinstance(data, str) else data)

    def load_artifact(self, run_id: str, name: str) -> bytes | None:
        path = self.run_dir(run_id) / name
        if not path.exists():
            return None
        return path.read_bytes()

    @staticmethod
    def _write_atomic(path: Path, data: bytes) -> None:
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(data)
        os.replace(tmp, path)
