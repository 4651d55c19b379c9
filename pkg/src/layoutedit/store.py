"""File-backed record store: one JSON file per record, atomic write-rename.

Records survive restarts and are diff-friendly. Design ids are content
hashes, so storing the same document twice is idempotent.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from pathlib import Path

from .errors import StoreError


def content_id(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


class FileStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, kind: str, record_id: str) -> Path:
        if not record_id or "/" in record_id or record_id.startswith("."):
            raise StoreError(f"invalid record id {record_id!r}")
        return self.root / kind / f"{record_id}.json"

    def put(self, kind: str, record_id: str, payload: dict) -> None:
        path = self._path(kind, record_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        body = json.dumps(
            {"id": record_id, "updated_at": time.time(), "payload": payload},
            ensure_ascii=False,
        )
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(body)
            os.replace(tmp, path)
        except OSError as exc:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise StoreError(f"failed to persist {kind}/{record_id}: {exc}") from exc

    def get(self, kind: str, record_id: str) -> dict | None:
        path = self._path(kind, record_id)
        if not path.exists():
            return None
        try:
            with path.open(encoding="utf-8") as fh:
                return json.load(fh)["payload"]
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise StoreError(f"corrupt record {kind}/{record_id}: {exc}") from exc

    def exists(self, kind: str, record_id: str) -> bool:
        return self._path(kind, record_id).exists()

    def ids(self, kind: str) -> list[str]:
        folder = self.root / kind
        if not folder.is_dir():
            return []
        return sorted(p.stem for p in folder.glob("*.json"))
