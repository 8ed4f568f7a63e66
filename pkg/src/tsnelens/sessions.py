"""On-disk session persistence.

Each session lives in its own directory: a manifest plus content-addressed
record blobs (sha256 of the canonical JSON). Loading verifies hashes and
never mutates the store; embeddings round-trip bit-exactly through the
base64 float encoding.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from hashlib import sha256
from pathlib import Path

from .codec import (canonical_json_bytes, grid_from_wire, grid_to_wire,
                    record_from_wire, record_to_wire)
from .errors import ComputationError, NotFoundError, ValidationError
from .quality import Selection
from .search import GridSpec, ProjectionRecord

FORMAT_VERSION = 1


class MigrationError(ValidationError):
    """A persisted session uses an unsupported format version."""


@dataclass(frozen=True)
class Annotation:
    timestamp: str
    author: str
    text: str
    selection: Selection | None = None

    @staticmethod
    def now(author: str, text: str, selection: Selection | None = None) -> "Annotation":
        ts = datetime.now(timezone.utc).isoformat()
        return Annotation(timestamp=ts, author=author, text=text, selection=selection)


@dataclass(frozen=True)
class SessionStore:
    """One analysis session: dataset reference, grid spec, representative
    records in display order, the chosen projection, and append-only notes."""

    session_id: str
    dataset_id: str
    grid: GridSpec | None = None
    representatives: tuple[ProjectionRecord, ...] = ()
    chosen_projection_id: str | None = None
    annotations: tuple[Annotation, ...] = ()

    def with_annotation(self, ann: Annotation) -> "SessionStore":
        return replace(self, annotations=self.annotations + (ann,))


def new_session_id() -> str:
    return uuid.uuid4().hex


def _session_dir(data_dir: Path, session_id: str) -> Path:
    if not session_id or any(c in session_id for c in "/\\."):
        raise ValidationError(f"invalid session id {session_id!r}")
    return Path(data_dir) / "sessions" / session_id


def save_session(store: SessionStore, data_dir) -> str:
    """Persist a session; returns its id. Record blobs are content-addressed
    and shared between saves."""
    root = _session_dir(data_dir, store.session_id)
    blobs = root / "blobs"
    blobs.mkdir(parents=True, exist_ok=True)
    refs = []
    for rec in store.representatives:
        payload = canonical_json_bytes(record_to_wire(rec))
        digest = sha256(payload).hexdigest()
        path = blobs / f"{digest}.json"
        if not path.exists():
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(payload)
            tmp.replace(path)
        refs.append(digest)
    manifest = {
        "version": FORMAT_VERSION,
        "session_id": store.session_id,
        "dataset_id": store.dataset_id,
        "grid": grid_to_wire(store.grid) if store.grid is not None else None,
        "chosen_projection_id": store.chosen_projection_id,
        "annotations": [
            {"timestamp": a.timestamp, "author": a.author, "text": a.text,
             "selection": list(a.selection.indices) if a.selection else None}
            for a in store.annotations
        ],
        "records": refs,
    }
    tmp = root / "manifest.tmp"
    tmp.write_bytes(canonical_json_bytes(manifest))
    tmp.replace(root / "manifest.json")
    return store.session_id


def load_session(session_id: str, data_dir) -> SessionStore:
    """Load a persisted session, verifying blob hashes."""
    root = _session_dir(data_dir, session_id)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise NotFoundError(f"session {session_id!r} not found")
    try:
        manifest = json.loads(manifest_path.read_bytes())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ComputationError(f"corrupted session manifest: {exc}") from exc
    version = manifest.get("version")
    if version != FORMAT_VERSION:
        raise MigrationError(
            f"session format version {version} needs migration (supported: {FORMAT_VERSION})")
    records = []
    for digest in manifest["records"]:
        path = root / "blobs" / f"{digest}.json"
        if not path.exists():
            raise ComputationError(f"missing session blob {digest}")
        payload = path.read_bytes()
        if sha256(payload).hexdigest() != digest:
            raise ComputationError(f"corrupted session blob {digest}: hash mismatch")
        try:
            records.append(record_from_wire(json.loads(payload)))
        except (json.JSONDecodeError, KeyError, ValidationError) as exc:
            raise ComputationError(f"corrupted session blob {digest}: {exc}") from exc
    annotations = tuple(
        Annotation(timestamp=a["timestamp"], author=a["author"], text=a["text"],
                   selection=Selection(indices=tuple(a["selection"])) if a.get("selection") else None)
        for a in manifest["annotations"]
    )
    return SessionStore(
        session_id=manifest["session_id"],
        dataset_id=manifest["dataset_id"],
        grid=grid_from_wire(manifest["grid"]) if manifest.get("grid") else None,
        representatives=tuple(records),
        chosen_projection_id=manifest.get("chosen_projection_id"),
        annotations=annotations,
    )
