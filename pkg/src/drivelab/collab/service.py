"""Session hosting: persistence, sequencing, and read-side queries.

Each session materializes from its canonical config plus an append-only
NDJSON ledger; restarting the service and replaying the ledger reproduces
the exact pre-restart state.
"""

from __future__ import annotations

import secrets
import threading
import time
from pathlib import Path

from ..artifacts import AnalysisParams, compute_layer, standard_layer_names
from ..analytics.heatmap import HeatmapBuilder
from ..canonical import canonical_serialize, parse_document
from ..ingest.outliers import detect_outliers
from ..model import ConfigDocument
from ..replay import ReplayEngine, ReplayState, interpolate_pose
from ..validation import ValidationReport, validate
from .state import SessionCore, SyncMessage, decode_ledger, encode_ledger

LEDGER_FILE = "ledger.ndjson"
CONFIG_FILE = "config.json"


class InvalidDocument(Exception):
    def __init__(self, report: ValidationReport):
        super().__init__(f"document failed validation with {len(report.errors)} errors")
        self.report = report


class CollabSession:
    def __init__(self, session_id: str, doc: ConfigDocument, doc_bytes: bytes, directory: Path | None):
        self.id = session_id
        self.doc = doc
        self.doc_bytes = doc_bytes
        self.directory = directory
        self.engine = ReplayEngine(doc)
        self.core = SessionCore(self.engine.duration, anchor_label=self._anchor_label)
        self.lock = threading.Lock()
        self.subscribers: dict[int, object] = {}  # conn id -> asyncio.Queue, managed by the app
        self._params = AnalysisParams()
        self._builder: HeatmapBuilder | None = None
        self._layers: dict[str, object] = {}

    @property
    def title(self) -> str:
        return self.doc.study_meta.title

    def _anchor_label(self, t: int):
        for pid, path in self.engine.paths.items():
            return tuple(interpolate_pose(path, t).position)
        return None

    def layer(self, name: str):
        with self.lock:
            if name not in self._layers:
                if self._builder is None and self.doc.scene is not None:
                    self._builder = HeatmapBuilder(self.doc.scene, self._params.heatmap_resolution)
                self._layers[name] = compute_layer(self.doc, name, self._params, builder=self._builder)
            return self._layers[name]

    def layer_names(self) -> list[str]:
        return standard_layer_names(self.doc)

    def snapshot_at(self, t: int, participants: frozenset[str] | None = None):
        return self.engine.snapshot(ReplayState(t=t, participants=participants))


class SessionService:
    """All hosted sessions plus their persistence root."""

    def __init__(self, root: str | Path | None = None, clock=None):
        self.root = Path(root) if root else None
        self.clock = clock or (lambda: int(time.time() * 1000))
        self.sessions: dict[str, CollabSession] = {}
        self._lock = threading.Lock()

    # -- lifecycle -------------------------------------------------------

    def host(self, doc_or_bytes: ConfigDocument | bytes) -> CollabSession:
        if isinstance(doc_or_bytes, bytes):
            doc = parse_document(doc_or_bytes)
        else:
            doc = doc_or_bytes
        report = validate(doc)
        if not report.ok:
            raise InvalidDocument(report)
        doc_bytes = canonical_serialize(doc)
        session_id = secrets.token_hex(8)
        directory = None
        if self.root is not None:
            directory = self.root / session_id
            directory.mkdir(parents=True, exist_ok=True)
            (directory / CONFIG_FILE).write_bytes(doc_bytes)
            (directory / LEDGER_FILE).write_bytes(b"")
        session = CollabSession(session_id, doc, doc_bytes, directory)
        with self._lock:
            self.sessions[session_id] = session
        return session

    def restore(self) -> int:
        """Load every persisted session under the root; returns the count."""
        if self.root is None or not self.root.exists():
            return 0
        n = 0
        for directory in sorted(self.root.iterdir()):
            config = directory / CONFIG_FILE
            if not config.is_file():
                continue
            doc_bytes = config.read_bytes()
            doc = parse_document(doc_bytes, base_dir=directory)
            session = CollabSession(directory.name, doc, doc_bytes, directory)
            ledger_path = directory / LEDGER_FILE
            if ledger_path.is_file():
                messages = decode_ledger(ledger_path.read_bytes())
                session.core = SessionCore.replay(
                    session.engine.duration, messages, anchor_label=session._anchor_label
                )
            with self._lock:
                self.sessions[directory.name] = session
            n += 1
        return n

    def get(self, session_id: str) -> CollabSession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise KeyError(f"unknown session {session_id!r}") from None

    def list_sessions(self) -> list[dict]:
        return [
            {"id": s.id, "title": s.title, "duration": s.engine.duration, "seq": s.core.state.last_seq}
            for s in self.sessions.values()
        ]

    # -- sync ------------------------------------------------------------

    def join(self, session_id: str) -> SyncMessage:
        session = self.get(session_id)
        with session.lock:
            return session.core.snapshot_message(now_ms=self.clock())

    def apply(self, session_id: str, proposal: SyncMessage) -> tuple[SyncMessage | None, SyncMessage | None]:
        """Sequence one proposal; persists the applied message before
        returning so an accepted op is never lost to a crash."""
        session = self.get(session_id)
        with session.lock:
            applied, rejection = session.core.propose(proposal, now_ms=self.clock())
            if applied is not None and session.directory is not None:
                with (session.directory / LEDGER_FILE).open("ab") as fh:
                    fh.write(applied.encode().encode("utf-8") + b"\n")
            return applied, rejection

    # -- read side ---------------------------------------------------------

    def query_events(self, session_id: str, t_from: int, t_to: int, kinds=None, participants=None):
        session = self.get(session_id)
        return session.engine.event_index.query(t_from, t_to, kinds=kinds, participants=participants)

    def stream_window(
        self,
        session_id: str,
        name: str,
        t_from: int | None = None,
        t_to: int | None = None,
        max_points: int = 1000,
        participant: str | None = None,
    ) -> dict:
        session = self.get(session_id)
        stream = None
        for s in session.doc.sessions:
            if participant is not None and s.participant_id != participant:
                continue
            stream = s.stream(name)
            if stream is not None:
                participant = s.participant_id
                break
        if stream is None:
            raise KeyError(f"unknown stream {name!r}")
        max_points = max(2, max_points)
        a = t_from if t_from is not None else 0
        b = t_to if t_to is not None else session.engine.duration
        window = [(t, v) for t, v in stream.samples if a <= t <= b]
        total = len(window)
        if total > max_points:
            stride = (total - 1) / (max_points - 1)
            picked = [window[round(i * stride)] for i in range(max_points)]
            picked[-1] = window[-1]
            window = picked
        mean = sum(v for _, v in stream.samples) / len(stream.samples) if stream.samples else 0.0
        marks = [m for m in detect_outliers(stream) if a <= m.t <= b]
        return {
            "name": stream.name,
            "participant_id": participant,
            "unit": stream.unit,
            "rate_hz": stream.rate_hz,
            "mean": mean,
            "total_points": total,
            "points": [[t, v] for t, v in window],
            "outliers": [m.to_json() for m in marks],
            "gaps": [[a_, b_] for a_, b_ in stream.gaps],
        }
