"""Replicated session state and its message protocol.

One sequencer per session assigns a gap-free total order (seq) to accepted
proposals; every replica folds the same message sequence with
``apply_message`` and therefore converges exactly. Conflicting updates to
one object resolve last-writer-wins by seq. Rejections consume no seq.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

from ..model import Annotation
from ..replay import RATE_LIMIT

SYNC_KINDS = (
    "hello",
    "snapshot",
    "set_playback",
    "presence",
    "create_annotation",
    "update_annotation",
    "delete_annotation",
    "set_visibility",
    "create_ghost",
    "select_ghost",
    "error",
)

PRESENCE_TTL_MS = 10_000


@dataclass
class SyncMessage:
    seq: int  # server-assigned; 0 on client proposals
    kind: str
    origin: str  # analyst id
    payload: dict

    def to_json(self) -> dict:
        return {"seq": int(self.seq), "kind": self.kind, "origin": self.origin, "payload": self.payload}

    @classmethod
    def from_json(cls, d: dict) -> "SyncMessage":
        kind = str(d.get("kind", ""))
        if kind not in SYNC_KINDS:
            raise ValueError(f"unknown sync message kind {kind!r}")
        return cls(seq=int(d.get("seq", 0)), kind=kind, origin=str(d.get("origin", "")), payload=dict(d.get("payload", {})))

    def encode(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


@dataclass
class AnalystPresence:
    analyst_id: str
    display_name: str = ""
    view: str = "desktop"  # desktop | vr
    pose: dict = field(default_factory=dict)  # {position: [x,y,z], look_at: [x,y,z]}
    frustum: dict = field(default_factory=lambda: {"h_fov_deg": 90.0, "v_fov_deg": 60.0})
    last_seen: int = 0

    def to_json(self) -> dict:
        return {
            "analyst_id": self.analyst_id,
            "display_name": self.display_name,
            "view": self.view,
            "pose": self.pose,
            "frustum": self.frustum,
            "last_seen": int(self.last_seen),
        }


@dataclass
class GhostBookmark:
    id: str
    analyst_id: str
    t: int
    camera: dict = field(default_factory=dict)
    label: str = ""

    def to_json(self) -> dict:
        return {"id": self.id, "analyst_id": self.analyst_id, "t": int(self.t), "camera": self.camera, "label": self.label}


@dataclass
class SessionState:
    playback: dict = field(default_factory=lambda: {"t": 0, "rate": 1.0, "playing": False})
    visibility: dict = field(default_factory=dict)
    annotations: dict[str, Annotation] = field(default_factory=dict)
    ghosts: dict[str, GhostBookmark] = field(default_factory=dict)
    presences: dict[str, AnalystPresence] = field(default_factory=dict)
    last_seq: int = 0

    def to_json(self, now_ms: int | None = None) -> dict:
        presences = self.presences
        if now_ms is not None:
            presences = {
                k: p for k, p in presences.items() if now_ms - p.last_seen <= PRESENCE_TTL_MS
            }
        return {
            "playback": dict(self.playback),
            "visibility": dict(sorted(self.visibility.items())),
            "annotations": {k: a.to_json() for k, a in sorted(self.annotations.items())},
            "ghosts": {k: g.to_json() for k, g in sorted(self.ghosts.items())},
            "presences": {k: p.to_json() for k, p in sorted(presences.items())},
            "last_seq": int(self.last_seq),
        }


class Rejection(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _validate(state: SessionState, msg: SyncMessage, duration: int) -> SyncMessage:
    """Check a proposal against the current state; returns the message
    (possibly transformed, e.g. select_ghost becomes set_playback)."""
    p = msg.payload
    if msg.kind == "set_playback":
        t = int(p.get("t", state.playback["t"]))
        payload = {
            "t": max(0, min(duration, t)),
            "rate": max(-RATE_LIMIT, min(RATE_LIMIT, float(p.get("rate", state.playback["rate"])))),
            "playing": bool(p.get("playing", state.playback["playing"])),
        }
        return SyncMessage(seq=0, kind="set_playback", origin=msg.origin, payload=payload)
    if msg.kind == "presence":
        return msg
    if msg.kind == "create_annotation":
        ann_id = p.get("id")
        if not ann_id:
            raise Rejection("annotation needs an id")
        if ann_id in state.annotations:
            raise Rejection(f"annotation {ann_id!r} already exists")
        if p.get("kind") not in ("label", "comment"):
            raise Rejection("annotation kind must be label or comment")
        if p.get("kind") == "label" and p.get("t") is None:
            raise Rejection("label annotations need t")
        return msg
    if msg.kind == "update_annotation":
        if p.get("id") not in state.annotations:
            raise Rejection(f"unknown annotation {p.get('id')!r}")
        return msg
    if msg.kind == "delete_annotation":
        if p.get("id") not in state.annotations:
            raise Rejection(f"unknown annotation {p.get('id')!r}")
        return msg
    if msg.kind == "set_visibility":
        return msg
    if msg.kind == "create_ghost":
        gid = p.get("id")
        if not gid:
            raise Rejection("ghost needs an id")
        if gid in state.ghosts:
            raise Rejection(f"ghost {gid!r} already exists")
        t = int(p.get("t", -1))
        if not (0 <= t <= duration):
            raise Rejection(f"ghost t {t} outside session duration")
        return msg
    if msg.kind == "select_ghost":
        ghost = state.ghosts.get(p.get("id", ""))
        if ghost is None:
            raise Rejection(f"unknown ghost {p.get('id')!r}")
        payload = {
            "t": ghost.t,
            "rate": state.playback["rate"],
            "playing": False,
            "ghost_id": ghost.id,
            "recommended_camera": ghost.camera,
        }
        return SyncMessage(seq=0, kind="set_playback", origin=msg.origin, payload=payload)
    raise Rejection(f"kind {msg.kind!r} cannot be proposed")


def apply_message(state: SessionState, msg: SyncMessage) -> None:
    """Fold one sequenced message into the state. Shared verbatim between
    the server and client replicas; replaying a ledger from an empty state
    reproduces the materialized state exactly."""
    p = msg.payload
    if msg.kind == "set_playback":
        state.playback = {"t": int(p["t"]), "rate": float(p.get("rate", 1.0)), "playing": bool(p.get("playing", False))}
    elif msg.kind == "presence":
        state.presences[msg.origin] = AnalystPresence(
            analyst_id=msg.origin,
            display_name=str(p.get("display_name", "")),
            view=str(p.get("view", "desktop")),
            pose=dict(p.get("pose", {})),
            frustum=dict(p.get("frustum", {"h_fov_deg": 90.0, "v_fov_deg": 60.0})),
            last_seen=int(p.get("last_seen", 0)),
        )
    elif msg.kind in ("create_annotation", "update_annotation"):
        ann = Annotation(
            id=str(p["id"]),
            kind=str(p.get("kind", "comment")),
            text=str(p.get("text", "")),
            t=None if p.get("t") is None else int(p["t"]),
            position=None if p.get("position") is None else tuple(float(c) for c in p["position"]),
            author=str(p.get("author", msg.origin)),
            created_seq=msg.seq,
        )
        if msg.kind == "update_annotation":
            old = state.annotations[ann.id]
            ann.author = old.author
            ann.created_seq = old.created_seq
        state.annotations[ann.id] = ann
    elif msg.kind == "delete_annotation":
        state.annotations.pop(p.get("id", ""), None)
    elif msg.kind == "set_visibility":
        for k, v in p.items():
            state.visibility[str(k)] = bool(v)
    elif msg.kind == "create_ghost":
        state.ghosts[str(p["id"])] = GhostBookmark(
            id=str(p["id"]),
            analyst_id=msg.origin,
            t=int(p["t"]),
            camera=dict(p.get("camera", {})),
            label=str(p.get("label", "")),
        )
    state.last_seq = msg.seq


class SessionCore:
    """The per-session sequencer: validates proposals, assigns seq,
    appends to the ledger, and keeps the materialized state."""

    def __init__(self, duration: int, anchor_label: Callable[[int], tuple | None] | None = None):
        self.duration = int(duration)
        self.state = SessionState()
        self.ledger: list[SyncMessage] = []
        self._anchor_label = anchor_label

    def propose(self, msg: SyncMessage, now_ms: int = 0) -> tuple[SyncMessage | None, SyncMessage | None]:
        """Returns (applied, rejection); exactly one is set."""
        try:
            out = _validate(self.state, msg, self.duration)
        except Rejection as exc:
            err = SyncMessage(seq=0, kind="error", origin="server", payload={"reason": exc.reason, "proposal": msg.kind})
            return None, err
        if out.kind == "presence":
            out = SyncMessage(seq=0, kind="presence", origin=out.origin, payload={**out.payload, "last_seen": now_ms})
        if out.kind == "create_annotation" and out.payload.get("kind") == "label" and out.payload.get("position") is None:
            if self._anchor_label is not None:
                pos = self._anchor_label(int(out.payload["t"]))
                if pos is not None:
                    out = SyncMessage(seq=0, kind=out.kind, origin=out.origin, payload={**out.payload, "position": list(pos)})
        applied = SyncMessage(seq=self.state.last_seq + 1, kind=out.kind, origin=out.origin, payload=out.payload)
        apply_message(self.state, applied)
        self.ledger.append(applied)
        return applied, None

    def snapshot_message(self, now_ms: int = 0) -> SyncMessage:
        return SyncMessage(
            seq=self.state.last_seq,
            kind="snapshot",
            origin="server",
            payload={"state": self.state.to_json(now_ms=now_ms), "duration": self.duration},
        )

    @classmethod
    def replay(cls, duration: int, messages: list[SyncMessage],
               anchor_label: Callable[[int], tuple | None] | None = None) -> "SessionCore":
        core = cls(duration, anchor_label=anchor_label)
        for msg in messages:
            apply_message(core.state, msg)
            core.ledger.append(msg)
        return core


def encode_ledger(messages: list[SyncMessage]) -> bytes:
    return ("".join(m.encode() + "\n" for m in messages)).encode("utf-8")


def decode_ledger(blob: bytes) -> list[SyncMessage]:
    out = []
    for line in blob.decode("utf-8").splitlines():
        line = line.strip()
        if line:
            out.append(SyncMessage.from_json(json.loads(line)))
    return out
