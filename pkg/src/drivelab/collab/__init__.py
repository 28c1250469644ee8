"""Collaborative session hosting: server-authoritative sequencing over a
persistent ledger."""

from .state import (
    SYNC_KINDS,
    AnalystPresence,
    GhostBookmark,
    SessionCore,
    SessionState,
    SyncMessage,
    apply_message,
)
from .service import SessionService, CollabSession

__all__ = [
    "SYNC_KINDS",
    "AnalystPresence",
    "GhostBookmark",
    "SessionCore",
    "SessionState",
    "SyncMessage",
    "apply_message",
    "SessionService",
    "CollabSession",
]
