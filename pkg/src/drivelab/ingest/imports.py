"""Import of precomputed annotation files as activity events.

Covers interval exports from external labeling tools: the Drive&Act-style
frame-indexed activity CSV and a generic millisecond interval CSV.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import replace
from pathlib import Path

from ..model import ConfigDocument, EventRecord

log = logging.getLogger(__name__)

IMPORT_FORMATS = ("driveact_activities", "generic_intervals")

# Frame-indexed activity files carry no timebase of their own; the source
# cameras run at a fixed rate.
DRIVEACT_FPS = 30.0


def import_external_annotations(doc: ConfigDocument, file: str | Path, format: str) -> ConfigDocument:
    """Append intervals from ``file`` as activity events (source=logged).

    Overlapping intervals with contradicting labels are kept as-is; a
    warning is logged for each overlap so analysts can review them.
    """
    if format not in IMPORT_FORMATS:
        raise ValueError(f"unknown annotation format {format!r}")

    rows = _read_rows(Path(file))
    if not rows:
        return doc

    parsed: list[tuple[str, int, int, str]] = []  # (participant, t_start, t_end, label)
    for line_no, row in rows:
        try:
            if format == "driveact_activities":
                t_start = int(round(int(row["frame_start"]) / DRIVEACT_FPS * 1000.0))
                t_end = int(round(int(row["frame_end"]) / DRIVEACT_FPS * 1000.0))
                label = row["activity"]
            else:
                t_start = int(round(float(row["t_start"])))
                t_end = int(round(float(row["t_end"])))
                label = row["label"]
        except (KeyError, ValueError) as exc:
            log.warning("%s line %d skipped: %s", file, line_no, exc)
            continue
        parsed.append((row.get("participant_id", ""), t_start, t_end, label))

    new_sessions = list(doc.sessions)
    for si, session in enumerate(doc.sessions):
        mine = [
            (a, b, label)
            for pid, a, b, label in parsed
            if pid == session.participant_id or (not pid and si == 0)
        ]
        if not mine:
            continue
        existing = {e.id for e in session.events}
        added = []
        for k, (a, b, label) in enumerate(mine):
            eid = f"act-{session.participant_id}-{len(existing) + k}"
            added.append(
                EventRecord(
                    id=eid,
                    kind="activity",
                    label=label,
                    t_start=min(a, b),
                    t_end=max(a, b),
                    participant_id=session.participant_id,
                    attrs={"import": format},
                    confidence=1.0,
                    source="logged",
                )
            )
        _warn_on_contradictions(added, file)
        new_sessions[si] = replace(
            session, events=sorted(session.events + added, key=lambda e: (e.t_start, e.id))
        )
    return replace(doc, sessions=new_sessions)


def _warn_on_contradictions(events: list[EventRecord], file) -> None:
    by_start = sorted(events, key=lambda e: e.t_start)
    for e1, e2 in zip(by_start, by_start[1:]):
        if e2.t_start < e1.t_end and e1.label != e2.label:
            log.warning(
                "%s: overlapping activity labels %r and %r around %d ms (kept both)",
                file, e1.label, e2.label, e2.t_start,
            )


def _read_rows(path: Path) -> list[tuple[int, dict]]:
    if not path.exists():
        raise FileNotFoundError(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return []
        return [(i + 2, row) for i, row in enumerate(reader)]
