"""Rule-based event detectors.

Heavy model inference is out of scope; the pipeline instead runs small
deterministic rules over the already-ingested streams (plus imports of
precomputed annotations, see imports.py). Each detector declares what it
reads; sessions missing a requirement are skipped with a warning.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

from ..model import ConfigDocument, EventRecord, SessionRecording

log = logging.getLogger(__name__)


@dataclass
class Detector:
    name: str
    input_requirements: frozenset[str] = frozenset()
    emits_kind: str = "emotion"
    label: str = ""
    parameters: dict = field(default_factory=dict)


def default_detectors() -> list[Detector]:
    """Baseline set: sustained high EDA -> stress, PERCLOS-style eye
    closure -> drowsiness, speech segments -> audio events.

    Thresholds are engineering defaults, tunable via parameters.
    """
    return [
        Detector(
            name="stream_threshold",
            input_requirements=frozenset({"stream:eda"}),
            emits_kind="emotion",
            label="stress",
            parameters={"stream": "eda", "z": 2.0, "min_duration_ms": 3000, "confidence": 0.6},
        ),
        Detector(
            name="eye_closure",
            input_requirements=frozenset({"stream:eye_closure"}),
            emits_kind="emotion",
            label="drowsiness",
            parameters={"stream": "eye_closure", "ratio": 0.7, "window_ms": 60_000, "confidence": 0.5},
        ),
        Detector(
            name="speech_activity",
            input_requirements=frozenset({"speech"}),
            emits_kind="audio",
            label="speech",
            parameters={"confidence": 1.0},
        ),
    ]


def _requirement_met(req: str, session: SessionRecording) -> bool:
    if req.startswith("stream:"):
        return session.stream(req.split(":", 1)[1]) is not None
    if req == "speech":
        return bool(session.speech)
    if req == "skeleton":
        return bool(session.skeleton)
    if req in ("gaze", "pointing"):
        return bool(getattr(session, req))
    return False


def run_detectors(doc: ConfigDocument, detectors: list[Detector]) -> ConfigDocument:
    """Append inferred events; original events and order stay intact.

    Pure function of (document, detector parameters): event ids and
    contents are deterministic, so repeated runs serialize identically.
    """
    new_sessions = []
    for session in doc.sessions:
        inferred: list[EventRecord] = []
        for det in detectors:
            missing = [r for r in det.input_requirements if not _requirement_met(r, session)]
            if missing:
                log.warning(
                    "detector %r skipped for participant %s: missing %s",
                    det.name, session.participant_id, ", ".join(sorted(missing)),
                )
                continue
            impl = _REGISTRY.get(det.name)
            if impl is None:
                log.warning("unknown detector %r skipped", det.name)
                continue
            inferred.extend(impl(session, det))
        if inferred:
            events = sorted(session.events + inferred, key=lambda e: (e.t_start, e.id))
            new_sessions.append(replace(session, events=events))
        else:
            new_sessions.append(session)
    return replace(doc, sessions=new_sessions)


def _event_id(det: Detector, session: SessionRecording, k: int) -> str:
    return f"evt-{det.name}-{session.participant_id}-{k}"


def _detect_stream_threshold(session: SessionRecording, det: Detector) -> list[EventRecord]:
    p = det.parameters
    stream = session.stream(p.get("stream", "eda"))
    assert stream is not None
    values = stream.values()
    if len(values) < 2:
        return []
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    threshold = mean + float(p.get("z", 2.0)) * math.sqrt(var)
    min_dur = int(p.get("min_duration_ms", 3000))

    events = []
    run_start: int | None = None
    prev_t = None
    for t, v in stream.samples + [(stream.samples[-1][0] + 1, float("-inf"))]:
        if v > threshold:
            if run_start is None:
                run_start = t
            prev_t = t
        else:
            if run_start is not None and prev_t is not None and prev_t - run_start >= min_dur:
                events.append((run_start, prev_t))
            run_start = None
    return [
        EventRecord(
            id=_event_id(det, session, k),
            kind=det.emits_kind,
            label=det.label,
            t_start=a,
            t_end=b,
            participant_id=session.participant_id,
            attrs={"detector": det.name, "stream": stream.name},
            confidence=float(p.get("confidence", 0.6)),
            source="inferred",
        )
        for k, (a, b) in enumerate(events)
    ]


def _detect_eye_closure(session: SessionRecording, det: Detector) -> list[EventRecord]:
    p = det.parameters
    stream = session.stream(p.get("stream", "eye_closure"))
    assert stream is not None
    window = int(p.get("window_ms", 60_000))
    ratio = float(p.get("ratio", 0.7))
    samples = stream.samples
    if not samples:
        return []

    # trailing-window closure fraction at each sample
    flagged: list[int] = []
    j = 0
    closed_sum = 0.0
    count = 0
    for i, (t, v) in enumerate(samples):
        closed_sum += v
        count += 1
        while samples[j][0] < t - window:
            closed_sum -= samples[j][1]
            count -= 1
            j += 1
        if t - samples[0][0] >= window and count > 0 and closed_sum / count > ratio:
            flagged.append(t)

    if not flagged:
        return []
    # merge consecutive flagged timestamps into spans
    spans = []
    start = prev = flagged[0]
    nominal = 1000.0 / stream.rate_hz
    for t in flagged[1:]:
        if t - prev <= 2 * nominal:
            prev = t
        else:
            spans.append((start, prev))
            start = prev = t
    spans.append((start, prev))
    return [
        EventRecord(
            id=_event_id(det, session, k),
            kind=det.emits_kind,
            label=det.label,
            t_start=max(0, a - window),
            t_end=b,
            participant_id=session.participant_id,
            attrs={"detector": det.name, "stream": stream.name},
            confidence=float(p.get("confidence", 0.5)),
            source="inferred",
        )
        for k, (a, b) in enumerate(spans)
    ]


def _detect_speech_activity(session: SessionRecording, det: Detector) -> list[EventRecord]:
    events = []
    for k, seg in enumerate(session.speech):
        attrs = {"detector": det.name, "modality": "speech"}
        if seg.transcript:
            attrs["transcript"] = seg.transcript
        if seg.referent:
            attrs["referent"] = seg.referent
        events.append(
            EventRecord(
                id=_event_id(det, session, k),
                kind=det.emits_kind,
                label=det.label or "speech",
                t_start=seg.t_start,
                t_end=seg.t_end,
                participant_id=session.participant_id,
                attrs=attrs,
                confidence=float(det.parameters.get("confidence", 1.0)),
                source="inferred",
            )
        )
    return events


_REGISTRY: dict[str, Callable[[SessionRecording, Detector], list[EventRecord]]] = {
    "stream_threshold": _detect_stream_threshold,
    "eye_closure": _detect_eye_closure,
    "speech_activity": _detect_speech_activity,
}


def register_detector(name: str, impl: Callable[[SessionRecording, Detector], list[EventRecord]]) -> None:
    """Plug in an external detector implementation."""
    _REGISTRY[name] = impl
