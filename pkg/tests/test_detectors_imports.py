import logging
import math
import statistics

import pytest

from drivelab.canonical import canonical_serialize
from drivelab.ingest import Detector, default_detectors, import_external_annotations, run_detectors
from drivelab.model import (
    ConfigDocument,
    Participant,
    SampledStream,
    SessionRecording,
    SpeechSegment,
    StudyMeta,
)


def _doc_with_stream(name, samples, rate, speech=(), events=()):
    session = SessionRecording(
        participant_id="p1",
        duration=max(t for t, _ in samples) if samples else 0,
        streams=[SampledStream(name=name, unit="", rate_hz=rate, samples=list(samples))],
        speech=list(speech),
        events=list(events),
    )
    return ConfigDocument(
        study_meta=StudyMeta(title="t"),
        participants=[Participant(id="p1", color=(0.1, 0.2, 0.3))],
        sessions=[session],
        scene=None,
    )


def test_stress_detector_on_step_signal():
    # 60 s baseline 1.0 then a 10 s step to 5.0 at 4 Hz
    samples = [(i * 250, 1.0) for i in range(240)] + [(60_000 + i * 250, 5.0) for i in range(40)]
    doc = _doc_with_stream("eda", samples, 4.0)

    values = [v for _, v in samples]
    mean = statistics.fmean(values)
    sigma = math.sqrt(statistics.pvariance(values))
    assert 5.0 > mean + 2 * sigma > 1.0  # the step is the only region above threshold

    out = run_detectors(doc, default_detectors())
    stress = [e for e in out.sessions[0].events if e.label == "stress"]
    assert len(stress) == 1
    assert stress[0].kind == "emotion" and stress[0].source == "inferred"
    assert stress[0].t_start == 60_000
    assert stress[0].t_end == 60_000 + 39 * 250
    assert doc.sessions[0].events == []  # input untouched


def test_stress_detector_requires_min_duration():
    # excursion of only 1 s -> below the 3 s minimum -> nothing
    samples = [(i * 250, 1.0) for i in range(240)] + [(60_000 + i * 250, 5.0) for i in range(4)]
    doc = _doc_with_stream("eda", samples, 4.0)
    out = run_detectors(doc, default_detectors())
    assert [e for e in out.sessions[0].events if e.label == "stress"] == []


def test_eye_closure_all_open_yields_nothing():
    samples = [(i * 100, 0.0) for i in range(1200)]  # 120 s of open eyes at 10 Hz
    doc = _doc_with_stream("eye_closure", samples, 10.0)
    out = run_detectors(doc, default_detectors())
    assert [e for e in out.sessions[0].events if e.label == "drowsiness"] == []


def test_eye_closure_sustained_closure_detected():
    samples = [(i * 100, 0.0) for i in range(300)] + [(30_000 + i * 100, 1.0) for i in range(900)]
    doc = _doc_with_stream("eye_closure", samples, 10.0)
    out = run_detectors(doc, default_detectors())
    drowsy = [e for e in out.sessions[0].events if e.label == "drowsiness"]
    assert len(drowsy) == 1


def test_speech_activity_one_event_per_segment():
    speech = [SpeechSegment(t_start=0, t_end=900, transcript="a"), SpeechSegment(t_start=2000, t_end=2500, transcript="b")]
    doc = _doc_with_stream("eda", [(0, 1.0), (250, 1.0), (500, 1.0), (750, 1.0)], 4.0, speech=speech)
    out = run_detectors(doc, default_detectors())
    audio = [e for e in out.sessions[0].events if e.kind == "audio"]
    assert len(audio) == 2
    assert audio[0].attrs["transcript"] == "a"


def test_unsatisfied_requirement_skips_with_warning(caplog):
    doc = _doc_with_stream("heart_rate", [(0, 60.0), (1000, 61.0)], 1.0)
    det = Detector(name="stream_threshold", input_requirements=frozenset({"stream:eda"}), label="stress",
                   parameters={"stream": "eda"})
    with caplog.at_level(logging.WARNING):
        out = run_detectors(doc, [det])
    assert out.sessions[0].events == []
    assert any("skipped" in r.message for r in caplog.records)


def test_run_detectors_is_deterministic():
    samples = [(i * 250, 1.0 + (i % 7) * 0.01) for i in range(200)] + [(50_000 + i * 250, 9.0) for i in range(20)]
    doc = _doc_with_stream("eda", samples, 4.0, speech=[SpeechSegment(t_start=10, t_end=500, transcript="x")])
    a = canonical_serialize(run_detectors(doc, default_detectors()))
    b = canonical_serialize(run_detectors(doc, default_detectors()))
    assert a == b


# -- external annotation import ------------------------------------------------


def test_driveact_style_activity_import(tmp_path):
    f = tmp_path / "midlevel.csv"
    f.write_text(
        "participant_id,file_id,annotation_id,frame_start,frame_end,activity,chunk_id\n"
        "p1,vp1/run1,0,300,900,reading_newspaper,0\n"
    )
    doc = _doc_with_stream("eda", [(0, 1.0), (250, 1.0), (500, 1.0), (750, 1.0)], 4.0)
    out = import_external_annotations(doc, f, "driveact_activities")
    acts = [e for e in out.sessions[0].events if e.kind == "activity"]
    assert len(acts) == 1
    assert acts[0].label == "reading_newspaper"
    assert acts[0].t_start == 10_000 and acts[0].t_end == 30_000  # 30 fps
    assert acts[0].source == "logged"


def test_empty_annotation_file_is_noop(tmp_path):
    f = tmp_path / "empty.csv"
    f.write_text("")
    doc = _doc_with_stream("eda", [(0, 1.0), (250, 1.0), (500, 1.0), (750, 1.0)], 4.0)
    out = import_external_annotations(doc, f, "generic_intervals")
    assert canonical_serialize(out) == canonical_serialize(doc)


def test_generic_intervals_count(tmp_path):
    f = tmp_path / "gen.csv"
    f.write_text("t_start,t_end,label\n0,100,a\n200,300,b\n400,500,c\n")
    doc = _doc_with_stream("eda", [(0, 1.0), (250, 1.0), (500, 1.0), (750, 1.0)], 4.0)
    out = import_external_annotations(doc, f, "generic_intervals")
    assert len(out.sessions[0].events) == 3


def test_contradictory_overlap_kept_with_warning(tmp_path, caplog):
    f = tmp_path / "gen.csv"
    f.write_text("t_start,t_end,label\n0,1000,reading\n500,1500,phoning\n")
    doc = _doc_with_stream("eda", [(0, 1.0), (250, 1.0), (500, 1.0), (750, 1.0)], 4.0)
    with caplog.at_level(logging.WARNING):
        out = import_external_annotations(doc, f, "generic_intervals")
    assert len(out.sessions[0].events) == 2
    assert any("overlapping" in r.message for r in caplog.records)


def test_unknown_format_rejected(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("a,b\n1,2\n")
    doc = _doc_with_stream("eda", [(0, 1.0), (250, 1.0), (500, 1.0), (750, 1.0)], 4.0)
    with pytest.raises(ValueError):
        import_external_annotations(doc, f, "mystery_format")
