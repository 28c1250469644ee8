import random

import pytest

from drivelab.validation import polygon_is_simple, polygon_signed_area, validate

from docgen import random_document


@pytest.fixture
def doc():
    return random_document(random.Random(42))


def _assert_error_at(report, fragment):
    assert not report.ok
    assert any(fragment in f.path for f in report.errors), [f.to_json() for f in report.errors]


def test_clean_document_has_no_errors(doc):
    report = validate(doc)
    assert report.ok, [f.to_json() for f in report.errors]


def test_event_start_after_end(doc):
    ev = doc.sessions[0].events
    if not ev:
        pytest.skip("generator produced no events for this seed")
    ev[0].t_start, ev[0].t_end = 5000, 4000
    doc.sessions[0].events.sort(key=lambda e: e.t_start)
    _assert_error_at(validate(doc), "events")


def test_non_unit_quaternion(doc):
    doc.sessions[0].skeleton[0].joints[0].rotation = (2.0, 0.0, 0.0, 0.0)
    report = validate(doc)
    _assert_error_at(report, "rotation")
    assert any("non-unit quaternion" in f.message for f in report.errors)


def test_unknown_event_kind(doc):
    if not doc.sessions[0].events:
        pytest.skip("no events")
    doc.sessions[0].events[0].kind = "mystery"
    _assert_error_at(validate(doc), "kind")


def test_unsorted_samples(doc):
    s = doc.sessions[0].streams[0]
    s.samples = [(1000, 1.0), (500, 2.0), (1500, 3.0)]
    _assert_error_at(validate(doc), "samples")


def test_timestamp_outside_duration(doc):
    s = doc.sessions[0]
    s.streams[0].samples.append((s.duration + 10_000, 1.0))
    _assert_error_at(validate(doc), "samples")


def test_nan_sample_value(doc):
    doc.sessions[0].streams[0].samples[0] = (0, float("nan"))
    _assert_error_at(validate(doc), "samples")


def test_rate_mismatch_is_warning_not_error(doc):
    s = doc.sessions[0].streams[0]
    s.rate_hz = 40.0  # samples are 250 ms apart
    report = validate(doc)
    assert report.ok
    assert any("rate" in f.path for f in report.warnings)


def test_duplicate_participant_color(doc):
    if len(doc.participants) < 2:
        doc.participants.append(type(doc.participants[0])(id="extra", color=doc.participants[0].color))
    else:
        doc.participants[1].color = doc.participants[0].color
    _assert_error_at(validate(doc), "color")


def test_duplicate_condition(doc):
    doc.study_meta.conditions = ["a", "a"]
    _assert_error_at(validate(doc), "conditions")


def test_unresolved_participant(doc):
    doc.sessions[0].participant_id = "nobody"
    _assert_error_at(validate(doc), "participant_id")


def test_unresolved_touch_mesh(doc):
    doc.sessions[0].touches[0].mesh_id = "ghost-mesh"
    _assert_error_at(validate(doc), "mesh_id")


def test_touch_off_surface(doc):
    doc.sessions[0].touches[0].position = (0.5, 0.5, 0.5)  # 50 cm above the quad
    _assert_error_at(validate(doc), "position")


def test_non_unit_ray_direction(doc):
    doc.sessions[0].gaze[0].direction = (0.0, 0.0, 2.0)
    _assert_error_at(validate(doc), "direction")


def test_unknown_ray_modality(doc):
    doc.sessions[0].gaze[0].modality = "telepathy"
    _assert_error_at(validate(doc), "modality")


def test_latitude_out_of_range(doc):
    doc.sessions[0].ego_path[0].lat = 91.0
    _assert_error_at(validate(doc), "lat")


def test_unknown_object_class(doc):
    doc.sessions[0].road_users[0].object_class = "ufo"
    _assert_error_at(validate(doc), "class")


def test_triangle_index_out_of_range(doc):
    doc.scene.meshes[0].triangles[0] = (0, 1, 99)
    _assert_error_at(validate(doc), "triangles")


def test_degenerate_triangle(doc):
    m = doc.scene.meshes[0]
    m.triangles[0] = (0, 1, 1)
    _assert_error_at(validate(doc), "triangles")


def test_missing_ego_mesh(doc):
    doc.scene.meshes = [m for m in doc.scene.meshes if m.role != "ego_exterior"]
    doc.scene.ego_vehicle = "nothing"
    _assert_error_at(validate(doc), "scene")


def test_duplicate_mesh_id(doc):
    doc.scene.meshes[1].id = doc.scene.meshes[0].id
    doc.scene.ego_vehicle = doc.scene.meshes[0].id
    _assert_error_at(validate(doc), "id")


def test_self_intersecting_footprint(doc):
    doc.scene.footprints[0].polygon = [(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]
    _assert_error_at(validate(doc), "polygon")


def test_clockwise_footprint(doc):
    doc.scene.footprints[0].polygon = list(reversed(doc.scene.footprints[0].polygon))
    _assert_error_at(validate(doc), "polygon")


def test_label_annotation_needs_time_and_position(doc):
    doc.annotations[0].kind = "label"
    doc.annotations[0].position = None
    _assert_error_at(validate(doc), "annotations")


def test_absolute_media_path(doc):
    from drivelab.model import MediaRef

    doc.sessions[0].media.append(MediaRef(path="/abs/clip.mp4", kind="video", t_offset=0))
    _assert_error_at(validate(doc), "media")


def test_speech_interval_reversed(doc):
    sp = doc.sessions[0].speech[0]
    sp.t_start, sp.t_end = 900, 0
    _assert_error_at(validate(doc), "speech")


def test_skeleton_joint_count_mismatch(doc):
    doc.sessions[0].skeleton[0].joints.pop()
    _assert_error_at(validate(doc), "skeleton")


def test_unknown_joint_name(doc):
    doc.sessions[0].skeleton_joints[0] = "tail"
    _assert_error_at(validate(doc), "skeleton_joints")


def test_min_joint_set_required(doc):
    s = doc.sessions[0]
    s.skeleton_joints = ["neck", "left_hand", "right_hand"]
    _assert_error_at(validate(doc), "skeleton_joints")


def test_confidence_out_of_range(doc):
    if not doc.sessions[0].events:
        pytest.skip("no events")
    doc.sessions[0].events[0].confidence = 1.5
    _assert_error_at(validate(doc), "confidence")


def test_duplicate_event_id(doc):
    evs = doc.sessions[0].events
    if len(evs) < 2:
        pytest.skip("need two events")
    evs[1].id = evs[0].id
    _assert_error_at(validate(doc), "id")


def test_unknown_event_source(doc):
    if not doc.sessions[0].events:
        pytest.skip("no events")
    doc.sessions[0].events[0].source = "rumor"
    _assert_error_at(validate(doc), "source")


def test_uv_count_mismatch(doc):
    doc.scene.meshes[0].uv = [(0.0, 0.0)]
    _assert_error_at(validate(doc), "uv")


def test_uv_out_of_unit_square(doc):
    doc.scene.meshes[0].uv = [(0.0, 0.0), (1.0, 0.0), (2.5, 1.0), (0.0, 1.0)]
    _assert_error_at(validate(doc), "uv")


def test_polygon_helpers():
    square = [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]  # (lat, lon) CCW in (lon, lat)
    assert polygon_signed_area(square) > 0
    assert polygon_is_simple(square)
    bowtie = [(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]
    assert not polygon_is_simple(bowtie)
