import math
import random

import pytest

from drivelab.geoscene import (
    EgoPath,
    LocalFrame,
    build_ego_path,
    extrude_footprints,
    geo_to_local,
    interpolate_pose,
    local_to_geo,
    place_road_users,
)
from drivelab.geoscene.extrude import extrude_footprint
from drivelab.model import BuildingFootprint, GeoSample, TrackedObjectSample
from drivelab.validation import ValidationReport, _validate_mesh

# Independent first-order WGS-84 oracle: meridional and normal curvature radii.
A = 6378137.0
F = 1.0 / 298.257223563
E2 = F * (2.0 - F)


def _radii(lat_deg):
    phi = math.radians(lat_deg)
    s2 = math.sin(phi) ** 2
    m = A * (1.0 - E2) / (1.0 - E2 * s2) ** 1.5
    n = A / math.sqrt(1.0 - E2 * s2)
    return m, n


def _oracle_offset_m(lat0, lon0, lat1, lon1):
    m, n = _radii((lat0 + lat1) / 2.0)
    dn = math.radians(lat1 - lat0) * m
    de = math.radians(lon1 - lon0) * n * math.cos(math.radians((lat0 + lat1) / 2.0))
    return de, dn


def _frame(lat=0.0, lon=0.0, alt=0.0):
    return LocalFrame(origin=GeoSample(t=0, lat=lat, lon=lon, alt=alt, heading=0.0, speed=0.0))


def test_origin_maps_to_zero():
    f = _frame(48.4, 9.98, 512.0)
    e, n, u = geo_to_local(f, f.origin)
    assert abs(e) < 1e-9 and abs(n) < 1e-9 and abs(u) < 1e-9


def test_east_offset_at_equator_matches_oracle():
    f = _frame(0.0, 0.0, 0.0)
    p = GeoSample(t=0, lat=0.0, lon=0.001, alt=0.0, heading=0.0, speed=0.0)
    e, n, u = geo_to_local(f, p)
    de, dn = _oracle_offset_m(0.0, 0.0, 0.0, 0.001)
    assert e == pytest.approx(de, abs=0.01)
    assert abs(e - 111.32) < 0.1
    assert abs(n) < 1e-6


def test_round_trip_geo_local_geo():
    rng = random.Random(99)
    f = _frame(37.7749, -122.4194, 16.0)
    worst = 0.0
    for _ in range(1000):
        lat = f.origin.lat + rng.uniform(-0.09, 0.09)
        lon = f.origin.lon + rng.uniform(-0.09, 0.09)
        alt = rng.uniform(-50, 300)
        p = GeoSample(t=0, lat=lat, lon=lon, alt=alt, heading=0.0, speed=0.0)
        lat2, lon2, alt2 = local_to_geo(f, geo_to_local(f, p))
        worst = max(worst, abs(lat2 - lat), abs(lon2 - lon))
        assert abs(alt2 - alt) < 1e-6
    assert worst < 1e-6


def test_local_distance_matches_geodesic_first_order():
    rng = random.Random(5)
    f = _frame(48.0, 9.0)
    for _ in range(200):
        lat1 = 48.0 + rng.uniform(-0.004, 0.004)
        lon1 = 9.0 + rng.uniform(-0.006, 0.006)
        lat2 = lat1 + rng.uniform(-0.004, 0.004)
        lon2 = lon1 + rng.uniform(-0.006, 0.006)
        p1 = geo_to_local(f, GeoSample(t=0, lat=lat1, lon=lon1, alt=0.0, heading=0.0, speed=0.0))
        p2 = geo_to_local(f, GeoSample(t=0, lat=lat2, lon=lon2, alt=0.0, heading=0.0, speed=0.0))
        local = math.dist(p1[:2], p2[:2])
        de, dn = _oracle_offset_m(lat1, lon1, lat2, lon2)
        geodesic = math.hypot(de, dn)
        if geodesic > 1.0:
            assert abs(local - geodesic) / geodesic < 0.001


def test_out_of_range_latlon_raises():
    f = _frame()
    with pytest.raises(ValueError):
        geo_to_local(f, GeoSample(t=0, lat=95.0, lon=0.0, alt=0.0, heading=0.0, speed=0.0))


# -- ego path ---------------------------------------------------------------


def _gps_line(frame, points_m, dt_ms=1000, speed=10.0):
    out = []
    for i, (x, y) in enumerate(points_m):
        lat, lon, alt = local_to_geo(frame, (x, y, 0.0))
        out.append(GeoSample(t=i * dt_ms, lat=lat, lon=lon, alt=alt, heading=float("nan"), speed=speed))
    return out


def test_straight_two_point_path():
    f = _frame()
    path = build_ego_path(_gps_line(f, [(0.0, 0.0), (100.0, 0.0)]), f)
    assert path.arc_length[0] == 0.0
    assert path.arc_length[1] == pytest.approx(100.0, abs=1e-6)
    assert path.points[0].heading == pytest.approx(90.0, abs=1e-6)  # due east


def test_constant_speed_segment_length():
    # 35 km/h for 60 s -> 583.33 m
    f = _frame(37.8, -122.4)
    v = 35.0 / 3.6
    pts = [(v * i, 0.0) for i in range(61)]
    path = build_ego_path(_gps_line(f, pts, dt_ms=1000, speed=v), f)
    assert path.total_length == pytest.approx(583.3333, abs=0.5)


def test_densification_does_not_change_length():
    f = _frame()
    base = [(0.0, 0.0), (40.0, 30.0), (80.0, 0.0)]
    dense = [(0.0, 0.0), (20.0, 15.0), (40.0, 30.0), (60.0, 15.0), (80.0, 0.0)]
    l1 = build_ego_path(_gps_line(f, base), f).total_length
    l2 = build_ego_path(_gps_line(f, dense), f).total_length
    assert abs(l1 - l2) / l1 < 1e-9


def test_duplicate_timestamp_dropped():
    f = _frame()
    samples = _gps_line(f, [(0.0, 0.0), (10.0, 0.0), (20.0, 0.0)])
    samples[1] = GeoSample(t=0, lat=samples[1].lat, lon=samples[1].lon, alt=0.0, heading=float("nan"), speed=0.0)
    path = build_ego_path(samples, f)
    assert len(path.points) == 2


def test_interpolate_pose_at_sample_and_midpoint():
    f = _frame()
    path = build_ego_path(_gps_line(f, [(0.0, 0.0), (10.0, 0.0)]), f)
    at0 = interpolate_pose(path, 0)
    assert at0.position == pytest.approx(path.points[0].position, abs=1e-12)
    mid = interpolate_pose(path, 500)
    assert mid.position[0] == pytest.approx(5.0, abs=1e-6)
    assert not mid.clamped


def test_interpolate_pose_heading_wraps_shortest_arc():
    p1 = GeoSample(t=0, lat=0.0, lon=0.0, alt=0.0, heading=350.0, speed=0.0)
    p2 = GeoSample(t=1000, lat=0.0001, lon=0.0, alt=0.0, heading=10.0, speed=0.0)
    f = _frame()
    path = build_ego_path([p1, p2], f)
    mid = interpolate_pose(path, 500)
    assert mid.heading == pytest.approx(0.0, abs=1e-9)


def test_interpolate_pose_clamps_out_of_range():
    f = _frame()
    path = build_ego_path(_gps_line(f, [(0.0, 0.0), (10.0, 0.0)]), f)
    early = interpolate_pose(path, -100)
    assert early.clamped and early.position == pytest.approx(path.points[0].position)


# -- footprint extrusion ----------------------------------------------------


def _footprint_from_local(frame, ring_m, height, fid="b"):
    poly = []
    for x, y in ring_m:
        lat, lon, _ = local_to_geo(frame, (x, y, 0.0))
        poly.append((lat, lon))
    return BuildingFootprint(id=fid, polygon=poly, height=height)


def _signed_volume(mesh):
    total = 0.0
    for a, b, c in mesh.triangles:
        v0, v1, v2 = mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]
        cx = v1[1] * v2[2] - v1[2] * v2[1]
        cy = v1[2] * v2[0] - v1[0] * v2[2]
        cz = v1[0] * v2[1] - v1[1] * v2[0]
        total += (v0[0] * cx + v0[1] * cy + v0[2] * cz) / 6.0
    return total


def _shoelace(ring):
    s = 0.0
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return 0.5 * s


def test_unit_square_extrusion_counts():
    f = _frame()
    fp = _footprint_from_local(f, [(0, 0), (1, 0), (1, 1), (0, 1)], height=10.0)
    mesh = extrude_footprint(fp, f)
    assert mesh is not None
    assert len(mesh.triangles) == 8 + 4  # 8 wall + 2 per cap
    assert _signed_volume(mesh) > 0  # outward-facing normals
    assert _signed_volume(mesh) == pytest.approx(10.0, rel=1e-6)


def test_triangle_extrusion_counts():
    f = _frame()
    fp = _footprint_from_local(f, [(0, 0), (4, 0), (0, 3)], height=5.0)
    mesh = extrude_footprint(fp, f)
    assert len(mesh.triangles) == 6 + 2


def test_random_polygons_volume_matches_shoelace_oracle():
    rng = random.Random(31)
    f = _frame(10.0, 20.0)
    for trial in range(30):
        n = rng.randint(3, 12)
        # bounded angular gaps keep every sector < pi -> star-shaped -> simple
        gaps = [rng.uniform(0.6, 1.0) for _ in range(n)]
        total = sum(gaps)
        acc = 0.0
        angles = []
        for g in gaps:
            angles.append(2 * math.pi * acc / total)
            acc += g
        radii = [25.0 * rng.uniform(0.4, 1.0) for _ in angles]
        ring = [(r * math.cos(a), r * math.sin(a)) for a, r in zip(angles, radii)]
        height = rng.uniform(3.0, 40.0)
        fp = _footprint_from_local(f, ring, height, fid=f"b{trial}")
        mesh = extrude_footprint(fp, f)
        assert mesh is not None
        expected = abs(_shoelace(ring)) * height
        assert _signed_volume(mesh) == pytest.approx(expected, rel=1e-6)

        report = ValidationReport()
        _validate_mesh(mesh, "mesh", report)
        assert report.ok, [x.to_json() for x in report.findings]


def test_clockwise_footprint_is_normalized():
    f = _frame()
    fp = _footprint_from_local(f, [(0, 0), (0, 1), (1, 1), (1, 0)], height=2.0)  # clockwise
    mesh = extrude_footprint(fp, f)
    assert _signed_volume(mesh) == pytest.approx(2.0, rel=1e-6)


def test_self_intersecting_footprint_skipped():
    f = _frame()
    fp = _footprint_from_local(f, [(0, 0), (1, 1), (1, 0), (0, 1)], height=2.0)
    assert extrude_footprints([fp], f) == []


# -- road users ---------------------------------------------------------------


def test_road_user_lerp():
    samples = [
        TrackedObjectSample(t=0, object_id="a", object_class="car", position=(0.0, 0.0, 0.0)),
        TrackedObjectSample(t=1000, object_id="a", object_class="car", position=(10.0, 0.0, 0.0)),
    ]
    placed = place_road_users(samples, 500)
    assert placed == [("a", "car", (5.0, 0.0, 0.0))]


def test_road_user_outside_coverage_omitted():
    samples = [TrackedObjectSample(t=0, object_id="a", object_class="car", position=(0.0, 0.0, 0.0))]
    assert place_road_users(samples, 5000) == []


def test_road_users_match_bruteforce_oracle():
    rng = random.Random(77)
    samples = []
    for oid in ("a", "b", "c"):
        t0 = rng.randint(0, 4000)
        for k in range(rng.randint(1, 8)):
            samples.append(
                TrackedObjectSample(
                    t=t0 + k * 700,
                    object_id=oid,
                    object_class="pedestrian",
                    position=(rng.uniform(-5, 5), rng.uniform(-5, 5), 0.0),
                )
            )
    samples.sort(key=lambda s: s.t)

    def oracle(t):
        out = []
        for oid in sorted({s.object_id for s in samples}):
            track = [s for s in samples if s.object_id == oid]
            if min(abs(s.t - t) for s in track) > 2000:
                continue
            if t <= track[0].t:
                pos = track[0].position
            elif t >= track[-1].t:
                pos = track[-1].position
            else:
                for s1, s2 in zip(track, track[1:]):
                    if s1.t <= t <= s2.t:
                        u = (t - s1.t) / (s2.t - s1.t)
                        pos = tuple(p + u * (q - p) for p, q in zip(s1.position, s2.position))
                        break
            out.append((oid, track[0].object_class, pos))
        return out

    for t in range(0, 12000, 137):
        got = place_road_users(samples, t)
        want = oracle(t)
        assert len(got) == len(want)
        for (gi, gc, gp), (wi, wc, wp) in zip(got, want):
            assert gi == wi and gc == wc
            assert gp == pytest.approx(wp, abs=1e-12)
