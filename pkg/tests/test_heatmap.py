import math
import random
import struct

import numpy as np
import pytest

from drivelab.analytics import HeatmapLayer, accumulate_heatmap, layer_to_f32, layer_to_png, merge_layers
from drivelab.analytics.heatmap import HeatmapBuilder, TexelTable, truncated_kernel_mass
from drivelab.model import GeoSample, MeshAsset, RaySample, SceneDescription, SurfaceSample, TrackedObjectSample


def _quad(side=20.0, mesh_id="pad", role="interior", z=0.0):
    s = side
    return MeshAsset(
        id=mesh_id,
        role=role,
        vertices=[(0.0, 0.0, z), (s, 0.0, z), (s, s, z), (0.0, s, z)],
        triangles=[(0, 1, 2), (0, 2, 3)],
        uv=[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
    )


def _scene(*meshes):
    ms = list(meshes)
    if not any(m.role == "ego_exterior" for m in ms):
        ms.append(MeshAsset(id="ego", role="ego_exterior",
                            vertices=[(-100.0, -100.0, -50.0), (-99.0, -100.0, -50.0), (-100.0, -99.0, -50.0)],
                            triangles=[(0, 1, 2)]))
    return SceneDescription(
        origin=GeoSample(t=0, lat=0.0, lon=0.0, alt=0.0, heading=0.0, speed=0.0),
        meshes=ms,
        ego_vehicle="ego",
    )


def test_delta_deposit_single_texel():
    scene = _scene(_quad(side=1.0))
    layer = HeatmapLayer(id="t", kind="touch", target="pad")
    # texel centers are at ((i+0.5)/256, ...) of the 1 m quad
    p = ((128 + 0.5) / 256.0, (77 + 0.5) / 256.0, 0.0)
    accumulate_heatmap(layer, [SurfaceSample(t=0, mesh_id="pad", position=p)], scene, sigma=1e-6)
    nz = layer.accumulator
    assert len(nz) == 1
    ((idx, w),) = nz.items()
    assert w == pytest.approx(1.0, abs=1e-12)
    assert layer.total_weight == pytest.approx(1.0, abs=1e-12)
    assert idx == 77 * 256 + 128


def test_mass_conservation_on_flat_quad():
    rng = random.Random(11)
    scene = _scene(_quad(side=20.0))
    mass = truncated_kernel_mass()
    for sigma in (0.05, 1.0):
        layer = HeatmapLayer(id="t", kind="touch", target="pad")
        n = 50
        samples = [
            SurfaceSample(t=0, mesh_id="pad", position=(rng.uniform(4, 16), rng.uniform(4, 16), 0.0))
            for _ in range(n)
        ]
        accumulate_heatmap(layer, samples, scene, sigma=sigma)
        ratio = layer.total_weight / (n * mass)
        assert abs(ratio - 1.0) < 0.01, f"sigma={sigma}: ratio {ratio}"
        assert layer.summed() == pytest.approx(layer.total_weight, rel=1e-6)


def test_identical_rays_superpose():
    scene = _scene(_quad(side=2.0, z=1.0))
    layer = HeatmapLayer(id="g", kind="gaze", target="pad")
    rays = [
        RaySample(t=i, origin=(1.0, 1.0, 0.0), direction=(0.0, 0.0, 1.0), modality="gaze")
        for i in range(100)
    ]
    accumulate_heatmap(layer, rays, scene, sigma=0.05)
    per_sample = layer.total_weight / 100
    assert per_sample == pytest.approx(truncated_kernel_mass(), rel=0.01)
    grid = layer.grid.reshape(256, 256)
    j, i = np.unravel_index(np.argmax(grid), grid.shape)
    # hit at quad center -> texel (128, 128) neighborhood
    assert abs(i - 128) <= 1 and abs(j - 128) <= 1
    assert layer.miss_count == 0


def test_rays_missing_everything_are_tallied():
    scene = _scene(_quad(side=2.0, z=1.0))
    layer = HeatmapLayer(id="g", kind="gaze", target="pad")
    rays = [RaySample(t=0, origin=(1.0, 1.0, 0.0), direction=(0.0, 0.0, -1.0), modality="gaze")]
    accumulate_heatmap(layer, rays, scene)
    assert layer.miss_count == 1
    assert layer.total_weight == 0.0


def test_hits_on_other_meshes_not_deposited():
    near = _quad(side=2.0, mesh_id="near", z=1.0)
    far = _quad(side=2.0, mesh_id="far", z=5.0)
    scene = _scene(near, far)
    layer = HeatmapLayer(id="g", kind="gaze", target="far")
    rays = [RaySample(t=0, origin=(1.0, 1.0, 0.0), direction=(0.0, 0.0, 1.0), modality="gaze")]
    accumulate_heatmap(layer, rays, scene, sigma=0.05)
    # nearest hit lands on "near", so the "far" layer gets nothing, not a miss
    assert layer.total_weight == 0.0
    assert layer.miss_count == 0


def test_wrong_sample_type_rejected():
    scene = _scene(_quad())
    layer = HeatmapLayer(id="g", kind="gaze", target="pad")
    with pytest.raises(TypeError):
        accumulate_heatmap(layer, [SurfaceSample(t=0, mesh_id="pad", position=(0, 0, 0))], scene)


def test_traffic_ground_layer():
    scene = _scene()
    layer = HeatmapLayer(id="traffic", kind="traffic", target="ground")
    samples = [
        TrackedObjectSample(t=0, object_id="car1", object_class="car", position=(10.0, 5.0, 0.0)),
        TrackedObjectSample(t=1000, object_id="car1", object_class="car", position=(10.0, 5.0, 0.0)),
    ]
    accumulate_heatmap(layer, samples, scene, sigma=1.0)
    assert layer.total_weight == pytest.approx(2 * truncated_kernel_mass(), rel=0.01)
    peak = max(layer.cells, key=layer.cells.get)
    assert peak == (10, 5) or peak in [(9, 4), (9, 5), (10, 4)]


def test_merge_is_associative_partition():
    rng = random.Random(3)
    scene = _scene(_quad(side=20.0))
    samples = [
        SurfaceSample(t=0, mesh_id="pad", position=(rng.uniform(4, 16), rng.uniform(4, 16), 0.0))
        for _ in range(30)
    ]
    whole = accumulate_heatmap(HeatmapLayer(id="t", kind="touch", target="pad"), samples, scene, sigma=0.5)
    a = accumulate_heatmap(HeatmapLayer(id="t", kind="touch", target="pad"), samples[:13], scene, sigma=0.5)
    b = accumulate_heatmap(HeatmapLayer(id="t", kind="touch", target="pad"), samples[13:], scene, sigma=0.5)
    merged = merge_layers(a, b)
    assert merged.total_weight == pytest.approx(whole.total_weight, rel=1e-9)
    assert np.allclose(merged.grid, whole.grid, rtol=1e-9, atol=1e-15)


def test_f32_export_roundtrip():
    scene = _scene(_quad(side=1.0))
    layer = HeatmapLayer(id="t", kind="touch", target="pad", resolution=(64, 32))
    accumulate_heatmap(layer, [SurfaceSample(t=0, mesh_id="pad", position=(0.5, 0.5, 0.0))], scene, sigma=0.1)
    blob = layer_to_f32(layer)
    w, h = struct.unpack_from("<II", blob)
    assert (w, h) == (64, 32)
    arr = np.frombuffer(blob[8:], dtype="<f4").reshape(h, w)
    assert arr.sum() == pytest.approx(layer.total_weight, rel=1e-5)


def test_png_export_is_decodable():
    from PIL import Image
    import io

    scene = _scene(_quad(side=1.0))
    layer = HeatmapLayer(id="t", kind="touch", target="pad", resolution=(32, 32))
    accumulate_heatmap(layer, [SurfaceSample(t=0, mesh_id="pad", position=(0.5, 0.5, 0.0))], scene, sigma=0.1)
    img = Image.open(io.BytesIO(layer_to_png(layer)))
    assert img.size == (32, 32)
    assert img.mode == "RGBA"


def test_uvless_mesh_gets_deterministic_atlas():
    mesh = MeshAsset(
        id="bare",
        role="interior",
        vertices=[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (1.0, 1.0, 0.0), (0.0, 1.0, 0.0)],
        triangles=[(0, 1, 2), (0, 2, 3)],
    )
    t1 = TexelTable(mesh, (64, 64))
    t2 = TexelTable(mesh, (64, 64))
    assert np.array_equal(t1.owner, t2.owner)
    assert (t1.owner >= 0).sum() > 0
    # both triangles own texels
    assert set(np.unique(t1.owner[t1.owner >= 0])) == {0, 1}
