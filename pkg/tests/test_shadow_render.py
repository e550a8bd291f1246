import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from src.shadow_draw.app_logic.data_models.errors import InvalidSigma
from src.shadow_draw.app_logic.data_models.raster import BinaryRaster, RasterSpec, SoftRaster
from src.shadow_draw.app_logic.data_models.scene import Mesh, SceneParams
from src.shadow_draw.app_logic.engine.scene_geometry import (
    light_position,
    normalize_mesh,
    pose_mesh,
    project_mesh,
)
from src.shadow_draw.app_logic.engine import shadow_render
from src.shadow_draw.app_logic.engine.shadow_render import (
    footprint_raster,
    rasterize_hard,
    rasterize_soft,
    shadow_raster,
    shadow_triangles,
    signed_distance,
)
from tests.conftest import BOX_TRIANGLES, box_mesh, sphere_mesh


SPEC128 = RasterSpec(width=128, height=128)


def iou(a: np.ndarray, b: np.ndarray) -> float:
    return float((a & b).sum() / (a | b).sum())


def convex_polygon_oracle(polygon: np.ndarray, spec: RasterSpec) -> np.ndarray:
    """Brute-force inclusion of every pixel center in a CCW convex polygon"""
    px, py = np.meshgrid(spec.column_centers(), spec.row_centers())
    inside = np.ones(spec.shape, dtype=bool)
    for a, b in zip(polygon, np.roll(polygon, -1, axis=0)):
        cross = (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0])
        inside &= cross >= -1e-12
    return inside


def test_triangle_covering_one_pixel_center(spec16):
    # pixel (row 4, col 10) has its center at (0.3125, 0.4375)
    tri = np.array([[[0.25, 0.40], [0.375, 0.40], [0.3125, 0.48]]])
    raster = rasterize_hard(tri, spec16)
    assert raster.area == 1
    assert raster.bits[4, 10]


def test_no_triangles_gives_empty_raster(spec16):
    raster = rasterize_hard(np.zeros((0, 3, 2)), spec16)
    assert raster == BinaryRaster.empty(spec16)


def test_abutting_triangles_cover_exact_square(spec16):
    lo, hi = -0.4375, 0.4375  # both edges pass through pixel centers
    square = np.array(
        [
            [[lo, lo], [hi, lo], [hi, hi]],
            [[lo, lo], [hi, hi], [lo, hi]],
        ]
    )
    raster = rasterize_hard(square, spec16)
    assert raster.area == 8 * 8
    oracle = convex_polygon_oracle(np.array([[lo, lo], [hi, lo], [hi, hi], [lo, hi]]), spec16)
    np.testing.assert_array_equal(raster.bits, oracle)


def test_winding_does_not_matter(spec64):
    tri = np.array([[-0.6, -0.5], [0.7, -0.4], [0.0, 0.8]])
    forward = rasterize_hard(tri[None], spec64)
    backward = rasterize_hard(tri[::-1][None], spec64)
    assert forward == backward


def test_soft_pixel_on_edge_is_one_half(spec16):
    # vertical edge x = 0.0625 passes through the center of pixel (7, 8)
    tri = np.array([[[0.0625, -0.5], [0.0625, 0.5], [0.6, 0.0]]])
    soft = rasterize_soft(tri, spec16, sigma=0.01)
    assert soft.values[7, 8] == pytest.approx(0.5, abs=1e-12)


def test_signed_distance_at_centroid():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    distance = signed_distance(tri, np.array([1 / 3]), np.array([1 / 3]))
    assert distance[0] == pytest.approx(-(1 / 3) / math.sqrt(2), abs=1e-12)


def test_signed_distance_outside_is_positive():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert signed_distance(tri, np.array([2.0]), np.array([0.0]))[0] == pytest.approx(1.0)


def test_sharp_soft_silhouette_matches_hard(spec64):
    tri = np.array([[[-0.6, -0.5], [0.7, -0.4], [0.0, 0.8]]])
    soft = rasterize_soft(tri, spec64, sigma=0.005)
    hard = rasterize_hard(tri, spec64)
    assert iou(soft.threshold(0.5).bits, hard.bits) >= 0.99


def test_soft_values_stay_in_unit_interval(spec64):
    tris = np.array(
        [
            [[-0.6, -0.5], [0.7, -0.4], [0.0, 0.8]],
            [[-0.2, -0.2], [0.9, 0.1], [0.3, 0.9]],
        ]
    )
    soft = rasterize_soft(tris, spec64, sigma=0.05)
    assert soft.values.min() >= 0.0
    assert soft.values.max() <= 1.0


def test_non_positive_sigma(spec16):
    with pytest.raises(InvalidSigma):
        rasterize_soft(np.zeros((0, 3, 2)), spec16, sigma=0.0)


def test_box_shadow_matches_projected_hull(unit_box):
    spec = RasterSpec(width=128, height=128)
    mesh = normalize_mesh(unit_box)
    params = SceneParams(theta=0.0, phi=math.pi / 4, r=0.0, gamma=0.0, alpha=0.0)
    shadow = shadow_raster(mesh, params, spec)
    assert isinstance(shadow, BinaryRaster)

    light = 3.0 * np.array([math.cos(math.pi / 4), 0.0, math.sin(math.pi / 4)])
    corners = mesh.vertices
    t = light[2] / (light[2] - corners[:, 2])
    projected = light[:2] + t[:, None] * (corners[:, :2] - light[:2])
    hull = projected[ConvexHull(projected).vertices]
    assert iou(shadow.bits, convex_polygon_oracle(hull, spec)) >= 0.98

    # light at azimuth 0 throws the shadow towards -x, well past the footprint
    columns = np.flatnonzero(shadow.bits.any(axis=0))
    assert spec.column_centers()[columns.min()] < -0.25 - 0.5


def test_overhead_light_shadow_is_close_to_footprint():
    spec = RasterSpec(width=128, height=128)
    flat = normalize_mesh(box_mesh(size=(1.0, 1.0, 0.1)))
    params = SceneParams(theta=0.0, phi=math.radians(85.0), r=0.0, gamma=0.0, alpha=0.0)
    shadow = shadow_raster(flat, params, spec)
    footprint = footprint_raster(pose_mesh(flat, params), spec)
    assert iou(shadow.bits, footprint.bits) >= 0.9


def test_soft_shadow_when_sigma_is_given(unit_box, spec64):
    params = SceneParams(theta=1.0, phi=0.6, r=0.3, gamma=1.0, alpha=0.2)
    soft = shadow_raster(normalize_mesh(unit_box), params, spec64, sigma=0.01)
    assert isinstance(soft, SoftRaster)
    assert soft.values.max() > 0.99


def random_scene(rng: np.random.Generator) -> SceneParams:
    return SceneParams.tied(
        theta=float(rng.uniform(0, 2 * math.pi)),
        phi=float(rng.uniform(0.5, 1.3)),
        alpha=float(rng.uniform(0, 2 * math.pi)),
        placement_radius=0.8,
    )


@pytest.mark.parametrize("seed", range(20))
def test_sharp_soft_shadow_of_a_closed_mesh_matches_hard(seed):
    rng = np.random.default_rng(seed)
    size = (1.0, 1.0, 1.0) if seed % 2 else (1.0, 0.2, 0.4)
    mesh = normalize_mesh(box_mesh(size=size))
    spec = RasterSpec(width=256, height=256)
    params = random_scene(rng)
    soft = shadow_raster(mesh, params, spec, sigma=0.005)
    hard = shadow_raster(mesh, params, spec)
    assert iou(soft.threshold(0.5).bits, hard.bits) >= 0.99


@pytest.mark.parametrize("mesh", [box_mesh(size=(1.0, 0.2, 0.4)), sphere_mesh()])
def test_dropping_faces_turned_away_keeps_the_hard_shadow(mesh):
    rng = np.random.default_rng(4)
    mesh = normalize_mesh(mesh)
    for _ in range(5):
        params = random_scene(rng)
        every_face = project_mesh(pose_mesh(mesh, params), light_position(params))
        culled = shadow_triangles(mesh, params)
        assert len(culled) < len(every_face)
        assert rasterize_hard(culled, SPEC128) == rasterize_hard(every_face, SPEC128)


def test_orientation_of_closed_and_open_meshes():
    assert box_mesh().orientation == -1
    assert sphere_mesh().orientation == 1
    flipped = np.array(BOX_TRIANGLES)
    flipped[0] = flipped[0][::-1]
    assert Mesh(vertices=box_mesh().vertices, triangles=flipped).orientation == 0
    assert Mesh(vertices=box_mesh().vertices, triangles=flipped[1:]).orientation == 0
    assert normalize_mesh(sphere_mesh()).orientation == 1


def test_open_mesh_keeps_every_face():
    sheet = Mesh(
        vertices=np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.2]]),
        triangles=np.array([[0, 1, 2]]),
    )
    params = SceneParams(theta=0.3, phi=0.7, r=0.0, gamma=0.3, alpha=0.0)
    assert len(shadow_triangles(normalize_mesh(sheet), params)) == 1


def test_quarter_turn_rotates_the_hard_raster(spec64):
    rng = np.random.default_rng(17)
    triangles = rng.uniform(-0.9, 0.9, size=(10, 3, 2))
    turned = np.stack([-triangles[..., 1], triangles[..., 0]], axis=-1)
    np.testing.assert_array_equal(
        rasterize_hard(turned, spec64).bits, np.rot90(rasterize_hard(triangles, spec64).bits)
    )


def test_soft_raster_matches_per_triangle_product(spec64):
    rng = np.random.default_rng(8)
    triangles = rng.uniform(-0.8, 0.8, size=(6, 3, 2))
    sigma = 0.02
    px, py = np.meshgrid(spec64.column_centers(), spec64.row_centers())
    outside = np.ones(spec64.shape)
    for tri in triangles:
        outside *= 1.0 - 1.0 / (1.0 + np.exp(signed_distance(tri, px, py) / sigma))
    soft = rasterize_soft(triangles, spec64, sigma)
    # each culled triangle drops a factor of at most logistic(-6) < 0.0025
    np.testing.assert_allclose(soft.values, 1.0 - outside, atol=6 * 0.0025)


def test_soft_raster_does_not_depend_on_batching(spec64, monkeypatch):
    rng = np.random.default_rng(12)
    centers = rng.uniform(-0.8, 0.8, size=(40, 1, 2))
    triangles = centers + rng.uniform(-0.2, 0.2, size=(40, 3, 2))
    whole = rasterize_soft(triangles, spec64, sigma=0.01)
    monkeypatch.setattr(shadow_render, "SOFT_BATCH_PIXELS", 64)
    piecewise = rasterize_soft(triangles, spec64, sigma=0.01)
    np.testing.assert_allclose(piecewise.values, whole.values, rtol=0, atol=1e-12)
