import json

import numpy as np
import pytest
from scipy import ndimage
from scipy.spatial.distance import cdist, directed_hausdorff

from src.shadow_draw.app_logic.data_models.contours import Region, RegionSet
from src.shadow_draw.app_logic.data_models.errors import (
    EmptyShadow,
    KeyframeCountError,
    NoClosedRegions,
    NoStaticRegion,
)
from src.shadow_draw.app_logic.data_models.raster import BinaryRaster, RasterSpec
from src.shadow_draw.app_logic.data_models.scene import SceneParams
from src.shadow_draw.app_logic.engine.contour_tools import (
    animated_keepout_mask,
    disc_dilate,
    extract_closed_regions,
    extract_contours,
    greedy_merge,
    object_keepout_mask,
    region_contours,
    render_contours,
    save_contours_json,
)
from src.shadow_draw.app_logic.engine.scene_geometry import normalize_mesh, pose_mesh
from src.shadow_draw.app_logic.engine.shadow_render import footprint_raster


def raster(bits: np.ndarray) -> BinaryRaster:
    return BinaryRaster(RasterSpec(width=bits.shape[1], height=bits.shape[0]), bits.astype(bool))


def brute_force_dilate(bits: np.ndarray, radius: float) -> np.ndarray:
    grid = np.argwhere(np.ones_like(bits))
    distances = cdist(grid, np.argwhere(bits)).min(axis=1)
    return (distances <= radius).reshape(bits.shape)


def brute_force_keepout(frames: list[np.ndarray]) -> np.ndarray:
    stack = np.stack(frames)
    static = stack.all(axis=0)
    dynamic = stack.any(axis=0) & ~static
    grid = np.argwhere(np.ones_like(static))
    to_static = cdist(grid, np.argwhere(static)).min(axis=1)
    if not dynamic.any():
        return np.zeros_like(static)
    to_dynamic = cdist(grid, np.argwhere(dynamic)).min(axis=1)
    return (to_dynamic < to_static).reshape(static.shape)


def outline(shape, top, left, bottom, right) -> np.ndarray:
    """Stroke-only rectangle, inclusive corners"""
    bits = np.zeros(shape, dtype=bool)
    bits[top, left : right + 1] = True
    bits[bottom, left : right + 1] = True
    bits[top : bottom + 1, left] = True
    bits[top : bottom + 1, right] = True
    return bits


def test_small_square_traces_its_border():
    bits = np.zeros((16, 16), dtype=bool)
    bits[6:9, 6:9] = True
    contours = extract_contours(raster(bits))
    assert len(contours.outer) == 1
    assert not contours.holes
    expected = bits & ~ndimage.binary_erosion(bits)
    np.testing.assert_array_equal(contours.pixel_mask(), expected)


def test_annulus_has_an_outer_and_a_hole():
    bits = np.zeros((32, 32), dtype=bool)
    bits[4:28, 4:28] = True
    bits[10:22, 10:22] = False
    contours = extract_contours(raster(bits))
    assert len(contours.outer) == 1
    assert len(contours.holes) == 1


def test_empty_shadow_has_no_contours():
    with pytest.raises(EmptyShadow):
        extract_contours(raster(np.zeros((16, 16), dtype=bool)))


def test_specks_below_the_area_filter_are_dropped():
    bits = np.zeros((64, 64), dtype=bool)
    bits[10:30, 10:30] = True
    bits[50, 50] = True
    contours = extract_contours(raster(bits), min_area_frac=0.001)
    assert len(contours.contours) == 1
    assert not contours.pixel_mask()[50, 50]


def test_one_pixel_stroke_is_the_traced_pixels():
    bits = np.zeros((32, 32), dtype=bool)
    bits[8:20, 5:25] = True
    contours = extract_contours(raster(bits))
    np.testing.assert_array_equal(render_contours(contours, stroke_px=1).bits, contours.pixel_mask())


def test_contour_stays_on_the_silhouette_boundary(unit_box):
    spec = RasterSpec(width=128, height=128)
    params = SceneParams(theta=0.7, phi=0.6, r=0.2, gamma=0.7, alpha=0.3)
    silhouette = footprint_raster(pose_mesh(normalize_mesh(unit_box), params), spec)
    traced = np.argwhere(extract_contours(silhouette).pixel_mask())
    boundary = np.argwhere(silhouette.bits & ~ndimage.binary_erosion(silhouette.bits))
    assert max(directed_hausdorff(traced, boundary)[0], directed_hausdorff(boundary, traced)[0]) <= 1.5


def test_stroke_width_thickens_the_drawing():
    bits = np.zeros((64, 64), dtype=bool)
    bits[16:48, 16:48] = True
    contours = extract_contours(raster(bits))
    thin = render_contours(contours, stroke_px=1)
    thick = render_contours(contours, stroke_px=4)
    assert thick.area > thin.area
    assert not (thin.bits & ~thick.bits).any()


def test_contours_json(tmp_path):
    bits = np.zeros((16, 16), dtype=bool)
    bits[4:12, 4:12] = True
    path = tmp_path / "contour.json"
    save_contours_json(extract_contours(raster(bits)), path)
    content = json.loads(path.read_text())
    assert content["spec"]["width"] == 16
    (contour,) = content["contours"]
    assert contour["kind"] == "outer"
    assert contour["points"][0] == contour["points"][-1]


def test_disc_dilation_matches_brute_force():
    rng = np.random.default_rng(11)
    bits = rng.random((24, 24)) < 0.02
    bits[3, 3] = True
    for radius in (1, 2.5, 4):
        np.testing.assert_array_equal(disc_dilate(bits, radius), brute_force_dilate(bits, radius))


def test_keepout_without_dilation_is_the_footprint(unit_box, spec64):
    posed = pose_mesh(normalize_mesh(unit_box), SceneParams(0.3, 0.5, 0.4, 0.3, 1.0))
    keepout = object_keepout_mask(posed, spec64, dilate_px=0)
    assert keepout.mask == footprint_raster(posed, spec64)


def test_keepout_grows_with_dilation(unit_box, spec64):
    posed = pose_mesh(normalize_mesh(unit_box), SceneParams(0.3, 0.5, 0.4, 0.3, 1.0))
    areas = [object_keepout_mask(posed, spec64, px).mask.area for px in (0, 2, 4, 8)]
    assert areas == sorted(areas)
    assert areas[0] < areas[-1]


def test_identical_keyframes_forbid_nothing():
    bits = np.zeros((64, 64), dtype=bool)
    bits[20:40, 10:30] = True
    keepout = animated_keepout_mask([raster(bits)] * 5)
    assert keepout.mask.area == 0


def test_moving_half_is_forbidden():
    static = np.zeros((64, 64), dtype=bool)
    static[24:40, 0:16] = True
    frames = []
    for k in range(5):
        frame = static.copy()
        frame[24:40, 40 + 2 * k : 44 + 2 * k] = True
        frames.append(frame)
    keepout = animated_keepout_mask([raster(f) for f in frames]).mask.bits
    # the two parts are split by the bisector at column 27.5
    assert keepout[32, 48]
    assert keepout[:, 33:].any(axis=0).all()
    assert not keepout[:, :28].any()


def test_keepout_matches_the_distance_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        base = np.zeros((64, 64), dtype=bool)
        r, c = rng.integers(10, 40, size=2)
        base[r : r + 12, c : c + 12] = True
        frames = [base | (rng.random((64, 64)) < 0.01) for _ in range(5)]
        keepout = animated_keepout_mask([raster(f) for f in frames]).mask.bits
        np.testing.assert_array_equal(keepout, brute_force_keepout(frames))


def test_animation_needs_five_keyframes():
    frame = raster(np.ones((16, 16), dtype=bool))
    with pytest.raises(KeyframeCountError):
        animated_keepout_mask([frame] * 4)


def test_animation_without_a_stable_pixel():
    frames = []
    for k in range(5):
        bits = np.zeros((16, 16), dtype=bool)
        bits[k, :] = True
        frames.append(raster(bits))
    with pytest.raises(NoStaticRegion):
        animated_keepout_mask(frames)


def test_rectangle_encloses_one_region():
    regions = extract_closed_regions(raster(outline((32, 32), 4, 6, 20, 25)))
    assert len(regions) == 1
    assert regions.areas == [15 * 18]


def test_open_shape_has_no_region():
    bits = outline((32, 32), 4, 6, 20, 25)
    bits[10:14, 25] = False
    with pytest.raises(NoClosedRegions):
        extract_closed_regions(raster(bits))


def test_nested_rectangles_give_two_regions():
    bits = outline((48, 48), 2, 2, 45, 45) | outline((48, 48), 15, 15, 30, 30)
    regions = extract_closed_regions(raster(bits))
    assert len(regions) == 2
    assert regions.areas[0] == 42 * 42 - 16 * 16
    assert regions.areas[1] == 14 * 14


def region_set(areas: list[int]) -> RegionSet:
    regions = []
    row = 0
    for order, area in enumerate(areas):
        regions.append(Region(pixels=[(row, col) for col in range(area)], order=order))
        row += 1
    return RegionSet(regions=tuple(regions), spec=RasterSpec(width=32, height=32))


def test_greedy_merge_of_one_to_six():
    merged = greedy_merge(region_set([1, 2, 3, 4, 5, 6]), target=4)
    assert sorted(merged.areas) == [4, 5, 6, 6]


def test_merge_is_a_no_op_at_the_target():
    regions = region_set([3, 1, 4, 1])
    assert greedy_merge(regions, target=4).areas == [3, 1, 4, 1]


def test_equal_areas_merge_in_discovery_order():
    merged = greedy_merge(region_set([2, 2, 2, 2, 2]), target=4)
    assert merged.areas == [4, 2, 2, 2]
    assert [r.order for r in merged.regions] == [0, 2, 3, 4]


def test_merging_conserves_pixels():
    rng = np.random.default_rng(5)
    for _ in range(20):
        regions = region_set(rng.integers(1, 30, size=int(rng.integers(5, 12))).tolist())
        merged = greedy_merge(regions, target=4)
        assert len(merged) == 4
        assert merged.union_mask() == regions.union_mask()


def test_region_condition_is_its_outline():
    bits = np.zeros((32, 32), dtype=bool)
    bits[8:24, 8:24] = True
    condition = region_contours(raster(bits), stroke_px=1)
    np.testing.assert_array_equal(condition.bits, bits & ~ndimage.binary_erosion(bits))


def test_left_half_against_full_frames_forbids_the_right_half():
    left_half = np.zeros((64, 64), dtype=bool)
    left_half[:, :32] = True
    frames = [left_half] + [np.ones((64, 64), dtype=bool)] * 4
    keepout = animated_keepout_mask([raster(f) for f in frames]).mask.bits
    expected = np.zeros((64, 64), dtype=bool)
    expected[:, 32:] = True
    np.testing.assert_array_equal(keepout, expected)
    assert not keepout[10, 30]
    assert keepout[10, 33]


def test_rendered_drawing_traces_back_to_the_contour():
    rows, cols = np.mgrid[:64, :64]
    disc = (rows - 31.5) ** 2 + (cols - 31.5) ** 2 <= 20**2
    contours = extract_contours(raster(disc))
    stroke_px = 2
    drawing = render_contours(contours, stroke_px=stroke_px)
    traced = np.argwhere(contours.pixel_mask())
    retraced = np.argwhere(extract_contours(drawing).pixel_mask())
    distance = max(directed_hausdorff(traced, retraced)[0], directed_hausdorff(retraced, traced)[0])
    assert distance <= stroke_px
