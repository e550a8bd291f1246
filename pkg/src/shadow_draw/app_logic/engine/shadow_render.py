"""Hard and soft rasterization of projected shadow triangles"""

from typing import Optional

import numpy as np
from scipy.special import log_expit

from src.shadow_draw.app_logic.data_models.errors import InvalidSigma
from src.shadow_draw.app_logic.data_models.raster import BinaryRaster, RasterSpec, SoftRaster
from src.shadow_draw.app_logic.data_models.scene import Mesh, SceneParams
from src.shadow_draw.app_logic.engine.scene_geometry import (
    LIGHT_DISTANCE,
    light_facing,
    light_position,
    pose_mesh,
    project_mesh,
)

SOFT_CULL_RADIUS = 6.0
# upper bound on padded window pixels evaluated in one soft batch
SOFT_BATCH_PIXELS = 1 << 20


def _pixel_windows(
    spec: RasterSpec, lo: np.ndarray, hi: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per box [lo, hi] the row/col ranges whose pixel centers may fall inside it

    Returns (row_start, row_stop, col_start, col_stop); empty ranges have stop <= start.
    """
    x_min, y_min, x_max, y_max = spec.window
    size_x, size_y = spec.pixel_size
    col_start = np.maximum(np.floor((lo[:, 0] - x_min) / size_x - 0.5), 0)
    col_stop = np.minimum(np.ceil((hi[:, 0] - x_min) / size_x - 0.5) + 1, spec.width)
    row_start = np.maximum(np.floor((y_max - hi[:, 1]) / size_y - 0.5), 0)
    row_stop = np.minimum(np.ceil((y_max - lo[:, 1]) / size_y - 0.5) + 1, spec.height)
    return tuple(v.astype(np.int64) for v in (row_start, row_stop, col_start, col_stop))


def _corner(tris: np.ndarray, k: int, ndim: int) -> tuple[np.ndarray, np.ndarray]:
    """x and y of corner k of every triangle, shaped to broadcast over ndim pixel axes"""
    shape = (-1,) + (1,) * (ndim - 1)
    return tris[:, k % 3, 0].reshape(shape), tris[:, k % 3, 1].reshape(shape)


def _inside(tris: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Batched inclusive point-in-triangle test; tris (B, 3, 2), px/py (B, ...)"""
    edges = []
    for k in range(3):
        ax, ay = _corner(tris, k, px.ndim)
        bx, by = _corner(tris, k + 1, px.ndim)
        edges.append((bx - ax) * (py - ay) - (by - ay) * (px - ax))
    e0, e1, e2 = edges
    # inclusive on every edge, for both windings
    positive = (e0 >= 0) & (e1 >= 0) & (e2 >= 0)
    negative = (e0 <= 0) & (e1 <= 0) & (e2 <= 0)
    return positive | negative


def _boundary_distance(tris: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    nearest = None
    for k in range(3):
        ax, ay = _corner(tris, k, px.ndim)
        bx, by = _corner(tris, k + 1, px.ndim)
        dx, dy = bx - ax, by - ay
        length_sq = dx * dx + dy * dy
        # a zero-length edge has zero numerator, so t stays 0
        t = np.clip(
            ((px - ax) * dx + (py - ay) * dy) / np.where(length_sq > 0, length_sq, 1.0), 0.0, 1.0
        )
        distance = np.hypot(px - (ax + t * dx), py - (ay + t * dy))
        nearest = distance if nearest is None else np.minimum(nearest, distance)
    return nearest


def _signed_distances(tris: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    boundary = _boundary_distance(tris, px, py)
    return np.where(_inside(tris, px, py), -boundary, boundary)


def signed_distance(tri: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Euclidean distance to the triangle boundary, negative inside"""
    tris = np.asarray(tri, dtype=np.float64).reshape(1, 3, 2)
    px = np.asarray(px, dtype=np.float64)[None]
    py = np.asarray(py, dtype=np.float64)[None]
    return _signed_distances(tris, px, py)[0]


def rasterize_hard(triangles: np.ndarray, spec: RasterSpec) -> BinaryRaster:
    """Set every pixel whose center lies inside or on the border of a triangle"""
    triangles = np.asarray(triangles, dtype=np.float64).reshape(-1, 3, 2)
    bits = np.zeros(spec.shape, dtype=bool)
    cols, rows = spec.column_centers(), spec.row_centers()
    windows = _pixel_windows(spec, triangles.min(axis=1), triangles.max(axis=1))
    for tri, row_start, row_stop, col_start, col_stop in zip(triangles, *windows):
        if row_start >= row_stop or col_start >= col_stop:
            continue
        px, py = np.meshgrid(cols[col_start:col_stop], rows[row_start:row_stop])
        bits[row_start:row_stop, col_start:col_stop] |= _inside(tri[None], px[None], py[None])[0]
    return BinaryRaster(spec, bits)


def _soft_batches(sides: np.ndarray, budget: int) -> list[np.ndarray]:
    """Group triangle indices by window size so each padded batch fits the budget"""
    order = np.argsort(sides, kind="stable")
    batches = []
    start = 0
    while start < len(order):
        count = max(1, budget // int(sides[order[start]]) ** 2)
        # sides ascend, so the last member sets the padded size
        largest = int(sides[order[min(start + count, len(order)) - 1]])
        count = max(1, budget // largest**2)
        batches.append(order[start : start + count])
        start += count
    return batches


def rasterize_soft(triangles: np.ndarray, spec: RasterSpec, sigma: float) -> SoftRaster:
    """Soft silhouette: p = 1 - prod_j (1 - logistic(-s_ij / sigma))

    The product is accumulated in log space. Triangles only touch pixels
    inside their bounding box grown by SOFT_CULL_RADIUS * sigma, and are
    evaluated in batches padded to a common window size.
    """
    if not sigma > 0:
        raise InvalidSigma(f"Softness must be positive, got {sigma}")
    triangles = np.asarray(triangles, dtype=np.float64).reshape(-1, 3, 2)
    cols, rows = spec.column_centers(), spec.row_centers()
    margin = SOFT_CULL_RADIUS * sigma
    row_start, row_stop, col_start, col_stop = _pixel_windows(
        spec, triangles.min(axis=1) - margin, triangles.max(axis=1) + margin
    )
    heights, widths = row_stop - row_start, col_stop - col_start
    visible = np.flatnonzero((heights > 0) & (widths > 0))

    # log of prod_j (1 - logistic(-s/sigma)) = sum_j log logistic(s/sigma)
    log_outside = np.zeros(spec.height * spec.width, dtype=np.float64)
    sides = np.maximum(heights[visible], widths[visible])
    for members in _soft_batches(sides, SOFT_BATCH_PIXELS):
        batch = visible[members]
        row_index = row_start[batch, None] + np.arange(heights[batch].max())
        col_index = col_start[batch, None] + np.arange(widths[batch].max())
        valid = (row_index < row_stop[batch, None])[:, :, None] & (
            col_index < col_stop[batch, None]
        )[:, None, :]
        row_index = np.minimum(row_index, spec.height - 1)
        col_index = np.minimum(col_index, spec.width - 1)
        py = rows[row_index][:, :, None]
        px = cols[col_index][:, None, :]
        px, py = np.broadcast_arrays(px, py)
        contribution = log_expit(_signed_distances(triangles[batch], px, py) / sigma)
        flat = row_index[:, :, None] * spec.width + col_index[:, None, :]
        log_outside += np.bincount(
            flat[valid], weights=contribution[valid], minlength=log_outside.size
        )
    values = -np.expm1(log_outside.reshape(spec.shape))
    return SoftRaster(spec, np.clip(values, 0.0, 1.0))


def shadow_triangles(
    mesh: Mesh, params: SceneParams, light_distance: float = LIGHT_DISTANCE
) -> np.ndarray:
    """(M, 3, 2) projected triangles of the posed mesh that face the light"""
    posed = pose_mesh(mesh, params)
    light = light_position(params, light_distance)
    return project_mesh(posed, light)[light_facing(posed, light)]


def shadow_raster(
    mesh: Mesh,
    params: SceneParams,
    spec: RasterSpec,
    sigma: Optional[float] = None,
    light_distance: float = LIGHT_DISTANCE,
) -> SoftRaster | BinaryRaster:
    """Render the cast shadow of a normalized mesh; hard when sigma is None"""
    triangles = shadow_triangles(mesh, params, light_distance)
    if sigma is None:
        return rasterize_hard(triangles, spec)
    return rasterize_soft(triangles, spec, sigma)


def footprint_raster(posed_mesh: Mesh, spec: RasterSpec) -> BinaryRaster:
    """Orthographic top-down silhouette of a posed mesh"""
    return rasterize_hard(posed_mesh.triangle_corners()[:, :, :2], spec)
