"""Differentiable box-counting fractal dimension of the shadow boundary

Chain: soft silhouette -> 3x3 morphological gradient -> soft box occupancy
-> least-squares slope of ln N(eps) against ln(1/eps). Every stage is smooth
in the raster values and exact on binary inputs.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from src.shadow_draw.app_logic.data_models.errors import EmptyShadow
from src.shadow_draw.app_logic.data_models.raster import RasterSpec, SoftRaster
from src.shadow_draw.app_logic.data_models.scene import Mesh, SceneParams
from src.shadow_draw.app_logic.engine.scene_geometry import LIGHT_DISTANCE
from src.shadow_draw.app_logic.engine.shadow_render import (
    rasterize_hard,
    rasterize_soft,
    shadow_triangles,
)

DEFAULT_SCALES = (2, 4, 8, 16, 32)
MIN_BOX_COUNT = 3.0
SATURATION_CLAMP = 1.0 - 1e-6


@dataclass(frozen=True)
class BoxCountCurve:
    scales: tuple[int, ...]
    counts: tuple[float, ...]

    def __post_init__(self):
        scales = tuple(int(s) for s in self.scales)
        counts = tuple(float(c) for c in self.counts)
        if len(scales) != len(counts):
            raise ValueError("Box-count curve needs one count per scale")
        if any(b <= a for a, b in zip(scales, scales[1:])):
            raise ValueError(f"Scales must be strictly increasing: {scales}")
        if any(c < 0 for c in counts):
            raise ValueError("Box counts must be non-negative")
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "counts", counts)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["epsilon", "count"])
            for scale, count in zip(self.scales, self.counts):
                writer.writerow([scale, repr(count)])


@dataclass(frozen=True)
class FdValue:
    fd: float
    curve: BoxCountCurve


def boundary_map(raster: SoftRaster) -> SoftRaster:
    """Per-pixel 3x3 max minus 3x3 min, borders replicated"""
    values = raster.values
    gradient = ndimage.maximum_filter(values, size=3, mode="nearest") - ndimage.minimum_filter(
        values, size=3, mode="nearest"
    )
    return SoftRaster(raster.spec, gradient)


def _box_occupancy(values: np.ndarray, scale: int) -> np.ndarray:
    height, width = values.shape
    padded_h = -(-height // scale) * scale
    padded_w = -(-width // scale) * scale
    padded = np.zeros((padded_h, padded_w), dtype=np.float64)
    padded[:height, :width] = values

    blocks = padded.reshape(padded_h // scale, scale, padded_w // scale, scale)
    saturated = (blocks >= 1.0).any(axis=(1, 3))
    log_empty = np.log1p(-np.minimum(blocks, SATURATION_CLAMP)).sum(axis=(1, 3))
    # a box holding a fully set pixel is occupied exactly; the clamp only
    # keeps the logarithm finite for values approaching 1
    return np.where(saturated, 1.0, -np.expm1(log_empty))


def box_count_curve(
    boundary: SoftRaster, scales: Sequence[int] = DEFAULT_SCALES
) -> BoxCountCurve:
    counts = [float(_box_occupancy(boundary.values, int(s)).sum()) for s in scales]
    return BoxCountCurve(scales=tuple(scales), counts=tuple(counts))


def fractal_dimension(curve: BoxCountCurve, min_count: float = MIN_BOX_COUNT) -> FdValue:
    """Least-squares slope of ln N(eps) against ln(1/eps)"""
    counts = np.array(curve.counts)
    if len(counts) < 2:
        raise ValueError("At least two scales are needed to fit a slope")
    if np.any(counts < min_count):
        raise EmptyShadow(
            f"Box counts {np.round(counts, 3).tolist()} fall below {min_count}"
        )
    x = np.log(1.0 / np.array(curve.scales, dtype=np.float64))
    y = np.log(counts)
    x_centered = x - x.mean()
    slope = float(np.sum(x_centered * (y - y.mean())) / np.sum(x_centered**2))
    return FdValue(fd=slope, curve=curve)


def fd_of_raster(
    raster: SoftRaster,
    scales: Sequence[int] = DEFAULT_SCALES,
    min_count: float = MIN_BOX_COUNT,
) -> FdValue:
    return fractal_dimension(box_count_curve(boundary_map(raster), scales), min_count)


def objective(
    mesh: Mesh,
    params: SceneParams,
    spec: RasterSpec,
    sigma: float = 0.01,
    scales: Sequence[int] = DEFAULT_SCALES,
    light_distance: float = LIGHT_DISTANCE,
    min_count: float = MIN_BOX_COUNT,
) -> float:
    """Loss to minimize: the negated fractal dimension of the soft shadow"""
    soft = rasterize_soft(shadow_triangles(mesh, params, light_distance), spec, sigma)
    return -fd_of_raster(soft, scales, min_count).fd


@dataclass(frozen=True)
class SceneObjective:
    """FD of a mesh's shadow as a function of the free parameters (theta, phi, alpha)

    Placement stays tied to the light azimuth (gamma = theta, fixed r).
    """

    mesh: Mesh
    template: SceneParams
    spec: RasterSpec
    sigma: float = 0.01
    scales: tuple[int, ...] = DEFAULT_SCALES
    light_distance: float = LIGHT_DISTANCE
    min_count: float = MIN_BOX_COUNT

    def params_at(self, free: np.ndarray) -> SceneParams:
        return self.template.with_free(free)

    def __call__(self, free: np.ndarray) -> float:
        return -objective(
            self.mesh,
            self.params_at(free),
            self.spec,
            self.sigma,
            self.scales,
            self.light_distance,
            self.min_count,
        )

    def for_start(self, start: SceneParams) -> "SceneObjective":
        return SceneObjective(
            mesh=self.mesh,
            template=start,
            spec=self.spec,
            sigma=self.sigma,
            scales=self.scales,
            light_distance=self.light_distance,
            min_count=self.min_count,
        )


def hard_fd(
    mesh: Mesh,
    params: SceneParams,
    spec: RasterSpec,
    scales: Sequence[int] = DEFAULT_SCALES,
    light_distance: float = LIGHT_DISTANCE,
) -> Optional[float]:
    """FD of the binary shadow, None when the shadow is degenerate"""
    hard = rasterize_hard(shadow_triangles(mesh, params, light_distance), spec)
    try:
        return fd_of_raster(hard.to_soft(), scales).fd
    except EmptyShadow:
        return None
