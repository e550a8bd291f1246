"""Shadow contours, stroke keep-out masks and closed-region extraction"""

import json
import logging
from pathlib import Path
from typing import Sequence

import cv2
import numpy as np
from scipy import ndimage

from src.shadow_draw.app_logic.data_models.contours import (
    MIN_CONTOUR_POINTS,
    Contour,
    ContourSet,
    KeepoutMask,
    Region,
    RegionSet,
)
from src.shadow_draw.app_logic.data_models.errors import (
    EmptyShadow,
    KeyframeCountError,
    NoClosedRegions,
    NoStaticRegion,
)
from src.shadow_draw.app_logic.data_models.raster import (
    BinaryRaster,
    RasterSpec,
    ensure_same_spec,
)
from src.shadow_draw.app_logic.data_models.scene import Mesh
from src.shadow_draw.app_logic.engine.shadow_render import footprint_raster

logger = logging.getLogger(__name__)

ANIMATION_KEYFRAMES = 5
EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)
FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


def extract_contours(shadow: BinaryRaster, min_area_frac: float = 0.001) -> ContourSet:
    """Trace outer and hole borders of every large enough 8-connected component"""
    labels, n_components = ndimage.label(shadow.bits, structure=EIGHT_CONNECTED)
    areas = np.bincount(labels.ravel(), minlength=n_components + 1)[1:]
    min_area = min_area_frac * shadow.bits.size
    kept_labels = np.flatnonzero(areas >= min_area) + 1
    if not len(kept_labels):
        raise EmptyShadow("No shadow component passes the area filter")

    image = np.isin(labels, kept_labels).astype(np.uint8)
    # RETR_CCOMP: two-level hierarchy, parent == -1 marks outer borders
    traced, hierarchy = cv2.findContours(image, cv2.RETR_CCOMP, cv2.CHAIN_APPROX_NONE)
    contours = []
    for points, links in zip(traced, hierarchy[0]):
        points = points.reshape(-1, 2)
        if len(points) < MIN_CONTOUR_POINTS:
            logger.debug("Dropped a %d-point contour", len(points))
            continue
        contours.append(Contour(points=points, kind="outer" if links[3] == -1 else "hole"))
    if not contours:
        raise EmptyShadow("Shadow components are too thin to trace")
    return ContourSet(contours=tuple(contours), source_spec=shadow.spec)


def disc_dilate(bits: np.ndarray, radius: float) -> np.ndarray:
    """Pixels within Euclidean distance radius of a set pixel"""
    if not bits.any():
        return np.zeros_like(bits, dtype=bool)
    if radius <= 0:
        return bits.astype(bool)
    return ndimage.distance_transform_edt(~bits) <= radius


def render_contours(contours: ContourSet, stroke_px: int = 2) -> BinaryRaster:
    """Draw every traced polyline with a disc brush of diameter stroke_px"""
    if stroke_px < 1:
        raise ValueError(f"Stroke width must be at least 1px, got {stroke_px}")
    bits = disc_dilate(contours.pixel_mask(), stroke_px / 2.0)
    return BinaryRaster(contours.source_spec, bits)


def object_keepout_mask(posed_mesh: Mesh, spec: RasterSpec, dilate_px: int = 4) -> KeepoutMask:
    footprint = footprint_raster(posed_mesh, spec)
    return KeepoutMask(BinaryRaster(spec, disc_dilate(footprint.bits, dilate_px)))


def _distance_to(region: np.ndarray) -> np.ndarray:
    if not region.any():
        return np.full(region.shape, np.inf)
    return ndimage.distance_transform_edt(~region)


def animated_keepout_mask(frames: Sequence[BinaryRaster]) -> KeepoutMask:
    """Forbid pixels closer to the changing shadow than to the stable one"""
    if len(frames) != ANIMATION_KEYFRAMES:
        raise KeyframeCountError(
            f"Expected {ANIMATION_KEYFRAMES} keyframes, got {len(frames)}"
        )
    spec = ensure_same_spec(*frames)
    stack = np.stack([frame.bits for frame in frames])
    static = stack.all(axis=0)
    dynamic = stack.any(axis=0) & ~static
    if not static.any():
        raise NoStaticRegion("No pixel is shadowed in every keyframe")
    # ties are allowed
    forbidden = _distance_to(dynamic) < _distance_to(static)
    return KeepoutMask(BinaryRaster(spec, forbidden))


def extract_closed_regions(drawing: BinaryRaster) -> RegionSet:
    """Background components that cannot be reached from the raster border"""
    labels, n_components = ndimage.label(~drawing.bits, structure=FOUR_CONNECTED)
    border_labels = np.unique(
        np.concatenate([labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]])
    )
    regions = []
    # label order follows the raster scan, which is the discovery order
    for label in range(1, n_components + 1):
        if label in border_labels:
            continue
        pixels = np.argwhere(labels == label)
        regions.append(Region(pixels=pixels, order=len(regions)))
    if not regions:
        raise NoClosedRegions("Drawing has no stroke-enclosed region")
    return RegionSet(regions=tuple(regions), spec=drawing.spec)


def greedy_merge(regions: RegionSet, target: int = 4) -> RegionSet:
    """Repeatedly union the two smallest regions until `target` remain"""
    current = list(regions.regions)
    while len(current) > target:
        ranked = sorted(range(len(current)), key=lambda i: (current[i].area, current[i].order))
        first, second = sorted(ranked[:2])
        merged = Region(
            pixels=np.vstack([current[first].pixels, current[second].pixels]),
            order=min(current[first].order, current[second].order),
        )
        current[first] = merged
        del current[second]
    return RegionSet(regions=tuple(current), spec=regions.spec)


def region_contours(mask: BinaryRaster, stroke_px: int = 2) -> BinaryRaster:
    """Condition image for a region mask: its traced borders"""
    return render_contours(extract_contours(mask, min_area_frac=0.0), stroke_px)


def save_contours_json(contours: ContourSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(contours.to_dict(), f, indent=2)
