from dataclasses import dataclass
from typing import Literal

import numpy as np

from src.shadow_draw.app_logic.data_models.errors import EmptyShadow, InvalidRaster
from src.shadow_draw.app_logic.data_models.raster import BinaryRaster, RasterSpec

ContourKind = Literal["outer", "hole"]
MIN_CONTOUR_POINTS = 4


@dataclass(frozen=True, eq=False)
class Contour:
    """Closed pixel polyline; points are (x, y) = (column, row), last adjacent to first"""

    points: np.ndarray
    kind: ContourKind = "outer"

    def __post_init__(self):
        points = np.array(self.points, dtype=np.int64, copy=True).reshape(-1, 2)
        if len(points) < MIN_CONTOUR_POINTS:
            raise ValueError(
                f"Contour needs at least {MIN_CONTOUR_POINTS} points, got {len(points)}"
            )
        if self.kind not in ("outer", "hole"):
            raise ValueError(f"Unknown contour kind {self.kind}")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    def to_dict(self) -> dict:
        closed = np.vstack([self.points, self.points[:1]])
        return {"kind": self.kind, "points": closed.tolist()}


@dataclass(frozen=True)
class ContourSet:
    contours: tuple[Contour, ...]
    source_spec: RasterSpec

    def __post_init__(self):
        contours = tuple(self.contours)
        if not contours:
            raise EmptyShadow("A contour set needs at least one contour")
        object.__setattr__(self, "contours", contours)

    @property
    def outer(self) -> list[Contour]:
        return [c for c in self.contours if c.kind == "outer"]

    @property
    def holes(self) -> list[Contour]:
        return [c for c in self.contours if c.kind == "hole"]

    def pixel_mask(self) -> np.ndarray:
        """Boolean grid with every traced pixel set"""
        mask = np.zeros(self.source_spec.shape, dtype=bool)
        for contour in self.contours:
            mask[contour.points[:, 1], contour.points[:, 0]] = True
        return mask

    def to_dict(self) -> dict:
        return {
            "spec": self.source_spec.to_dict(),
            "contours": [contour.to_dict() for contour in self.contours],
        }


@dataclass(frozen=True)
class KeepoutMask:
    """1 = stroke placement forbidden"""

    mask: BinaryRaster

    @property
    def spec(self) -> RasterSpec:
        return self.mask.spec

    def union(self, other: "KeepoutMask") -> "KeepoutMask":
        if other.spec != self.spec:
            raise InvalidRaster("Keep-out masks use different specs")
        return KeepoutMask(BinaryRaster(self.spec, self.mask.bits | other.mask.bits))


@dataclass(frozen=True, eq=False)
class Region:
    """Connected set of enclosed background pixels; pixels are (row, col) pairs"""

    pixels: np.ndarray
    order: int

    def __post_init__(self):
        pixels = np.array(self.pixels, dtype=np.int64, copy=True).reshape(-1, 2)
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def area(self) -> int:
        return len(self.pixels)


@dataclass(frozen=True)
class RegionSet:
    regions: tuple[Region, ...]
    spec: RasterSpec

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))

    def __len__(self) -> int:
        return len(self.regions)

    @property
    def areas(self) -> list[int]:
        return [region.area for region in self.regions]

    def region_mask(self, index: int) -> BinaryRaster:
        bits = np.zeros(self.spec.shape, dtype=bool)
        pixels = self.regions[index].pixels
        bits[pixels[:, 0], pixels[:, 1]] = True
        return BinaryRaster(self.spec, bits)

    def union_mask(self) -> BinaryRaster:
        bits = np.zeros(self.spec.shape, dtype=bool)
        for region in self.regions:
            bits[region.pixels[:, 0], region.pixels[:, 1]] = True
        return BinaryRaster(self.spec, bits)
