from dataclasses import dataclass

import numpy as np

from src.shadow_draw.app_logic.data_models.errors import InvalidRaster, SpecMismatch

MIN_RASTER_SIDE = 16


@dataclass(frozen=True)
class RasterSpec:
    """Pixel grid mapped onto an axis-aligned world window

    window = (x_min, y_min, x_max, y_max). Row 0 is the top of the window
    (largest y), column 0 its left edge, pixel centers at (i + 0.5) / size.
    """

    width: int = 256
    height: int = 256
    window: tuple[float, float, float, float] = (-1.0, -1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.width < MIN_RASTER_SIDE or self.height < MIN_RASTER_SIDE:
            raise InvalidRaster(
                f"Raster must be at least {MIN_RASTER_SIDE}px per side, "
                f"got {self.width}x{self.height}"
            )
        x_min, y_min, x_max, y_max = (float(v) for v in self.window)
        if not (x_max > x_min and y_max > y_min):
            raise InvalidRaster(f"Raster window has no area: {self.window}")
        object.__setattr__(self, "window", (x_min, y_min, x_max, y_max))

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    @property
    def pixel_size(self) -> tuple[float, float]:
        x_min, y_min, x_max, y_max = self.window
        return (x_max - x_min) / self.width, (y_max - y_min) / self.height

    def column_centers(self) -> np.ndarray:
        x_min, _, x_max, _ = self.window
        return x_min + (np.arange(self.width) + 0.5) / self.width * (x_max - x_min)

    def row_centers(self) -> np.ndarray:
        _, y_min, _, y_max = self.window
        return y_max - (np.arange(self.height) + 0.5) / self.height * (y_max - y_min)

    def world_to_pixel(self, xy: np.ndarray) -> np.ndarray:
        """Continuous (col, row) coordinates of world points, pixel centers at .5"""
        x_min, _, _, y_max = self.window
        size_x, size_y = self.pixel_size
        xy = np.asarray(xy, dtype=np.float64)
        cols = (xy[..., 0] - x_min) / size_x
        rows = (y_max - xy[..., 1]) / size_y
        return np.stack([cols, rows], axis=-1)

    def to_dict(self) -> dict:
        return {"width": self.width, "height": self.height, "window": list(self.window)}


@dataclass(frozen=True, eq=False)
class BinaryRaster:
    spec: RasterSpec
    bits: np.ndarray

    def __post_init__(self):
        bits = np.array(self.bits, dtype=bool, copy=True)
        if bits.shape != self.spec.shape:
            raise InvalidRaster(
                f"Grid shape {bits.shape} does not match spec {self.spec.shape}"
            )
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @classmethod
    def empty(cls, spec: RasterSpec) -> "BinaryRaster":
        return cls(spec, np.zeros(spec.shape, dtype=bool))

    @property
    def area(self) -> int:
        return int(self.bits.sum())

    def to_soft(self) -> "SoftRaster":
        return SoftRaster(self.spec, self.bits.astype(np.float64))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryRaster):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.bits, other.bits)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SoftRaster:
    spec: RasterSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.shape != self.spec.shape:
            raise InvalidRaster(
                f"Grid shape {values.shape} does not match spec {self.spec.shape}"
            )
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise InvalidRaster("Soft raster values must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def threshold(self, level: float = 0.5) -> BinaryRaster:
        return BinaryRaster(self.spec, self.values > level)


def ensure_same_spec(*rasters) -> RasterSpec:
    specs = {raster.spec for raster in rasters}
    if len(specs) != 1:
        raise SpecMismatch(f"Rasters use different specs: {sorted(map(str, specs))}")
    return rasters[0].spec
