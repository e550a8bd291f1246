"""PNG encoding of rasters and drawings"""

import base64
import io
from pathlib import Path

import numpy as np
from PIL import Image

from src.shadow_draw.app_logic.data_models.raster import BinaryRaster, RasterSpec, SoftRaster

STROKE_THRESHOLD = 128


def _png_bytes(pixels: np.ndarray) -> bytes:
    # 2-D uint8 arrays become "L" images, (h, w, 3) arrays "RGB"
    buffer = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(pixels, dtype=np.uint8)).save(buffer, format="PNG")
    return buffer.getvalue()


def _gray_pixels(png: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(png)) as image:
        return np.array(image.convert("L"), dtype=np.uint8)


def raster_pixels(raster: BinaryRaster | SoftRaster) -> np.ndarray:
    """8-bit levels: binary as 0/255, soft as value*255 rounded half-up"""
    if isinstance(raster, BinaryRaster):
        return np.where(raster.bits, 255, 0).astype(np.uint8)
    return np.floor(raster.values * 255.0 + 0.5).astype(np.uint8)


def raster_to_png(raster: BinaryRaster | SoftRaster) -> bytes:
    return _png_bytes(raster_pixels(raster))


def png_to_binary(png: bytes, spec: RasterSpec) -> BinaryRaster:
    return BinaryRaster(spec, _gray_pixels(png) >= STROKE_THRESHOLD)


def drawing_to_png(drawing: BinaryRaster) -> bytes:
    """Line drawings are black strokes on white"""
    return _png_bytes(np.where(drawing.bits, 0, 255).astype(np.uint8))


def png_to_drawing(png: bytes, spec: RasterSpec) -> BinaryRaster:
    return BinaryRaster(spec, _gray_pixels(png) < STROKE_THRESHOLD)


def image_to_png(pixels: np.ndarray) -> bytes:
    return _png_bytes(pixels)


def to_b64(png: bytes) -> str:
    return base64.b64encode(png).decode("ascii")


def from_b64(payload: str) -> bytes:
    return base64.b64decode(payload.encode("ascii"))


def write_png(path: str | Path, png: bytes) -> None:
    with open(path, "wb") as f:
        f.write(png)


def read_png(path: str | Path) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def load_drawing(path: str | Path) -> BinaryRaster:
    """Read a line-drawing PNG of any size; its RasterSpec follows the image size"""
    png = read_png(path)
    pixels = _gray_pixels(png)
    spec = RasterSpec(width=pixels.shape[1], height=pixels.shape[0])
    return BinaryRaster(spec, pixels < STROKE_THRESHOLD)
