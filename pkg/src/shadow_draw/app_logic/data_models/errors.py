"""Exception hierarchy shared by the engine, the services and the CLI."""


class ShadowDrawError(Exception):
    """Base class for every error raised by the package"""

    exit_code: int = 1


class ParseError(ShadowDrawError):
    """Malformed OBJ line or out-of-range face index"""


class EmptyMesh(ShadowDrawError):
    """Mesh without faces"""


class DegenerateMesh(ShadowDrawError):
    """Bounding box with zero longest dimension"""


class AbovePlaneLight(ShadowDrawError):
    """Point at or above the light height: the light ray never reaches the canvas"""


class InvalidRaster(ShadowDrawError):
    """Raster spec or grid that violates its invariants"""


class InvalidSigma(ShadowDrawError):
    """Non-positive softness for the soft rasterizer"""


class EmptyShadow(ShadowDrawError):
    """Shadow is absent or too small to be measured"""


class NoStaticRegion(ShadowDrawError):
    """No pixel is shadowed in every keyframe"""


class NoClosedRegions(ShadowDrawError):
    """Drawing has no stroke-enclosed background region"""


class KeyframeCountError(ShadowDrawError):
    """Animated inputs must carry exactly five keyframes"""


class SpecMismatch(ShadowDrawError):
    """Rasters combined together do not share the same spec"""


class DivisionDomain(ShadowDrawError):
    """Non-positive CLIP denominator in the ratio delta"""


class DeltaOutOfRange(ShadowDrawError):
    """Saturated scores push a reward delta onto the edge of (-1, 1)"""


class MaskViolation(ShadowDrawError):
    """Generated strokes entered the keep-out mask"""


class ServiceError(ShadowDrawError):
    """Transport failure, timeout or non-200 answer from an external service"""

    exit_code = 3


class FormatError(ShadowDrawError):
    """Service reply does not follow the expected format"""

    exit_code = 3


class ConfigError(ShadowDrawError):
    """Invalid pipeline configuration"""

    exit_code = 2


class PortInUse(ShadowDrawError):
    """Local port for the mock services is already taken"""
