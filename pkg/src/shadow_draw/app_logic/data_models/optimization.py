from dataclasses import dataclass, field
import math

import numpy as np

from src.shadow_draw.app_logic.data_models.scene import SceneParams

# theta and alpha are angles on the circle, phi is a plain interval
ANGULAR_AXES = (True, False, True)


def _signed_offset(value: float, center: float, angular: bool) -> float:
    delta = value - center
    if angular:
        delta = math.remainder(delta, 2 * math.pi)
    return delta


@dataclass(frozen=True)
class ParamBounds:
    """Neighborhood box around a start on the free parameters (theta, phi, alpha)"""

    center: tuple[float, float, float]
    half_width: tuple[float, float, float]

    def offsets(self, free: np.ndarray) -> np.ndarray:
        return np.array(
            [
                _signed_offset(float(v), c, angular)
                for v, c, angular in zip(free, self.center, ANGULAR_AXES)
            ]
        )

    def clamp(self, free: np.ndarray) -> np.ndarray:
        """Project a free-parameter vector onto the box"""
        offsets = np.clip(self.offsets(free), -np.array(self.half_width), self.half_width)
        return np.array(self.center) + offsets

    def contains(self, free: np.ndarray, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.offsets(free)) <= np.array(self.half_width) + tol))

    def to_dict(self) -> dict:
        return {"center": list(self.center), "half_width": list(self.half_width)}


@dataclass(frozen=True)
class StartGrid:
    starts: tuple[SceneParams, ...]
    bounds: tuple[ParamBounds, ...]

    def __post_init__(self):
        if len(self.starts) != len(self.bounds):
            raise ValueError("Every start needs its own bounds")

    def __len__(self) -> int:
        return len(self.starts)


@dataclass(frozen=True)
class OptimizerSettings:
    step0: float = math.radians(5.0)
    shrink: float = 0.5
    max_iters: int = 30
    tol: float = math.radians(0.1)
    fd_step: float = math.radians(0.5)


@dataclass(frozen=True)
class TraceEntry:
    params: SceneParams
    fd: float

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(), "fd": self.fd}


@dataclass(frozen=True)
class OptimResult:
    index: int
    init: SceneParams
    final: SceneParams
    fd_init: float
    fd_final: float
    iterations: int
    trace: tuple[TraceEntry, ...] = field(default_factory=tuple)
    stop_reason: str = ""

    @property
    def improved(self) -> bool:
        return self.fd_final > self.fd_init

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "init": self.init.to_dict(),
            "final": self.final.to_dict(),
            "fd_init": self.fd_init,
            "fd_final": self.fd_final,
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
        }
