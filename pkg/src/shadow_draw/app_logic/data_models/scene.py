from dataclasses import dataclass, field, replace
from functools import cached_property
import math

import numpy as np

from src.shadow_draw.app_logic.data_models.errors import EmptyMesh, ParseError


def _frozen_array(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangle soup in canvas-centric world coordinates (z up, canvas at z=0)

    vertices: (N, 3) float array in canvas units
    triangles: (M, 3) int array of vertex indices
    """

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        vertices = _frozen_array(self.vertices, np.float64).reshape(-1, 3)
        triangles = _frozen_array(self.triangles, np.int64).reshape(-1, 3)
        if triangles.size and (triangles.min() < 0 or triangles.max() >= len(vertices)):
            raise ParseError(
                f"Triangle index out of range for {len(vertices)} vertices"
            )
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "triangles", triangles)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (min corner, max corner) of the axis-aligned bounding box"""
        if not self.n_vertices:
            raise EmptyMesh("Mesh has no vertices")
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def with_vertices(self, vertices: np.ndarray) -> "Mesh":
        """Same connectivity at new positions

        Only for rotations, translations and positive scalings: the winding
        orientation is carried over instead of being recomputed.
        """
        moved = Mesh(vertices=vertices, triangles=self.triangles)
        moved.__dict__["orientation"] = self.orientation
        return moved

    @cached_property
    def orientation(self) -> int:
        """+1 if the mesh is closed with outward winding, -1 if inward, 0 otherwise

        Closed and consistently wound means every directed edge appears once
        and its reverse appears once as well.
        """
        if not self.n_triangles:
            return 0
        edges = self.triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
        forward = edges[:, 0] * self.n_vertices + edges[:, 1]
        backward = edges[:, 1] * self.n_vertices + edges[:, 0]
        forward.sort()
        backward.sort()
        if np.any(forward[1:] == forward[:-1]) or not np.array_equal(forward, backward):
            return 0
        a, b, c = (self.vertices[self.triangles[:, k]] for k in range(3))
        volume = float(np.einsum("ij,ij->", a, np.cross(b, c))) / 6.0
        scale = float(np.ptp(self.vertices, axis=0).max()) ** 3
        if not abs(volume) > 1e-12 * scale:
            return 0
        return 1 if volume > 0 else -1

    def triangle_corners(self) -> np.ndarray:
        """(M, 3, 3) array of triangle corner positions"""
        return self.vertices[self.triangles]


@dataclass(frozen=True)
class SceneParams:
    """Light azimuth/elevation and object placement/rotation, radians and canvas units"""

    theta: float
    phi: float
    r: float
    gamma: float
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.phi < math.pi / 2:
            raise ValueError(f"Light elevation must lie in (0, pi/2), got {self.phi}")

    @classmethod
    def tied(
        cls, theta: float, phi: float, alpha: float, placement_radius: float
    ) -> "SceneParams":
        """Build params with the object placed along the light azimuth (gamma = theta)"""
        theta = wrap_angle(theta)
        return cls(
            theta=theta,
            phi=phi,
            r=placement_radius,
            gamma=theta,
            alpha=wrap_angle(alpha),
        )

    @property
    def free(self) -> np.ndarray:
        """The optimized degrees of freedom (theta, phi, alpha)"""
        return np.array([self.theta, self.phi, self.alpha])

    def with_free(self, free: np.ndarray) -> "SceneParams":
        theta, phi, alpha = (float(v) for v in free)
        return replace(
            self,
            theta=wrap_angle(theta),
            phi=phi,
            gamma=wrap_angle(theta),
            alpha=wrap_angle(alpha),
        )

    def to_dict(self) -> dict[str, float]:
        return {
            "theta": self.theta,
            "phi": self.phi,
            "r": self.r,
            "gamma": self.gamma,
            "alpha": self.alpha,
        }


@dataclass(frozen=True, eq=False)
class LightPose:
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "position", _frozen_array(self.position, np.float64))

    @property
    def height(self) -> float:
        return float(self.position[2])


def wrap_angle(angle: float) -> float:
    """Map an angle into [0, 2*pi)"""
    wrapped = math.fmod(angle, 2 * math.pi)
    if wrapped < 0:
        wrapped += 2 * math.pi
    # fmod of a tiny negative value can round back up to exactly 2*pi
    if wrapped >= 2 * math.pi:
        wrapped = 0.0
    return wrapped
