"""Mesh ingestion, normalization, posing, light placement and canvas projection

World frame: the canvas is the plane z=0, centered at the origin, z points up.
"""

import logging
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from src.shadow_draw.app_logic.data_models.errors import (
    AbovePlaneLight,
    DegenerateMesh,
    EmptyMesh,
    ParseError,
)
from src.shadow_draw.app_logic.data_models.scene import LightPose, Mesh, SceneParams

logger = logging.getLogger(__name__)

CANVAS_RADIUS = 1.0
OBJECT_SIZE = 0.5
LIGHT_DISTANCE = 3.0
PLACEMENT_RATIO = 0.8


def _parse_face_index(token: str, n_vertices: int, line_no: int) -> int:
    # v, v/vt, v//vn, v/vt/vn: only the position index matters
    head = token.split("/")[0]
    try:
        index = int(head)
    except ValueError as exc:
        raise ParseError(f"line {line_no}: bad face index {token!r}") from exc
    if index == 0:
        raise ParseError(f"line {line_no}: OBJ indices are 1-based, got 0")
    # negative indices are relative to the vertices read so far
    return index - 1 if index > 0 else n_vertices + index


def parse_obj(lines: Iterable[str]) -> Mesh:
    vertices: list[list[float]] = []
    triangles: list[tuple[int, int, int]] = []

    for line_no, raw in enumerate(lines, start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        record = tokens[0]
        if record == "v":
            if len(tokens) < 4:
                raise ParseError(f"line {line_no}: vertex needs 3 coordinates")
            try:
                vertices.append([float(v) for v in tokens[1:4]])
            except ValueError as exc:
                raise ParseError(f"line {line_no}: bad vertex {raw.strip()!r}") from exc
        elif record == "f":
            corners = [
                _parse_face_index(token, len(vertices), line_no) for token in tokens[1:]
            ]
            if len(corners) < 3:
                raise ParseError(f"line {line_no}: face needs at least 3 vertices")
            # fan split: a quad (v0, v1, v2, v3) becomes (v0, v1, v2) and (v0, v2, v3)
            for k in range(1, len(corners) - 1):
                triangles.append((corners[0], corners[k], corners[k + 1]))

    if not triangles:
        raise EmptyMesh("OBJ file contains no faces")

    flat = np.array(triangles, dtype=np.int64)
    if flat.min() < 0 or flat.max() >= len(vertices):
        raise ParseError(
            f"Face index out of range: mesh has {len(vertices)} vertices, "
            f"faces reference [{flat.min() + 1}, {flat.max() + 1}]"
        )
    return Mesh(vertices=np.array(vertices, dtype=np.float64), triangles=flat)


def load_mesh(path: str | Path) -> Mesh:
    """Read a Wavefront OBJ file (v/f records, triangles and quads)"""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        mesh = parse_obj(f)
    logger.info(
        "Loaded %s: %d vertices, %d triangles", path.name, mesh.n_vertices, mesh.n_triangles
    )
    return mesh


def _normalization_transform(
    meshes: Sequence[Mesh], object_size: float
) -> tuple[float, np.ndarray]:
    stacked = np.vstack([mesh.vertices for mesh in meshes])
    if not len(stacked):
        raise EmptyMesh("Cannot normalize a mesh without vertices")
    lo, hi = stacked.min(axis=0), stacked.max(axis=0)
    longest = float((hi - lo).max())
    if not longest > 0:
        raise DegenerateMesh("Mesh bounding box has zero extent")
    scale = object_size / longest
    center = (lo + hi) / 2
    offset = np.array([-center[0] * scale, -center[1] * scale, -lo[2] * scale])
    return scale, offset


def normalize_meshes(meshes: Sequence[Mesh], object_size: float = OBJECT_SIZE) -> list[Mesh]:
    """Apply one shared scale/translation computed from the union bounding box"""
    scale, offset = _normalization_transform(meshes, object_size)
    return [mesh.with_vertices(mesh.vertices * scale + offset) for mesh in meshes]


def normalize_mesh(mesh: Mesh, object_size: float = OBJECT_SIZE) -> Mesh:
    """Scale so the longest bbox side equals object_size, center x/y, rest on z=0"""
    return normalize_meshes([mesh], object_size)[0]


def rotation_z(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def pose_mesh(mesh: Mesh, params: SceneParams) -> Mesh:
    """Rotate by alpha about the vertical axis through the bbox center, then
    move the rotated bbox center to (r cos g, r sin g); heights are untouched
    """
    lo, hi = mesh.bounding_box()
    pivot = np.array([(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, 0.0])
    rotated = (mesh.vertices - pivot) @ rotation_z(params.alpha).T
    lo, hi = rotated.min(axis=0), rotated.max(axis=0)
    target = np.array(
        [params.r * math.cos(params.gamma), params.r * math.sin(params.gamma), 0.0]
    )
    shift = target - np.array([(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, 0.0])
    return mesh.with_vertices(rotated + shift)


def light_position(params: SceneParams, light_distance: float = LIGHT_DISTANCE) -> LightPose:
    cos_phi = math.cos(params.phi)
    return LightPose(
        position=light_distance
        * np.array(
            [
                cos_phi * math.cos(params.theta),
                cos_phi * math.sin(params.theta),
                math.sin(params.phi),
            ]
        )
    )


def project_points(light: LightPose, points: np.ndarray) -> np.ndarray:
    """Intersect the rays light -> point with the canvas plane; (N, 3) -> (N, 2)"""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    light_xyz = light.position
    heights = points[:, 2]
    if np.any(heights >= light_xyz[2]):
        raise AbovePlaneLight(
            f"Point height {heights.max():.4f} reaches light height {light_xyz[2]:.4f}"
        )
    t = light_xyz[2] / (light_xyz[2] - heights)
    shadow = light_xyz[:2] + t[:, None] * (points[:, :2] - light_xyz[:2])
    # points already on the canvas are fixed points of the projection
    on_plane = heights == 0.0
    shadow[on_plane] = points[on_plane, :2]
    return shadow


def project_vertex(light: LightPose, point: Sequence[float]) -> np.ndarray:
    return project_points(light, np.asarray(point, dtype=np.float64)[None, :])[0]


def project_mesh(mesh: Mesh, light: LightPose) -> np.ndarray:
    """(M, 3, 2) shadow triangles of a posed mesh"""
    return project_points(light, mesh.vertices)[mesh.triangles]


def light_facing(mesh: Mesh, light: LightPose) -> np.ndarray:
    """Mask of triangles whose outer side faces the light

    On a closed mesh these alone cast the whole shadow, each silhouette edge
    bounded by exactly one of them. Open or inconsistently wound meshes keep
    every triangle.
    """
    if mesh.orientation == 0:
        return np.ones(mesh.n_triangles, dtype=bool)
    corners = mesh.triangle_corners()
    normals = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    towards_light = light.position - corners[:, 0]
    return mesh.orientation * np.einsum("ij,ij->i", normals, towards_light) > 0
