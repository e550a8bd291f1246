import math
from pathlib import Path

import numpy as np
import pytest
from hydra import compose, initialize_config_dir
from omegaconf import OmegaConf

from src.shadow_draw.app_logic.data_models.config import PipelineConfig
from src.shadow_draw.app_logic.data_models.raster import RasterSpec
from src.shadow_draw.app_logic.data_models.scene import Mesh

CONFIG_DIR = Path(__file__).resolve().parents[1] / "src" / "shadow_draw" / "config"

# corner index = dx + 2 * dy + 4 * dz
BOX_TRIANGLES = [
    (0, 1, 3), (0, 3, 2),
    (4, 6, 7), (4, 7, 5),
    (0, 4, 5), (0, 5, 1),
    (2, 3, 7), (2, 7, 6),
    (0, 2, 6), (0, 6, 4),
    (1, 5, 7), (1, 7, 3),
]

# small rasters and few iterations keep a full 48-start run in test budget
FAST_PIPELINE = [
    "raster.width=64",
    "raster.height=64",
    "objective.scales=[2,4,8]",
    "optimizer.max_iters=2",
    "optimizer.workers=2",
    "services.mock=true",
    "services.retries=0",
    "services.backoff_s=0.0",
    "services.timeout_s=10.0",
]


def box_mesh(size=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)) -> Mesh:
    sx, sy, sz = size
    x0, y0, z0 = origin
    corners = [
        (x0 + dx * sx, y0 + dy * sy, z0 + dz * sz)
        for dz in (0, 1)
        for dy in (0, 1)
        for dx in (0, 1)
    ]
    return Mesh(vertices=np.array(corners), triangles=np.array(BOX_TRIANGLES))


def sphere_mesh(radius: float = 1.0, n_lat: int = 16, n_lon: int = 32) -> Mesh:
    vertices = [(0.0, 0.0, radius)]
    for i in range(1, n_lat):
        polar = math.pi * i / n_lat
        for j in range(n_lon):
            azimuth = 2 * math.pi * j / n_lon
            vertices.append(
                (
                    radius * math.sin(polar) * math.cos(azimuth),
                    radius * math.sin(polar) * math.sin(azimuth),
                    radius * math.cos(polar),
                )
            )
    vertices.append((0.0, 0.0, -radius))

    def ring(i, j):
        return 1 + (i - 1) * n_lon + j % n_lon

    triangles = []
    for j in range(n_lon):
        triangles.append((0, ring(1, j), ring(1, j + 1)))
    for i in range(1, n_lat - 1):
        for j in range(n_lon):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            triangles.extend([(a, c, d), (a, d, b)])
    south = len(vertices) - 1
    for j in range(n_lon):
        triangles.append((south, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)))
    return Mesh(vertices=np.array(vertices), triangles=np.array(triangles))


def obj_text(mesh: Mesh) -> str:
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles.tolist()]
    return "\n".join(lines) + "\n"


def write_obj(path: Path, mesh: Mesh) -> Path:
    path.write_text(obj_text(mesh), encoding="utf-8")
    return path


@pytest.fixture
def unit_box() -> Mesh:
    return box_mesh()


@pytest.fixture
def elongated_box() -> Mesh:
    return box_mesh(size=(1.0, 0.2, 0.4), origin=(-0.5, -0.1, 0.0))


@pytest.fixture
def sphere() -> Mesh:
    return sphere_mesh()


@pytest.fixture
def spec16() -> RasterSpec:
    return RasterSpec(width=16, height=16)


@pytest.fixture
def spec64() -> RasterSpec:
    return RasterSpec(width=64, height=64)


@pytest.fixture
def box_obj(tmp_path, elongated_box) -> Path:
    return write_obj(tmp_path / "box.obj", elongated_box)


@pytest.fixture
def make_config():
    """Compose the packaged Hydra config with overrides into a PipelineConfig"""

    def _make(*overrides: str) -> PipelineConfig:
        with initialize_config_dir(config_dir=str(CONFIG_DIR), version_base="1.3"):
            cfg = compose(config_name="setup", overrides=list(overrides))
        return PipelineConfig.from_container(OmegaConf.to_container(cfg, resolve=True))

    return _make


@pytest.fixture
def fast_config(make_config, tmp_path, box_obj):
    out_dir = tmp_path / "out"

    def _make(*overrides: str) -> PipelineConfig:
        return make_config(
            *FAST_PIPELINE,
            f"mesh='{box_obj}'",
            f"output_dir='{out_dir}'",
            *overrides,
        )

    return _make
