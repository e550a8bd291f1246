"""Typed view of the resolved Hydra config"""

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional
from urllib.parse import urlparse

from src.shadow_draw.app_logic.data_models.errors import ConfigError
from src.shadow_draw.app_logic.data_models.optimization import OptimizerSettings
from src.shadow_draw.app_logic.data_models.raster import RasterSpec

COMMANDS = ("optimize", "generate", "animate", "dataset", "mock-serve", "vlm-serve")
SERVICE_NAMES = ("propose", "generate", "verify", "score")


@dataclass(frozen=True)
class CanvasConfig:
    radius: float = 1.0
    object_size: float = 0.5
    light_distance: float = 3.0
    placement_ratio: float = 0.8

    @property
    def placement_radius(self) -> float:
        return self.placement_ratio * self.radius


@dataclass(frozen=True)
class RasterConfig:
    width: int = 256
    height: int = 256
    window: tuple[float, float, float, float] = (-1.0, -1.0, 1.0, 1.0)

    def to_spec(self) -> RasterSpec:
        return RasterSpec(width=self.width, height=self.height, window=tuple(self.window))


@dataclass(frozen=True)
class ObjectiveConfig:
    sigma: float = 0.01
    scales: tuple[int, ...] = (2, 4, 8, 16, 32)
    min_count: float = 3


@dataclass(frozen=True)
class NeighborhoodConfig:
    theta: float = 15.0
    phi: float = 7.5
    alpha: float = 30.0


@dataclass(frozen=True)
class OptimizerConfig:
    elevations_deg: tuple[float, ...] = (20.0, 35.0, 50.0, 65.0)
    neighborhood_deg: NeighborhoodConfig = field(default_factory=NeighborhoodConfig)
    step0_deg: float = 5.0
    shrink: float = 0.5
    max_iters: int = 30
    tol_deg: float = 0.1
    fd_step_deg: float = 0.5
    workers: Optional[int] = None

    def to_settings(self) -> OptimizerSettings:
        return OptimizerSettings(
            step0=math.radians(self.step0_deg),
            shrink=self.shrink,
            max_iters=self.max_iters,
            tol=math.radians(self.tol_deg),
            fd_step=math.radians(self.fd_step_deg),
        )


@dataclass(frozen=True)
class ContoursConfig:
    min_area_frac: float = 0.001
    stroke_px: int = 2
    dilate_px: int = 4
    band_px: Optional[float] = None

    @property
    def erase_band_px(self) -> float:
        return self.band_px if self.band_px is not None else self.stroke_px + 1


@dataclass(frozen=True)
class ServicesConfig:
    mock: bool = False
    endpoints: dict[str, str] = field(
        default_factory=lambda: {
            name: f"http://127.0.0.1:8765/{name}" for name in SERVICE_NAMES
        }
    )
    headers: dict[str, dict[str, str]] = field(
        default_factory=lambda: {name: {} for name in SERVICE_NAMES}
    )
    timeout_s: float = 120.0
    retries: int = 2
    backoff_s: float = 0.5
    max_concurrency: int = 4
    max_mask_violation: float = 0.02
    system_prompt_file: Optional[str] = None


@dataclass(frozen=True)
class RankingConfig:
    k: int = 4


@dataclass(frozen=True)
class AnimationConfig:
    keyframes: tuple[str, ...] = ()


@dataclass(frozen=True)
class DatasetConfig:
    drawing_dir: Optional[str] = None
    target_regions: int = 4


@dataclass(frozen=True)
class MockServerConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    seed: int = 0


@dataclass(frozen=True)
class VlmConfig:
    model: str = "gpt-4.1"
    temperature: float = 0.0
    host: str = "127.0.0.1"
    port: int = 8766


_SECTIONS = {
    "canvas": CanvasConfig,
    "raster": RasterConfig,
    "objective": ObjectiveConfig,
    "optimizer": OptimizerConfig,
    "contours": ContoursConfig,
    "services": ServicesConfig,
    "ranking": RankingConfig,
    "animation": AnimationConfig,
    "dataset": DatasetConfig,
    "mock_server": MockServerConfig,
    "vlm": VlmConfig,
}


@dataclass(frozen=True)
class PipelineConfig:
    command: str = "generate"
    mesh: Optional[str] = None
    seed: int = 0
    output_dir: str = "./outputs"
    run_id: Optional[str] = None
    subject: Optional[str] = None
    verbose: bool = True
    canvas: CanvasConfig = field(default_factory=CanvasConfig)
    raster: RasterConfig = field(default_factory=RasterConfig)
    objective: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    contours: ContoursConfig = field(default_factory=ContoursConfig)
    services: ServicesConfig = field(default_factory=ServicesConfig)
    ranking: RankingConfig = field(default_factory=RankingConfig)
    animation: AnimationConfig = field(default_factory=AnimationConfig)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    mock_server: MockServerConfig = field(default_factory=MockServerConfig)
    vlm: VlmConfig = field(default_factory=VlmConfig)

    @classmethod
    def from_container(cls, container: dict[str, Any]) -> "PipelineConfig":
        """Build from OmegaConf.to_container(cfg, resolve=True) output"""
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(container) - known - {"hydra"}
        if unknown:
            raise ConfigError(f"Unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for key, value in container.items():
            if key == "hydra":
                continue
            if key in _SECTIONS:
                kwargs[key] = _build_section(_SECTIONS[key], value or {}, key)
            else:
                kwargs[key] = value
        config = cls(**kwargs)
        config.validate()
        return config

    def to_container(self) -> dict[str, Any]:
        return _to_plain(dataclasses.asdict(self))

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command {self.command!r}, expected one of {COMMANDS}")
        _check(self.canvas.radius > 0, "canvas.radius must be positive")
        _check(self.canvas.object_size > 0, "canvas.object_size must be positive")
        _check(
            self.canvas.light_distance > self.canvas.object_size,
            "canvas.light_distance must exceed the object size",
        )
        _check(0 <= self.canvas.placement_ratio <= 1, "canvas.placement_ratio must lie in [0, 1]")
        try:
            self.raster.to_spec()
        except Exception as exc:
            raise ConfigError(f"raster: {exc}") from exc
        _check(self.objective.sigma > 0, "objective.sigma must be positive")
        scales = list(self.objective.scales)
        _check(
            len(scales) >= 2 and all(s >= 1 for s in scales) and scales == sorted(set(scales)),
            "objective.scales must be at least two increasing positive sizes",
        )
        _check(
            all(0 < e < 90 for e in self.optimizer.elevations_deg),
            "optimizer.elevations_deg must lie in (0, 90)",
        )
        hood = self.optimizer.neighborhood_deg
        _check(
            0 <= hood.theta <= 15 and hood.phi >= 0 and hood.alpha >= 0,
            "optimizer.neighborhood_deg: theta in [0, 15] keeps azimuth cells disjoint",
        )
        for elevation in self.optimizer.elevations_deg:
            _check(
                0 < elevation - hood.phi and elevation + hood.phi < 90,
                "optimizer neighborhood must keep the elevation inside (0, 90)",
            )
        _check(0 < self.optimizer.shrink < 1, "optimizer.shrink must lie in (0, 1)")
        _check(self.optimizer.max_iters >= 0, "optimizer.max_iters must be non-negative")
        _check(self.optimizer.step0_deg > 0, "optimizer.step0_deg must be positive")
        _check(self.optimizer.tol_deg > 0, "optimizer.tol_deg must be positive")
        _check(self.optimizer.fd_step_deg > 0, "optimizer.fd_step_deg must be positive")
        _check(
            self.optimizer.workers is None or self.optimizer.workers >= 1,
            "optimizer.workers must be null or at least 1",
        )
        _check(0 <= self.contours.min_area_frac < 1, "contours.min_area_frac must lie in [0, 1)")
        _check(self.contours.stroke_px >= 1, "contours.stroke_px must be at least 1")
        _check(self.contours.dilate_px >= 0, "contours.dilate_px must be non-negative")
        _check(self.contours.erase_band_px >= 1, "contours.band_px must be at least 1")
        for name in SERVICE_NAMES:
            url = self.services.endpoints.get(name)
            parsed = urlparse(url or "")
            _check(
                parsed.scheme in ("http", "https") and bool(parsed.netloc),
                f"services.endpoints.{name} must be an absolute URL, got {url!r}",
            )
        _check(self.services.timeout_s > 0, "services.timeout_s must be positive")
        _check(self.services.retries >= 0, "services.retries must be non-negative")
        _check(self.services.max_concurrency >= 1, "services.max_concurrency must be at least 1")
        _check(
            0 <= self.services.max_mask_violation <= 1,
            "services.max_mask_violation must lie in [0, 1]",
        )
        _check(self.ranking.k >= 1, "ranking.k must be at least 1")
        _check(self.dataset.target_regions >= 1, "dataset.target_regions must be at least 1")

    def require_mesh(self) -> Path:
        if not self.mesh:
            raise ConfigError("mesh=PATH is required for this command")
        path = Path(self.mesh)
        if not path.is_file():
            raise ConfigError(f"Mesh file not found: {path}")
        return path


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _build_section(section_cls, values: dict[str, Any], name: str):
    known = {f.name: f for f in dataclasses.fields(section_cls)}
    unknown = set(values) - set(known)
    if unknown:
        raise ConfigError(f"Unknown keys in {name}: {sorted(unknown)}")
    kwargs = {}
    for key, value in values.items():
        if key == "neighborhood_deg":
            value = _build_section(NeighborhoodConfig, value or {}, f"{name}.{key}")
        elif key == "headers":
            value = {service: dict(extra or {}) for service, extra in (value or {}).items()}
        elif key == "endpoints":
            value = dict(value or {})
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return section_cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def _to_plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {key: _to_plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_plain(item) for item in value]
    return value
