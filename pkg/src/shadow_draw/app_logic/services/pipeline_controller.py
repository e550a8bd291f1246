"""Pipeline orchestration: shadow search, conditioning, external services and ranking"""

import contextlib
import dataclasses
import hashlib
import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator, Literal, Optional

import numpy as np
from omegaconf import OmegaConf

from src.shadow_draw import __version__
from src.shadow_draw.app_logic.data_models.composition import CompositionCandidate
from src.shadow_draw.app_logic.data_models.config import PipelineConfig
from src.shadow_draw.app_logic.data_models.contours import ContourSet, KeepoutMask
from src.shadow_draw.app_logic.data_models.errors import (
    ConfigError,
    DegenerateMesh,
    DeltaOutOfRange,
    DivisionDomain,
    EmptyMesh,
    EmptyShadow,
    FormatError,
    MaskViolation,
    NoClosedRegions,
    NoStaticRegion,
    ParseError,
    ServiceError,
    ShadowDrawError,
)
from src.shadow_draw.app_logic.data_models.manifest import (
    MANIFEST_SCHEMA_VERSION,
    Manifest,
    RunStatus,
)
from src.shadow_draw.app_logic.data_models.optimization import OptimResult, StartGrid
from src.shadow_draw.app_logic.data_models.raster import BinaryRaster
from src.shadow_draw.app_logic.data_models.scene import Mesh, SceneParams
from src.shadow_draw.app_logic.engine import scene_optimizer
from src.shadow_draw.app_logic.engine.compose_rank import (
    composite,
    contribution_filter,
    deltas,
    erase_contour,
    frame_overlay,
    rank,
)
from src.shadow_draw.app_logic.engine.contour_tools import (
    ANIMATION_KEYFRAMES,
    animated_keepout_mask,
    extract_closed_regions,
    extract_contours,
    greedy_merge,
    object_keepout_mask,
    region_contours,
    render_contours,
    save_contours_json,
)
from src.shadow_draw.app_logic.engine.fractal_objective import (
    SceneObjective,
    boundary_map,
    box_count_curve,
    hard_fd,
)
from src.shadow_draw.app_logic.engine.scene_geometry import load_mesh, normalize_meshes, pose_mesh
from src.shadow_draw.app_logic.engine.scene_optimizer import (
    export_traces_jsonl,
    init_grid,
    run_all_starts,
)
from src.shadow_draw.app_logic.engine.shadow_render import footprint_raster, shadow_raster
from src.shadow_draw.app_logic.services.mock_services import mock_services
from src.shadow_draw.app_logic.services.service_clients import ServiceClient, load_system_prompt
from src.shadow_draw.app_logic.utils.common import (
    EXIT_NO_CANDIDATES,
    EXIT_SERVICE_FAILURE,
    StageResponse,
    atomic_directory,
    finite_or_none,
    handle_stage_response,
    write_json,
)
from src.shadow_draw.app_logic.utils.image_io import (
    drawing_to_png,
    image_to_png,
    load_drawing,
    raster_to_png,
    write_png,
)

logger = logging.getLogger(__name__)

PipelineMode = Literal["static", "animated"]

MANIFEST_FILE = "manifest.json"
TIMINGS_FILE = "timings.json"
CONFIG_FILE = "config.yaml"
TRACES_FILE = "traces.jsonl"
PAIRS_FILE = "pairs.json"
DATASET_INDEX_FILE = "dataset.json"
TOP_K_FILES = ("contour", "drawing_full", "drawing_partial", "composite")


@dataclass(frozen=True)
class SceneSetup:
    """Conditioning inputs of one configuration; frame 1 comes first"""

    shadows: list[BinaryRaster]
    footprints: list[BinaryRaster]
    frame_contours: list[ContourSet]
    contour_images: list[BinaryRaster]
    keepout: KeepoutMask
    overlay: Optional[np.ndarray] = None

    @property
    def contours(self) -> ContourSet:
        return self.frame_contours[0]

    @property
    def contour_image(self) -> BinaryRaster:
        return self.contour_images[0]

    def propose_png(self) -> bytes:
        """Image shown to the prompt proposer: the colored overlay when animated"""
        if self.overlay is not None:
            return image_to_png(self.overlay)
        return raster_to_png(self.contour_image)


def config_run_id(cfg: PipelineConfig) -> str:
    digest = hashlib.sha256(
        json.dumps(cfg.to_container(), sort_keys=True).encode("utf-8")
    ).hexdigest()
    return f"{cfg.command}-{digest[:12]}"


@contextlib.contextmanager
def service_client(cfg: PipelineConfig) -> Iterator[ServiceClient]:
    """Client on the configured endpoints, or on in-process mock services"""
    if not cfg.services.mock:
        yield ServiceClient(cfg.services)
        return
    with mock_services(cfg.mock_server.seed, cfg.mock_server.host, port=0) as server:
        yield ServiceClient(dataclasses.replace(cfg.services, endpoints=server.endpoints()))


class ShadowDrawController:
    def __init__(
        self,
        cfg: PipelineConfig,
        mode: PipelineMode = "static",
        client: Optional[ServiceClient] = None,
    ):
        self.cfg = cfg
        self.mode = mode
        self.client = client
        self.spec = cfg.raster.to_spec()
        self.run_id: str = cfg.run_id or config_run_id(cfg)
        self.meshes: list[Mesh] = []
        self.grid: Optional[StartGrid] = None
        self.results: list[OptimResult] = []
        self.candidates: list[CompositionCandidate] = []
        self.setups: dict[int, SceneSetup] = {}
        self.timings: dict[str, float] = {}
        self.warnings: list[str] = []
        self.error: Optional[str] = None
        self._abort = threading.Event()
        self._lock = threading.Lock()
        if not cfg.verbose:
            logging.getLogger(scene_optimizer.__name__).setLevel(logging.WARNING)

    @property
    def run_dir(self) -> Path:
        return Path(self.cfg.output_dir) / self.run_id

    @contextlib.contextmanager
    def _timed(self, stage: str) -> Iterator[None]:
        started = time.perf_counter()
        try:
            yield
        finally:
            self.timings[stage] = round(time.perf_counter() - started, 6)

    def _mesh_paths(self) -> list[Path]:
        if self.mode == "static":
            return [self.cfg.require_mesh()]
        paths = [Path(p) for p in self.cfg.animation.keyframes]
        if len(paths) != ANIMATION_KEYFRAMES:
            raise ConfigError(
                f"animation.keyframes needs {ANIMATION_KEYFRAMES} meshes, got {len(paths)}"
            )
        for path in paths:
            if not path.is_file():
                raise ConfigError(f"Keyframe mesh not found: {path}")
        return paths

    def load_scene(self) -> StageResponse:
        """Load and jointly normalize the mesh (or the five keyframes)"""
        paths = self._mesh_paths()
        with self._timed("load"):
            meshes = []
            for path in paths:
                try:
                    meshes.append(load_mesh(path))
                except (OSError, ParseError, EmptyMesh) as exc:
                    raise ConfigError(f"Cannot load mesh {path}: {exc}") from exc
            try:
                self.meshes = normalize_meshes(meshes, self.cfg.canvas.object_size)
            except DegenerateMesh as exc:
                raise ConfigError(f"Cannot normalize {paths[0]}: {exc}") from exc
        return StageResponse(
            success=True,
            message=f"Loaded {len(self.meshes)} mesh(es) from {paths[0].parent}",
            data={"meshes": [str(path) for path in paths]},
        )

    def optimize(self) -> StageResponse:
        """Build the 48-start grid and run local FD ascent from every start"""
        cfg = self.cfg
        hood = cfg.optimizer.neighborhood_deg
        self.grid = init_grid(
            cfg.seed,
            cfg.optimizer.elevations_deg,
            (hood.theta, hood.phi, hood.alpha),
            cfg.canvas.placement_radius,
        )
        objective = SceneObjective(
            mesh=self.meshes[0],
            template=self.grid.starts[0],
            spec=self.spec,
            sigma=cfg.objective.sigma,
            scales=tuple(cfg.objective.scales),
            light_distance=cfg.canvas.light_distance,
            min_count=cfg.objective.min_count,
        )
        with self._timed("optimize"):
            self.results = run_all_starts(
                objective, self.grid, cfg.optimizer.to_settings(), cfg.optimizer.workers
            )
        improved = sum(result.improved for result in self.results)
        return StageResponse(
            success=True,
            message=f"Optimized {len(self.results)} starts, {improved} improved their FD",
            data={"improved": improved},
        )

    def _scene_setup(self, params: SceneParams) -> SceneSetup:
        cfg = self.cfg
        shadows, footprints, frame_contours, contour_images = [], [], [], []
        keepout: Optional[KeepoutMask] = None
        for mesh in self.meshes:
            posed = pose_mesh(mesh, params)
            shadow = shadow_raster(mesh, params, self.spec, None, cfg.canvas.light_distance)
            contours = extract_contours(shadow, cfg.contours.min_area_frac)
            object_mask = object_keepout_mask(posed, self.spec, cfg.contours.dilate_px)
            keepout = object_mask if keepout is None else keepout.union(object_mask)
            shadows.append(shadow)
            footprints.append(footprint_raster(posed, self.spec))
            frame_contours.append(contours)
            contour_images.append(render_contours(contours, cfg.contours.stroke_px))

        overlay = None
        if self.mode == "animated":
            keepout = animated_keepout_mask(shadows).union(keepout)
            overlay = frame_overlay(contour_images)
        return SceneSetup(
            shadows=shadows,
            footprints=footprints,
            frame_contours=frame_contours,
            contour_images=contour_images,
            keepout=keepout,
            overlay=overlay,
        )

    def _reject(self, candidate: CompositionCandidate, reason: str, level: int = logging.INFO) -> None:
        candidate.reject(reason)
        logger.log(level, "Start %02d rejected: %s", candidate.index, reason)

    def prepare_candidates(self) -> StageResponse:
        """Hard shadow, contour and keep-out mask at every optimized configuration"""
        self.candidates = [
            CompositionCandidate(index=result.index, params=result.final) for result in self.results
        ]
        with self._timed("conditioning"):
            for candidate, result in zip(self.candidates, self.results):
                if result.stop_reason == "empty_shadow":
                    self._reject(candidate, "empty_shadow: degenerate shadow at the start")
                    continue
                try:
                    setup = self._scene_setup(candidate.params)
                except EmptyShadow as exc:
                    self._reject(candidate, f"empty_shadow: {exc}")
                    continue
                except NoStaticRegion as exc:
                    self._reject(candidate, f"no_static_region: {exc}")
                    continue
                candidate.contour = setup.contours
                self.setups[candidate.index] = setup

        usable = sum(candidate.is_alive for candidate in self.candidates)
        return StageResponse(
            success=True,
            message=f"{usable} of {len(self.candidates)} configurations cast a usable shadow",
            data={"usable": usable},
        )

    def _run_services(self, candidate: CompositionCandidate, system_prompt: str) -> None:
        setup = self.setups[candidate.index]
        client = self.client

        prompt = client.propose_prompt(setup.propose_png(), system_prompt, self.cfg.subject)
        candidate.prompt = prompt
        drawing = client.generate_drawing(
            setup.contour_image, prompt.description, setup.keepout, self.cfg.seed + candidate.index
        )
        candidate.drawing_full = drawing
        candidate.drawing_partial = erase_contour(
            drawing, setup.contours, self.cfg.contours.erase_band_px
        )
        candidate.composite = composite(
            candidate.drawing_partial, setup.shadows[0], setup.footprints[0]
        )
        if self._abort.is_set():
            return

        candidate.vqa_pass = client.vqa_gate(drawing, setup.contours, prompt.component)
        if not candidate.vqa_pass:
            self._reject(candidate, "vqa: the contour does not outline the described component")
            return

        candidate.scores_full = client.score(candidate.drawing_full, prompt.description)
        candidate.scores_partial = client.score(candidate.drawing_partial, prompt.description)
        if not contribution_filter(candidate.scores_full, candidate.scores_partial):
            self._reject(candidate, "contribution: the drawing scores higher without the contour")
            return
        try:
            candidate.deltas = deltas(candidate.scores_full, candidate.scores_partial)
        except DivisionDomain as exc:
            self._reject(candidate, f"division_domain: {exc}")
        except DeltaOutOfRange as exc:
            self._reject(candidate, f"delta_range: {exc}")

    def _compose(self, candidate: CompositionCandidate, system_prompt: str) -> None:
        if self._abort.is_set():
            return
        try:
            self._run_services(candidate, system_prompt)
        except ServiceError as exc:
            with self._lock:
                if self.error is None:
                    self.error = str(exc)
            self._abort.set()
            candidate.fail(f"service_error: {exc}")
            logger.error("Start %02d: %s", candidate.index, exc)
        except FormatError as exc:
            candidate.fail(f"format_error: {exc}")
            logger.warning("Start %02d: %s", candidate.index, exc)
        except MaskViolation as exc:
            self._reject(candidate, f"mask_violation: {exc}", level=logging.WARNING)

    def compose_candidates(self) -> StageResponse:
        """Prompt, generate, erase, composite, verify and score every live candidate"""
        if self.client is None:
            raise ValueError("compose_candidates needs a service client")
        system_prompt = load_system_prompt(self.cfg.services.system_prompt_file, self.cfg.subject)
        alive = [candidate for candidate in self.candidates if candidate.is_alive]

        with self._timed("services"):
            with ThreadPoolExecutor(max_workers=self.cfg.services.max_concurrency) as executor:
                list(executor.map(lambda c: self._compose(c, system_prompt), alive))

        if self._abort.is_set():
            for candidate in self.candidates:
                if candidate.is_alive:
                    candidate.fail("aborted: run stopped after a service failure")
            return StageResponse(
                success=False,
                message=f"Service failure, run aborted: {self.error}",
                status_code=503,
                exit_code=EXIT_SERVICE_FAILURE,
            )
        return StageResponse(
            success=True,
            message=f"Composed {len(alive)} candidates",
        )

    def rank_candidates(self) -> StageResponse:
        with self._timed("rank"):
            top = rank(self.candidates, self.cfg.ranking.k)
        if not top:
            self.warnings.append("no candidate survived verification and filtering")
            return StageResponse(
                success=False,
                message="No candidate survived verification and filtering",
                status_code=400,
                exit_code=EXIT_NO_CANDIDATES,
            )
        return StageResponse(
            success=True,
            message=f"Top {len(top)}: starts {[candidate.index for candidate in top]}",
            data={"top_k": [candidate.index for candidate in top]},
        )

    def _write_artifacts(self, root: Path, candidate: CompositionCandidate) -> None:
        setup = self.setups.get(candidate.index)
        if setup is None:
            return
        start_dir = root / f"start_{candidate.index:02d}"
        start_dir.mkdir()

        files = {
            "shadow": ("shadow.png", raster_to_png(setup.shadows[0])),
            "contour": ("contour.png", raster_to_png(setup.contour_image)),
            "mask": ("mask.png", raster_to_png(setup.keepout.mask)),
        }
        if setup.overlay is not None:
            files["overlay"] = ("overlay.png", image_to_png(setup.overlay))
        if candidate.drawing_full is not None:
            files["drawing_full"] = ("drawing_full.png", drawing_to_png(candidate.drawing_full))
        if candidate.drawing_partial is not None:
            files["drawing_partial"] = (
                "drawing_partial.png",
                drawing_to_png(candidate.drawing_partial),
            )
            files["composite"] = ("composite.png", image_to_png(candidate.composite))
            if self.mode == "animated":
                frames = zip(setup.shadows, setup.footprints)
                for number, (shadow, footprint) in enumerate(frames, start=1):
                    image = composite(candidate.drawing_partial, shadow, footprint)
                    files[f"composite_f{number}"] = (f"composite_f{number}.png", image_to_png(image))

        for key, (name, png) in files.items():
            write_png(start_dir / name, png)
            candidate.artifacts[key] = f"{start_dir.name}/{name}"
        save_contours_json(setup.contours, start_dir / "contour.json")
        candidate.artifacts["contour_json"] = f"{start_dir.name}/contour.json"

    def _record(self, candidate: CompositionCandidate, result: OptimResult) -> dict[str, Any]:
        record = result.to_dict()
        record.update(
            fd_init=finite_or_none(result.fd_init),
            fd_final=finite_or_none(result.fd_final),
            status=candidate.status,
            reason=candidate.reason,
            rank=candidate.rank,
            rank_score=candidate.rank_score,
            prompt=candidate.prompt.to_dict() if candidate.prompt else None,
            vqa_pass=candidate.vqa_pass,
            scores_full=candidate.scores_full.to_dict() if candidate.scores_full else None,
            scores_partial=candidate.scores_partial.to_dict() if candidate.scores_partial else None,
            deltas=candidate.deltas.to_dict() if candidate.deltas else None,
            artifacts=dict(candidate.artifacts),
        )
        return record

    def _top_k(self) -> list[dict[str, Any]]:
        ranked = sorted(
            (c for c in self.candidates if c.rank is not None), key=lambda c: c.rank
        )
        return [
            {
                "rank": candidate.rank,
                "index": candidate.index,
                "rank_score": candidate.rank_score,
                "params": candidate.params.to_dict(),
                "description": candidate.prompt.description,
                "component": candidate.prompt.component,
                "files": {
                    key: candidate.artifacts[key] for key in TOP_K_FILES if key in candidate.artifacts
                },
            }
            for candidate in ranked
        ]

    def manifest_content(self, status: RunStatus) -> dict[str, Any]:
        counts = {
            state: sum(candidate.status == state for candidate in self.candidates)
            for state in ("ranked", "rejected", "failed")
        }
        return {
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "engine_version": __version__,
            "run_id": self.run_id,
            "mode": self.mode,
            "status": status,
            "error": self.error,
            "warnings": list(self.warnings),
            "counts": counts,
            "config": self.cfg.to_container(),
            "records": [
                self._record(candidate, result)
                for candidate, result in zip(self.candidates, self.results)
            ],
            "top_k": self._top_k(),
        }

    def _write_config(self, root: Path) -> None:
        snapshot = OmegaConf.to_yaml(OmegaConf.create(self.cfg.to_container()), sort_keys=True)
        (root / CONFIG_FILE).write_text(snapshot, encoding="utf-8")

    def write_run(self, status: RunStatus) -> Manifest:
        """Write artifacts, manifest, config snapshot and timings in one atomic rename"""
        started = time.perf_counter()
        with atomic_directory(self.run_dir) as scratch:
            for candidate in self.candidates:
                self._write_artifacts(scratch, candidate)
            content = self.manifest_content(status)
            write_json(scratch / MANIFEST_FILE, content)
            self._write_config(scratch)
            self.timings["write"] = round(time.perf_counter() - started, 6)
            write_json(scratch / TIMINGS_FILE, self.timings)
        return Manifest(run_dir=self.run_dir, content=content, timings=dict(self.timings))

    def write_optimization(self) -> Manifest:
        """Optimize-only output: per-start hard shadows, box-count curves and traces"""
        scales = tuple(self.cfg.objective.scales)
        records = []
        started = time.perf_counter()
        with atomic_directory(self.run_dir) as scratch:
            for result in self.results:
                record = result.to_dict()
                record.update(
                    fd_init=finite_or_none(result.fd_init),
                    fd_final=finite_or_none(result.fd_final),
                    fd_final_hard=None,
                    artifacts={},
                )
                if result.stop_reason != "empty_shadow":
                    start_dir = scratch / f"start_{result.index:02d}"
                    start_dir.mkdir()
                    shadow = shadow_raster(
                        self.meshes[0], result.final, self.spec, None, self.cfg.canvas.light_distance
                    )
                    write_png(start_dir / "shadow.png", raster_to_png(shadow))
                    box_count_curve(boundary_map(shadow.to_soft()), scales).to_csv(
                        start_dir / "box_counts.csv"
                    )
                    record["fd_final_hard"] = hard_fd(
                        self.meshes[0], result.final, self.spec, scales, self.cfg.canvas.light_distance
                    )
                    record["artifacts"] = {
                        "shadow": f"{start_dir.name}/shadow.png",
                        "box_counts": f"{start_dir.name}/box_counts.csv",
                    }
                records.append(record)
            export_traces_jsonl(self.results, scratch / TRACES_FILE)

            content = {
                "schema_version": MANIFEST_SCHEMA_VERSION,
                "engine_version": __version__,
                "run_id": self.run_id,
                "mode": "optimize",
                "status": "ok",
                "config": self.cfg.to_container(),
                "records": records,
                "traces": TRACES_FILE,
            }
            write_json(scratch / MANIFEST_FILE, content)
            self._write_config(scratch)
            self.timings["write"] = round(time.perf_counter() - started, 6)
            write_json(scratch / TIMINGS_FILE, self.timings)
        return Manifest(run_dir=self.run_dir, content=content, timings=dict(self.timings))


def run_optimize(cfg: PipelineConfig) -> Manifest:
    controller = ShadowDrawController(cfg)
    handle_stage_response(controller.load_scene())
    handle_stage_response(controller.optimize())
    return controller.write_optimization()


def _run_composition(
    cfg: PipelineConfig, mode: PipelineMode, client: Optional[ServiceClient]
) -> Manifest:
    controller = ShadowDrawController(cfg, mode=mode)
    handle_stage_response(controller.load_scene())
    handle_stage_response(controller.optimize())
    handle_stage_response(controller.prepare_candidates())

    with contextlib.ExitStack() as stack:
        controller.client = client or stack.enter_context(service_client(cfg))
        composed = controller.compose_candidates()
    handle_stage_response(composed)

    status: RunStatus = "failed"
    if composed.success:
        ranked = controller.rank_candidates()
        handle_stage_response(ranked)
        status = "ok" if ranked.success else "no_candidates"
    return controller.write_run(status)


def run_pipeline(cfg: PipelineConfig, client: Optional[ServiceClient] = None) -> Manifest:
    """Static pipeline over a single mesh"""
    return _run_composition(cfg, "static", client)


def run_animated(cfg: PipelineConfig, client: Optional[ServiceClient] = None) -> Manifest:
    """Five keyframes share one drawing, composited onto each frame's shadow"""
    return _run_composition(cfg, "animated", client)


def write_drawing_pairs(
    drawing_path: Path, out_dir: Path, target_regions: int = 4, stroke_px: int = 2
) -> dict[str, Any]:
    """Closed regions of a line drawing, merged, as (condition, drawing) pairs"""
    drawing = load_drawing(drawing_path)
    regions = greedy_merge(extract_closed_regions(drawing), target_regions)

    masks = {f"condition_{i:02d}.png": regions.region_mask(i) for i in range(len(regions))}
    if len(regions) > 1:
        masks["condition_union.png"] = regions.union_mask()
    conditions = {}
    for name, mask in masks.items():
        try:
            conditions[name] = region_contours(mask, stroke_px)
        except EmptyShadow:
            logger.warning("%s: region behind %s is too thin to trace", drawing_path.name, name)
    if not conditions:
        raise NoClosedRegions(f"No traceable closed region in {drawing_path.name}")

    out_dir.mkdir(parents=True)
    write_png(out_dir / "drawing.png", drawing_to_png(drawing))
    for name, image in conditions.items():
        write_png(out_dir / name, raster_to_png(image))
    pairs = {
        "drawing": "drawing.png",
        "conditions": list(conditions),
        "region_areas": regions.areas,
    }
    write_json(out_dir / PAIRS_FILE, pairs)
    return {"name": drawing_path.stem, **pairs}


def run_dataset(cfg: PipelineConfig) -> StageResponse:
    """Condition/drawing pairs for every PNG line drawing in dataset.drawing_dir"""
    if not cfg.dataset.drawing_dir:
        raise ConfigError("dataset.drawing_dir is required for the dataset command")
    drawing_dir = Path(cfg.dataset.drawing_dir)
    if not drawing_dir.is_dir():
        raise ConfigError(f"Drawing directory not found: {drawing_dir}")

    run_dir = Path(cfg.output_dir) / (cfg.run_id or config_run_id(cfg))
    written, skipped = [], []
    with atomic_directory(run_dir) as scratch:
        for path in sorted(drawing_dir.glob("*.png")):
            try:
                written.append(
                    write_drawing_pairs(
                        path, scratch / path.stem, cfg.dataset.target_regions, cfg.contours.stroke_px
                    )
                )
            except NoClosedRegions as exc:
                logger.warning("Skipped %s: %s", path.name, exc)
                skipped.append(path.name)
            except (ShadowDrawError, OSError, ValueError) as exc:
                logger.error("Cannot process %s: %s", path.name, exc)
                skipped.append(path.name)
        write_json(
            scratch / DATASET_INDEX_FILE,
            {"engine_version": __version__, "drawings": written, "skipped": skipped},
        )

    return StageResponse(
        success=True,
        message=f"Wrote pairs for {len(written)} drawings, skipped {len(skipped)}",
        data={"run_dir": str(run_dir), "written": len(written), "skipped": skipped},
    )
