"""Multi-start, box-constrained gradient ascent of the shadow's fractal dimension"""

import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from src.shadow_draw.app_logic.data_models.errors import EmptyShadow
from src.shadow_draw.app_logic.data_models.optimization import (
    OptimizerSettings,
    OptimResult,
    ParamBounds,
    StartGrid,
    TraceEntry,
)
from src.shadow_draw.app_logic.data_models.scene import SceneParams
from src.shadow_draw.app_logic.engine.fractal_objective import SceneObjective
from src.shadow_draw.app_logic.engine.scene_geometry import CANVAS_RADIUS, PLACEMENT_RATIO

logger = logging.getLogger(__name__)

FdFunction = Callable[[np.ndarray], float]

N_AZIMUTHS = 12
DEFAULT_ELEVATIONS_DEG = (20.0, 35.0, 50.0, 65.0)
DEFAULT_NEIGHBORHOOD_DEG = (15.0, 7.5, 30.0)


def init_grid(
    seed: int,
    elevations_deg: Sequence[float] = DEFAULT_ELEVATIONS_DEG,
    neighborhood_deg: Sequence[float] = DEFAULT_NEIGHBORHOOD_DEG,
    placement_radius: float = PLACEMENT_RATIO * CANVAS_RADIUS,
) -> StartGrid:
    """12 azimuths x len(elevations) starts, each with its own random rotation"""
    half_width = tuple(math.radians(v) for v in neighborhood_deg)
    starts, bounds = [], []
    index = 0
    for k in range(N_AZIMUTHS):
        theta = math.radians(30.0 * k)
        for elevation in elevations_deg:
            rng = np.random.default_rng([seed, index])
            alpha = float(rng.uniform(0.0, 2 * math.pi))
            start = SceneParams.tied(theta, math.radians(elevation), alpha, placement_radius)
            starts.append(start)
            bounds.append(ParamBounds(center=tuple(start.free.tolist()), half_width=half_width))
            index += 1
    return StartGrid(starts=tuple(starts), bounds=tuple(bounds))


@dataclass(frozen=True)
class Gradient:
    vector: np.ndarray
    valid: bool


def gradient_fd(fd_fn: FdFunction, free: np.ndarray, h: float) -> Gradient:
    """Central differences of the FD over the free parameters"""
    if not h > 0:
        raise ValueError(f"Finite-difference step must be positive, got {h}")
    free = np.asarray(free, dtype=np.float64)
    components = np.zeros(len(free))
    try:
        for k in range(len(free)):
            step = np.zeros(len(free))
            step[k] = h
            components[k] = (fd_fn(free + step) - fd_fn(free - step)) / (2 * h)
    except EmptyShadow:
        return Gradient(vector=components, valid=False)
    return Gradient(vector=components, valid=bool(np.all(np.isfinite(components))))


def optimize_local(
    fd_fn: FdFunction,
    start: np.ndarray,
    bounds: ParamBounds,
    settings: OptimizerSettings = OptimizerSettings(),
    to_params: Optional[Callable[[np.ndarray], SceneParams]] = None,
    index: int = 0,
) -> OptimResult:
    """Projected ascent with normalized steps; a step is kept only if FD improves"""
    to_params = to_params or _free_as_params
    current = bounds.clamp(np.asarray(start, dtype=np.float64))
    init_params = to_params(current)

    try:
        fd_current = fd_fn(current)
    except EmptyShadow:
        logger.info("Start %d has a degenerate shadow, skipped", index)
        return OptimResult(
            index=index,
            init=init_params,
            final=init_params,
            fd_init=float("-inf"),
            fd_final=float("-inf"),
            iterations=0,
            stop_reason="empty_shadow",
        )

    fd_init = fd_current
    trace = [TraceEntry(init_params, fd_current)]
    step = settings.step0
    iterations = 0
    stop_reason = "max_iters"

    while iterations < settings.max_iters:
        if step < settings.tol:
            stop_reason = "step_below_tol"
            break
        gradient = gradient_fd(fd_fn, current, settings.fd_step)
        norm = float(np.linalg.norm(gradient.vector))
        if not gradient.valid or norm == 0.0:
            stop_reason = "invalid_gradient" if not gradient.valid else "zero_gradient"
            break
        iterations += 1

        candidate = bounds.clamp(current + step * gradient.vector / norm)
        try:
            fd_candidate = fd_fn(candidate)
        except EmptyShadow:
            fd_candidate = float("-inf")

        if fd_candidate > fd_current:
            current, fd_current = candidate, fd_candidate
            trace.append(TraceEntry(to_params(current), fd_current))
            logger.debug("Start %d iter %d: fd=%.5f", index, iterations, fd_current)
        else:
            step *= settings.shrink

    return OptimResult(
        index=index,
        init=init_params,
        final=to_params(current),
        fd_init=fd_init,
        fd_final=fd_current,
        iterations=iterations,
        trace=tuple(trace),
        stop_reason=stop_reason,
    )


def _free_as_params(free: np.ndarray) -> SceneParams:
    # only used for synthetic objectives whose vectors are not scene angles
    theta, phi, alpha = (float(v) for v in free)
    return SceneParams(theta=theta, phi=min(max(phi, 1e-9), math.pi / 2 - 1e-9), r=0.0, gamma=theta, alpha=alpha)


def run_all_starts(
    objective: SceneObjective,
    grid: StartGrid,
    settings: OptimizerSettings = OptimizerSettings(),
    workers: Optional[int] = None,
) -> list[OptimResult]:
    """Optimize every start; output is index-aligned with the grid"""
    workers = workers or os.cpu_count() or 1

    def run_one(index: int) -> OptimResult:
        start = grid.starts[index]
        start_objective = objective.for_start(start)
        result = optimize_local(
            start_objective,
            start.free,
            grid.bounds[index],
            settings,
            to_params=start_objective.params_at,
            index=index,
        )
        logger.info(
            "Start %02d: fd %.4f -> %.4f in %d iterations (%s)",
            index,
            result.fd_init,
            result.fd_final,
            result.iterations,
            result.stop_reason,
        )
        return result

    if workers == 1:
        return [run_one(index) for index in range(len(grid))]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(run_one, range(len(grid))))


def export_traces_jsonl(results: Sequence[OptimResult], path: str | Path) -> None:
    """One JSON record per accepted step"""
    with open(path, "w", encoding="utf-8") as f:
        for result in results:
            for step, entry in enumerate(result.trace):
                record = {"start": result.index, "step": step, **entry.to_dict()}
                f.write(json.dumps(record, sort_keys=True) + "\n")
