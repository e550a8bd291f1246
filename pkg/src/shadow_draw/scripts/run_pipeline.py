"""Hydra entry point

    shadow-draw command=generate mesh=bunny.obj services.mock=true
    shadow-draw command=animate 'animation.keyframes=[f1.obj,f2.obj,f3.obj,f4.obj,f5.obj]'
    shadow-draw command=dataset dataset.drawing_dir=./drawings
    shadow-draw command=mock-serve mock_server.port=8765
"""

import logging
import sys
from typing import Callable, Sequence

import hydra
from dotenv import load_dotenv
from hydra import compose, initialize
from hydra.core.global_hydra import GlobalHydra
from omegaconf import DictConfig, OmegaConf

from src.shadow_draw.app_logic.data_models.config import PipelineConfig
from src.shadow_draw.app_logic.data_models.errors import ConfigError, ShadowDrawError
from src.shadow_draw.app_logic.data_models.manifest import Manifest
from src.shadow_draw.app_logic.services.mock_services import AppServer, mock_services
from src.shadow_draw.app_logic.services.pipeline_controller import (
    run_animated,
    run_dataset,
    run_optimize,
    run_pipeline,
)
from src.shadow_draw.app_logic.services.vlm_backend import create_vlm_app, default_chat_model
from src.shadow_draw.app_logic.utils.common import (
    EXIT_CONFIG_ERROR,
    StageResponse,
    execute_stage,
)

logger = logging.getLogger(__name__)


def get_config(overrides: Sequence[str] = ()) -> PipelineConfig:
    """Compose the packaged config outside of @hydra.main"""
    if not GlobalHydra.instance().is_initialized():
        initialize(config_path="../config", version_base="1.3")
    cfg = compose(config_name="setup", overrides=list(overrides))
    return PipelineConfig.from_container(OmegaConf.to_container(cfg, resolve=True))


def manifest_response(manifest: Manifest) -> StageResponse:
    if manifest.status == "failed":
        return StageResponse(
            success=False,
            message=f"Run failed ({manifest.content.get('error')}), partial manifest in {manifest.run_dir}",
            status_code=503,
            data=manifest.content,
            exit_code=manifest.exit_code,
        )
    if manifest.status == "no_candidates":
        return StageResponse(
            success=False,
            message=f"No candidate survived, manifest in {manifest.run_dir}",
            status_code=400,
            data=manifest.content,
            exit_code=manifest.exit_code,
        )
    return StageResponse(
        success=True,
        message=f"Run {manifest.content['run_id']} written to {manifest.run_dir}",
        data=manifest.content,
    )


def _serve(server: AppServer) -> StageResponse:
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        logger.info("Interrupted")
    finally:
        server.stop()
    return StageResponse(success=True, message="Server stopped")


def serve_mocks(cfg: PipelineConfig) -> StageResponse:
    return _serve(mock_services(cfg.mock_server.seed, cfg.mock_server.host, cfg.mock_server.port))


def serve_vlm(cfg: PipelineConfig) -> StageResponse:
    app = create_vlm_app(default_chat_model(cfg.vlm.model, cfg.vlm.temperature))
    return _serve(AppServer(app, cfg.vlm.host, cfg.vlm.port))


COMMAND_HANDLERS: dict[str, Callable[[PipelineConfig], StageResponse]] = {
    "optimize": lambda cfg: manifest_response(run_optimize(cfg)),
    "generate": lambda cfg: manifest_response(run_pipeline(cfg)),
    "animate": lambda cfg: manifest_response(run_animated(cfg)),
    "dataset": run_dataset,
    "mock-serve": serve_mocks,
    "vlm-serve": serve_vlm,
}


def run_command(cfg: PipelineConfig) -> StageResponse:
    return COMMAND_HANDLERS[cfg.command](cfg)


def run_from_container(container: dict) -> int:
    """Validate the resolved config, run its command and return the exit code"""
    try:
        return execute_stage(run_command, PipelineConfig.from_container(container))
    except ConfigError as exc:
        logger.error("Configuration error: %s", exc)
        return EXIT_CONFIG_ERROR
    except ShadowDrawError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code


@hydra.main(config_path="../config", config_name="setup", version_base="1.3")
def main(cfg: DictConfig) -> None:
    load_dotenv()
    sys.exit(run_from_container(OmegaConf.to_container(cfg, resolve=True)))


if __name__ == "__main__":
    main()
