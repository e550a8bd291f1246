import contextlib
import json
import logging
import os
import shutil
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterator, Optional

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_SERVICE_FAILURE = 3
EXIT_NO_CANDIDATES = 4


@dataclass
class StageResponse:
    """Outcome of a pipeline stage"""

    success: bool
    message: str
    status_code: int = 200
    data: Optional[Dict[str, Any]] = None
    exit_code: int = EXIT_OK


def handle_stage_response(response: StageResponse) -> int:
    """Log the stage outcome and return the process exit code it maps to"""
    if response.success:
        logger.info(response.message)
    elif response.status_code == 400:
        logger.warning(response.message)
    elif response.status_code >= 500:
        logger.error(response.message)
    else:
        logger.info(response.message)
    return response.exit_code


def execute_stage(stage_func, *args) -> int:
    """Run a stage and turn its response into an exit code"""
    response = stage_func(*args)
    return handle_stage_response(response)


@contextlib.contextmanager
def atomic_directory(final_path: str | Path) -> Iterator[Path]:
    """Yield a scratch directory that replaces final_path only on clean exit"""
    final_path = Path(final_path)
    final_path.parent.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=f".{final_path.name}.", dir=final_path.parent))
    try:
        yield scratch
    except BaseException:
        shutil.rmtree(scratch, ignore_errors=True)
        raise
    if final_path.exists():
        stale = final_path.with_name(f".{final_path.name}.stale")
        shutil.rmtree(stale, ignore_errors=True)
        os.replace(final_path, stale)
        os.replace(scratch, final_path)
        shutil.rmtree(stale, ignore_errors=True)
    else:
        os.replace(scratch, final_path)
    logger.info("Results saved to %s", final_path)


def write_json(path: str | Path, payload: Any) -> None:
    with open(path, "w", encoding="utf-8") as f:
        # Convert the dictionary to a JSON string
        f.write(json.dumps(payload, indent=4, sort_keys=True))
        f.write("\n")


def finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None or value != value or value in (float("inf"), float("-inf")):
        return None
    return value
