from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

from src.shadow_draw.app_logic.utils.common import (
    EXIT_NO_CANDIDATES,
    EXIT_OK,
    EXIT_SERVICE_FAILURE,
)

MANIFEST_SCHEMA_VERSION = 1
RunStatus = Literal["ok", "no_candidates", "failed"]


@dataclass(frozen=True)
class Manifest:
    """Written run: the manifest content plus where it lives on disk

    `content` is exactly what `manifest.json` holds; timings are kept apart
    because they are the only run output that is not reproducible.
    """

    run_dir: Path
    content: dict[str, Any]
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def status(self) -> RunStatus:
        return self.content["status"]

    @property
    def records(self) -> list[dict[str, Any]]:
        return self.content["records"]

    @property
    def top_k(self) -> list[dict[str, Any]]:
        return self.content.get("top_k", [])

    @property
    def exit_code(self) -> int:
        if self.status == "failed":
            return EXIT_SERVICE_FAILURE
        if self.status == "no_candidates":
            return EXIT_NO_CANDIDATES
        return EXIT_OK
