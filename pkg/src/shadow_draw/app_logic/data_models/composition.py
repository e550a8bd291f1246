from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from src.shadow_draw.app_logic.data_models.contours import ContourSet
from src.shadow_draw.app_logic.data_models.raster import BinaryRaster
from src.shadow_draw.app_logic.data_models.scene import SceneParams

CandidateStatus = Literal["pending", "ranked", "rejected", "failed"]


@dataclass(frozen=True)
class PromptProposal:
    reasoning: str
    description: str
    component: str

    def __post_init__(self):
        if not self.description.strip():
            raise ValueError("Prompt description must not be empty")
        if not self.component.strip():
            raise ValueError("Described component must not be empty")

    def to_dict(self) -> dict:
        return {
            "reasoning": self.reasoning,
            "description": self.description,
            "component": self.component,
        }


@dataclass(frozen=True)
class ScoreBundle:
    clip: float
    ir: float
    hps: float

    def __post_init__(self):
        if not self.clip > 0:
            raise ValueError(f"CLIP similarity must be positive, got {self.clip}")
        if not 0.0 <= self.hps <= 1.0:
            raise ValueError(f"HPS must lie in [0, 1], got {self.hps}")

    def to_dict(self) -> dict:
        return {"clip": self.clip, "ir": self.ir, "hps": self.hps}


@dataclass(frozen=True)
class Deltas:
    d_clip: float
    d_ir: float
    d_hps: float

    def __post_init__(self):
        if not self.d_clip > 0:
            raise ValueError(f"CLIP ratio must be positive, got {self.d_clip}")
        for name in ("d_ir", "d_hps"):
            value = getattr(self, name)
            if not -1.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (-1, 1), got {value}")

    @property
    def rank_score(self) -> float:
        return self.d_clip * self.d_ir * self.d_hps

    def to_dict(self) -> dict:
        return {"d_clip": self.d_clip, "d_ir": self.d_ir, "d_hps": self.d_hps}


@dataclass
class CompositionCandidate:
    """One scene configuration carried through generation, verification and ranking

    Filled in stage by stage by the pipeline controller; rejected candidates
    keep the reason of their rejection.
    """

    index: int
    params: SceneParams
    contour: Optional[ContourSet] = None
    prompt: Optional[PromptProposal] = None
    drawing_full: Optional[BinaryRaster] = None
    drawing_partial: Optional[BinaryRaster] = None
    composite: Optional[np.ndarray] = None
    scores_full: Optional[ScoreBundle] = None
    scores_partial: Optional[ScoreBundle] = None
    vqa_pass: Optional[bool] = None
    deltas: Optional[Deltas] = None
    rank_score: Optional[float] = None
    status: CandidateStatus = "pending"
    reason: Optional[str] = None
    rank: Optional[int] = None
    artifacts: dict[str, str] = field(default_factory=dict)

    def reject(self, reason: str) -> None:
        self.status = "rejected"
        self.reason = reason
        self.rank_score = None

    def fail(self, reason: str) -> None:
        self.status = "failed"
        self.reason = reason
        self.rank_score = None

    @property
    def is_alive(self) -> bool:
        return self.status == "pending"
