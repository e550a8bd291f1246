"""Composition assembly and the filter / ranking mathematics"""

import logging
import re
from typing import Sequence

import numpy as np
from scipy import ndimage
from scipy.special import erf

from src.shadow_draw.app_logic.data_models.composition import (
    CompositionCandidate,
    Deltas,
    PromptProposal,
    ScoreBundle,
)
from src.shadow_draw.app_logic.data_models.contours import ContourSet, KeepoutMask
from src.shadow_draw.app_logic.data_models.errors import (
    DeltaOutOfRange,
    DivisionDomain,
    FormatError,
    MaskViolation,
    SpecMismatch,
)
from src.shadow_draw.app_logic.data_models.raster import BinaryRaster, ensure_same_spec
from src.shadow_draw.app_logic.engine.contour_tools import disc_dilate

logger = logging.getLogger(__name__)

BACKGROUND_LEVEL = 255
SHADOW_LEVEL = 128
OBJECT_LEVEL = 64
STROKE_LEVEL = 0
MAX_MASK_VIOLATION = 0.02

VQA_QUESTION = "Does the highlighted stroke outline the described component?"
OVERLAY_RED = (255, 0, 0)
FRAME_PALETTE = (
    (255, 0, 0),
    (0, 255, 0),
    (0, 0, 255),
    (255, 0, 255),
    (0, 255, 255),
)

_PARAGRAPH_BREAK = re.compile(r"\n\s*\n")
_COMPONENT_PATTERN = re.compile(
    r"outline of (?P<part>.+?) of (?P<article>an?|the) (?P<character>[^.,;]+)",
    re.IGNORECASE,
)


def parse_proposal(reply: str) -> PromptProposal:
    """Split a two-paragraph reply into reasoning, description and component"""
    paragraphs = [p.strip() for p in _PARAGRAPH_BREAK.split(reply.strip()) if p.strip()]
    if len(paragraphs) != 2:
        raise FormatError(
            f"Expected two paragraphs separated by a blank line, got {len(paragraphs)}"
        )
    reasoning, description = paragraphs
    match = _COMPONENT_PATTERN.search(reasoning)
    if match:
        part = match.group("part").strip()
        if not part.lower().startswith(("the ", "a ", "an ")):
            part = f"the {part}"
        component = f"{part} of {match.group('article')} {match.group('character').strip()}"
    else:
        component = re.split(r"(?<=[.!?])\s", reasoning, maxsplit=1)[0].rstrip(".")
    return PromptProposal(reasoning=reasoning, description=description, component=component)


def normalize_answer(answer: str) -> str | None:
    """Map free text onto 'yes' / 'no', None when it is neither"""
    words = re.findall(r"[a-z]+", answer.lower())
    if not words:
        return None
    if words[0] in ("yes", "no"):
        return words[0]
    return None


def keepout_violation(drawing: BinaryRaster, keepout: KeepoutMask) -> float:
    """Fraction of stroke pixels that fall inside the keep-out mask"""
    ensure_same_spec(drawing, keepout.mask)
    strokes = drawing.bits.sum()
    if not strokes:
        return 0.0
    return float((drawing.bits & keepout.mask.bits).sum() / strokes)


def check_keepout(
    drawing: BinaryRaster, keepout: KeepoutMask, max_fraction: float = MAX_MASK_VIOLATION
) -> None:
    fraction = keepout_violation(drawing, keepout)
    if fraction > max_fraction:
        raise MaskViolation(
            f"{fraction:.1%} of the strokes are inside the keep-out mask "
            f"(limit {max_fraction:.0%})"
        )


def erase_contour(drawing: BinaryRaster, contours: ContourSet, band_px: float) -> BinaryRaster:
    """Clear every stroke pixel within band_px of the traced contour"""
    if band_px < 1:
        raise ValueError(f"Erase band must be at least 1px, got {band_px}")
    if contours.source_spec != drawing.spec:
        raise SpecMismatch("Contour and drawing use different specs")
    band = disc_dilate(contours.pixel_mask(), band_px)
    return BinaryRaster(drawing.spec, drawing.bits & ~band)


def composite(
    drawing_partial: BinaryRaster, shadow: BinaryRaster, footprint: BinaryRaster
) -> np.ndarray:
    """Grayscale composition: white, gray shadow, dark object with black outline, black strokes"""
    spec = ensure_same_spec(drawing_partial, shadow, footprint)
    image = np.full(spec.shape, BACKGROUND_LEVEL, dtype=np.uint8)
    image[shadow.bits] = SHADOW_LEVEL
    image[footprint.bits] = OBJECT_LEVEL
    interior = ndimage.binary_erosion(footprint.bits, structure=np.ones((3, 3)), border_value=0)
    image[footprint.bits & ~interior] = STROKE_LEVEL
    image[drawing_partial.bits] = STROKE_LEVEL
    return image


def red_overlay(drawing: BinaryRaster, contours: ContourSet) -> np.ndarray:
    """RGB image: black strokes on white with the traced contour in pure red"""
    if contours.source_spec != drawing.spec:
        raise SpecMismatch("Contour and drawing use different specs")
    image = np.full(drawing.spec.shape + (3,), BACKGROUND_LEVEL, dtype=np.uint8)
    image[drawing.bits] = STROKE_LEVEL
    image[contours.pixel_mask()] = OVERLAY_RED
    return image


def frame_overlay(frame_contours: Sequence[BinaryRaster]) -> np.ndarray:
    """RGB overlay of per-keyframe contour images, one palette color per frame"""
    if len(frame_contours) > len(FRAME_PALETTE):
        raise ValueError(f"At most {len(FRAME_PALETTE)} frames can be overlaid")
    spec = ensure_same_spec(*frame_contours)
    image = np.zeros(spec.shape + (3,), dtype=np.uint8)
    for contour_image, color in zip(frame_contours, FRAME_PALETTE):
        image[contour_image.bits] = color
    return image


def vqa_question(component: str) -> str:
    return f"The red stroke is meant to outline {component}. {VQA_QUESTION} Answer yes or no."


def gaussian_cdf(x: float) -> float:
    return float(0.5 * (1.0 + erf(x / np.sqrt(2.0))))


def contribution_filter(full: ScoreBundle, partial: ScoreBundle) -> bool:
    """Keep unless the contour-free drawing scores higher on ImageReward or HPS"""
    return full.ir >= partial.ir and full.hps >= partial.hps


def deltas(full: ScoreBundle, partial: ScoreBundle) -> Deltas:
    if not partial.clip > 0:
        raise DivisionDomain(f"Partial CLIP score must be positive, got {partial.clip}")
    try:
        return Deltas(
            d_clip=full.clip**2 / partial.clip**2,
            d_ir=gaussian_cdf(full.ir) ** 2 - gaussian_cdf(partial.ir) ** 2,
            d_hps=full.hps**2 - partial.hps**2,
        )
    except ValueError as exc:
        raise DeltaOutOfRange(str(exc)) from exc


def rank(candidates: Sequence[CompositionCandidate], k: int = 4) -> list[CompositionCandidate]:
    """Top-k surviving candidates by rank score; ties keep candidate index order"""
    survivors = []
    for candidate in candidates:
        if candidate.status in ("rejected", "failed"):
            continue
        if candidate.deltas is None:
            candidate.deltas = deltas(candidate.scores_full, candidate.scores_partial)
        candidate.rank_score = candidate.deltas.rank_score
        survivors.append(candidate)

    ordered = sorted(survivors, key=lambda c: (-c.rank_score, c.index))
    for position, candidate in enumerate(ordered):
        candidate.status = "ranked"
        candidate.rank = position + 1 if position < k else None
    if not ordered:
        logger.warning("No candidate survived verification and filtering")
    return ordered[:k]
