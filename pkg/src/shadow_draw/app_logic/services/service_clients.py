"""JSON-over-HTTP clients for prompt proposal, drawing generation, VQA and scoring"""

import logging
import time
from pathlib import Path
from typing import Any, Optional

import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from src.shadow_draw.app_logic.data_models.composition import PromptProposal, ScoreBundle
from src.shadow_draw.app_logic.data_models.config import ServicesConfig
from src.shadow_draw.app_logic.data_models.contours import ContourSet, KeepoutMask
from src.shadow_draw.app_logic.data_models.errors import FormatError, ServiceError
from src.shadow_draw.app_logic.data_models.raster import BinaryRaster
from src.shadow_draw.app_logic.engine.compose_rank import (
    check_keepout,
    normalize_answer,
    parse_proposal,
    red_overlay,
    vqa_question,
)
from src.shadow_draw.app_logic.utils.image_io import (
    drawing_to_png,
    from_b64,
    image_to_png,
    png_to_drawing,
    raster_to_png,
    to_b64,
)

logger = logging.getLogger(__name__)

DEFAULT_PROMPT_FILE = Path(__file__).resolve().parents[2] / "config" / "prompts" / "system_prompt.txt"
DEFAULT_SUBJECT_SENTENCE = (
    "The subject you draw should be a character, either a human, an animal, "
    "or a cartoon or anthropomorphic figure."
)


def load_system_prompt(path: Optional[str | Path] = None, subject: Optional[str] = None) -> str:
    with open(path or DEFAULT_PROMPT_FILE, "r", encoding="utf-8") as f:
        prompt = f.read().strip()
    if subject:
        prompt = prompt.replace(
            DEFAULT_SUBJECT_SENTENCE, f"The subject you draw should be a {subject}."
        )
    return prompt


class ServiceClient:
    """Thin session wrapper: retries transport errors and 5xx answers with backoff"""

    def __init__(self, cfg: ServicesConfig, session: Optional[requests.Session] = None):
        self.cfg = cfg
        self.session = session or requests.Session()
        retry = Retry(
            total=cfg.retries,
            connect=cfg.retries,
            read=cfg.retries,
            status=cfg.retries,
            backoff_factor=cfg.backoff_s,
            status_forcelist=(500, 502, 503, 504),
            allowed_methods=frozenset({"POST"}),
            raise_on_status=False,
        )
        adapter = HTTPAdapter(max_retries=retry, pool_maxsize=max(cfg.max_concurrency, 1))
        self.session.mount("http://", adapter)
        self.session.mount("https://", adapter)

    def post(self, service: str, payload: dict[str, Any]) -> dict[str, Any]:
        url = self.cfg.endpoints[service]
        headers = self.cfg.headers.get(service) or {}
        started = time.perf_counter()
        try:
            response = self.session.post(
                url, json=payload, headers=headers, timeout=self.cfg.timeout_s
            )
        except requests.RequestException as exc:
            raise ServiceError(f"{service}: request to {url} failed: {exc}") from exc
        logger.debug(
            "%s answered %d in %.3fs", service, response.status_code, time.perf_counter() - started
        )
        if response.status_code != 200:
            raise ServiceError(f"{service}: {url} answered HTTP {response.status_code}")
        try:
            return response.json()
        except ValueError as exc:
            raise ServiceError(f"{service}: reply is not JSON") from exc

    def _field(self, service: str, reply: dict[str, Any], key: str) -> Any:
        if key not in reply:
            raise ServiceError(f"{service}: reply lacks {key!r}")
        return reply[key]

    def propose_prompt(
        self,
        contour_png: bytes,
        system_prompt: str,
        subject_override: Optional[str] = None,
    ) -> PromptProposal:
        payload = {"contour_png_b64": to_b64(contour_png), "system_prompt": system_prompt}
        if subject_override:
            payload["subject_override"] = subject_override

        error: Optional[FormatError] = None
        for attempt in range(self.cfg.retries + 1):
            reply = self.post("propose", payload)
            try:
                return parse_proposal(str(self._field("propose", reply, "reply_text")))
            except (FormatError, ValueError) as exc:
                error = FormatError(f"propose: {exc}")
                logger.warning("Malformed proposal (attempt %d): %s", attempt + 1, exc)
        raise error

    def generate_drawing(
        self,
        contour: BinaryRaster,
        prompt: str,
        keepout: KeepoutMask,
        seed: int,
    ) -> BinaryRaster:
        """Request a line drawing and enforce the keep-out contract on it"""
        reply = self.post(
            "generate",
            {
                "contour_png_b64": to_b64(raster_to_png(contour)),
                "prompt": prompt,
                "keepout_png_b64": to_b64(raster_to_png(keepout.mask)),
                "seed": int(seed),
            },
        )
        try:
            drawing = png_to_drawing(
                from_b64(self._field("generate", reply, "drawing_png_b64")), contour.spec
            )
        except ServiceError:
            raise
        except Exception as exc:
            raise ServiceError(f"generate: unreadable drawing: {exc}") from exc
        check_keepout(drawing, keepout, self.cfg.max_mask_violation)
        return drawing

    def vqa_gate(self, drawing_full: BinaryRaster, contours: ContourSet, component: str) -> bool:
        payload = {
            "image_png_b64": to_b64(image_to_png(red_overlay(drawing_full, contours))),
            "question": vqa_question(component),
        }
        for attempt in range(self.cfg.retries + 1):
            answer = normalize_answer(str(self._field("verify", self.post("verify", payload), "answer")))
            if answer is not None:
                return answer == "yes"
            logger.warning("VQA answer is neither yes nor no (attempt %d)", attempt + 1)
        raise FormatError("verify: answer is neither yes nor no")

    def score(self, drawing: BinaryRaster, text: str) -> ScoreBundle:
        reply = self.post("score", {"image_png_b64": to_b64(drawing_to_png(drawing)), "text": text})
        try:
            return ScoreBundle(
                clip=float(self._field("score", reply, "clip")),
                ir=float(self._field("score", reply, "ir")),
                hps=float(self._field("score", reply, "hps")),
            )
        except ValueError as exc:
            raise ServiceError(f"score: invalid bundle {reply}: {exc}") from exc
