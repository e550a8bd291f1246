"""Deterministic stand-ins for the external services, served with Flask

Behaviour can be forced per request with the `X-Mock-Behavior` header:
`force:no` / `force:maybe` on /verify, `force:violate` on /generate and
`force:malformed` on /propose.
"""

import hashlib
import io
import logging
import threading
from typing import Optional

import numpy as np
from flask import Flask, jsonify, request
from PIL import Image, ImageDraw
from werkzeug.serving import make_server

from src.shadow_draw.app_logic.data_models.errors import PortInUse
from src.shadow_draw.app_logic.utils.image_io import from_b64, to_b64

logger = logging.getLogger(__name__)

BEHAVIOR_HEADER = "X-Mock-Behavior"
DEFAULT_SUBJECT = "fish"
N_DECORATIVE_STROKES = 6
INK_GAIN = 40.0


def proposal_template(subject: str) -> str:
    return (
        f"The provided contour shows an outline of the body of a {subject}. "
        "The reason is the closed, elongated shape reads as a torso seen from the side. "
        "Its position near the canvas center leaves room for the head and limbs.\n\n"
        f"A minimalist line drawing of a {subject} in a calm pose. "
        f"The {subject} has round eyes and wears a small scarf. "
        "The style is clean and continuous, with a focus on flowing outlines."
    )


def _digest_int(*parts: bytes) -> int:
    digest = hashlib.sha256()
    for part in parts:
        digest.update(part)
        digest.update(b"\x00")
    return int.from_bytes(digest.digest()[:8], "big")


def _gray(png: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(png)) as image:
        return np.array(image.convert("L"), dtype=np.uint8)


def _png(pixels: np.ndarray) -> bytes:
    buffer = io.BytesIO()
    Image.fromarray(pixels).save(buffer, format="PNG")
    return buffer.getvalue()


def decorative_strokes(shape: tuple[int, int], seed: int) -> np.ndarray:
    """A few seed-dependent lines and arcs, as a boolean stroke mask"""
    height, width = shape
    rng = np.random.default_rng(seed)
    canvas = Image.new("L", (width, height), 0)
    draw = ImageDraw.Draw(canvas)
    for _ in range(N_DECORATIVE_STROKES):
        x0, x1 = sorted(rng.integers(0, width, size=2).tolist())
        y0, y1 = sorted(rng.integers(0, height, size=2).tolist())
        if rng.random() < 0.5:
            draw.line([(x0, y0), (x1, y1)], fill=255, width=2)
        else:
            start = int(rng.integers(0, 360))
            draw.arc([(x0, y0), (max(x1, x0 + 4), max(y1, y0 + 4))], start, start + 120, fill=255, width=2)
    return np.array(canvas) > 0


def mock_scores(image_png: bytes, text: str) -> dict[str, float]:
    """Deterministic bundle; more ink (e.g. the full drawing) scores higher

    The hash jitter stays below the weight of a single stroke pixel on a
    256x256 canvas, so a drawing never outscores itself plus extra strokes.
    """
    pixels = _gray(image_png)
    ink = float((pixels < 128).mean())
    jitter = (_digest_int(image_png, text.encode("utf-8")) % 1000) * 1e-9
    return {
        "clip": round(0.2 + ink + jitter, 10),
        "ir": round(-1.0 + INK_GAIN * ink + jitter, 10),
        "hps": round(min(0.15 + ink + jitter, 1.0), 10),
    }


def create_mock_app(seed: int = 0) -> Flask:
    app = Flask("shadow_draw_mock")

    def behavior() -> str:
        return request.headers.get(BEHAVIOR_HEADER, "")

    @app.route("/propose", methods=["POST"])
    def propose():
        body = request.get_json(force=True)
        subject = body.get("subject_override") or DEFAULT_SUBJECT
        if behavior() == "force:malformed":
            return jsonify({"reply_text": proposal_template(subject).replace("\n\n", " ")})
        return jsonify({"reply_text": proposal_template(subject)})

    @app.route("/generate", methods=["POST"])
    def generate():
        body = request.get_json(force=True)
        contour = _gray(from_b64(body["contour_png_b64"])) >= 128
        keepout = _gray(from_b64(body["keepout_png_b64"])) >= 128
        stroke_seed = _digest_int(str(seed).encode(), str(int(body["seed"])).encode())
        strokes = contour | decorative_strokes(contour.shape, stroke_seed)
        if behavior() == "force:violate":
            strokes |= keepout
        else:
            # masked pixels are preserved as blank canvas
            strokes &= ~keepout
        drawing = np.where(strokes, 0, 255).astype(np.uint8)
        return jsonify({"drawing_png_b64": to_b64(_png(drawing))})

    @app.route("/verify", methods=["POST"])
    def verify():
        request.get_json(force=True)
        forced = behavior()
        if forced == "force:no":
            return jsonify({"answer": "No."})
        if forced == "force:maybe":
            return jsonify({"answer": "maybe"})
        return jsonify({"answer": "Yes."})

    @app.route("/score", methods=["POST"])
    def score():
        body = request.get_json(force=True)
        return jsonify(mock_scores(from_b64(body["image_png_b64"]), body["text"]))

    return app


class AppServer:
    """Serve a Flask app on a background thread; port 0 picks a free port"""

    def __init__(self, app: Flask, host: str = "127.0.0.1", port: int = 0):
        try:
            self._server = make_server(host, port, app, threaded=True)
        except OSError as exc:
            raise PortInUse(f"Cannot bind {host}:{port}: {exc}") from exc
        self._name = app.name
        self.host = host
        self.port = self._server.server_port
        self._thread: Optional[threading.Thread] = None

    def url(self, path: str) -> str:
        return f"http://{self.host}:{self.port}/{path.lstrip('/')}"

    def endpoints(self) -> dict[str, str]:
        return {name: self.url(name) for name in ("propose", "generate", "verify", "score")}

    def start(self) -> "AppServer":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        logger.info("Serving %s on %s:%d", self._name, self.host, self.port)
        return self

    def stop(self) -> None:
        if self._thread is not None:
            # shutdown() waits for serve_forever, so only call it once serving
            self._server.shutdown()
            self._thread.join()
            self._thread = None
        self._server.server_close()

    def serve_forever(self) -> None:
        logger.info("Serving %s on %s:%d", self._name, self.host, self.port)
        self._server.serve_forever()

    def __enter__(self) -> "AppServer":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()


def mock_services(seed: int = 0, host: str = "127.0.0.1", port: int = 0) -> AppServer:
    return AppServer(create_mock_app(seed), host=host, port=port)
