"""Vision-language backend for /propose and /verify on top of a LangChain chat model"""

import logging
from typing import Optional

from flask import Flask, jsonify, request
from langchain_core.language_models.chat_models import BaseChatModel
from langchain_core.messages import HumanMessage, SystemMessage
from langchain_openai import ChatOpenAI

logger = logging.getLogger(__name__)

PROPOSE_INSTRUCTION = "Interpret the contour in this image following your instructions."
SUBJECT_INSTRUCTION = "The subject of the drawing must be a {subject}."
VERIFY_SYSTEM_PROMPT = (
    "You verify line drawings. Answer the question about the image with a single word: "
    "yes or no."
)


def _image_part(png_b64: str) -> dict:
    return {"type": "image_url", "image_url": {"url": f"data:image/png;base64,{png_b64}"}}


def propose_messages(
    contour_png_b64: str, system_prompt: str, subject_override: Optional[str] = None
) -> list:
    text = PROPOSE_INSTRUCTION
    if subject_override:
        text = f"{text} {SUBJECT_INSTRUCTION.format(subject=subject_override)}"
    return [
        SystemMessage(content=system_prompt),
        HumanMessage(content=[{"type": "text", "text": text}, _image_part(contour_png_b64)]),
    ]


def verify_messages(image_png_b64: str, question: str) -> list:
    return [
        SystemMessage(content=VERIFY_SYSTEM_PROMPT),
        HumanMessage(content=[{"type": "text", "text": question}, _image_part(image_png_b64)]),
    ]


def default_chat_model(model: str = "gpt-4.1", temperature: float = 0.0) -> BaseChatModel:
    return ChatOpenAI(model=model, temperature=temperature)


def create_vlm_app(chat_model: BaseChatModel) -> Flask:
    app = Flask("shadow_draw_vlm")

    @app.route("/propose", methods=["POST"])
    def propose():
        body = request.get_json(force=True)
        messages = propose_messages(
            body["contour_png_b64"], body["system_prompt"], body.get("subject_override")
        )
        reply = chat_model.invoke(messages)
        logger.info("Proposal received (%d chars)", len(reply.content))
        return jsonify({"reply_text": reply.content})

    @app.route("/verify", methods=["POST"])
    def verify():
        body = request.get_json(force=True)
        reply = chat_model.invoke(verify_messages(body["image_png_b64"], body["question"]))
        return jsonify({"answer": reply.content})

    return app
