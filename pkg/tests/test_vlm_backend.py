from langchain_core.language_models import FakeListChatModel
from langchain_core.messages import HumanMessage, SystemMessage

from src.shadow_draw.app_logic.services.vlm_backend import (
    VERIFY_SYSTEM_PROMPT,
    create_vlm_app,
    propose_messages,
    verify_messages,
)

REPLY = "It is an outline of the back of a cat.\n\nA sleeping cat curled on a rug."


def test_propose_messages_carry_the_image_and_prompt():
    system, human = propose_messages("QUJD", "be an artist")
    assert isinstance(system, SystemMessage)
    assert system.content == "be an artist"
    assert isinstance(human, HumanMessage)
    text, image = human.content
    assert "subject" not in text["text"]
    assert image["image_url"]["url"] == "data:image/png;base64,QUJD"


def test_subject_override_is_added_to_the_instruction():
    _, human = propose_messages("QUJD", "be an artist", subject_override="owl")
    assert "must be a owl" in human.content[0]["text"]


def test_verify_messages():
    system, human = verify_messages("QUJD", "Is it a tail?")
    assert system.content == VERIFY_SYSTEM_PROMPT
    assert human.content[0]["text"] == "Is it a tail?"


def test_app_relays_the_chat_model():
    app = create_vlm_app(FakeListChatModel(responses=[REPLY, "Yes"]))
    with app.test_client() as http:
        proposal = http.post(
            "/propose", json={"contour_png_b64": "QUJD", "system_prompt": "be an artist"}
        )
        assert proposal.get_json() == {"reply_text": REPLY}
        answer = http.post("/verify", json={"image_png_b64": "QUJD", "question": "Tail?"})
        assert answer.get_json() == {"answer": "Yes"}
