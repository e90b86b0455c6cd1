"""LLM 응답 파서 테스트.

예시 비디오에 대한 각 모델의 원문 출력이 정확한 구조로 복구되는지 확인한다.
"""

from __future__ import annotations

import pytest

from src.lsa_toolkit.core.response_parser import (
    TotalParseFailure,
    normalize_token,
    parse_goa_response,
    parse_oora_response,
)
from tests.conftest import BROOM_FUTURE, make_state

MODELS = ["gpt-4o-mini", "gpt-4o", "deepseek-v3", "ootsm"]


def floor_state(attention, spatial):
    return make_state("floor", [attention], spatial, ["standing_on"])


def broom_state(attention, spatial, contact):
    return make_state("broom", [attention], [spatial], [contact])


EXPECTED_OORA = {
    "gpt-4o-mini": {
        "floor": {
            486: floor_state("looking_at", ["beneath", "in_front_of"]),
            499: floor_state("not_looking_at", ["beneath", "in_front_of"]),
            518: floor_state("unsure", ["beneath", "in_front_of"]),
        },
        "broom": {
            486: broom_state("not_looking_at", "in_front_of", "holding"),
            499: broom_state("looking_at", "in_front_of", "holding"),
            518: broom_state("looking_at", "on_the_side_of", "holding"),
        },
    },
    "gpt-4o": {
        "floor": {f: floor_state("looking_at", ["beneath", "in_front_of"]) for f in BROOM_FUTURE},
        "broom": {
            486: broom_state("looking_at", "in_front_of", "not_contacting"),
            499: broom_state("looking_at", "in_front_of", "holding"),
            518: broom_state("not_looking_at", "in_front_of", "holding"),
        },
    },
    "deepseek-v3": {
        "floor": {f: floor_state("looking_at", ["beneath", "in_front_of"]) for f in BROOM_FUTURE},
        "broom": {
            486: broom_state("looking_at", "in_front_of", "holding"),
            499: broom_state("looking_at", "in_front_of", "holding"),
            518: broom_state("not_looking_at", "in_front_of", "not_contacting"),
        },
    },
    "ootsm": {
        "floor": {
            486: floor_state("looking_at", ["beneath", "in_front_of"]),
            499: floor_state("looking_at", ["beneath"]),
            518: floor_state("looking_at", ["beneath"]),
        },
        "broom": {f: broom_state("not_looking_at", "on_the_side_of", "holding")
                  for f in BROOM_FUTURE},
        "doorway": {518: make_state("doorway", ["not_looking_at"], ["in"], ["not_contacting"])},
    },
}


class TestGoaGolden:
    """모델 출력 GOA 파싱."""

    @pytest.mark.parametrize("model", ["gpt-4o-mini", "gpt-4o", "deepseek-v3"])
    def test_floor_and_broom(self, model_outputs, model):
        prediction = parse_goa_response(model_outputs[model]["goa"], BROOM_FUTURE)

        assert prediction.frames == {f: ("floor", "broom") for f in BROOM_FUTURE}
        assert prediction.diagnostics == ()

    def test_doorway_only_at_last_frame(self, model_outputs):
        prediction = parse_goa_response(model_outputs["ootsm"]["goa"], BROOM_FUTURE)

        assert prediction.frames[518] == ("floor", "broom", "doorway")
        assert prediction.frames_for("doorway") == [518]
        assert prediction.target_objects() == ["floor", "broom", "doorway"]


class TestOoraGolden:
    """모델 출력 OORA 파싱."""

    @pytest.mark.parametrize(
        ("model", "name"),
        [(m, n) for m in MODELS for n in EXPECTED_OORA[m]],
    )
    def test_structured_graphs(self, model_outputs, model, name):
        frames = sorted(EXPECTED_OORA[model][name])

        prediction = parse_oora_response(model_outputs[model]["oora"][name], name, frames)

        assert prediction.frames == EXPECTED_OORA[model][name]
        assert not any(s.partial for s in prediction.frames.values())
        assert prediction.diagnostics == ()


class TestGoaRecovery:
    """GOA 복구 파싱."""

    def test_unknown_object_dropped(self):
        prediction = parse_goa_response("Frame 5: broom, spoon", [5])

        assert prediction.frames == {5: ("broom",)}
        assert [(d.kind, d.token, d.line_no) for d in prediction.diagnostics] == [
            ("unknown_object", "spoon", 1)
        ]

    def test_missing_and_extra_frames(self):
        prediction = parse_goa_response("Frame 5: broom\nFrame 9: floor", [5, 6])

        assert prediction.frames == {5: ("broom",), 6: ()}
        kinds = {(d.kind, d.frame_id) for d in prediction.diagnostics}
        assert kinds == {("extra_frame", 9), ("missing_frame", 6)}

    def test_commentary_and_markdown(self):
        text = "Sure! Here you go:\n**Frame 5: broom, floor**\n"

        prediction = parse_goa_response(text, [5])

        assert prediction.frames == {5: ("broom", "floor")}
        assert prediction.diagnostics[0].kind == "unparsed_line"

    def test_duplicate_frame_keeps_last(self):
        prediction = parse_goa_response("Frame 5: broom\nFrame 5: floor", [5])

        assert prediction.frames == {5: ("floor",)}
        assert prediction.diagnostics[0].kind == "duplicate_frame"

    def test_normalization_opt_in(self):
        text = "Frame 5: Broom, Cup/Glass/Bottle"

        strict = parse_goa_response(text, [5])
        lenient = parse_goa_response(text, [5], normalize=True)

        assert strict.frames == {5: ()}
        assert lenient.frames == {5: ("broom", "cup/glass/bottle")}

    def test_total_failure(self):
        with pytest.raises(TotalParseFailure) as exc_info:
            parse_goa_response("I cannot predict the future.", [5])
        assert exc_info.value.stage == "goa"
        assert exc_info.value.diagnostics[0].kind == "unparsed_line"


class TestOoraRecovery:
    """OORA 복구 파싱."""

    def test_partition_violation_marks_partial(self):
        text = "Frame 5: object: broom attention: looking_at, spatial: holding, contact: holding"

        prediction = parse_oora_response(text, "broom", [5])
        state = prediction.frames[5]

        assert state.spatial == ()
        assert state.contact == ("holding",)
        assert state.partial
        assert prediction.diagnostics[0].kind == "partition_violation"

    def test_wrong_object_rejected(self):
        text = (
            "Frame 5: object: floor attention: looking_at, spatial: beneath, contact: standing_on\n"
            "Frame 5: object: broom attention: looking_at, spatial: in_front_of, contact: holding"
        )

        prediction = parse_oora_response(text, "broom", [5])

        assert list(prediction.frames) == [5]
        assert prediction.diagnostics[0].kind == "wrong_object"

    def test_without_object_keyword(self):
        """one-shot 예시처럼 'object:' 없이 이름만 쓴 줄도 받는다."""
        text = (
            "Frame 226: medicine attention: not_looking_at, spatial: in_front_of, contact: holding"
        )

        prediction = parse_oora_response(text, "medicine", [226])

        assert prediction.frames[226].attention == ("not_looking_at",)

    def test_multi_valued(self):
        text = (
            "Frame 236: object: medicine attention: looking_at, spatial: in_front_of, "
            "contact: holding, eating."
        )

        prediction = parse_oora_response(text, "medicine", [236])

        assert prediction.frames[236].contact == ("holding", "eating")

    def test_missing_frame_diagnostic(self):
        text = (
            "Frame 5: object: broom attention: looking_at, spatial: in_front_of, contact: holding"
        )

        prediction = parse_oora_response(text, "broom", [5, 6])

        assert 6 not in prediction.frames
        assert prediction.diagnostics[-1].kind == "missing_frame"

    def test_total_failure(self):
        with pytest.raises(TotalParseFailure) as exc_info:
            parse_oora_response("no idea", "broom", [5])
        assert exc_info.value.object == "broom"


def test_normalize_token():
    assert normalize_token("  Looking At ") == "looking_at"
