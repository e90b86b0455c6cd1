"""Pytest fixtures for LSA Toolkit tests."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from src.lsa_toolkit.benchmark.builder import split_video
from src.lsa_toolkit.core.json_parser import CorpusParser
from src.lsa_toolkit.models.graph import FrameGraph, ObjectState
from src.lsa_toolkit.models.instance import LsaInstance, VideoRecord
from src.lsa_toolkit.models.prediction import PredictionRecord

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "test_data" / "fixtures"

# 예시 비디오 미래 프레임 (0.9 분할)
BROOM_FUTURE = [486, 499, 518]


def read_fixture(name: str) -> str:
    """fixture 텍스트 (끝 개행 없음)."""
    return (FIXTURES_DIR / name).read_text(encoding="utf-8")


def make_state(name: str, attention=(), spatial=(), contact=(), bbox=None) -> ObjectState:
    """ObjectState 축약 생성."""
    return ObjectState(
        name=name,
        attention=tuple(attention),
        spatial=tuple(spatial),
        contact=tuple(contact),
        bbox=bbox,
    )


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES_DIR


@pytest.fixture
def broom_video() -> VideoRecord:
    """빗자루 청소 예시 비디오 (39 프레임)."""
    result = CorpusParser().parse_file(FIXTURES_DIR / "broom_video.json")
    assert result.ok
    return result.records[0]


@pytest.fixture
def broom_instance(broom_video: VideoRecord) -> LsaInstance:
    """관측 0.9 분할 (관측 36, 미래 486/499/518)."""
    return split_video(broom_video, 0.9)


@pytest.fixture
def model_outputs() -> dict:
    """모델별 GOA/OORA 원문 출력."""
    return json.loads(read_fixture("model_outputs.json"))


@pytest.fixture
def clean_env(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> Path:
    """LSA_ 환경 변수와 .env 영향을 제거한 작업 디렉토리."""
    import os

    for key in list(os.environ):
        if key.startswith("LSA_"):
            monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path


def simple_frame(frame_id: int, *states: ObjectState) -> FrameGraph:
    return FrameGraph(frame_id, tuple(states))


# 예시 비디오 0.9 분할에 대한 저장된 모델(ootsm) 예측
OOTSM_FUTURE = (
    FrameGraph(486, (
        make_state("floor", ["looking_at"], ["beneath", "in_front_of"], ["standing_on"]),
        make_state("broom", ["not_looking_at"], ["on_the_side_of"], ["holding"]),
    )),
    FrameGraph(499, (
        make_state("floor", ["looking_at"], ["beneath"], ["standing_on"]),
        make_state("broom", ["not_looking_at"], ["on_the_side_of"], ["holding"]),
    )),
    FrameGraph(518, (
        make_state("floor", ["looking_at"], ["beneath"], ["standing_on"]),
        make_state("broom", ["not_looking_at"], ["on_the_side_of"], ["holding"]),
        make_state("doorway", ["not_looking_at"], ["in"], ["not_contacting"]),
    )),
)


@pytest.fixture
def ootsm_record() -> PredictionRecord:
    """fixture 실행 결과와 같은 예측 레코드."""
    return PredictionRecord(
        video_id="broom_sweeping",
        fraction=0.9,
        mode="with_goa",
        future=OOTSM_FUTURE,
        goa_objects={f.frame_id: f.object_names for f in OOTSM_FUTURE},
        oora_calls=3,
        provenance={"backend": "fixture"},
        timing={"goa_latency_s": 0.5, "oora_latency_s": [0.25, 0.25, 0.5]},
    )
