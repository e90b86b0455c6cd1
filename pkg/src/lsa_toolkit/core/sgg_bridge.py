"""SGG 연동 모듈.

검출기 출력(관계 확률 또는 하드 라벨) → GraphSequence 변환과
텍스트 예측 → bbox 역매핑.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import replace
from typing import Any

from src.lsa_toolkit.core.merge import merge_sequence
from src.lsa_toolkit.models.graph import FrameGraph, GraphSequence, ObjectState
from src.lsa_toolkit.models.prediction import PredictionRecord
from src.lsa_toolkit.models.vocabulary import DEFAULT_VOCABULARY, PARTITIONS, Vocabulary

logger = logging.getLogger(__name__)


class DetectionError(ValueError):
    """검출 입력 형식 오류."""

    def __init__(self, message: str, frame_id: int | None = None):
        super().__init__(message)
        self.frame_id = frame_id


def binarize(scores: Mapping[str, float], threshold: float = 0.6) -> list[str]:
    """확률 > threshold 인 관계 (입력 순서 유지)."""
    return [name for name, p in scores.items() if p > threshold]


def _object_from_detection(
    item: Mapping[str, Any], threshold: float, vocab: Vocabulary, frame_id: int
) -> ObjectState:
    name = item.get("name")
    if not name or not vocab.has_object(name):
        raise DetectionError(f"Frame {frame_id}: 알 수 없는 객체 {name!r}", frame_id)

    relations: dict[str, list[str]] = {p: [] for p in PARTITIONS}
    if "scores" in item:
        for rel in binarize(item["scores"], threshold):
            partition = vocab.partition_of(rel)
            if partition is None:
                raise DetectionError(f"Frame {frame_id}: 알 수 없는 관계 {rel!r}", frame_id)
            relations[partition].append(rel)
        for rel in item["scores"]:
            if vocab.partition_of(rel) is None:
                raise DetectionError(f"Frame {frame_id}: 알 수 없는 관계 {rel!r}", frame_id)
    else:
        for partition in PARTITIONS:
            for rel in item.get(partition, ()):
                if vocab.partition_of(rel) != partition:
                    raise DetectionError(
                        f"Frame {frame_id}: '{rel}'는 {partition} 관계가 아님", frame_id
                    )
                relations[partition].append(rel)

    bbox = item.get("bbox")
    state = ObjectState(
        name=name,
        attention=tuple(relations["attention"]),
        spatial=tuple(relations["spatial"]),
        contact=tuple(relations["contact"]),
        bbox=tuple(bbox) if bbox is not None else None,
    )
    if state.is_empty:
        return replace(state, partial=True)
    return state


def _merge_duplicate(first: ObjectState, other: ObjectState) -> ObjectState:
    """같은 클래스 중복 검출은 관계 합집합, 첫 bbox 유지."""
    merged = {
        p: first.relations(p) + tuple(r for r in other.relations(p) if r not in first.relations(p))
        for p in PARTITIONS
    }
    return replace(first, **merged, partial=first.partial and other.partial)


def ingest_sgg_text(
    detections: Iterable[Mapping[str, Any]],
    threshold: float = 0.6,
    vocab: Vocabulary = DEFAULT_VOCABULARY,
    video_id: str = "",
) -> GraphSequence:
    """검출 결과를 병합된 GraphSequence로 변환.

    입력 프레임 형식:
        {"frame_id": int, "objects": [{"name": str, "bbox": [x, y, w, h]?,
          "scores": {relation: prob}} 또는 {"attention": [...], "spatial": [...],
          "contact": [...]}]}

    Args:
        detections: 프레임별 검출
        threshold: 이진화 임계값 (p > threshold)
        vocab: 어휘
        video_id: 비디오 id

    Returns:
        GraphSequence (관계가 모두 비어 있는 객체는 partial 로 표시)

    Raises:
        DetectionError: 어휘 밖 객체/관계
    """
    frames: list[FrameGraph] = []
    for frame in sorted(detections, key=lambda f: f["frame_id"]):
        frame_id = int(frame["frame_id"])
        states: dict[str, ObjectState] = {}
        for item in frame.get("objects", ()):
            state = _object_from_detection(item, threshold, vocab, frame_id)
            if state.name in states:
                states[state.name] = _merge_duplicate(states[state.name], state)
            else:
                states[state.name] = state
        flagged = [s.name for s in states.values() if s.partial]
        if flagged:
            logger.warning(f"Frame {frame_id}: 임계값 이상 관계 없음 - {flagged}")
        frames.append(FrameGraph(frame_id, tuple(states.values())))
    return merge_sequence(frames, video_id)


def map_back_to_boxes(record: PredictionRecord, observed: GraphSequence) -> PredictionRecord:
    """예측 객체에 가장 가까운 이전 관측 프레임의 bbox 부여.

    가장 가까운 프레임에 bbox가 없으면 bbox가 있는 더 이전 프레임을 쓴다.
    관측 어디에도 bbox가 없는 객체는 bbox=None.
    """
    observed_frames = observed.frames
    future: list[FrameGraph] = []
    for graph in record.future:
        states = []
        for state in graph.objects:
            bbox = None
            for frame in reversed(observed_frames):
                if frame.frame_id >= graph.frame_id:
                    continue
                seen = frame.get(state.name)
                if seen is not None and seen.bbox is not None:
                    bbox = seen.bbox
                    break
            states.append(replace(state, bbox=bbox))
        future.append(FrameGraph(graph.frame_id, tuple(states)))
    return replace(record, future=tuple(future))
