"""Recall@K / meanRecall@K.

LLM 출력에는 신뢰도 점수가 없으므로 top-K는 생성 순서
(객체 순서, 그 다음 attention → spatial → contact)를 따른다.
집계는 macro: 프레임 평균 → 비디오 평균 → 코퍼스 평균.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from statistics import fmean
from typing import Any

from src.lsa_toolkit.models.graph import FrameGraph, GraphSequence
from src.lsa_toolkit.models.prediction import PredictionRecord

Triple = tuple[str, str]


@dataclass(frozen=True)
class MeanRecallResult:
    """meanRecall@K 결과 (클래스별 recall 포함)."""

    value: float | None
    per_class: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"value": self.value, "per_class": dict(sorted(self.per_class.items()))}


def flatten_triples(frame: FrameGraph | None) -> list[Triple]:
    """(object, relation) 목록 - 생성 순서."""
    return frame.triples() if frame is not None else []


def frame_recall(predicted: Sequence[Triple], truth: Iterable[Triple], k: int) -> float | None:
    """프레임 1개의 recall (정답이 비면 None)."""
    gt = set(truth)
    if not gt:
        return None
    return len(set(predicted[:k]) & gt) / len(gt)


def macro_mean(per_video: Iterable[Sequence[float]]) -> float | None:
    """비디오별 프레임 평균의 평균 (점수 없는 비디오 제외)."""
    video_scores = [fmean(scores) for scores in per_video if scores]
    return fmean(video_scores) if video_scores else None


def _aligned(
    prediction: PredictionRecord, truth: GraphSequence
) -> list[tuple[list[Triple], list[Triple]]]:
    return [
        (flatten_triples(prediction.frame(gt.frame_id)), flatten_triples(gt))
        for gt in truth.frames
    ]


def frame_recalls(prediction: PredictionRecord, truth: GraphSequence, k: int) -> list[float]:
    """점수 가능한 프레임별 recall."""
    scores = []
    for predicted, gt in _aligned(prediction, truth):
        value = frame_recall(predicted, gt, k)
        if value is not None:
            scores.append(value)
    return scores


def recall_at_k(prediction: PredictionRecord, truth: GraphSequence, k: int) -> float | None:
    """비디오 1건의 Recall@K (점수 가능한 프레임이 없으면 None)."""
    scores = frame_recalls(prediction, truth, k)
    return fmean(scores) if scores else None


def corpus_recall_at_k(
    predictions: Sequence[PredictionRecord], truths: Sequence[GraphSequence], k: int
) -> float | None:
    """코퍼스 Recall@K (비디오 평균)."""
    _check_lengths(predictions, truths)
    return macro_mean(frame_recalls(p, t, k) for p, t in zip(predictions, truths, strict=True))


def mean_recall_at_k(
    predictions: Sequence[PredictionRecord], truths: Sequence[GraphSequence], k: int
) -> MeanRecallResult:
    """meanRecall@K.

    관계 클래스 c마다 GT에 c가 있는 프레임만으로 recall을 계산하고
    (top-K 절단은 전체 예측 목록 기준) 클래스 간 단순 평균을 낸다.
    """
    _check_lengths(predictions, truths)
    per_class_videos: dict[str, list[list[float]]] = defaultdict(list)
    for prediction, truth in zip(predictions, truths, strict=True):
        per_class_frames: dict[str, list[float]] = defaultdict(list)
        for predicted, gt in _aligned(prediction, truth):
            top = set(predicted[:k])
            by_class: dict[str, set[Triple]] = defaultdict(set)
            for triple in gt:
                by_class[triple[1]].add(triple)
            for relation, gt_c in by_class.items():
                per_class_frames[relation].append(len(top & gt_c) / len(gt_c))
        for relation, scores in per_class_frames.items():
            per_class_videos[relation].append(scores)

    per_class = {
        relation: value
        for relation, videos in per_class_videos.items()
        if (value := macro_mean(videos)) is not None
    }
    value = fmean(per_class.values()) if per_class else None
    return MeanRecallResult(value=value, per_class=per_class)


def _check_lengths(predictions: Sequence[Any], truths: Sequence[Any]) -> None:
    if len(predictions) != len(truths):
        raise ValueError(f"예측 {len(predictions)}건과 정답 {len(truths)}건 개수 불일치")
