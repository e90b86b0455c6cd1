"""GOA 객체 집합 진단 및 OORA 관계 정확도."""

from __future__ import annotations

from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

from src.lsa_toolkit.models.graph import GraphSequence
from src.lsa_toolkit.models.prediction import PredictionRecord
from src.lsa_toolkit.models.vocabulary import PARTITIONS

OBJECT_CATEGORIES = ("strict", "contain", "subset", "partial_overlap", "no_overlap")


@dataclass(frozen=True)
class ObjectSetMetrics:
    """미래 프레임별 객체 집합 분류 비율.

    범주는 상호 배타적이다 (합 = 1):
        strict: P = G
        contain: P ⊋ G
        subset: ∅ ≠ P ⊊ G
        partial_overlap: P ∩ G ≠ ∅, 위 셋이 아님
        no_overlap: P ∩ G = ∅ (G가 비어 있지 않음)
    partial_acc는 P ∩ G ≠ ∅ 인 프레임 비율이다.
    """

    frames: int
    strict: float
    contain: float
    subset: float
    partial_overlap: float
    no_overlap: float
    partial_acc: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "frames": self.frames,
            "strict": self.strict,
            "contain": self.contain,
            "subset": self.subset,
            "partial_overlap": self.partial_overlap,
            "no_overlap": self.no_overlap,
            "partial_acc": self.partial_acc,
        }


def classify_object_sets(predicted: set[str], truth: set[str]) -> str:
    if predicted == truth:
        return "strict"
    if predicted > truth:
        return "contain"
    if predicted and predicted < truth:
        return "subset"
    if predicted & truth:
        return "partial_overlap"
    return "no_overlap"


def predicted_objects(record: PredictionRecord, frame_id: int) -> set[str]:
    """GOA 출력이 있으면 GOA 객체 집합, 없으면 통합 예측 프레임의 객체."""
    if record.goa_objects is not None:
        return set(record.goa_objects.get(frame_id, ()))
    frame = record.frame(frame_id)
    return set(frame.object_names) if frame is not None else set()


def object_set_metrics(
    records: Sequence[PredictionRecord], truths: Sequence[GraphSequence]
) -> ObjectSetMetrics | None:
    """전체 미래 프레임에 대한 객체 집합 진단 (프레임이 없으면 None)."""
    if len(records) != len(truths):
        raise ValueError(f"예측 {len(records)}건과 정답 {len(truths)}건 개수 불일치")
    counts: Counter[str] = Counter()
    overlap = 0
    for record, truth in zip(records, truths, strict=True):
        for gt in truth.frames:
            predicted = predicted_objects(record, gt.frame_id)
            gt_names = set(gt.object_names)
            counts[classify_object_sets(predicted, gt_names)] += 1
            if predicted & gt_names:
                overlap += 1
    total = sum(counts.values())
    if total == 0:
        return None
    rates = {category: counts[category] / total for category in OBJECT_CATEGORIES}
    return ObjectSetMetrics(frames=total, partial_acc=overlap / total, **rates)


def relation_accuracy(
    records: Sequence[PredictionRecord], truths: Sequence[GraphSequence]
) -> dict[str, Any]:
    """(프레임, 객체) 쌍 단위 파티션별 집합 일치율.

    예측과 정답 모두에 있는 쌍만 센다. overall은 세 파티션 정확도의 평균이다.

    Returns:
        {"pairs": int, "attention": float|None, "spatial": ..., "contact": ...,
         "overall": float|None}
    """
    if len(records) != len(truths):
        raise ValueError(f"예측 {len(records)}건과 정답 {len(truths)}건 개수 불일치")
    correct: Counter[str] = Counter()
    pairs = 0
    for record, truth in zip(records, truths, strict=True):
        for gt in truth.frames:
            frame = record.frame(gt.frame_id)
            if frame is None:
                continue
            for gt_state in gt.objects:
                state = frame.get(gt_state.name)
                if state is None:
                    continue
                pairs += 1
                for partition in PARTITIONS:
                    if set(state.relations(partition)) == set(gt_state.relations(partition)):
                        correct[partition] += 1

    result: dict[str, Any] = {"pairs": pairs}
    for partition in PARTITIONS:
        result[partition] = correct[partition] / pairs if pairs else None
    result["overall"] = (
        sum(result[p] for p in PARTITIONS) / len(PARTITIONS) if pairs else None
    )
    return result
