"""벤치마크 분석.

객체 동역학 통계, 연속 객체 오라클 상한, 데이터셋 통계.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Sequence
from statistics import fmean
from typing import Any

from src.lsa_toolkit.evaluation.recall import macro_mean
from src.lsa_toolkit.models.graph import FrameGraph, GraphSequence
from src.lsa_toolkit.models.instance import LsaInstance, ObjectDynamicsStats
from src.lsa_toolkit.models.prediction import PredictionRecord
from src.lsa_toolkit.models.vocabulary import DEFAULT_VOCABULARY, Vocabulary

logger = logging.getLogger(__name__)


def _single_fraction(instances: Sequence[LsaInstance]) -> None:
    fractions = {i.fraction for i in instances}
    if len(fractions) > 1:
        raise ValueError(f"단일 관측 비율만 허용: {sorted(fractions)}")


def _last_objects(sequence: GraphSequence) -> set[str]:
    last = sequence.last_frame
    return set(last.object_names) if last is not None else set()


def compute_object_dynamics(instances: Sequence[LsaInstance]) -> ObjectDynamicsStats:
    """마지막 관측 프레임 객체 vs 미래 객체 합집합 비교.

    Raises:
        ValueError: 여러 관측 비율이 섞인 경우 또는 입력이 빈 경우
    """
    if not instances:
        raise ValueError("인스턴스가 없음")
    _single_fraction(instances)

    consistent = new = disappeared = 0
    for instance in instances:
        last = _last_objects(instance.observed)
        future = {n for f in instance.future.frames for n in f.object_names}
        has_new = bool(future - last)
        has_gone = bool(last - future)
        new += has_new
        disappeared += has_gone
        consistent += not (has_new or has_gone)

    total = len(instances)
    return ObjectDynamicsStats(
        consistent_rate=consistent / total,
        new_object_rate=new / total,
        disappeared_rate=disappeared / total,
        video_count=total,
    )


def oracle_frame_recall(truth: FrameGraph, persistent: set[str], k: int) -> float | None:
    """min(K, 지속 객체 GT 트리플 수) / 전체 GT 트리플 수."""
    triples = truth.triples()
    if not triples:
        return None
    reachable = sum(1 for name, _ in triples if name in persistent)
    return min(k, reachable) / len(triples)


def oracle_ceiling(instances: Sequence[LsaInstance], k: int) -> float | None:
    """마지막 관측 프레임 객체에 한정된 완벽한 관계 예측기의 Recall@K 상한.

    집계는 evaluation.recall 과 동일 (프레임 → 비디오 → 코퍼스 평균).
    """
    per_video = []
    for instance in instances:
        persistent = _last_objects(instance.observed)
        scores = [
            s
            for f in instance.future.frames
            if (s := oracle_frame_recall(f, persistent, k)) is not None
        ]
        per_video.append(scores)
    return macro_mean(per_video)


def oracle_predictions(instances: Sequence[LsaInstance]) -> list[PredictionRecord]:
    """오라클 예측을 명시적으로 구성 (지속 객체의 GT 트리플을 앞에 배치)."""
    records = []
    for instance in instances:
        persistent = _last_objects(instance.observed)
        future = tuple(
            FrameGraph(f.frame_id, tuple(o for o in f.objects if o.name in persistent))
            for f in instance.future.frames
        )
        records.append(
            PredictionRecord(
                video_id=instance.video_id,
                fraction=instance.fraction,
                mode="without_goa",
                future=future,
                provenance={"backend": "oracle"},
            )
        )
    return records


def dataset_stats(
    instances: Sequence[LsaInstance], vocab: Vocabulary = DEFAULT_VOCABULARY
) -> dict[str, Any]:
    """데이터셋 통계 리포트."""
    by_fraction: dict[float, list[LsaInstance]] = {}
    for instance in instances:
        by_fraction.setdefault(instance.fraction, []).append(instance)

    fractions: dict[str, Any] = {}
    for fraction in sorted(by_fraction):
        group = by_fraction[fraction]
        future_frames = [f for i in group for f in i.future.frames]
        entry: dict[str, Any] = {
            "instances": len(group),
            "mean_observed_frames": fmean(len(i.observed.frames) for i in group),
            "mean_observed_segments": fmean(len(i.observed) for i in group),
            "mean_future_frames": fmean(len(i.future.frames) for i in group),
            "mean_future_triples_per_frame": (
                fmean(len(f.triples()) for f in future_frames) if future_frames else 0.0
            ),
            "dynamics": compute_object_dynamics(group).to_dict(),
        }
        fractions[f"{fraction:g}"] = entry

    object_counts = Counter(
        o.name for i in instances for f in i.future.frames for o in f.objects
    )
    return {
        "videos": len({i.video_id for i in instances}),
        "instances": len(instances),
        "fractions": fractions,
        "future_object_counts": dict(object_counts.most_common()),
        "vocabulary": vocab.counts(),
    }
