"""벤치마크 빌더.

주석 프레임 3개 미만 비디오를 제외하고, 관측 비율별로 관측/미래를 분할한다.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from fractions import Fraction

from src.lsa_toolkit.core.json_parser import EmptyCorpusError
from src.lsa_toolkit.core.merge import merge_sequence
from src.lsa_toolkit.models.instance import LsaInstance, VideoRecord

logger = logging.getLogger(__name__)

DEFAULT_FRACTIONS = (0.3, 0.5, 0.7, 0.9)


def split_index(frame_count: int, fraction: float) -> int:
    """관측 프레임 수 = ⌈fraction · frame_count⌉ (미래 ≥ 1 이 되도록 클램프).

    부동소수 오차를 피하기 위해 fraction의 10진 표기를 정확한 분수로 계산한다.
    """
    if frame_count < 2:
        raise ValueError(f"분할하려면 프레임이 2개 이상 필요: {frame_count}")
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"관측 비율은 (0, 1) 범위여야 함: {fraction}")
    observed = math.ceil(Fraction(str(fraction)) * frame_count)
    return min(max(observed, 1), frame_count - 1)


def split_video(video: VideoRecord, fraction: float) -> LsaInstance:
    """비디오 1건을 관측/미래로 분할."""
    k = split_index(len(video.frames), fraction)
    return LsaInstance(
        video_id=video.video_id,
        fraction=fraction,
        observed=merge_sequence(video.frames[:k], video.video_id),
        future=merge_sequence(video.frames[k:], video.video_id),
    )


def build_benchmark(
    corpus: Sequence[VideoRecord],
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
    split: str | None = "test",
    min_frames: int = 3,
) -> list[LsaInstance]:
    """LSA 벤치마크 생성.

    Args:
        corpus: 교환 포맷 비디오 목록
        fractions: 관측 비율 목록
        split: 사용할 split (None이면 전체)
        min_frames: 최소 주석 프레임 수

    Returns:
        비디오 × 비율 순서의 LsaInstance 목록

    Raises:
        EmptyCorpusError: 코퍼스가 비어 있는 경우
    """
    if not corpus:
        raise EmptyCorpusError("빈 코퍼스")
    if not fractions:
        raise ValueError("관측 비율 목록이 비어 있음")

    instances: list[LsaInstance] = []
    skipped_short = skipped_split = 0
    for video in corpus:
        if split is not None and video.split != split:
            skipped_split += 1
            continue
        if len(video.frames) < min_frames:
            skipped_short += 1
            continue
        instances.extend(split_video(video, f) for f in fractions)

    logger.info(
        f"벤치마크 생성: 인스턴스 {len(instances)}개 "
        f"(짧은 비디오 제외 {skipped_short}, split 제외 {skipped_split})"
    )
    if not instances:
        logger.warning("조건을 만족하는 비디오가 없음")
    return instances
