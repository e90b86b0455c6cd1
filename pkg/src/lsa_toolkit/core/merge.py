"""시간 병합 모듈.

연속된 동일 장면 그래프를 하나의 구간으로 병합하고 다시 확장한다.
"""

from __future__ import annotations

from collections.abc import Sequence

from src.lsa_toolkit.models.graph import FrameGraph, GraphSegment, GraphSequence
from src.lsa_toolkit.models.vocabulary import Vocabulary


class MergeError(ValueError):
    """병합 입력 오류."""


def _group_runs(frames: Sequence[FrameGraph]) -> list[list[FrameGraph]]:
    runs: list[list[FrameGraph]] = []
    for frame in frames:
        if runs and runs[-1][-1].content_key() == frame.content_key():
            runs[-1].append(frame)
        else:
            runs.append([frame])
    return runs


def _check_increasing(frames: Sequence[FrameGraph]) -> None:
    for prev, cur in zip(frames, frames[1:], strict=False):
        if cur.frame_id <= prev.frame_id:
            raise MergeError(
                f"프레임 id가 증가하지 않음: {prev.frame_id} → {cur.frame_id}"
            )


def merge_sequence(frames: Sequence[FrameGraph], video_id: str = "") -> GraphSequence:
    """연속 동일 프레임 병합.

    내용 비교는 객체 순서와 관계 저장 순서를 포함하며 bbox는 제외한다.

    Args:
        frames: frame_id 순으로 증가하는 프레임 목록
        video_id: 비디오 식별자

    Returns:
        최대 병합된 GraphSequence

    Raises:
        MergeError: frame_id가 엄격히 증가하지 않는 경우
    """
    _check_increasing(frames)
    segments = tuple(
        GraphSegment(run[0].frame_id, run[-1].frame_id, tuple(run)) for run in _group_runs(frames)
    )
    return GraphSequence(video_id=video_id, segments=segments)


def expand_sequence(sequence: GraphSequence) -> list[FrameGraph]:
    """병합 구간을 원래 주석 프레임 목록으로 확장."""
    return sequence.frames


def restrict_to_object(
    sequence: GraphSequence, name: str, vocab: Vocabulary
) -> GraphSequence:
    """한 객체만 남긴 관측 시퀀스 (OORA 관측 블록용).

    대상 객체가 있는 프레임만 남기고, 관계를 어휘 순서로 정렬한 뒤 다시 병합한다.
    두 번째 구간부터는 직전 유지 프레임 다음 id에서 표시가 시작된다.

    Args:
        sequence: 관측 시퀀스
        name: 대상 객체
        vocab: 관계 순서 기준 어휘

    Returns:
        대상 객체만 포함하는 GraphSequence (없으면 빈 시퀀스)
    """
    kept: list[FrameGraph] = []
    for frame in sequence.frames:
        state = frame.get(name)
        if state is not None:
            kept.append(FrameGraph(frame.frame_id, (state.canonical(vocab),)))

    segments: list[GraphSegment] = []
    previous_end: int | None = None
    for run in _group_runs(kept):
        start = run[0].frame_id if previous_end is None else previous_end + 1
        segments.append(GraphSegment(start, run[-1].frame_id, tuple(run)))
        previous_end = run[-1].frame_id
    return GraphSequence(video_id=sequence.video_id, segments=tuple(segments))


def keep_recent_segments(sequence: GraphSequence, limit: int | None) -> GraphSequence:
    """최근 limit개 구간만 유지 (관측 윈도우)."""
    if limit is None or len(sequence) <= limit:
        return sequence
    if limit < 1:
        raise MergeError(f"관측 윈도우는 1 이상이어야 함: {limit}")
    return GraphSequence(sequence.video_id, sequence.segments[-limit:])
