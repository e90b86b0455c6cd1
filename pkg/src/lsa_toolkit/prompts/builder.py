"""프롬프트 빌더.

관측 GraphSequence로부터 GOA / OORA 프롬프트를 렌더링한다.
동일 입력은 항상 동일 바이트를 생성한다.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

from src.lsa_toolkit.core.merge import keep_recent_segments, restrict_to_object
from src.lsa_toolkit.core.serializer import serialize_frame
from src.lsa_toolkit.models.graph import GraphSequence
from src.lsa_toolkit.models.prompt import PromptBundle
from src.lsa_toolkit.models.vocabulary import BACKGROUND, DEFAULT_VOCABULARY, Vocabulary
from src.lsa_toolkit.prompts import templates as t

logger = logging.getLogger(__name__)


class PromptError(ValueError):
    """프롬프트 입력 오류."""


class ObjectNotObservedError(PromptError):
    """관측 구간에 한 번도 등장하지 않은 객체."""

    def __init__(self, name: str):
        super().__init__(f"관측되지 않은 객체: {name}")
        self.object = name


def _check_future(observed: GraphSequence, future_frames: Sequence[int]) -> tuple[int, ...]:
    if observed.is_empty:
        raise PromptError(f"{observed.video_id}: 관측 구간이 비어 있음")
    frames = tuple(future_frames)
    if not frames:
        raise PromptError("미래 프레임 목록이 비어 있음")
    last = observed.segments[-1].end_frame
    late = [f for f in frames if f <= last]
    if late:
        raise PromptError(f"미래 프레임 {late}가 마지막 관측 프레임 {last} 이하")
    if list(frames) != sorted(set(frames)):
        raise PromptError(f"미래 프레임은 중복 없이 오름차순이어야 함: {list(frames)}")
    return frames


def build_goa_prompt(
    observed: GraphSequence,
    future_frames: Sequence[int],
    one_shot: bool = False,
    vocab: Vocabulary = DEFAULT_VOCABULARY,
    max_observed_segments: int | None = None,
) -> PromptBundle:
    """GOA 프롬프트 생성.

    구성: 헤더, (one-shot 예시), IMPORTANT 목록, 객체 어휘, 관측 블록,
    출력 형식 지시문, 미래 프레임 큐.

    Args:
        observed: 관측 시퀀스
        future_frames: 예측할 프레임 id (마지막 관측 id 초과)
        one_shot: 예시 블록 포함 여부
        vocab: 어휘
        max_observed_segments: 최근 N개 구간만 사용 (None이면 전체)

    Returns:
        PromptBundle

    Raises:
        PromptError: 관측 구간이 비었거나 미래 프레임이 유효하지 않은 경우
    """
    frames = _check_future(observed, future_frames)
    observed = keep_recent_segments(observed, max_observed_segments)

    blocks = [t.GOA_HEADER]
    if one_shot:
        blocks.append(t.GOA_ONE_SHOT)
    blocks.append(t.GOA_IMPORTANT)
    available = t.GOA_AVAILABLE.format(objects=", ".join((BACKGROUND, *vocab.objects)))
    head = "\n\n".join(blocks) + "\n\n" + available + "\n" + t.GOA_OBSERVED + "\n\n"

    cue = t.GOA_CUE.format(frames=", ".join(f"Frame {f}" for f in frames))
    tail = "\n\n" + t.GOA_INSTRUCTION + "\n\n" + cue

    lines = tuple(serialize_frame(seg, vocab) for seg in observed.segments)
    return PromptBundle(
        mode="goa",
        future_frames=frames,
        head=head,
        observed_lines=lines,
        tail=tail,
        one_shot=one_shot,
    )


def build_oora_prompt(
    observed: GraphSequence,
    name: str,
    future_frames: Sequence[int],
    one_shot: bool = False,
    vocab: Vocabulary = DEFAULT_VOCABULARY,
    max_observed_segments: int | None = None,
) -> PromptBundle:
    """OORA 프롬프트 생성 (객체 1개).

    관측 블록은 대상 객체만 남기고 다시 병합한 구간으로 구성된다.

    Args:
        observed: 관측 시퀀스
        name: 대상 객체
        future_frames: 예측할 프레임 id
        one_shot: 예시 블록 포함 여부
        vocab: 어휘
        max_observed_segments: 최근 N개 구간만 사용

    Returns:
        PromptBundle

    Raises:
        ObjectNotObservedError: 대상 객체가 관측 구간에 없는 경우
        PromptError: 미래 프레임이 유효하지 않은 경우
    """
    frames = _check_future(observed, future_frames)
    restricted = restrict_to_object(observed, name, vocab)
    if restricted.is_empty:
        raise ObjectNotObservedError(name)
    restricted = keep_recent_segments(restricted, max_observed_segments)

    blocks = [t.OORA_HEADER + "\n" + t.OORA_NOTE]
    if one_shot:
        blocks.append(t.OORA_ONE_SHOT)
    blocks.append(
        t.OORA_CATEGORIES.format(
            attention=", ".join(vocab.attention),
            spatial=", ".join(vocab.spatial),
            contact=", ".join(vocab.contact),
        )
    )
    head = "\n\n".join(blocks) + "\n\n" + t.OORA_OBSERVED.format(object=name) + "\n"

    joined = ", ".join(str(f) for f in frames)
    tail = (
        "\n\n"
        + t.OORA_INSTRUCTION.format(object=name, frames=joined)
        + "\n\n"
        + t.OORA_CUE.format(object=name, frames=joined)
    )

    lines = tuple(serialize_frame(seg, vocab) for seg in restricted.segments)
    return PromptBundle(
        mode="oora",
        future_frames=frames,
        head=head,
        observed_lines=lines,
        tail=tail,
        target_object=name,
        one_shot=one_shot,
    )
