"""관측 구간 노이즈 주입.

시드 고정 numpy Generator로 프레임을 선택해 객체 절 제거(drop) 또는
관계 재샘플링(modify)을 적용한다. 미래 정답은 건드리지 않는다.
"""

from __future__ import annotations

import logging
import math
import zlib
from dataclasses import replace
from fractions import Fraction

import numpy as np

from src.lsa_toolkit.core.merge import merge_sequence
from src.lsa_toolkit.models.graph import FrameGraph, GraphSequence, ObjectState
from src.lsa_toolkit.models.instance import LsaInstance, NoiseSpec
from src.lsa_toolkit.models.vocabulary import DEFAULT_VOCABULARY, PARTITIONS, Vocabulary

logger = logging.getLogger(__name__)


def _rng(spec: NoiseSpec, video_id: str) -> np.random.Generator:
    return np.random.default_rng([spec.seed, zlib.crc32(video_id.encode("utf-8"))])


def in_range_indices(frame_count: int, frame_range: tuple[float, float]) -> range:
    """관측 프레임 중 [lo, hi) 분수 구간에 해당하는 인덱스."""
    lo, hi = frame_range
    start = math.floor(Fraction(str(lo)) * frame_count)
    stop = math.ceil(Fraction(str(hi)) * frame_count)
    return range(start, max(start, stop))


def perturb_count(rate: float, candidates: int) -> int:
    """⌊rate · candidates⌋."""
    return math.floor(Fraction(str(rate)) * candidates)


def _modify(state: ObjectState, vocab: Vocabulary, rng: np.random.Generator) -> ObjectState:
    sampled: dict[str, tuple[str, ...]] = {}
    for partition in PARTITIONS:
        choices = vocab.relations(partition)
        picks = [choices[int(rng.integers(len(choices)))] for _ in state.relations(partition)]
        sampled[partition] = tuple(dict.fromkeys(picks))
    return replace(state, **sampled)


def _perturb_frame(
    frame: FrameGraph, spec: NoiseSpec, vocab: Vocabulary, rng: np.random.Generator
) -> FrameGraph:
    if not frame.objects:
        return frame
    target = int(rng.integers(len(frame.objects)))
    if spec.kind == "drop":
        objects = frame.objects[:target] + frame.objects[target + 1 :]
    else:
        objects = list(frame.objects)
        objects[target] = _modify(objects[target], vocab, rng)
        objects = tuple(objects)
    return FrameGraph(frame.frame_id, tuple(objects))


def inject_noise(
    instance: LsaInstance, spec: NoiseSpec, vocab: Vocabulary = DEFAULT_VOCABULARY
) -> LsaInstance:
    """노이즈 주입된 인스턴스 생성.

    범위 내 관측 프레임 중 ⌊rate · 개수⌋개를 비복원 추출한다.
    프레임 수와 id는 변하지 않는다.

    Args:
        instance: 원본 인스턴스
        spec: 노이즈 명세
        vocab: 재샘플링 어휘

    Returns:
        noise / perturbed_frames / warnings 가 채워진 LsaInstance
    """
    frames = instance.observed.frames
    candidates = in_range_indices(len(frames), spec.frame_range)
    if len(candidates) == 0:
        message = f"{instance.video_id}: 노이즈 범위 {spec.frame_range}에 프레임 없음"
        logger.warning(message)
        return replace(instance, noise=spec, perturbed_frames=(), warnings=(message,))

    count = perturb_count(spec.rate, len(candidates))
    rng = _rng(spec, instance.video_id)
    chosen = sorted(int(i) for i in rng.choice(list(candidates), size=count, replace=False))

    noisy = list(frames)
    for index in chosen:
        noisy[index] = _perturb_frame(noisy[index], spec, vocab, rng)

    observed = merge_sequence(noisy, instance.video_id)
    return replace(
        instance,
        observed=observed,
        noise=spec,
        perturbed_frames=tuple(frames[i].frame_id for i in chosen),
        warnings=(),
    )


def frame_error_rate(original: GraphSequence, noisy: GraphSequence) -> float:
    """내용이 실제로 달라진 관측 프레임 비율 (측정값)."""
    before = original.frames
    after = noisy.frames
    if [f.frame_id for f in before] != [f.frame_id for f in after]:
        raise ValueError("프레임 id가 일치하지 않음")
    if not before:
        return 0.0
    changed = sum(
        1 for a, b in zip(before, after, strict=True) if a.content_key() != b.content_key()
    )
    return changed / len(before)
