"""관계 전이 일관성 손실.

관계 r마다 연속 프레임 간 존재/부재 전이를 2×2 히스토그램으로 집계하고
(행 = t 시점 상태, 열 = t+1 시점 상태, 0 = 부재, 1 = 존재)
정규화된 예측/정답 히스토그램의 대칭 KL 발산을 유효 관계 평균으로 구한다.

τ 게이트는 예측 쪽(T_pred)에만 적용되며, τ = 0이거나 tau_gate가 꺼져 있으면 무효이다.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.lsa_toolkit.config.settings import LossConfig
from src.lsa_toolkit.losses.weighting import LossInputError
from src.lsa_toolkit.models.graph import FrameGraph, GraphSequence
from src.lsa_toolkit.models.prediction import PredictionRecord

logger = logging.getLogger(__name__)

TransitionMatrix = np.ndarray
"""2×2 비음수 실수 행렬."""

_SIGN = np.array([-1.0, 1.0])


@dataclass(frozen=True)
class RelationTrack:
    """미래 프레임에 정렬된 관계 1개의 정답/예측 시퀀스.

    Attributes:
        relation: 관계 식별자 (스코어러에서는 "object:relation")
        y: 정답 존재 여부 (0/1)
        p: 예측 확률 ([0, 1])
    """

    relation: str
    y: np.ndarray
    p: np.ndarray

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if y.ndim != 1 or y.shape != p.shape:
            raise LossInputError(f"{self.relation}: y {y.shape}와 p {p.shape} 정렬 불일치")
        if y.size < 2:
            raise LossInputError(f"{self.relation}: 길이 2 이상 필요 (현재 {y.size})")
        if np.any((y != 0) & (y != 1)):
            raise LossInputError(f"{self.relation}: y는 0/1이어야 함")
        if np.any((p < 0) | (p > 1)):
            raise LossInputError(f"{self.relation}: p는 [0, 1] 범위여야 함")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class TransitionLossResult:
    """전이 손실 결과."""

    value: float
    valid_count: int
    per_relation: dict[str, float] = field(default_factory=dict)

    @property
    def no_valid_relations(self) -> bool:
        return self.valid_count == 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "valid_count": self.valid_count,
            "no_valid_relations": self.no_valid_relations,
            "per_relation": dict(sorted(self.per_relation.items())),
        }


def _state_probs(p: np.ndarray) -> np.ndarray:
    """(L, 2) 행렬: [:, 0] = 1 − p, [:, 1] = p."""
    return np.stack([1.0 - p, p], axis=1)


def _gate_mask(p: np.ndarray, tau: float, gate: bool) -> np.ndarray:
    steps = np.ones(p.size - 1, dtype=bool)
    if gate and tau > 0:
        steps = np.abs(np.diff(p)) > tau
    return steps


def transition_matrices(
    track: RelationTrack, tau: float = 0.2, gate: bool = True
) -> tuple[TransitionMatrix, TransitionMatrix]:
    """(T_real, T_pred).

    T_real은 모든 연속 정답 쌍을 세고, T_pred는 게이트를 통과한 단계에서
    p^(i)(t)·p^(j)(t+1)을 누적한다.
    """
    y = track.y.astype(int)
    t_real = np.zeros((2, 2))
    np.add.at(t_real, (y[:-1], y[1:]), 1.0)

    mask = _gate_mask(track.p, tau, gate)
    probs = _state_probs(track.p)
    t_pred = np.einsum("ti,tj->ij", probs[:-1][mask], probs[1:][mask])
    return t_real, t_pred


def normalize(matrix: TransitionMatrix, epsilon: float = 1e-9) -> TransitionMatrix:
    """D = T / (ΣT + ε)."""
    return matrix / (float(np.sum(matrix)) + epsilon)


def symmetric_kl(
    d_pred: TransitionMatrix, d_real: TransitionMatrix, epsilon: float = 1e-9
) -> float:
    """½[KL(D_pred‖D_real) + KL(D_real‖D_pred)] (각 셀은 ε 이상으로 클램프, 자연로그)."""
    p = np.maximum(np.asarray(d_pred, dtype=float), epsilon)
    r = np.maximum(np.asarray(d_real, dtype=float), epsilon)
    return 0.5 * float(np.sum(p * np.log(p / r)) + np.sum(r * np.log(r / p)))


def _is_valid(t_real: TransitionMatrix, delta: float) -> bool:
    return float(np.sum(t_real)) > delta


def transition_loss(
    tracks: Sequence[RelationTrack], config: LossConfig | None = None
) -> TransitionLossResult:
    """유효 트랙 평균 대칭 KL.

    평균은 트랙 단위이다. 같은 관계 이름의 트랙이 여럿이면 per_relation에는
    그 트랙 값들의 평균을 기록한다.

    Raises:
        LossInputError: 트랙이 하나도 없는 경우
    """
    config = config or LossConfig()
    if not tracks:
        raise LossInputError("트랙이 하나도 없음")

    values: list[float] = []
    by_relation: dict[str, list[float]] = defaultdict(list)
    for track in tracks:
        t_real, t_pred = transition_matrices(track, config.tau, config.tau_gate)
        if not _is_valid(t_real, config.delta):
            continue
        kl = symmetric_kl(
            normalize(t_pred, config.epsilon),
            normalize(t_real, config.epsilon),
            config.epsilon,
        )
        values.append(kl)
        by_relation[track.relation].append(kl)

    if not values:
        logger.debug(f"δ={config.delta} 게이트를 통과한 관계 없음 ({len(tracks)}개 트랙)")
        return TransitionLossResult(value=0.0, valid_count=0)
    per_relation = {name: float(np.mean(kls)) for name, kls in by_relation.items()}
    return TransitionLossResult(
        value=float(np.mean(values)), valid_count=len(values), per_relation=per_relation
    )


def transition_loss_grad(
    tracks: Sequence[RelationTrack], config: LossConfig | None = None
) -> list[np.ndarray]:
    """∂transition_loss/∂p_r(t), 트랙별 배열.

    게이트 마스크는 고정된 것으로 본다. 한 단계의 전이 질량 합은 항상 1이므로
    ΣT_pred는 p에 무관하다. ε 클램프에 걸린 셀의 기울기는 0이다.
    """
    config = config or LossConfig()
    eps = config.epsilon
    grads = [np.zeros_like(track.p) for track in tracks]
    valid: list[int] = []
    for index, track in enumerate(tracks):
        t_real, _ = transition_matrices(track, config.tau, config.tau_gate)
        if _is_valid(t_real, config.delta):
            valid.append(index)
    if not valid:
        return grads

    for index in valid:
        track = tracks[index]
        t_real, t_pred = transition_matrices(track, config.tau, config.tau_gate)
        d_real = np.maximum(normalize(t_real, eps), eps)
        d_pred_raw = normalize(t_pred, eps)
        d_pred = np.maximum(d_pred_raw, eps)
        outer = 0.5 * (np.log(d_pred / d_real) + 1.0 - d_real / d_pred)
        outer = np.where(d_pred_raw >= eps, outer, 0.0) / (float(np.sum(t_pred)) + eps)

        mask = _gate_mask(track.p, config.tau, config.tau_gate)
        probs = _state_probs(track.p)
        grad = grads[index]
        for step in np.flatnonzero(mask):
            # T_ij += a_i(p[step]) · a_j(p[step + 1])
            grad[step] += _SIGN @ outer @ probs[step + 1]
            grad[step + 1] += probs[step] @ outer @ _SIGN
        grads[index] = grad / len(valid)
    return grads


def _presence(frame: FrameGraph | None) -> set[tuple[str, str]]:
    return set(frame.triples()) if frame is not None else set()


def score_transition_consistency(
    record: PredictionRecord, truth: GraphSequence, config: LossConfig | None = None
) -> TransitionLossResult:
    """예측 레코드의 전이 일관성 점수 (낮을수록 정답과 전이 양상이 비슷함).

    (object, relation) 쌍마다 정답 미래 프레임 순서로 0/1 트랙을 만든다.
    예측은 확률이 없으므로 존재하면 1, 없으면 0으로 둔다.
    """
    frame_ids = truth.frame_ids
    if len(frame_ids) < 2:
        logger.warning(f"{record.video_id}: 미래 프레임 {len(frame_ids)}개, 전이 점수 생략")
        return TransitionLossResult(value=0.0, valid_count=0)

    truth_sets = [_presence(frame) for frame in truth.frames]
    pred_sets = [_presence(record.frame(fid)) for fid in frame_ids]
    pairs = sorted(set().union(*truth_sets, *pred_sets))
    if not pairs:
        return TransitionLossResult(value=0.0, valid_count=0)

    tracks = [
        RelationTrack(
            relation=f"{name}:{relation}",
            y=np.array([(name, relation) in s for s in truth_sets], dtype=float),
            p=np.array([(name, relation) in s for s in pred_sets], dtype=float),
        )
        for name, relation in pairs
    ]
    return transition_loss(tracks, config)
