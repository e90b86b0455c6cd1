"""관계 분류 손실 (BCE, 임계값 마진 손실) 및 해석적 기울기."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from src.lsa_toolkit.config.settings import LossConfig
from src.lsa_toolkit.losses.weighting import LossInputError
from src.lsa_toolkit.models.vocabulary import DEFAULT_VOCABULARY, Vocabulary

ArrayLike = Sequence[float] | np.ndarray


def _as_arrays(p: ArrayLike, y: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    p_arr = np.atleast_1d(np.asarray(p, dtype=float))
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    if p_arr.shape != y_arr.shape:
        raise LossInputError(f"p {p_arr.shape}와 y {y_arr.shape} 길이 불일치")
    if p_arr.size == 0:
        raise LossInputError("빈 입력")
    if np.any((p_arr < 0) | (p_arr > 1)):
        raise LossInputError("확률은 [0, 1] 범위여야 함")
    if np.any((y_arr != 0) & (y_arr != 1)):
        raise LossInputError("정답은 0 또는 1이어야 함")
    return p_arr, y_arr


def bce(p: ArrayLike, y: ArrayLike, epsilon: float = 1e-9) -> float:
    """평균 이진 교차 엔트로피 (p는 [ε, 1−ε]로 클램프)."""
    p_arr, y_arr = _as_arrays(p, y)
    p_arr = np.clip(p_arr, epsilon, 1.0 - epsilon)
    terms = y_arr * np.log(p_arr) + (1.0 - y_arr) * np.log(1.0 - p_arr)
    return float(-np.mean(terms))


def bce_grad(p: ArrayLike, y: ArrayLike, epsilon: float = 1e-9) -> np.ndarray:
    """∂bce/∂p (클램프 내부 기준)."""
    p_arr, y_arr = _as_arrays(p, y)
    p_arr = np.clip(p_arr, epsilon, 1.0 - epsilon)
    return (-y_arr / p_arr + (1.0 - y_arr) / (1.0 - p_arr)) / p_arr.size


def threshold_margin_loss(
    p: ArrayLike, y: ArrayLike, gamma_pos: float = 0.9, gamma_neg: float = 0.5
) -> float:
    """mean[y·max(0, γ_pos − p) + (1−y)·max(0, p − γ_neg)]."""
    p_arr, y_arr = _as_arrays(p, y)
    terms = y_arr * np.maximum(0.0, gamma_pos - p_arr) + (1.0 - y_arr) * np.maximum(
        0.0, p_arr - gamma_neg
    )
    return float(np.mean(terms))


def threshold_margin_grad(
    p: ArrayLike, y: ArrayLike, gamma_pos: float = 0.9, gamma_neg: float = 0.5
) -> np.ndarray:
    """∂L_thr/∂p (힌지 꺾임점에서는 0 쪽 기울기)."""
    p_arr, y_arr = _as_arrays(p, y)
    grad = -y_arr * (p_arr < gamma_pos) + (1.0 - y_arr) * (p_arr > gamma_neg)
    return grad / p_arr.size


def sgg_relation_loss(p: ArrayLike, y: ArrayLike, config: LossConfig | None = None) -> float:
    """L_BCE + η·L_thr."""
    config = config or LossConfig()
    return bce(p, y, config.epsilon) + config.eta * threshold_margin_loss(
        p, y, config.gamma_pos, config.gamma_neg
    )


def sgg_relation_grad(
    p: ArrayLike, y: ArrayLike, config: LossConfig | None = None
) -> np.ndarray:
    config = config or LossConfig()
    return bce_grad(p, y, config.epsilon) + config.eta * threshold_margin_grad(
        p, y, config.gamma_pos, config.gamma_neg
    )


def oora_total_loss(ce: float, bce_val: float, trans: float, lambda_: float = 0.03) -> float:
    """L_OORA = L_CE + L_BCE + λ·L_trans."""
    return ce + bce_val + lambda_ * trans


def encode_multi_hot(
    relations: Sequence[str], vocab: Vocabulary = DEFAULT_VOCABULARY
) -> np.ndarray:
    """관계 목록 → 어휘 순서(attention → spatial → contact) multi-hot 벡터.

    Raises:
        LossInputError: 어휘에 없는 관계
    """
    order = vocab.all_relations
    index = {name: i for i, name in enumerate(order)}
    vector = np.zeros(len(order))
    for name in relations:
        if name not in index:
            raise LossInputError(f"알 수 없는 관계: {name}")
        vector[index[name]] = 1.0
    return vector


def binarize_probabilities(p: ArrayLike, threshold: float = 0.6) -> np.ndarray:
    """p > threshold → 1."""
    return (np.asarray(p, dtype=float) > threshold).astype(float)
