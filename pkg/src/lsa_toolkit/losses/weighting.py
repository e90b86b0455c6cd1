"""GOA 시간 가중 손실.

w(t) = β[1 + cos(π (t − (n+1)) / (T − (n+1)))] + (1 − β)
가까운 미래 그래프일수록 큰 가중치를 받는다.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from typing import Any

import numpy as np

# 미래 그래프별 토큰 교차 엔트로피 (외부 트레이너가 계산)
TokenLossMatrix = Sequence[Sequence[float]]


class LossInputError(ValueError):
    """손실 입력 오류."""


def cosine_weight(t: int, n: int, T: int, beta: float) -> float:  # noqa: N803
    """미래 그래프 t의 코사인 가중치.

    Raises:
        LossInputError: t가 [n+1, T] 밖이거나 β가 [0, 1] 밖인 경우
    """
    if not n + 1 <= t <= T:
        raise LossInputError(f"t={t}는 [{n + 1}, {T}] 범위여야 함")
    if not 0.0 <= beta <= 1.0:
        raise LossInputError(f"β는 [0, 1] 범위여야 함: {beta}")
    span = T - (n + 1)
    angle = 0.0 if span == 0 else math.pi * (t - (n + 1)) / span
    return beta * (1.0 + math.cos(angle)) + (1.0 - beta)


def graph_weights(n: int, T: int, beta: float) -> np.ndarray:  # noqa: N803
    """t = n+1..T 가중치 벡터."""
    if T < n + 1:
        raise LossInputError(f"T={T}는 n+1={n + 1} 이상이어야 함")
    return np.array([cosine_weight(t, n, T, beta) for t in range(n + 1, T + 1)])


def goa_weighted_loss(
    token_losses: TokenLossMatrix, n: int, T: int, beta: float  # noqa: N803
) -> float:
    """Σ_t w(t) Σ_i ℓ_{t,i} / Σ_t w(t) K_t.

    Args:
        token_losses: 그래프별 토큰 교차 엔트로피 (t = n+1..T 순서)
        n: 관측 그래프 수
        T: 마지막 미래 그래프 인덱스
        beta: 코사인 혼합 비율

    Raises:
        LossInputError: 빈 입력, 그래프 수 불일치, 토큰이 하나도 없는 경우
    """
    if not token_losses:
        raise LossInputError("빈 토큰 손실 행렬")
    if len(token_losses) != T - n:
        raise LossInputError(f"그래프 {len(token_losses)}개, 필요 {T - n}개")
    weights = graph_weights(n, T, beta)
    sums = np.array([float(np.sum(np.asarray(row, dtype=float))) for row in token_losses])
    counts = np.array([len(row) for row in token_losses], dtype=float)
    normalizer = float(np.dot(weights, counts))
    if normalizer == 0.0:
        raise LossInputError("토큰이 하나도 없음")
    return float(np.dot(weights, sums)) / normalizer


def export_token_weights(
    n: int, T: int, beta: float, token_counts: Sequence[int]  # noqa: N803
) -> dict[str, Any]:
    """외부 트레이너용 토큰별 가중치.

    Returns:
        {"n", "T", "beta", "graphs": [{"t", "weight", "token_count"}],
         "token_weights": [...], "normalizer": Σ w(t) K_t}
    """
    if len(token_counts) != T - n:
        raise LossInputError(f"토큰 수 {len(token_counts)}개, 필요 {T - n}개")
    if any(k < 0 for k in token_counts):
        raise LossInputError(f"토큰 수는 음수일 수 없음: {list(token_counts)}")
    weights = graph_weights(n, T, beta)
    graphs = [
        {"t": n + 1 + i, "weight": float(w), "token_count": int(k)}
        for i, (w, k) in enumerate(zip(weights, token_counts, strict=True))
    ]
    flat = [float(w) for w, k in zip(weights, token_counts, strict=True) for _ in range(k)]
    return {
        "n": n,
        "T": T,
        "beta": beta,
        "graphs": graphs,
        "token_weights": flat,
        "normalizer": float(np.dot(weights, np.asarray(token_counts, dtype=float))),
    }


def apply_token_weights(exported: dict[str, Any], token_losses: Sequence[float]) -> float:
    """내보낸 가중치를 평탄화된 토큰 손실에 적용."""
    weights = np.asarray(exported["token_weights"], dtype=float)
    losses = np.asarray(token_losses, dtype=float)
    if weights.shape != losses.shape:
        raise LossInputError(f"가중치 {weights.shape}와 손실 {losses.shape} 길이 불일치")
    return float(np.dot(weights, losses)) / exported["normalizer"]
