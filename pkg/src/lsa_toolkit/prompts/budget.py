"""프롬프트 토큰 예산 처리."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable

from src.lsa_toolkit.models.prompt import PromptBundle
from src.lsa_toolkit.prompts.builder import PromptError

logger = logging.getLogger(__name__)

TokenEstimator = Callable[[str], int]


class PromptBudgetError(PromptError):
    """고정 스캐폴드만으로 예산 초과."""

    def __init__(self, scaffold_tokens: int, budget: int):
        super().__init__(f"스캐폴드 {scaffold_tokens} 토큰이 예산 {budget}을 초과")
        self.scaffold_tokens = scaffold_tokens
        self.budget = budget


def char_estimator(text: str) -> int:
    """문자 수 / 4 (올림) 휴리스틱."""
    return math.ceil(len(text) / 4)


def truncate_to_budget(
    bundle: PromptBundle,
    token_budget: int,
    estimator: TokenEstimator = char_estimator,
) -> PromptBundle:
    """예산 이내가 될 때까지 가장 오래된 관측 구간부터 제거.

    Args:
        bundle: 원본 프롬프트
        token_budget: 최대 토큰 수
        estimator: 텍스트 → 토큰 수 추정 함수

    Returns:
        추정 토큰 수가 예산 이하인 PromptBundle

    Raises:
        PromptBudgetError: 관측 블록 없이도 예산을 넘는 경우
    """
    scaffold_tokens = estimator(bundle.scaffold)
    if scaffold_tokens > token_budget:
        raise PromptBudgetError(scaffold_tokens, token_budget)

    dropped = 0
    while estimator(bundle.text) > token_budget and bundle.observed_lines:
        bundle = bundle.drop_oldest()
        dropped += 1

    if dropped:
        logger.info(
            f"토큰 예산 {token_budget}: 오래된 관측 구간 {dropped}개 제거 "
            f"({bundle.mode}, {bundle.target_object or '-'})"
        )
    return bundle
