"""프롬프트 번들 모델."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Literal

from src.lsa_toolkit.models.base import sha256_text

PromptMode = Literal["goa", "oora"]


@dataclass(frozen=True)
class PromptBundle:
    """렌더링된 프롬프트.

    text = head + "\\n".join(observed_lines) + tail.
    observed_lines 항목 하나는 관측 구간 하나의 직렬화 결과(여러 줄 가능)이다.

    Attributes:
        mode: goa | oora
        target_object: OORA 대상 객체
        future_frames: 예측 요청 프레임 id
        one_shot: 예시 블록 포함 여부
        head: 관측 블록 앞의 고정 부분
        observed_lines: 관측 구간별 텍스트 (오래된 순)
        tail: 지시문과 미래 프레임 큐
    """

    mode: PromptMode
    future_frames: tuple[int, ...]
    head: str
    observed_lines: tuple[str, ...]
    tail: str
    target_object: str | None = None
    one_shot: bool = False

    @property
    def text(self) -> str:
        return self.head + "\n".join(self.observed_lines) + self.tail

    @property
    def scaffold(self) -> str:
        """관측 블록을 제외한 고정 텍스트."""
        return self.head + self.tail

    @property
    def sha256(self) -> str:
        return sha256_text(self.text)

    def drop_oldest(self, count: int = 1) -> PromptBundle:
        return replace(self, observed_lines=self.observed_lines[count:])

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "target_object": self.target_object,
            "future_frames": list(self.future_frames),
            "one_shot": self.one_shot,
            "sha256": self.sha256,
            "text": self.text,
        }
