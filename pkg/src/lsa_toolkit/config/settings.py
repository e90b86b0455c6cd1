"""LSA Toolkit 설정 모듈.

환경 변수 + YAML 파일 기반 단일 Settings 클래스.
우선순위: CLI 플래그 > 설정 파일 > 환경 변수 > 기본값.
API 키는 환경 변수(LSA_API_KEY)로만 받으며 파일/로그에 기록하지 않는다.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.lsa_toolkit.models.base import canonical_json, sha256_text


class DecodeConfig(BaseModel):
    """LLM 디코딩/전송 설정."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    model: str = Field(default="gpt-4o-mini", description="모델 이름")
    endpoint: str = Field(
        default="https://api.openai.com/v1",
        description="OpenAI 호환 chat-completions 베이스 URL",
    )
    temperature: float = Field(default=0.7, ge=0.0, description="샘플링 온도")
    top_p: float = Field(default=0.4, gt=0.0, le=1.0, description="nucleus 샘플링 top-p")
    max_output_tokens: int | None = Field(default=None, ge=1, description="최대 출력 토큰")
    timeout: float = Field(default=60.0, gt=0.0, description="요청 타임아웃 (초)")
    max_retries: int = Field(default=3, ge=0, le=20, description="일시 오류 최대 재시도 횟수")
    backoff_base: float = Field(default=1.0, ge=0.0, description="지수 백오프 기본 지연 (초)")
    backoff_jitter: float = Field(default=1.0, ge=0.0, description="백오프 지터 상한 (초)")


class LossConfig(BaseModel):
    """손실 함수 하이퍼파라미터."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    beta: float = Field(default=0.5, ge=0.0, le=1.0, description="코사인 가중치 혼합 비율")
    lambda_: float = Field(default=0.03, alias="lambda", ge=0.0, description="전이 손실 가중치")
    delta: float = Field(default=0.0, ge=0.0, description="관계 전이 수 게이트 임계값")
    tau: float = Field(default=0.2, ge=0.0, le=1.0, description="확률 변화 게이트 임계값")
    tau_gate: bool = Field(default=True, description="τ 게이트 사용 여부 (τ=0이면 무효)")
    epsilon: float = Field(default=1e-9, gt=0.0, description="정규화/로그 안정화 상수")
    gamma_pos: float = Field(default=0.9, ge=0.0, le=1.0, description="양성 마진")
    gamma_neg: float = Field(default=0.5, ge=0.0, le=1.0, description="음성 마진")
    eta: float = Field(default=0.5, ge=0.0, description="임계값 손실 가중치")


class TrainingDefaults(BaseModel):
    """외부 파인튜닝용 기록값 (툴킷은 학습하지 않음)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lora_rank: int = 32
    lora_alpha: int = 32
    optimizer: str = "sgd"
    learning_rate: float = 1e-5
    batch_size: int = 1
    goa_epochs: int = 5
    oora_epochs: int = 10
    context_tokens: int = 2000


class Settings(BaseSettings):
    """LSA Toolkit 실행 설정.

    환경 변수 PREFIX: LSA_ (중첩 필드는 `__` 구분)

    Examples:
        ```bash
        export LSA_API_KEY=sk-xxx
        export LSA_DECODE__MODEL=gpt-4o
        lsa run anticipate --config run.yaml --benchmark bench.jsonl --out preds.jsonl
        ```
    """

    model_config = SettingsConfigDict(
        env_prefix="LSA_",
        env_file=".env",
        env_file_encoding="utf-8",
        env_nested_delimiter="__",
        extra="ignore",
    )

    # === 경로 설정 ===
    corpus_path: str | None = Field(default=None, description="교환 포맷 코퍼스 JSON")
    benchmark_path: str | None = Field(default=None, description="벤치마크 JSONL")
    predictions_path: str | None = Field(default=None, description="예측 JSONL")
    reports_path: str | None = Field(default=None, description="eval 리포트 디렉토리")
    request_log_path: str | None = Field(default=None, description="LLM 요청 로그 JSONL")
    fixture_path: str | None = Field(default=None, description="fixture 백엔드 매니페스트")

    # === 벤치마크/평가 설정 ===
    fractions: list[float] = Field(
        default=[0.3, 0.5, 0.7, 0.9], description="관측 비율 목록"
    )
    k_values: list[int] = Field(default=[10, 20, 50], description="Recall@K의 K 목록")
    split: str | None = Field(default="test", description="벤치마크에 사용할 split (None=전체)")
    min_frames: int = Field(default=3, ge=2, description="최소 주석 프레임 수")

    # === 파이프라인 설정 ===
    mode: Literal["with_goa", "without_goa"] = Field(default="with_goa", description="예측 모드")
    mock: Literal["echo-last-frame", "fixture"] | None = Field(
        default=None, description="모의 백엔드 (None이면 실제 엔드포인트)"
    )
    one_shot: bool = Field(default=False, description="one-shot 예시 포함")
    token_budget: int | None = Field(default=2000, ge=1, description="프롬프트 토큰 예산")
    max_observed_segments: int | None = Field(default=None, ge=1, description="관측 윈도우")
    parallelism: int = Field(default=4, ge=1, le=256, description="동시 비디오/요청 상한")
    seed: int = Field(default=0, description="난수 시드")

    # === 인증/로깅 ===
    api_key: str = Field(default="", description="LLM API 키 (환경 변수 전용)")
    log_level: str = Field(default="INFO", description="로그 레벨")

    # === 중첩 설정 ===
    decode: DecodeConfig = Field(default_factory=DecodeConfig)
    loss: LossConfig = Field(default_factory=LossConfig)
    training: TrainingDefaults = Field(default_factory=TrainingDefaults)

    @field_validator("fractions")
    @classmethod
    def _check_fractions(cls, value: list[float]) -> list[float]:
        if not value:
            raise ValueError("fractions가 비어 있음")
        for f in value:
            if not 0.0 < f < 1.0:
                raise ValueError(f"관측 비율은 (0, 1) 범위여야 함: {f}")
        return value

    @field_validator("k_values")
    @classmethod
    def _check_k(cls, value: list[int]) -> list[int]:
        if not value or any(k < 1 for k in value):
            raise ValueError(f"K는 1 이상이어야 함: {value}")
        return value

    @field_validator("log_level")
    @classmethod
    def _check_log_level(cls, value: str) -> str:
        level = value.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"알 수 없는 로그 레벨: {value}")
        return level

    @model_validator(mode="after")
    def _check_mock(self) -> Settings:
        """fixture 백엔드는 매니페스트 경로 필요."""
        if self.mock == "fixture" and not self.fixture_path:
            raise ValueError("mock=fixture 사용 시 fixture_path 필요")
        return self

    @classmethod
    def from_yaml(cls, path: str | Path, **overrides: Any) -> Settings:
        """YAML 파일 로드 (overrides가 파일 값보다 우선).

        Raises:
            FileNotFoundError: 파일 없음
            ValueError: YAML 최상위가 매핑이 아닌 경우
        """
        content = Path(path).read_text(encoding="utf-8")
        data = yaml.safe_load(content) or {}
        if not isinstance(data, dict):
            raise ValueError(f"설정 파일 최상위는 매핑이어야 함: {path}")
        data.pop("api_key", None)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def file_dict(self) -> dict[str, Any]:
        """파일 저장용 딕셔너리 (비밀값 제외)."""
        return self.model_dump(mode="json", by_alias=True, exclude={"api_key"})

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.file_dict(), sort_keys=True, allow_unicode=True)

    def config_hash(self) -> str:
        """비밀값을 제외한 설정 해시 (SHA-256)."""
        return sha256_text(canonical_json(self.file_dict()))

    @property
    def has_api_key(self) -> bool:
        return bool(self.api_key)

    def to_dict(self) -> dict[str, Any]:
        """설정을 딕셔너리로 변환 (비밀키 마스킹)."""
        data = self.file_dict()
        key = self.api_key
        if len(key) > 10:
            data["api_key"] = f"{key[:6]}...{key[-4:]}"
        else:
            data["api_key"] = "***" if key else ""
        return data


def get_settings(config_path: str | None = None, **overrides: Any) -> Settings:
    """설정 로드 헬퍼."""
    if config_path:
        return Settings.from_yaml(config_path, **overrides)
    return Settings(**{k: v for k, v in overrides.items() if v is not None})
