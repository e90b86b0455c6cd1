"""LLM 클라이언트 모듈.

OpenAI 호환 chat-completions 엔드포인트용 httpx 비동기 클라이언트.
일시 오류(429/5xx/타임아웃)는 지수 백오프로 재시도하고,
잘못된 요청/인증 오류는 재시도하지 않는다.
"""

from __future__ import annotations

import asyncio
import logging
import random
import time
from abc import ABC, abstractmethod
from collections.abc import Awaitable, Callable
from dataclasses import dataclass, field
from typing import Any

import httpx

from src.lsa_toolkit.config.settings import DecodeConfig
from src.lsa_toolkit.llm.request_log import RequestLog, RequestLogEntry
from src.lsa_toolkit.models.base import sha256_text

logger = logging.getLogger(__name__)

SleepFunc = Callable[[float], Awaitable[None]]


class LlmError(Exception):
    """LLM 호출 오류 기본 클래스."""

    kind = "llm_error"

    def __init__(self, message: str, attempts: int = 0, status_code: int | None = None):
        super().__init__(message)
        self.attempts = attempts
        self.status_code = status_code


class AuthenticationError(LlmError):
    """인증 실패 (HTTP 401/403)."""

    kind = "auth_failure"


class MalformedRequestError(LlmError):
    """잘못된 요청 (빈 프롬프트, HTTP 400/404/422). 재시도하지 않는다."""

    kind = "malformed_request"


class RequestTimeoutError(LlmError):
    """재시도 후에도 타임아웃."""

    kind = "timeout"


class RateLimitError(LlmError):
    """Rate Limit 재시도 소진 (HTTP 429)."""

    kind = "rate_limit"

    def __init__(self, message: str = "Rate limit exceeded", attempts: int = 0,
                 retry_after: float | None = None):
        super().__init__(message, attempts=attempts, status_code=429)
        self.retry_after = retry_after


class ServiceUnavailableError(LlmError):
    """재시도 후에도 서버/연결 오류 (HTTP 5xx)."""

    kind = "service_unavailable"


class InvalidResponseError(LlmError):
    """응답 본문이 chat-completions 형식이 아님."""

    kind = "invalid_response"


@dataclass
class CompletionResult:
    """완료 결과."""

    text: str
    latency_s: float
    prompt_sha256: str
    attempts: int = 1
    usage: dict[str, Any] = field(default_factory=dict)
    backend: str = ""


class BaseCompletionClient(ABC):
    """완료 클라이언트 공통 로직.

    기능:
    - 빈 프롬프트 거부 (재시도 없음)
    - asyncio.Semaphore 기반 동시 요청 상한
    - 지연 시간 측정 및 JSONL 요청 로그
    """

    name = "base"

    def __init__(self, max_in_flight: int = 4, request_log: RequestLog | None = None) -> None:
        if max_in_flight < 1:
            raise ValueError(f"max_in_flight는 1 이상이어야 함: {max_in_flight}")
        self.max_in_flight = max_in_flight
        self.request_log = request_log
        self._semaphore = asyncio.Semaphore(max_in_flight)

    async def complete(self, prompt: str, config: DecodeConfig) -> CompletionResult:
        """프롬프트 완료.

        Args:
            prompt: 프롬프트 텍스트
            config: 디코딩 설정

        Returns:
            CompletionResult

        Raises:
            LlmError: 하위 클래스별 실패 종류
        """
        prompt_hash = sha256_text(prompt)
        if not prompt or not prompt.strip():
            error = MalformedRequestError("빈 프롬프트", attempts=0)
            self._log(prompt_hash, config, 0.0, 0, error=error)
            raise error

        async with self._semaphore:
            started = time.perf_counter()
            try:
                text, usage, attempts = await self._complete(prompt, config)
            except LlmError as e:
                self._log(prompt_hash, config, time.perf_counter() - started, e.attempts, error=e)
                raise
            latency = time.perf_counter() - started

        self._log(prompt_hash, config, latency, attempts, text=text, usage=usage)
        return CompletionResult(
            text=text,
            latency_s=latency,
            prompt_sha256=prompt_hash,
            attempts=attempts,
            usage=usage,
            backend=self.name,
        )

    @abstractmethod
    async def _complete(
        self, prompt: str, config: DecodeConfig
    ) -> tuple[str, dict[str, Any], int]:
        """(텍스트, usage, 시도 횟수) 반환."""

    async def close(self) -> None:
        """리소스 정리 (기본 구현 없음)."""

    async def __aenter__(self) -> BaseCompletionClient:
        return self

    async def __aexit__(self, *exc: object) -> None:
        await self.close()

    def _log(
        self,
        prompt_hash: str,
        config: DecodeConfig,
        latency: float,
        attempts: int,
        text: str | None = None,
        usage: dict[str, Any] | None = None,
        error: LlmError | None = None,
    ) -> None:
        if self.request_log is None:
            return
        usage = usage or {}
        self.request_log.write(
            RequestLogEntry(
                backend=self.name,
                model=config.model,
                prompt_sha256=prompt_hash,
                temperature=config.temperature,
                top_p=config.top_p,
                max_output_tokens=config.max_output_tokens,
                latency_s=round(latency, 6),
                attempts=attempts,
                status="ok" if error is None else error.kind,
                response_sha256=sha256_text(text) if text is not None else None,
                prompt_tokens=usage.get("prompt_tokens"),
                completion_tokens=usage.get("completion_tokens"),
                error=str(error) if error is not None else None,
            )
        )


class ChatCompletionClient(BaseCompletionClient):
    """httpx 기반 OpenAI 호환 chat-completions 클라이언트.

    기능:
    - 비동기 HTTP 요청 (httpx.AsyncClient)
    - 429/5xx/타임아웃 지수 백오프 재시도 (Retry-After 우선)
    - 인증/요청 오류 즉시 실패

    Examples:
        ```python
        async with ChatCompletionClient(api_key=os.environ["LSA_API_KEY"]) as client:
            result = await client.complete(prompt, DecodeConfig(model="gpt-4o"))
            print(result.text)
        ```
    """

    name = "chat-completions"

    def __init__(
        self,
        api_key: str = "",
        max_in_flight: int = 4,
        request_log: RequestLog | None = None,
        transport: httpx.AsyncBaseTransport | None = None,
        sleep: SleepFunc = asyncio.sleep,
    ) -> None:
        """초기화.

        Args:
            api_key: Bearer 토큰 (로컬 런타임은 빈 값 허용)
            max_in_flight: 동시 요청 상한
            request_log: 요청 로그
            transport: 테스트용 httpx transport
            sleep: 백오프 대기 함수
        """
        super().__init__(max_in_flight=max_in_flight, request_log=request_log)
        self._api_key = api_key
        self._transport = transport
        self._sleep = sleep
        self._client: httpx.AsyncClient | None = None

    async def connect(self) -> None:
        """HTTP 클라이언트 초기화."""
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        self._client = httpx.AsyncClient(headers=headers, transport=self._transport)
        logger.info("ChatCompletionClient 연결")

    async def close(self) -> None:
        """클라이언트 종료."""
        if self._client:
            await self._client.aclose()
            self._client = None
            logger.info("ChatCompletionClient 연결 종료")

    async def __aenter__(self) -> ChatCompletionClient:
        await self.connect()
        return self

    def _calculate_backoff(self, attempt: int, config: DecodeConfig) -> float:
        """지수 백오프 지연 시간 (지터 포함)."""
        return (2**attempt) * config.backoff_base + random.uniform(0, config.backoff_jitter)

    def _payload(self, prompt: str, config: DecodeConfig) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "model": config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": config.temperature,
            "top_p": config.top_p,
        }
        if config.max_output_tokens is not None:
            payload["max_tokens"] = config.max_output_tokens
        return payload

    async def _complete(
        self, prompt: str, config: DecodeConfig
    ) -> tuple[str, dict[str, Any], int]:
        if self._client is None:
            await self.connect()
        url = f"{config.endpoint.rstrip('/')}/chat/completions"
        payload = self._payload(prompt, config)
        last_error: LlmError | None = None

        for attempt in range(config.max_retries + 1):
            attempts = attempt + 1
            retry_after: float | None = None
            try:
                response = await self._client.post(
                    url, json=payload, timeout=httpx.Timeout(config.timeout)
                )
            except httpx.TimeoutException as e:
                last_error = RequestTimeoutError(f"타임아웃: {e}", attempts=attempts)
            except httpx.TransportError as e:
                last_error = ServiceUnavailableError(f"연결 오류: {e}", attempts=attempts)
            else:
                status = response.status_code
                if status == 200:
                    text, usage = self._parse_body(response, attempts)
                    return text, usage, attempts
                if status in (401, 403):
                    raise AuthenticationError(
                        f"인증 실패 (HTTP {status})", attempts=attempts, status_code=status
                    )
                if status == 429:
                    retry_after = self._retry_after(response)
                    last_error = RateLimitError(attempts=attempts, retry_after=retry_after)
                elif status >= 500:
                    last_error = ServiceUnavailableError(
                        f"서버 오류 (HTTP {status})", attempts=attempts, status_code=status
                    )
                else:
                    raise MalformedRequestError(
                        f"요청 오류 (HTTP {status}): {response.text[:200]}",
                        attempts=attempts,
                        status_code=status,
                    )

            if attempt < config.max_retries:
                delay = retry_after if retry_after is not None else self._calculate_backoff(
                    attempt, config
                )
                logger.warning(
                    f"{last_error.kind} - {delay:.2f}초 후 재시도 "
                    f"({attempts}/{config.max_retries})"
                )
                await self._sleep(delay)

        assert last_error is not None
        logger.error(f"재시도 소진: {last_error}")
        raise last_error

    @staticmethod
    def _retry_after(response: httpx.Response) -> float | None:
        value = response.headers.get("Retry-After")
        try:
            return float(value) if value is not None else None
        except ValueError:
            return None

    @staticmethod
    def _parse_body(response: httpx.Response, attempts: int) -> tuple[str, dict[str, Any]]:
        try:
            body = response.json()
            content = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise InvalidResponseError(f"응답 형식 오류: {e}", attempts=attempts) from e
        if not isinstance(content, str):
            raise InvalidResponseError("응답 content가 문자열이 아님", attempts=attempts)
        return content, dict(body.get("usage") or {})
