"""2단계 예측 파이프라인 모듈.

GOA(전역 객체 예측) → 객체별 OORA(관계 예측) → 통합.
"""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from src.lsa_toolkit.config.settings import DecodeConfig
from src.lsa_toolkit.core.response_parser import (
    TotalParseFailure,
    parse_goa_response,
    parse_oora_response,
)
from src.lsa_toolkit.llm.client import BaseCompletionClient, LlmError
from src.lsa_toolkit.models.graph import FrameGraph, GraphSequence, ObjectState
from src.lsa_toolkit.models.instance import LsaInstance
from src.lsa_toolkit.models.prediction import (
    MODES,
    Diagnostic,
    Mode,
    OoraPrediction,
    PredictionRecord,
)
from src.lsa_toolkit.models.prompt import PromptBundle
from src.lsa_toolkit.models.vocabulary import DEFAULT_VOCABULARY, Vocabulary
from src.lsa_toolkit.prompts.budget import TokenEstimator, char_estimator, truncate_to_budget
from src.lsa_toolkit.prompts.builder import PromptError, build_goa_prompt, build_oora_prompt

logger = logging.getLogger(__name__)


@dataclass
class _OoraOutcome:
    """객체 1개의 OORA 결과."""

    name: str
    prediction: OoraPrediction | None
    prompt_sha256: str | None = None
    latency_s: float | None = None
    diagnostics: list[Diagnostic] = field(default_factory=list)


@dataclass(frozen=True)
class BatchFailure:
    """GOA 요청이 실패해 예측하지 못한 인스턴스."""

    video_id: str
    fraction: float
    error: LlmError

    def to_dict(self) -> dict[str, Any]:
        return {
            "video_id": self.video_id,
            "fraction": self.fraction,
            "kind": self.error.kind,
            "error": str(self.error),
        }


@dataclass
class BatchResult:
    """anticipate_many 결과. records는 완료된 인스턴스만 입력 순서대로 담는다."""

    records: list[PredictionRecord] = field(default_factory=list)
    failures: list[BatchFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


class Anticipator:
    """GOA → OORA 예측기.

    기능:
    - with_goa: GOA로 프레임별 객체를 예측하고 객체별로 OORA 요청
    - without_goa: 마지막 관측 프레임의 객체를 모든 미래 프레임에 투영
    - GOA 전체 파싱 실패 시 without_goa 로 자동 전환
    - OORA 실패 객체는 마지막 관측 상태로 대체

    Examples:
        ```python
        client = EchoLastFrameClient()
        anticipator = Anticipator(client, DecodeConfig())
        record = await anticipator.anticipate(instance, mode="without_goa")
        ```
    """

    def __init__(
        self,
        client: BaseCompletionClient,
        decode: DecodeConfig | None = None,
        vocab: Vocabulary = DEFAULT_VOCABULARY,
        one_shot: bool = False,
        token_budget: int | None = 2000,
        estimator: TokenEstimator = char_estimator,
        max_observed_segments: int | None = None,
        normalize_tokens: bool = False,
        extra_provenance: dict[str, Any] | None = None,
    ) -> None:
        self.client = client
        self.decode = decode or DecodeConfig()
        self.vocab = vocab
        self.one_shot = one_shot
        self.token_budget = token_budget
        self.estimator = estimator
        self.max_observed_segments = max_observed_segments
        self.normalize_tokens = normalize_tokens
        self.extra_provenance = dict(extra_provenance or {})

    def _fit(self, bundle: PromptBundle) -> PromptBundle:
        if self.token_budget is None:
            return bundle
        return truncate_to_budget(bundle, self.token_budget, self.estimator)

    async def anticipate(self, instance: LsaInstance, mode: Mode = "with_goa") -> PredictionRecord:
        """인스턴스 1건 예측.

        Args:
            instance: 관측/미래 분할 인스턴스 (미래는 프레임 id만 사용)
            mode: with_goa | without_goa

        Returns:
            PredictionRecord (미래 프레임 id는 요청 id와 정확히 일치)

        Raises:
            PromptError: 관측 구간이 비어 있는 경우
            LlmError: GOA 요청 실패 시
        """
        if mode not in MODES:
            raise ValueError(f"알 수 없는 모드: {mode}")
        observed = instance.observed
        if observed.is_empty:
            raise PromptError(f"{instance.video_id}: 관측 구간이 비어 있음")
        future_ids = instance.future_frame_ids

        diagnostics: list[Diagnostic] = []
        timing: dict[str, Any] = {"goa_latency_s": None, "oora_latency_s": []}
        provenance: dict[str, Any] = {
            "backend": self.client.name,
            "model": self.decode.model,
            "temperature": self.decode.temperature,
            "top_p": self.decode.top_p,
            "one_shot": self.one_shot,
            **self.extra_provenance,
        }

        goa_objects: dict[int, tuple[str, ...]] | None = None
        goa_fallback = False
        if mode == "with_goa":
            bundle = self._fit(
                build_goa_prompt(
                    observed, future_ids, self.one_shot, self.vocab, self.max_observed_segments
                )
            )
            provenance["goa_prompt_sha256"] = bundle.sha256
            result = await self.client.complete(bundle.text, self.decode)
            timing["goa_latency_s"] = result.latency_s
            try:
                goa = parse_goa_response(
                    result.text, future_ids, self.vocab, normalize=self.normalize_tokens
                )
                diagnostics.extend(goa.diagnostics)
                goa_objects = goa.frames
            except TotalParseFailure as e:
                logger.warning(f"{instance.video_id}: GOA 파싱 실패 - without_goa 로 전환")
                diagnostics.extend(e.diagnostics)
                diagnostics.append(Diagnostic("total_parse_failure", "goa"))
                goa_fallback = True

        if goa_objects is not None:
            schedule = self._schedule_from_goa(goa_objects, observed, diagnostics)
        else:
            schedule = self._schedule_continuous(observed, future_ids)
        dropped = tuple(
            d.object for d in diagnostics if d.kind == "unobserved_object" and d.object
        )

        outcomes = await asyncio.gather(
            *(self._run_oora(observed, name, frames) for name, frames in schedule.items())
        )
        by_name = {o.name: o for o in outcomes}

        oora_hashes: dict[str, str] = {}
        failures = 0
        for outcome in outcomes:
            diagnostics.extend(outcome.diagnostics)
            if outcome.prompt_sha256:
                oora_hashes[outcome.name] = outcome.prompt_sha256
            if outcome.latency_s is not None:
                timing["oora_latency_s"].append(outcome.latency_s)
            if outcome.prediction is None:
                failures += 1
        provenance["oora_prompt_sha256"] = oora_hashes

        future = self._integrate(
            future_ids, schedule, by_name, observed, diagnostics, frame_order=goa_objects
        )
        return PredictionRecord(
            video_id=instance.video_id,
            fraction=instance.fraction,
            mode=mode,
            future=future,
            goa_objects=goa_objects,
            goa_fallback=goa_fallback,
            dropped_objects=dropped,
            oora_calls=len(schedule),
            oora_failures=failures,
            provenance=provenance,
            timing=timing,
            diagnostics=tuple(diagnostics),
        )

    async def anticipate_many(
        self,
        instances: Sequence[LsaInstance],
        mode: Mode = "with_goa",
        parallelism: int = 4,
    ) -> BatchResult:
        """여러 인스턴스 병렬 예측 (입력 순서 유지).

        한 인스턴스의 GOA 클라이언트 오류는 그 인스턴스만 실패로 기록하고
        나머지 인스턴스의 결과는 유지한다. LlmError 이외의 예외는 그대로 전파된다.
        """
        semaphore = asyncio.Semaphore(parallelism)

        async def run(instance: LsaInstance) -> PredictionRecord:
            async with semaphore:
                record = await self.anticipate(instance, mode)
                logger.info(
                    f"{instance.video_id} @{instance.fraction:g}: "
                    f"{len(record.future)}개 프레임 예측 (OORA {record.oora_calls}회)"
                )
                return record

        results = await asyncio.gather(*(run(i) for i in instances), return_exceptions=True)
        batch = BatchResult()
        for instance, result in zip(instances, results, strict=True):
            if isinstance(result, LlmError):
                logger.error(
                    f"{instance.video_id} @{instance.fraction:g}: "
                    f"예측 실패 ({result.kind}, 시도 {result.attempts}회): {result}"
                )
                batch.failures.append(BatchFailure(instance.video_id, instance.fraction, result))
            elif isinstance(result, BaseException):
                raise result
            else:
                batch.records.append(result)
        return batch

    def _schedule_from_goa(
        self,
        goa_objects: dict[int, tuple[str, ...]],
        observed: GraphSequence,
        diagnostics: list[Diagnostic],
    ) -> dict[str, list[int]]:
        """GOA 결과 → 객체별 요청 프레임 (프레임별 게이팅)."""
        seen = observed.object_names()
        schedule: dict[str, list[int]] = {}
        for frame_id in sorted(goa_objects):
            for name in goa_objects[frame_id]:
                if name not in seen:
                    if not any(d.kind == "unobserved_object" and d.object == name
                               for d in diagnostics):
                        diagnostics.append(
                            Diagnostic("unobserved_object", "integration", object=name)
                        )
                    continue
                schedule.setdefault(name, []).append(frame_id)
        return schedule

    @staticmethod
    def _schedule_continuous(
        observed: GraphSequence, future_ids: list[int]
    ) -> dict[str, list[int]]:
        """연속 객체 가정: 마지막 관측 프레임 객체를 모든 미래 프레임에."""
        last = observed.last_frame
        names = last.object_names if last is not None else ()
        return {name: list(future_ids) for name in names}

    async def _run_oora(
        self, observed: GraphSequence, name: str, frames: list[int]
    ) -> _OoraOutcome:
        outcome = _OoraOutcome(name=name, prediction=None)
        bundle = self._fit(
            build_oora_prompt(
                observed, name, frames, self.one_shot, self.vocab, self.max_observed_segments
            )
        )
        outcome.prompt_sha256 = bundle.sha256
        try:
            result = await self.client.complete(bundle.text, self.decode)
        except LlmError as e:
            logger.error(f"OORA 요청 실패 ({name}): {e}")
            outcome.diagnostics.append(
                Diagnostic("client_error", "oora", token=e.kind, object=name)
            )
            return outcome
        outcome.latency_s = result.latency_s
        try:
            prediction = parse_oora_response(
                result.text, name, frames, self.vocab, normalize=self.normalize_tokens
            )
        except TotalParseFailure as e:
            logger.warning(f"OORA 파싱 실패 ({name})")
            outcome.diagnostics.extend(e.diagnostics)
            outcome.diagnostics.append(Diagnostic("total_parse_failure", "oora", object=name))
            return outcome
        outcome.prediction = prediction
        outcome.diagnostics.extend(prediction.diagnostics)
        return outcome

    def _integrate(
        self,
        future_ids: list[int],
        schedule: dict[str, list[int]],
        outcomes: dict[str, _OoraOutcome],
        observed: GraphSequence,
        diagnostics: list[Diagnostic],
        frame_order: dict[int, tuple[str, ...]] | None = None,
    ) -> tuple[FrameGraph, ...]:
        """OORA 결과를 프레임별 그래프로 통합.

        객체 순서는 GOA 프레임별 순서 (없으면 스케줄 순서)를 따르며 완료 순서와 무관하다.
        """
        frames: list[FrameGraph] = []
        for frame_id in future_ids:
            states: list[ObjectState] = []
            order = frame_order.get(frame_id, ()) if frame_order is not None else schedule
            for name in order:
                if frame_id not in schedule.get(name, ()):
                    continue
                prediction = outcomes[name].prediction
                state = prediction.frames.get(frame_id) if prediction is not None else None
                if state is None:
                    state = self._fallback(observed, name)
                    if state is None:
                        continue
                    diagnostics.append(
                        Diagnostic("fallback", "integration", frame_id=frame_id, object=name)
                    )
                states.append(state)
            frames.append(FrameGraph(frame_id, tuple(states)))
        return tuple(frames)

    @staticmethod
    def _fallback(observed: GraphSequence, name: str) -> ObjectState | None:
        state = observed.last_state_of(name)
        return state.without_bbox() if state is not None else None
