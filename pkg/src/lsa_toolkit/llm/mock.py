"""오프라인 모의 백엔드.

- echo-last-frame: 마지막 관측 프레임을 모든 요청 프레임에 그대로 반환
- fixture: 프롬프트 SHA-256 → 저장된 응답
"""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import Any

from src.lsa_toolkit.config.settings import DecodeConfig
from src.lsa_toolkit.core.serializer import FrameParseError, parse_frame_text
from src.lsa_toolkit.llm.client import BaseCompletionClient, LlmError, MalformedRequestError
from src.lsa_toolkit.llm.request_log import RequestLog
from src.lsa_toolkit.models.base import sha256_text
from src.lsa_toolkit.models.graph import FrameGraph
from src.lsa_toolkit.models.vocabulary import DEFAULT_VOCABULARY, PARTITIONS, Vocabulary

logger = logging.getLogger(__name__)

_GOA_CUE_RE = re.compile(r"^Future frame numbers to predict objects for: (?P<frames>.*):$")
_OORA_CUE_RE = re.compile(r"^Future frames (?P<frames>[\d, ]+) for object \[(?P<object>.+)\]:$")
_GOA_BLOCK_START = "\nObserved:\n\n"
_GOA_BLOCK_END = "\n\nPlease output in the following format:"
_OORA_BLOCK_START = re.compile(r"\nObserved segment for object \[[^\]]+\]:\n")
_OORA_BLOCK_END = "\n\nPlease generate the scene graph"


class FixtureNotFoundError(LlmError):
    """fixture 매니페스트에 없는 프롬프트."""

    kind = "fixture_missing"


class EchoLastFrameClient(BaseCompletionClient):
    """연속 객체 가정 모의 백엔드.

    GOA 프롬프트에는 마지막 관측 프레임의 객체 목록을,
    OORA 프롬프트에는 대상 객체의 마지막 관측 상태를 요청 프레임마다 반환한다.
    """

    name = "echo-last-frame"

    def __init__(
        self,
        vocab: Vocabulary = DEFAULT_VOCABULARY,
        max_in_flight: int = 4,
        request_log: RequestLog | None = None,
    ) -> None:
        super().__init__(max_in_flight=max_in_flight, request_log=request_log)
        self.vocab = vocab

    async def _complete(
        self, prompt: str, config: DecodeConfig
    ) -> tuple[str, dict[str, Any], int]:
        cue = prompt.rsplit("\n", 1)[-1]
        if match := _GOA_CUE_RE.match(cue):
            return self._echo_goa(prompt, match.group("frames")), {}, 1
        if match := _OORA_CUE_RE.match(cue):
            return self._echo_oora(prompt, match.group("frames")), {}, 1
        raise MalformedRequestError("GOA/OORA 프롬프트 형식이 아님", attempts=1)

    def _block(self, prompt: str, start: int, end_marker: str) -> str:
        end = prompt.rfind(end_marker)
        if end < start:
            raise MalformedRequestError("관측 블록을 찾을 수 없음", attempts=1)
        return prompt[start:end]

    def _last_graph(self, block: str) -> FrameGraph | None:
        try:
            sequence = parse_frame_text(block, self.vocab)
        except FrameParseError as e:
            raise MalformedRequestError(f"관측 블록 파싱 실패: {e}", attempts=1) from e
        return sequence.last_frame

    def _echo_goa(self, prompt: str, frames_text: str) -> str:
        start = prompt.rfind(_GOA_BLOCK_START)
        if start < 0:
            raise MalformedRequestError("Observed 블록 없음", attempts=1)
        last = self._last_graph(
            self._block(prompt, start + len(_GOA_BLOCK_START), _GOA_BLOCK_END)
        )
        names = ", ".join(last.object_names) if last is not None else ""
        frames = re.findall(r"\d+", frames_text)
        return "\n".join(f"Frame {f}: {names}".rstrip() for f in frames)

    def _echo_oora(self, prompt: str, frames_text: str) -> str:
        starts = list(_OORA_BLOCK_START.finditer(prompt))
        if not starts:
            raise MalformedRequestError("Observed segment 블록 없음", attempts=1)
        last = self._last_graph(self._block(prompt, starts[-1].end(), _OORA_BLOCK_END))
        if last is None or not last.objects:
            raise MalformedRequestError("대상 객체 관측 상태 없음", attempts=1)
        state = last.objects[0]
        fields = ", ".join(f"{p}: {','.join(state.relations(p))}" for p in PARTITIONS)
        frames = re.findall(r"\d+", frames_text)
        return "\n".join(f"Frame {f}: object: {state.name} {fields}." for f in frames)


class FixtureClient(BaseCompletionClient):
    """프롬프트 해시로 저장된 응답을 반환하는 모의 백엔드.

    매니페스트 형식:
        ```json
        {"model": "ootsm", "entries": [
            {"prompt_file": "goa_zero_shot.txt", "response": "Frame 486: floor, broom"},
            {"prompt": "...inline prompt...", "response": "..."}
        ]}
        ```
    prompt_file 경로는 매니페스트 파일 기준 상대 경로이며 해시는 로드 시 계산한다.
    """

    name = "fixture"

    def __init__(
        self,
        responses: dict[str, str],
        max_in_flight: int = 4,
        request_log: RequestLog | None = None,
    ) -> None:
        super().__init__(max_in_flight=max_in_flight, request_log=request_log)
        self.responses = dict(responses)

    @classmethod
    def from_manifest(cls, path: str | Path, **kwargs: Any) -> FixtureClient:
        """매니페스트 로드.

        Raises:
            FileNotFoundError: 매니페스트 또는 prompt_file 없음
            ValueError: 항목 형식 오류
        """
        manifest_path = Path(path)
        data = json.loads(manifest_path.read_text(encoding="utf-8"))
        responses: dict[str, str] = {}
        for i, entry in enumerate(data.get("entries", [])):
            if "prompt_file" in entry:
                prompt_path = manifest_path.parent / entry["prompt_file"]
                prompt = prompt_path.read_text(encoding="utf-8")
            elif "prompt" in entry:
                prompt = entry["prompt"]
            else:
                raise ValueError(f"fixture 항목 {i}: prompt 또는 prompt_file 필요")
            if "response" not in entry:
                raise ValueError(f"fixture 항목 {i}: response 필요")
            responses[sha256_text(prompt)] = entry["response"]
        logger.info(f"fixture 응답 {len(responses)}개 로드: {manifest_path}")
        return cls(responses, **kwargs)

    async def _complete(
        self, prompt: str, config: DecodeConfig
    ) -> tuple[str, dict[str, Any], int]:
        key = sha256_text(prompt)
        if key not in self.responses:
            raise FixtureNotFoundError(f"fixture 응답 없음: {key[:12]}", attempts=1)
        return self.responses[key], {}, 1
