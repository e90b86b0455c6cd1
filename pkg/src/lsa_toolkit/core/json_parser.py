"""코퍼스 JSON 파싱 모듈.

교환 포맷(JSON 배열, {"videos": [...]}, 또는 JSONL)을 VideoRecord로 변환한다.
레코드 단위로 실패를 격리하며 파일 해시를 함께 반환한다.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from src.lsa_toolkit.models.graph import FrameGraph, GraphValidationError
from src.lsa_toolkit.models.instance import VideoRecord
from src.lsa_toolkit.models.vocabulary import DEFAULT_VOCABULARY, Vocabulary

logger = logging.getLogger(__name__)


class CorpusError(ValueError):
    """코퍼스 파일 오류."""

    def __init__(self, message: str, file_path: str | None = None):
        super().__init__(message)
        self.file_path = file_path


class EmptyCorpusError(CorpusError):
    """비디오가 하나도 없는 코퍼스."""


class CorpusRecordError(CorpusError):
    """레코드 1건의 형식/어휘 오류."""

    def __init__(self, message: str, video_id: str | None = None, index: int | None = None):
        super().__init__(f"[{video_id or f'#{index}'}] {message}")
        self.video_id = video_id
        self.index = index


@dataclass
class ParseResult:
    """레코드 1건 파싱 결과."""

    success: bool
    record: VideoRecord | None = None
    error: str | None = None
    video_id: str | None = None


@dataclass
class CorpusLoadResult:
    """코퍼스 파일 파싱 결과."""

    records: list[VideoRecord] = field(default_factory=list)
    errors: list[ParseResult] = field(default_factory=list)
    file_hash: str | None = None

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass
class CorpusParser:
    """교환 포맷 코퍼스 파서.

    기능:
    - JSON / JSONL 파일 파싱
    - 레코드별 스키마/어휘 검증 (실패는 ParseResult로 격리)
    - 파일 SHA-256 해시 (실행 매니페스트용)

    Examples:
        ```python
        parser = CorpusParser()
        result = parser.parse_file("corpus.json")
        for error in result.errors:
            print(error.video_id, error.error)
        ```
    """

    vocab: Vocabulary = DEFAULT_VOCABULARY
    encoding: str = "utf-8"

    def parse_file(self, file_path: str | Path) -> CorpusLoadResult:
        """코퍼스 파일 파싱.

        Raises:
            FileNotFoundError: 파일 없음
            CorpusError: JSON 디코딩 실패 또는 최상위 구조 오류
        """
        path = Path(file_path)
        if not path.exists():
            raise FileNotFoundError(f"코퍼스 파일 없음: {path}")
        content = path.read_text(encoding=self.encoding)
        items = self._decode(content, str(path))

        result = CorpusLoadResult(file_hash=hashlib.sha256(content.encode()).hexdigest())
        for index, item in enumerate(items):
            parsed = self.parse_record(item, index)
            if parsed.success:
                result.records.append(parsed.record)
            else:
                logger.warning(f"레코드 파싱 실패 ({parsed.video_id or index}): {parsed.error}")
                result.errors.append(parsed)
        logger.info(f"코퍼스 로드: {len(result.records)}건 성공, {len(result.errors)}건 실패")
        return result

    def _decode(self, content: str, file_path: str) -> list[Any]:
        stripped = content.strip()
        if not stripped:
            return []
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError:
            try:
                return [json.loads(line) for line in stripped.splitlines() if line.strip()]
            except json.JSONDecodeError as e:
                raise CorpusError(f"JSON 파싱 오류: {e}", file_path) from e
        if isinstance(data, dict) and "videos" in data:
            data = data["videos"]
        elif isinstance(data, dict):
            data = [data]
        if not isinstance(data, list):
            raise CorpusError("최상위는 비디오 배열이어야 함", file_path)
        return data

    def parse_record(self, item: Any, index: int = 0) -> ParseResult:
        """비디오 레코드 1건 파싱."""
        try:
            record = self.build_record(item, index)
        except CorpusRecordError as e:
            return ParseResult(success=False, error=str(e), video_id=e.video_id)
        return ParseResult(success=True, record=record, video_id=record.video_id)

    def build_record(self, item: Any, index: int = 0) -> VideoRecord:
        """레코드 검증 및 변환.

        Raises:
            CorpusRecordError: 필수 필드 누락, 프레임 순서/어휘 오류
        """
        if not isinstance(item, dict):
            raise CorpusRecordError("레코드는 객체여야 함", index=index)
        video_id = item.get("video_id")
        if not isinstance(video_id, str) or not video_id:
            raise CorpusRecordError("video_id 누락", index=index)
        frames_raw = item.get("frames")
        if not isinstance(frames_raw, list):
            raise CorpusRecordError("frames 배열 누락", video_id=video_id)

        try:
            frames = [FrameGraph.from_dict(f) for f in frames_raw]
            for frame in frames:
                frame.validate(self.vocab)
        except GraphValidationError as e:
            raise CorpusRecordError(str(e), video_id=video_id) from e
        except (KeyError, TypeError, ValueError) as e:
            raise CorpusRecordError(f"프레임 형식 오류: {e}", video_id=video_id) from e

        ids = [f.frame_id for f in frames]
        if any(b <= a for a, b in zip(ids, ids[1:], strict=False)):
            raise CorpusRecordError(f"frame_id가 증가하지 않음: {ids}", video_id=video_id)
        return VideoRecord(
            video_id=video_id, split=str(item.get("split", "test")), frames=tuple(frames)
        )
