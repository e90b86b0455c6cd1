"""LLM 요청/응답 JSONL 로그.

한 줄에 요청 1건. 프롬프트/응답 본문 대신 SHA-256 해시를 남기며 API 키는 기록하지 않는다.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

from src.lsa_toolkit.models.base import utcnow

logger = logging.getLogger(__name__)


@dataclass
class RequestLogEntry:
    """요청 로그 1건."""

    backend: str
    model: str
    prompt_sha256: str
    temperature: float
    top_p: float
    max_output_tokens: int | None
    latency_s: float
    attempts: int
    status: str = "ok"
    response_sha256: str | None = None
    prompt_tokens: int | None = None
    completion_tokens: int | None = None
    error: str | None = None
    timestamp: str = ""

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        if not data["timestamp"]:
            data["timestamp"] = utcnow().isoformat()
        return data


class RequestLog:
    """스레드 안전 JSONL 요청 로그.

    path가 None이면 메모리(entries)에만 보관한다 (테스트용).
    path가 있으면 파일에만 쓰고 entries는 비어 있다.
    """

    def __init__(self, path: str | Path | None = None) -> None:
        self.path = Path(path) if path else None
        self.entries: list[dict[str, Any]] = []
        self._lock = threading.Lock()
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def write(self, entry: RequestLogEntry) -> None:
        record = entry.to_dict()
        with self._lock:
            if self.path is None:
                self.entries.append(record)
                return
            with self.path.open("a", encoding="utf-8") as f:
                f.write(json.dumps(record, ensure_ascii=False) + "\n")

    def read(self) -> list[dict[str, Any]]:
        """기록된 요청 목록 (파일 기반이면 파일에서 다시 읽는다)."""
        if self.path is None:
            return list(self.entries)
        if not self.path.exists():
            return []
        with self._lock, self.path.open(encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]

    def latencies(self) -> list[float]:
        return [e["latency_s"] for e in self.read() if e["status"] == "ok"]
