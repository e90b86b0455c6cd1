"""Base 모델 유틸리티.

모든 레코드가 공유하는 시간/해시 헬퍼.
"""

from __future__ import annotations

import hashlib
import json
from datetime import UTC, datetime
from pathlib import Path
from typing import Any


def utcnow() -> datetime:
    """UTC 현재 시간 (timezone-aware)."""
    return datetime.now(UTC)


def sha256_text(text: str) -> str:
    """문자열 SHA-256 해시 (hex)."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path: str | Path) -> str:
    """파일 내용 SHA-256 해시 (hex)."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def canonical_json(data: Any) -> str:
    """키 정렬된 정규 JSON 문자열 (해시 계산용)."""
    return json.dumps(data, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
