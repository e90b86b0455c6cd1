"""JSONL 입출력.

벤치마크 인스턴스와 예측 레코드는 한 줄에 1건씩 저장한다.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from src.lsa_toolkit.models.graph import GraphValidationError
from src.lsa_toolkit.models.instance import LsaInstance
from src.lsa_toolkit.models.prediction import PredictionRecord

logger = logging.getLogger(__name__)


class JsonlError(ValueError):
    """JSONL 스키마/구문 오류."""

    def __init__(self, message: str, path: str | Path, line_no: int | None = None):
        location = f"{path}:{line_no}" if line_no is not None else str(path)
        super().__init__(f"{location}: {message}")
        self.path = str(path)
        self.line_no = line_no


def read_jsonl(path: str | Path) -> list[dict[str, Any]]:
    """JSONL 파일 읽기 (빈 줄 무시).

    Raises:
        FileNotFoundError: 파일 없음
        JsonlError: JSON 구문 오류 또는 객체가 아닌 줄
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"파일을 찾을 수 없음: {path}")
    items: list[dict[str, Any]] = []
    with path.open(encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                item = json.loads(line)
            except json.JSONDecodeError as e:
                raise JsonlError(f"JSON 파싱 오류: {e.msg}", path, line_no) from e
            if not isinstance(item, dict):
                raise JsonlError("각 줄은 JSON 객체여야 함", path, line_no)
            items.append(item)
    return items


def write_jsonl(path: str | Path, items: Iterable[dict[str, Any]]) -> int:
    """JSONL 파일 쓰기 (덮어쓰기). 기록 건수 반환."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8") as f:
        for item in items:
            f.write(json.dumps(item, ensure_ascii=False, sort_keys=True) + "\n")
            count += 1
    logger.debug(f"JSONL 저장: {path} ({count}건)")
    return count


def write_json(path: str | Path, data: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def read_json(path: str | Path) -> Any:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"파일을 찾을 수 없음: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise JsonlError(f"JSON 파싱 오류: {e.msg}", path, e.lineno) from e


def _decode(path: str | Path, items: list[dict[str, Any]], factory: Any) -> list[Any]:
    decoded = []
    for index, item in enumerate(items, start=1):
        try:
            decoded.append(factory(item))
        except (KeyError, TypeError) as e:
            raise JsonlError(f"스키마 불일치: 필드 {e} 누락 또는 형식 오류", path, index) from e
        except (GraphValidationError, ValidationError, ValueError) as e:
            raise JsonlError(f"스키마 불일치: {e}", path, index) from e
    return decoded


def load_instances(path: str | Path) -> list[LsaInstance]:
    """벤치마크 JSONL → LsaInstance 목록."""
    return _decode(path, read_jsonl(path), LsaInstance.from_dict)


def save_instances(path: str | Path, instances: Iterable[LsaInstance]) -> int:
    return write_jsonl(path, (i.to_dict() for i in instances))


def load_predictions(path: str | Path) -> list[PredictionRecord]:
    """예측 JSONL → PredictionRecord 목록."""
    return _decode(path, read_jsonl(path), PredictionRecord.from_dict)


def save_predictions(path: str | Path, records: Iterable[PredictionRecord]) -> int:
    return write_jsonl(path, (r.to_dict() for r in records))
