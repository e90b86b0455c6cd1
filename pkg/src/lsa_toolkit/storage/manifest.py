"""실행 매니페스트.

`<output>.manifest.json`에 도구 버전, 명령행, 설정 해시, 입력 파일 해시를 남겨
모의 백엔드 실행을 그대로 재현할 수 있게 한다.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from src.lsa_toolkit import __version__
from src.lsa_toolkit.models.base import sha256_file, utcnow
from src.lsa_toolkit.storage.jsonl import read_json, write_json

logger = logging.getLogger(__name__)


@dataclass
class RunManifest:
    """실행 1회의 재현 정보."""

    command: str
    argv: list[str]
    config_hash: str
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    version: str = __version__
    created_at: str = ""
    extra: dict[str, Any] = field(default_factory=dict)

    def add_input(self, path: str | Path | None) -> None:
        """입력 파일 SHA-256 기록 (None은 무시)."""
        if path is None:
            return
        self.inputs[str(path)] = sha256_file(path)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tool": "lsa-toolkit",
            "version": self.version,
            "command": self.command,
            "argv": list(self.argv),
            "config_hash": self.config_hash,
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": list(self.outputs),
            "created_at": self.created_at or utcnow().isoformat(),
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunManifest:
        return cls(
            command=data["command"],
            argv=list(data.get("argv", [])),
            config_hash=data["config_hash"],
            inputs=dict(data.get("inputs", {})),
            outputs=list(data.get("outputs", [])),
            version=data.get("version", __version__),
            created_at=data.get("created_at", ""),
            extra=dict(data.get("extra", {})),
        )


def manifest_path(output: str | Path) -> Path:
    output = Path(output)
    return output.with_name(output.name + ".manifest.json")


def write_manifest(output: str | Path, manifest: RunManifest) -> Path:
    """출력 파일 옆에 매니페스트 저장."""
    manifest.outputs = [str(output), *[o for o in manifest.outputs if o != str(output)]]
    path = manifest_path(output)
    write_json(path, manifest.to_dict())
    logger.info(f"매니페스트 저장: {path}")
    return path


def read_manifest(output: str | Path) -> RunManifest:
    return RunManifest.from_dict(read_json(manifest_path(output)))
