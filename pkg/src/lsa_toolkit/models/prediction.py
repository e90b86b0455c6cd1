"""예측 모델.

Diagnostic, GoaPrediction, OoraPrediction, PredictionRecord.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal

from src.lsa_toolkit.models.graph import FrameGraph, ObjectState

Mode = Literal["with_goa", "without_goa"]
MODES: tuple[Mode, ...] = ("with_goa", "without_goa")


@dataclass(frozen=True)
class Diagnostic:
    """파싱/통합 과정에서 버려지거나 보정된 항목.

    Attributes:
        kind: unknown_object | unknown_relation | partition_violation | wrong_object |
            unparsed_line | duplicate_frame | duplicate_object | missing_frame | extra_frame |
            unobserved_object | total_parse_failure | client_error | fallback
        stage: goa | oora | integration
        token: 문제 토큰 또는 줄
        frame_id: 관련 프레임
        object: 관련 객체
        line_no: 응답 내 줄 번호 (1부터)
    """

    kind: str
    stage: str
    token: str | None = None
    frame_id: int | None = None
    object: str | None = None
    line_no: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Diagnostic:
        return cls(**data)


@dataclass(frozen=True)
class GoaPrediction:
    """GOA 파싱 결과: 요청 프레임별 예측 객체 (순서 보존)."""

    frames: dict[int, tuple[str, ...]]
    diagnostics: tuple[Diagnostic, ...] = ()

    def target_objects(self) -> list[str]:
        """프레임 순회 첫 등장 순서의 객체 합집합."""
        seen: dict[str, None] = {}
        for fid in sorted(self.frames):
            for name in self.frames[fid]:
                seen.setdefault(name, None)
        return list(seen)

    def frames_for(self, name: str) -> list[int]:
        return [fid for fid in sorted(self.frames) if name in self.frames[fid]]


@dataclass(frozen=True)
class OoraPrediction:
    """OORA 파싱 결과: 한 객체의 미래 프레임별 관계 상태."""

    object: str
    frames: dict[int, ObjectState]
    diagnostics: tuple[Diagnostic, ...] = ()


@dataclass(frozen=True)
class PredictionRecord:
    """비디오 1건의 최종 예측.

    Attributes:
        video_id: 비디오 id
        fraction: 관측 비율
        mode: 요청 모드 (with_goa | without_goa)
        future: 요청된 미래 프레임별 예측 그래프
        goa_objects: GOA 프레임별 객체 (with_goa 성공 시)
        goa_fallback: GOA 전체 파싱 실패로 without_goa 로 전환됐는지
        dropped_objects: 관측 이력이 없어 제외된 GOA 객체
        oora_calls: OORA 요청 수
        oora_failures: OORA 전체 실패(파싱/클라이언트) 객체 수
        provenance: 모델/설정/프롬프트 해시
        timing: 단계별 지연 시간 (초)
        diagnostics: 진단 목록
    """

    video_id: str
    fraction: float
    mode: Mode
    future: tuple[FrameGraph, ...]
    goa_objects: dict[int, tuple[str, ...]] | None = None
    goa_fallback: bool = False
    dropped_objects: tuple[str, ...] = ()
    oora_calls: int = 0
    oora_failures: int = 0
    provenance: dict[str, Any] = field(default_factory=dict)
    timing: dict[str, Any] = field(default_factory=dict)
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def future_frame_ids(self) -> list[int]:
        return [f.frame_id for f in self.future]

    def frame(self, frame_id: int) -> FrameGraph | None:
        for graph in self.future:
            if graph.frame_id == frame_id:
                return graph
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "video_id": self.video_id,
            "fraction": self.fraction,
            "mode": self.mode,
            "future": [f.to_dict() for f in self.future],
            "goa_objects": (
                {str(k): list(v) for k, v in self.goa_objects.items()}
                if self.goa_objects is not None
                else None
            ),
            "goa_fallback": self.goa_fallback,
            "dropped_objects": list(self.dropped_objects),
            "oora_calls": self.oora_calls,
            "oora_failures": self.oora_failures,
            "provenance": self.provenance,
            "timing": self.timing,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PredictionRecord:
        goa = data.get("goa_objects")
        return cls(
            video_id=data["video_id"],
            fraction=float(data["fraction"]),
            mode=data["mode"],
            future=tuple(FrameGraph.from_dict(f) for f in data["future"]),
            goa_objects={int(k): tuple(v) for k, v in goa.items()} if goa is not None else None,
            goa_fallback=bool(data.get("goa_fallback", False)),
            dropped_objects=tuple(data.get("dropped_objects", ())),
            oora_calls=int(data.get("oora_calls", 0)),
            oora_failures=int(data.get("oora_failures", 0)),
            provenance=dict(data.get("provenance", {})),
            timing=dict(data.get("timing", {})),
            diagnostics=tuple(Diagnostic.from_dict(d) for d in data.get("diagnostics", ())),
        )
