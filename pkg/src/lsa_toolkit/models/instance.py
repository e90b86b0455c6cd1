"""벤치마크 인스턴스 모델.

VideoRecord (교환 포맷 1건), LsaInstance (관측/미래 분할),
NoiseSpec, ObjectDynamicsStats.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Literal

from src.lsa_toolkit.core.merge import merge_sequence
from src.lsa_toolkit.models.graph import FrameGraph, GraphSequence

NoiseKind = Literal["drop", "modify"]


@dataclass(frozen=True)
class VideoRecord:
    """교환 포맷의 비디오 1건."""

    video_id: str
    split: str
    frames: tuple[FrameGraph, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "video_id": self.video_id,
            "split": self.split,
            "frames": [f.to_dict() for f in self.frames],
        }


@dataclass(frozen=True)
class NoiseSpec:
    """관측 구간 노이즈 주입 명세.

    Attributes:
        kind: drop (객체 절 1개 제거) | modify (객체 1개 관계 재샘플링)
        frame_range: 관측 구간 내 분수 범위 (lo, hi)
        rate: 범위 내 교란할 프레임 비율
        seed: 난수 시드
    """

    kind: NoiseKind
    frame_range: tuple[float, float] = (0.0, 1.0)
    rate: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("drop", "modify"):
            raise ValueError(f"알 수 없는 노이즈 종류: {self.kind}")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"rate는 [0, 1] 범위여야 함: {self.rate}")
        lo, hi = self.frame_range
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError(f"frame_range는 [0, 1] 내 lo ≤ hi 여야 함: {self.frame_range}")
        object.__setattr__(self, "frame_range", (float(lo), float(hi)))

    @property
    def label(self) -> str:
        lo, hi = self.frame_range
        return f"{self.kind} {lo:g}-{hi:g} @{self.rate:g}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "frame_range": list(self.frame_range),
            "rate": self.rate,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> NoiseSpec:
        return cls(
            kind=data["kind"],
            frame_range=tuple(data.get("frame_range", (0.0, 1.0))),
            rate=float(data.get("rate", 0.0)),
            seed=int(data.get("seed", 0)),
        )


@dataclass(frozen=True)
class LsaInstance:
    """관측 접두부 / 미래 정답으로 분할된 벤치마크 인스턴스.

    Attributes:
        video_id: 비디오 id
        fraction: 관측 비율
        observed: 관측 시퀀스
        future: 정답 미래 시퀀스 (추론 시 숨김)
        noise: 적용된 노이즈 명세
        perturbed_frames: 실제 교란된 관측 프레임 id
        warnings: 노이즈 주입 경고
    """

    video_id: str
    fraction: float
    observed: GraphSequence
    future: GraphSequence
    noise: NoiseSpec | None = None
    perturbed_frames: tuple[int, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def future_frame_ids(self) -> list[int]:
        return self.future.frame_ids

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "video_id": self.video_id,
            "fraction": self.fraction,
            "observed": [f.to_dict() for f in self.observed.frames],
            "future": [f.to_dict() for f in self.future.frames],
        }
        if self.noise is not None:
            data["noise"] = self.noise.to_dict()
            data["perturbed_frames"] = list(self.perturbed_frames)
        if self.warnings:
            data["warnings"] = list(self.warnings)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> LsaInstance:
        video_id = data["video_id"]
        observed = [FrameGraph.from_dict(f) for f in data["observed"]]
        future = [FrameGraph.from_dict(f) for f in data["future"]]
        noise = data.get("noise")
        return cls(
            video_id=video_id,
            fraction=float(data["fraction"]),
            observed=merge_sequence(observed, video_id),
            future=merge_sequence(future, video_id),
            noise=NoiseSpec.from_dict(noise) if noise else None,
            perturbed_frames=tuple(data.get("perturbed_frames", ())),
            warnings=tuple(data.get("warnings", ())),
        )


@dataclass(frozen=True)
class ObjectDynamicsStats:
    """객체 동역학 통계 (비디오 단위 비율).

    consistent는 배타 클래스, new_object / disappeared는 겹칠 수 있는 플래그이다.
    """

    consistent_rate: float
    new_object_rate: float
    disappeared_rate: float
    video_count: int

    @property
    def changed_rate(self) -> float:
        return 1.0 - self.consistent_rate

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["changed_rate"] = self.changed_rate
        return data
