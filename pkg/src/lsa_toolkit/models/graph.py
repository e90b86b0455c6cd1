"""장면 그래프 모델.

ObjectState / FrameGraph / GraphSegment / GraphSequence.
모든 타입은 생성 후 불변(frozen)이다.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, field, replace
from typing import Any

from src.lsa_toolkit.models.vocabulary import PARTITIONS, Partition, Vocabulary

BBox = tuple[float, float, float, float]
ContentKey = tuple[str, tuple[str, ...], tuple[str, ...], tuple[str, ...]]


class GraphValidationError(ValueError):
    """그래프 불변식 위반."""

    def __init__(self, message: str, token: str | None = None):
        super().__init__(message)
        self.token = token


@dataclass(frozen=True)
class ObjectState:
    """한 프레임에서 person과 한 객체 사이의 관계 상태.

    Attributes:
        name: 객체 클래스 이름
        attention: attention 관계 (저장 순서 보존)
        spatial: spatial 관계
        contact: contact 관계
        bbox: (x, y, w, h) 픽셀 좌표, 불투명 메타데이터
        partial: 파서가 일부 관계를 복구하지 못한 경우 True (비교 제외)
    """

    name: str
    attention: tuple[str, ...] = ()
    spatial: tuple[str, ...] = ()
    contact: tuple[str, ...] = ()
    bbox: BBox | None = None
    partial: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        for partition in PARTITIONS:
            values = tuple(getattr(self, partition))
            if len(set(values)) != len(values):
                raise GraphValidationError(
                    f"{self.name}: {partition} 관계 중복 {values}", token=self.name
                )
            object.__setattr__(self, partition, values)
        if self.bbox is not None:
            bbox = tuple(float(v) for v in self.bbox)
            if len(bbox) != 4:
                raise GraphValidationError(f"{self.name}: bbox는 4개 값이어야 함")
            object.__setattr__(self, "bbox", bbox)

    def relations(self, partition: Partition) -> tuple[str, ...]:
        return getattr(self, partition)

    def content_key(self) -> ContentKey:
        """병합 비교 키 (bbox 제외, 관계 순서 포함)."""
        return (self.name, self.attention, self.spatial, self.contact)

    def triples(self) -> list[tuple[str, str]]:
        """(object, relation) 목록 - attention → spatial → contact 생성 순서."""
        return [(self.name, r) for p in PARTITIONS for r in self.relations(p)]

    def canonical(self, vocab: Vocabulary) -> ObjectState:
        """관계를 어휘 순서로 정렬한 복사본."""
        return replace(
            self,
            attention=vocab.canonical_order("attention", self.attention),
            spatial=vocab.canonical_order("spatial", self.spatial),
            contact=vocab.canonical_order("contact", self.contact),
        )

    def without_bbox(self) -> ObjectState:
        return replace(self, bbox=None)

    def validate(self, vocab: Vocabulary) -> None:
        """어휘 검증.

        Raises:
            GraphValidationError: 객체/관계가 어휘에 없거나 파티션이 틀린 경우
        """
        if not vocab.has_object(self.name):
            raise GraphValidationError(f"알 수 없는 객체: {self.name}", token=self.name)
        for partition in PARTITIONS:
            for rel in self.relations(partition):
                if vocab.partition_of(rel) != partition:
                    raise GraphValidationError(
                        f"{self.name}: '{rel}'는 {partition} 관계가 아님", token=rel
                    )

    @property
    def is_empty(self) -> bool:
        return not (self.attention or self.spatial or self.contact)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "name": self.name,
            "attention": list(self.attention),
            "spatial": list(self.spatial),
            "contact": list(self.contact),
        }
        if self.bbox is not None:
            data["bbox"] = list(self.bbox)
        if self.partial:
            data["partial"] = True
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ObjectState:
        bbox = data.get("bbox")
        return cls(
            name=data["name"],
            attention=tuple(data.get("attention", ())),
            spatial=tuple(data.get("spatial", ())),
            contact=tuple(data.get("contact", ())),
            bbox=tuple(bbox) if bbox is not None else None,
            partial=bool(data.get("partial", False)),
        )


@dataclass(frozen=True)
class FrameGraph:
    """한 프레임의 장면 그래프.

    객체 클래스 이름은 프레임 내에서 유일하다.
    """

    frame_id: int
    objects: tuple[ObjectState, ...] = ()

    def __post_init__(self) -> None:
        if isinstance(self.frame_id, bool) or not isinstance(self.frame_id, int):
            raise GraphValidationError(f"frame_id는 정수여야 함: {self.frame_id!r}")
        if self.frame_id < 0:
            raise GraphValidationError(f"frame_id는 음수일 수 없음: {self.frame_id}")
        objects = tuple(self.objects)
        names = [o.name for o in objects]
        if len(set(names)) != len(names):
            raise GraphValidationError(f"Frame {self.frame_id}: 객체 중복 {names}")
        object.__setattr__(self, "objects", objects)

    @property
    def object_names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.objects)

    def get(self, name: str) -> ObjectState | None:
        for state in self.objects:
            if state.name == name:
                return state
        return None

    def content_key(self) -> tuple[ContentKey, ...]:
        return tuple(o.content_key() for o in self.objects)

    def triples(self) -> list[tuple[str, str]]:
        """프레임 전체 (object, relation) - 객체 순서, 파티션 순서."""
        return [t for o in self.objects for t in o.triples()]

    def with_id(self, frame_id: int) -> FrameGraph:
        return replace(self, frame_id=frame_id)

    def validate(self, vocab: Vocabulary) -> None:
        for state in self.objects:
            state.validate(vocab)

    def to_dict(self) -> dict[str, Any]:
        return {"frame_id": self.frame_id, "objects": [o.to_dict() for o in self.objects]}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> FrameGraph:
        return cls(
            frame_id=data["frame_id"],
            objects=tuple(ObjectState.from_dict(o) for o in data.get("objects", ())),
        )


@dataclass(frozen=True)
class GraphSegment:
    """동일 내용 연속 프레임의 병합 구간 ("Frame a..b").

    members는 구간에 포함된 실제 주석 프레임이며, 확장 시 그대로 복원된다.
    start_frame은 표시용 시작 id로 첫 멤버 id 이하일 수 있다 (객체별 관측 블록).

    Attributes:
        start_frame: 표시 시작 프레임
        end_frame: 마지막 멤버 프레임
        members: 구간의 주석 프레임들
    """

    start_frame: int
    end_frame: int
    members: tuple[FrameGraph, ...]

    def __post_init__(self) -> None:
        members = tuple(self.members)
        if not members:
            raise GraphValidationError("빈 구간")
        ids = [m.frame_id for m in members]
        if any(b <= a for a, b in zip(ids, ids[1:], strict=False)):
            raise GraphValidationError(f"구간 프레임 id가 증가하지 않음: {ids}")
        if self.start_frame > ids[0] or self.end_frame != ids[-1]:
            raise GraphValidationError(
                f"구간 경계 {self.start_frame}..{self.end_frame}가 멤버 {ids}와 불일치"
            )
        object.__setattr__(self, "members", members)

    @classmethod
    def single(cls, frame: FrameGraph) -> GraphSegment:
        return cls(frame.frame_id, frame.frame_id, (frame,))

    @property
    def graph(self) -> FrameGraph:
        """구간 공통 내용 (첫 멤버)."""
        return self.members[0]

    @property
    def frame_ids(self) -> tuple[int, ...]:
        return tuple(m.frame_id for m in self.members)

    @property
    def is_range(self) -> bool:
        return self.start_frame < self.end_frame


@dataclass(frozen=True)
class GraphSequence:
    """비디오 하나의 병합된 장면 그래프 시퀀스."""

    video_id: str
    segments: tuple[GraphSegment, ...] = ()

    def __post_init__(self) -> None:
        segments = tuple(self.segments)
        for prev, cur in zip(segments, segments[1:], strict=False):
            if cur.start_frame <= prev.end_frame:
                raise GraphValidationError(
                    f"{self.video_id}: 구간 {prev.end_frame} 다음 {cur.start_frame} 겹침"
                )
        object.__setattr__(self, "segments", segments)

    def __iter__(self) -> Iterator[GraphSegment]:
        return iter(self.segments)

    def __len__(self) -> int:
        return len(self.segments)

    @property
    def is_empty(self) -> bool:
        return not self.segments

    @property
    def frames(self) -> list[FrameGraph]:
        """확장된 주석 프레임 목록."""
        return [m for seg in self.segments for m in seg.members]

    @property
    def frame_ids(self) -> list[int]:
        return [m.frame_id for seg in self.segments for m in seg.members]

    @property
    def last_frame(self) -> FrameGraph | None:
        return self.segments[-1].members[-1] if self.segments else None

    def object_names(self) -> set[str]:
        """관측된 모든 객체 이름."""
        return {o.name for seg in self.segments for o in seg.graph.objects}

    def last_state_of(self, name: str) -> ObjectState | None:
        """객체가 등장한 가장 최근 프레임의 상태."""
        for frame in reversed(self.frames):
            state = frame.get(name)
            if state is not None:
                return state
        return None
