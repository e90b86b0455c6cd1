"""Vocabulary 모델.

객체 클래스와 세 개의 관계 파티션(attention / spatial / contact) 정의.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Literal

logger = logging.getLogger(__name__)

Partition = Literal["attention", "spatial", "contact"]
PARTITIONS: tuple[Partition, ...] = ("attention", "spatial", "contact")

BACKGROUND = "__background__"
SUBJECT = "person"

DEFAULT_OBJECTS: tuple[str, ...] = (
    "person", "bag", "bed", "blanket", "book", "box", "broom", "chair",
    "closet/cabinet", "clothes", "cup/glass/bottle", "dish", "door", "doorknob",
    "doorway", "floor", "food", "groceries", "laptop", "light", "medicine",
    "mirror", "paper/notebook", "phone/camera", "picture", "pillow",
    "refrigerator", "sandwich", "shelf", "shoe", "sofa/couch", "table",
    "television", "towel", "vacuum", "window",
)  # fmt: skip

DEFAULT_ATTENTION: tuple[str, ...] = ("looking_at", "not_looking_at", "unsure")

DEFAULT_SPATIAL: tuple[str, ...] = (
    "above", "beneath", "in_front_of", "behind", "on_the_side_of", "in",
)  # fmt: skip

DEFAULT_CONTACT: tuple[str, ...] = (
    "carrying", "covered_by", "drinking_from", "eating", "have_it_on_the_back",
    "holding", "leaning_on", "lying_on", "not_contacting", "other_relationship",
    "sitting_on", "standing_on", "touching", "twisting", "wearing", "wiping",
    "writing_on",
)  # fmt: skip

# 문헌상 표기 개수 (실제 목록 개수와 다름)
STATED_OBJECT_CLASSES = 35
STATED_RELATION_CLASSES = 25


class VocabularyError(ValueError):
    """어휘 정의 오류."""


@dataclass(frozen=True)
class Vocabulary:
    """객체/관계 어휘.

    기능:
    - 이름 기반 정확 조회 (대소문자/언더스코어 보존)
    - 관계 → 파티션 역조회
    - 파티션 순서 정규화 (OORA 관측 블록용)

    Examples:
        ```python
        vocab = Vocabulary.default()
        vocab.partition_of("holding")       # "contact"
        vocab.has_object("cup/glass/bottle")  # True
        ```
    """

    objects: tuple[str, ...]
    attention: tuple[str, ...]
    spatial: tuple[str, ...]
    contact: tuple[str, ...]
    _partition_index: dict[str, Partition] = field(
        init=False, repr=False, compare=False, hash=False
    )
    _object_index: frozenset[str] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        index: dict[str, Partition] = {}
        for partition in PARTITIONS:
            for name in self.relations(partition):
                if name in index:
                    raise VocabularyError(
                        f"관계 '{name}'가 {index[name]}와 {partition} 파티션에 중복 정의됨"
                    )
                index[name] = partition
        if len(set(self.objects)) != len(self.objects):
            raise VocabularyError("객체 클래스 이름 중복")
        object.__setattr__(self, "_partition_index", index)
        object.__setattr__(self, "_object_index", frozenset(self.objects))

    @classmethod
    def default(cls) -> Vocabulary:
        """기본 어휘 (Action Genome 목록 그대로)."""
        return DEFAULT_VOCABULARY

    def relations(self, partition: Partition) -> tuple[str, ...]:
        """파티션별 관계 목록."""
        if partition == "attention":
            return self.attention
        if partition == "spatial":
            return self.spatial
        if partition == "contact":
            return self.contact
        raise VocabularyError(f"알 수 없는 파티션: {partition}")

    @property
    def all_relations(self) -> tuple[str, ...]:
        """attention → spatial → contact 순서의 전체 관계 목록."""
        return self.attention + self.spatial + self.contact

    @property
    def object_classes(self) -> tuple[str, ...]:
        """주체(person)를 제외한 객체 클래스."""
        return tuple(o for o in self.objects if o != SUBJECT)

    def has_object(self, name: str) -> bool:
        return name in self._object_index

    def partition_of(self, relation: str) -> Partition | None:
        """관계가 속한 파티션 (없으면 None)."""
        return self._partition_index.get(relation)

    def canonical_order(self, partition: Partition, relations: tuple[str, ...]) -> tuple[str, ...]:
        """관계 집합을 어휘 순서로 정렬."""
        order = self.relations(partition)
        present = set(relations)
        return tuple(r for r in order if r in present)

    def counts(self) -> dict[str, Any]:
        """어휘 크기 리포트 (문헌 표기 개수와 함께)."""
        return {
            "objects_listed": len(self.objects),
            "object_classes": len(self.object_classes),
            "object_classes_stated": STATED_OBJECT_CLASSES,
            "attention": len(self.attention),
            "spatial": len(self.spatial),
            "contact": len(self.contact),
            "relations_listed": len(self.all_relations),
            "relations_stated": STATED_RELATION_CLASSES,
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "objects": list(self.objects),
            "attention": list(self.attention),
            "spatial": list(self.spatial),
            "contact": list(self.contact),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Vocabulary:
        return cls(
            objects=tuple(data["objects"]),
            attention=tuple(data["attention"]),
            spatial=tuple(data["spatial"]),
            contact=tuple(data["contact"]),
        )


DEFAULT_VOCABULARY = Vocabulary(
    objects=DEFAULT_OBJECTS,
    attention=DEFAULT_ATTENTION,
    spatial=DEFAULT_SPATIAL,
    contact=DEFAULT_CONTACT,
)
