"""장면 그래프 텍스트 직렬화 모듈.

정규 문법:
    Frame <a>[..<b>]: object: <name> attention: <r1[,r2]>, spatial: <...>, contact: <...>.

한 프레임의 두 번째 객체부터는 줄을 바꿔 `object: ...`로 시작한다.
객체가 없는 프레임은 `Frame <a>:` 헤더만 출력한다.
"""

from __future__ import annotations

import logging
import re

from src.lsa_toolkit.models.graph import (
    FrameGraph,
    GraphSegment,
    GraphSequence,
    GraphValidationError,
    ObjectState,
)
from src.lsa_toolkit.models.vocabulary import DEFAULT_VOCABULARY, PARTITIONS, Vocabulary

logger = logging.getLogger(__name__)

_HEADER_RE = re.compile(r"^Frame (?P<start>\d+)(?:\.\.(?P<end>\d+))?:(?: (?P<rest>.*))?$")
_NAME_RE = re.compile(r"^object: (\S+)")
_CLAUSE_RE = re.compile(
    r"^object: (?P<name>\S+) attention: (?P<attention>[^ ]*), "
    r"spatial: (?P<spatial>[^ ]*), contact: (?P<contact>[^ ]*?)\.?$"
)


class SerializationError(ValueError):
    """직렬화 오류 (어휘 위반 토큰 포함)."""

    def __init__(self, message: str, token: str | None = None):
        super().__init__(message)
        self.token = token


class FrameParseError(ValueError):
    """엄격 파싱 오류."""

    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(f"line {line_no}: {message}" if line_no is not None else message)
        self.line_no = line_no


class UnknownObjectError(FrameParseError):
    """어휘에 없는 객체."""

    def __init__(self, name: str, line_no: int | None = None):
        super().__init__(f"UnknownObject({name!r})", line_no)
        self.name = name


class UnknownRelationError(FrameParseError):
    """어휘에 없거나 파티션이 틀린 관계."""

    def __init__(self, name: str, partition: str, line_no: int | None = None):
        super().__init__(f"UnknownRelation({name!r}) in {partition}", line_no)
        self.name = name
        self.partition = partition


def serialize_object(state: ObjectState, vocab: Vocabulary = DEFAULT_VOCABULARY) -> str:
    """객체 절 직렬화 (마침표 포함)."""
    try:
        state.validate(vocab)
    except GraphValidationError as e:
        raise SerializationError(str(e), token=e.token) from e
    fields = ", ".join(f"{p}: {','.join(state.relations(p))}" for p in PARTITIONS)
    return f"object: {state.name} {fields}."


def frame_header(start: int, end: int | None = None) -> str:
    if end is None or end == start:
        return f"Frame {start}:"
    return f"Frame {start}..{end}:"


def serialize_frame(
    graph: FrameGraph | GraphSegment, vocab: Vocabulary = DEFAULT_VOCABULARY
) -> str:
    """프레임 또는 병합 구간을 정규 텍스트로 변환.

    Args:
        graph: FrameGraph 또는 GraphSegment
        vocab: 검증 어휘

    Returns:
        개행으로 구분된 텍스트 (끝 개행 없음)

    Raises:
        SerializationError: 어휘 위반 시 (문제 토큰 포함)
    """
    if isinstance(graph, GraphSegment):
        header = frame_header(graph.start_frame, graph.end_frame)
        objects = graph.graph.objects
    else:
        header = frame_header(graph.frame_id)
        objects = graph.objects

    clauses = [serialize_object(o, vocab) for o in objects]
    if not clauses:
        return header
    return "\n".join([f"{header} {clauses[0]}", *clauses[1:]])


def serialize_sequence(sequence: GraphSequence, vocab: Vocabulary = DEFAULT_VOCABULARY) -> str:
    return "\n".join(serialize_frame(seg, vocab) for seg in sequence.segments)


def _split_relations(
    raw: str, partition: str, vocab: Vocabulary, line_no: int
) -> tuple[str, ...]:
    if not raw:
        return ()
    values = tuple(raw.split(","))
    for value in values:
        if vocab.partition_of(value) != partition:
            raise UnknownRelationError(value, partition, line_no)
    return values


def _parse_clause(text: str, vocab: Vocabulary, line_no: int) -> ObjectState:
    name_match = _NAME_RE.match(text)
    if name_match is not None and not vocab.has_object(name_match.group(1)):
        raise UnknownObjectError(name_match.group(1), line_no)
    match = _CLAUSE_RE.match(text)
    if match is None:
        raise FrameParseError(f"객체 절 형식 오류: {text!r}", line_no)
    name = match.group("name")
    try:
        return ObjectState(
            name=name,
            attention=_split_relations(match.group("attention"), "attention", vocab, line_no),
            spatial=_split_relations(match.group("spatial"), "spatial", vocab, line_no),
            contact=_split_relations(match.group("contact"), "contact", vocab, line_no),
        )
    except GraphValidationError as e:
        raise FrameParseError(str(e), line_no) from e


def _build_segment(start: int, end: int, states: list[ObjectState], line_no: int) -> GraphSegment:
    try:
        first = FrameGraph(start, tuple(states))
        if end == start:
            return GraphSegment.single(first)
        return GraphSegment(start, end, (first, first.with_id(end)))
    except GraphValidationError as e:
        raise FrameParseError(str(e), line_no) from e


def parse_frame_text(
    text: str, vocab: Vocabulary = DEFAULT_VOCABULARY, video_id: str = ""
) -> GraphSequence:
    """정규 텍스트를 GraphSequence 조각으로 엄격 파싱.

    줄 끝 공백과 마지막 마침표 누락은 허용한다.
    "Frame a..b" 구간은 양 끝 id만 복원된다 (텍스트에 내부 id가 없음).

    Args:
        text: serialize_frame 출력 형식의 텍스트
        vocab: 검증 어휘
        video_id: 결과 시퀀스의 비디오 id

    Returns:
        GraphSequence

    Raises:
        FrameParseError: 헤더 형식 오류, 헤더 없는 객체 절
        UnknownObjectError: 어휘에 없는 객체
        UnknownRelationError: 어휘에 없는 관계
    """
    segments: list[GraphSegment] = []
    current: tuple[int, int, int] | None = None  # (start, end, header line)
    states: list[ObjectState] = []

    def flush() -> None:
        if current is not None:
            segments.append(_build_segment(current[0], current[1], states, current[2]))

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.rstrip()
        if not line:
            continue
        if line.startswith("Frame"):
            header = _HEADER_RE.match(line)
            if header is None:
                raise FrameParseError(f"프레임 헤더 형식 오류: {line!r}", line_no)
            flush()
            start = int(header.group("start"))
            end = int(header.group("end")) if header.group("end") else start
            if end < start:
                raise FrameParseError(f"구간 역전: {start}..{end}", line_no)
            current = (start, end, line_no)
            states = []
            if header.group("rest"):
                states.append(_parse_clause(header.group("rest"), vocab, line_no))
        elif line.startswith("object: "):
            if current is None:
                raise FrameParseError("프레임 헤더 없는 객체 절", line_no)
            states.append(_parse_clause(line, vocab, line_no))
        else:
            raise FrameParseError(f"알 수 없는 줄: {line!r}", line_no)
    flush()

    try:
        return GraphSequence(video_id=video_id, segments=tuple(segments))
    except GraphValidationError as e:
        raise FrameParseError(str(e)) from e
