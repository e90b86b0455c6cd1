"""LLM 응답 파서 모듈.

모델 출력 텍스트를 줄 단위로 복구 파싱한다.
버려진 모든 토큰/줄은 Diagnostic으로 기록된다.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Sequence

from src.lsa_toolkit.models.graph import ObjectState
from src.lsa_toolkit.models.prediction import Diagnostic, GoaPrediction, OoraPrediction
from src.lsa_toolkit.models.vocabulary import DEFAULT_VOCABULARY, PARTITIONS, Vocabulary

logger = logging.getLogger(__name__)

_GOA_LINE_RE = re.compile(r"^Frame\s*(?P<frame>\d+)\s*:\s*(?P<objects>.*?)\s*\.?\s*$")
_OORA_LINE_RE = re.compile(
    r"^Frame\s*(?P<frame>\d+)\s*:\s*(?:object:\s*)?(?P<name>\S+?)\s+"
    r"attention:\s*(?P<attention>.*?)\s*,\s*"
    r"spatial:\s*(?P<spatial>.*?)\s*,\s*"
    r"contact:\s*(?P<contact>.*?)\s*\.?\s*$"
)


class TotalParseFailure(ValueError):
    """응답에서 사용할 수 있는 줄이 하나도 없음."""

    def __init__(self, stage: str, name: str | None = None, diagnostics: Sequence = ()):
        target = f" ({name})" if name else ""
        super().__init__(f"{stage} 응답 전체 파싱 실패{target}")
        self.stage = stage
        self.object = name
        self.diagnostics = tuple(diagnostics)


def normalize_token(token: str) -> str:
    """소문자 + 공백→언더스코어 정규화."""
    return re.sub(r"\s+", "_", token.strip().lower())


def _clean_lines(text: str) -> list[tuple[int, str]]:
    return [
        (i, line.strip().strip("*`").strip())
        for i, line in enumerate(text.splitlines(), start=1)
        if line.strip()
    ]


def _resolve(token: str, candidates: set[str], normalize: bool) -> str | None:
    if token in candidates:
        return token
    if normalize:
        lookup = {normalize_token(c): c for c in candidates}
        return lookup.get(normalize_token(token))
    return None


def _frame_bookkeeping(
    stage: str,
    requested: Sequence[int],
    seen: dict[int, int],
    frame_id: int,
    line_no: int,
    diagnostics: list[Diagnostic],
    name: str | None = None,
) -> bool:
    """프레임 id 검사. 요청 외 프레임이면 False."""
    if frame_id not in requested:
        diagnostics.append(
            Diagnostic("extra_frame", stage, frame_id=frame_id, object=name, line_no=line_no)
        )
        return False
    if frame_id in seen:
        diagnostics.append(
            Diagnostic("duplicate_frame", stage, frame_id=frame_id, object=name, line_no=line_no)
        )
    seen[frame_id] = line_no
    return True


def parse_goa_response(
    text: str,
    requested_frames: Sequence[int],
    vocab: Vocabulary = DEFAULT_VOCABULARY,
    normalize: bool = False,
) -> GoaPrediction:
    """GOA 응답 파싱 ("Frame <index>: <objects>").

    Args:
        text: 모델 출력
        requested_frames: 요청한 미래 프레임 id
        vocab: 어휘
        normalize: 소문자/언더스코어 정규화 후 일치 허용

    Returns:
        GoaPrediction (요청 프레임 전체 포함, 누락 프레임은 빈 튜플)

    Raises:
        TotalParseFailure: 문법에 맞는 줄이 하나도 없는 경우
    """
    requested = list(requested_frames)
    objects = set(vocab.objects)
    diagnostics: list[Diagnostic] = []
    frames: dict[int, tuple[str, ...]] = {}
    seen: dict[int, int] = {}
    accepted = 0

    for line_no, line in _clean_lines(text):
        match = _GOA_LINE_RE.match(line)
        if match is None:
            diagnostics.append(Diagnostic("unparsed_line", "goa", token=line, line_no=line_no))
            continue
        accepted += 1
        frame_id = int(match.group("frame"))
        if not _frame_bookkeeping("goa", requested, seen, frame_id, line_no, diagnostics):
            continue

        names: list[str] = []
        for raw in match.group("objects").split(","):
            token = raw.strip()
            if not token:
                continue
            name = _resolve(token, objects, normalize)
            if name is None:
                diagnostics.append(
                    Diagnostic("unknown_object", "goa", token=token, frame_id=frame_id,
                               line_no=line_no)
                )
            elif name in names:
                diagnostics.append(
                    Diagnostic("duplicate_object", "goa", token=token, frame_id=frame_id,
                               line_no=line_no)
                )
            else:
                names.append(name)
        frames[frame_id] = tuple(names)

    if accepted == 0:
        raise TotalParseFailure("goa", diagnostics=diagnostics)

    for frame_id in requested:
        if frame_id not in frames:
            frames[frame_id] = ()
            diagnostics.append(Diagnostic("missing_frame", "goa", frame_id=frame_id))

    ordered = {fid: frames[fid] for fid in sorted(frames)}
    return GoaPrediction(frames=ordered, diagnostics=tuple(diagnostics))


def parse_oora_response(
    text: str,
    name: str,
    requested_frames: Sequence[int],
    vocab: Vocabulary = DEFAULT_VOCABULARY,
    normalize: bool = False,
) -> OoraPrediction:
    """OORA 응답 파싱 (객체 1개의 프레임별 관계).

    다른 객체를 지칭한 줄은 거부되고, 다른 파티션의 관계는 버려진다.
    마지막 마침표는 선택 사항이다.

    Args:
        text: 모델 출력
        name: 대상 객체
        requested_frames: 요청한 미래 프레임 id
        vocab: 어휘
        normalize: 소문자/언더스코어 정규화 후 일치 허용

    Returns:
        OoraPrediction (frame_id 오름차순)

    Raises:
        TotalParseFailure: 대상 객체에 대해 수용된 줄이 하나도 없는 경우
    """
    requested = list(requested_frames)
    relations = set(vocab.all_relations)
    diagnostics: list[Diagnostic] = []
    frames: dict[int, ObjectState] = {}
    seen: dict[int, int] = {}

    for line_no, line in _clean_lines(text):
        match = _OORA_LINE_RE.match(line)
        if match is None:
            diagnostics.append(
                Diagnostic("unparsed_line", "oora", token=line, object=name, line_no=line_no)
            )
            continue
        frame_id = int(match.group("frame"))
        named = match.group("name")
        if _resolve(named, {name}, normalize) is None:
            diagnostics.append(
                Diagnostic("wrong_object", "oora", token=named, frame_id=frame_id, object=name,
                           line_no=line_no)
            )
            continue
        if not _frame_bookkeeping("oora", requested, seen, frame_id, line_no, diagnostics, name):
            continue

        values: dict[str, list[str]] = {}
        partial = False
        for partition in PARTITIONS:
            kept: list[str] = []
            for raw in match.group(partition).split(","):
                token = raw.strip()
                if not token:
                    continue
                relation = _resolve(token, relations, normalize)
                if relation is None:
                    kind = "unknown_relation"
                elif vocab.partition_of(relation) != partition:
                    kind = "partition_violation"
                elif relation in kept:
                    kind = "duplicate_relation"
                else:
                    kept.append(relation)
                    continue
                partial = True
                diagnostics.append(
                    Diagnostic(kind, "oora", token=token, frame_id=frame_id, object=name,
                               line_no=line_no)
                )
            values[partition] = kept
        state = ObjectState(
            name=name,
            attention=tuple(values["attention"]),
            spatial=tuple(values["spatial"]),
            contact=tuple(values["contact"]),
            partial=partial or any(not v for v in values.values()),
        )
        frames[frame_id] = state

    if not frames:
        raise TotalParseFailure("oora", name, diagnostics)

    for frame_id in requested:
        if frame_id not in frames:
            diagnostics.append(Diagnostic("missing_frame", "oora", frame_id=frame_id, object=name))

    ordered = {fid: frames[fid] for fid in sorted(frames)}
    return OoraPrediction(object=name, frames=ordered, diagnostics=tuple(diagnostics))
