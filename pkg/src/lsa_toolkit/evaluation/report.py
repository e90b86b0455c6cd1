"""평가 리포트 조립 및 출력 (JSON / 정렬 텍스트 표 / CSV)."""

from __future__ import annotations

import csv
import io
import logging
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass, field
from statistics import fmean
from typing import Any

from src.lsa_toolkit.evaluation.diagnostics import object_set_metrics, relation_accuracy
from src.lsa_toolkit.evaluation.recall import corpus_recall_at_k, mean_recall_at_k
from src.lsa_toolkit.models.instance import LsaInstance
from src.lsa_toolkit.models.prediction import PredictionRecord

logger = logging.getLogger(__name__)


def fraction_key(fraction: float) -> str:
    return f"{fraction:g}"


@dataclass
class EvalReport:
    """평가 결과.

    Attributes:
        k_values: 평가한 K 목록
        overall: K별 전체 recall / mean_recall ({"10": {"recall": .., "mean_recall": ..}})
        by_fraction: 관측 비율별 overall과 같은 구조
        per_class: 최대 K 기준 관계 클래스별 recall
        objects: GOA 객체 집합 진단
        relations: 파티션별 관계 정확도
        parsing: 파싱 실패/폴백 비율
        timing: 단계별 지연 요약
        noise: 노이즈 명세 (깨끗한 벤치마크면 None)
    """

    k_values: list[int]
    videos: int
    overall: dict[str, dict[str, float | None]]
    by_fraction: dict[str, dict[str, dict[str, float | None]]]
    per_class: dict[str, float] = field(default_factory=dict)
    objects: dict[str, Any] | None = None
    relations: dict[str, Any] = field(default_factory=dict)
    parsing: dict[str, Any] = field(default_factory=dict)
    timing: dict[str, Any] = field(default_factory=dict)
    noise: dict[str, Any] | None = None

    def recall(self, k: int, fraction: float | None = None) -> float | None:
        metrics = self.overall if fraction is None else self.by_fraction[fraction_key(fraction)]
        return metrics[str(k)]["recall"]

    def mean_recall(self, k: int, fraction: float | None = None) -> float | None:
        metrics = self.overall if fraction is None else self.by_fraction[fraction_key(fraction)]
        return metrics[str(k)]["mean_recall"]

    def to_dict(self) -> dict[str, Any]:
        return {
            "k_values": self.k_values,
            "videos": self.videos,
            "overall": self.overall,
            "by_fraction": self.by_fraction,
            "per_class": dict(sorted(self.per_class.items())),
            "objects": self.objects,
            "relations": self.relations,
            "parsing": self.parsing,
            "timing": self.timing,
            "noise": self.noise,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EvalReport:
        return cls(
            k_values=list(data["k_values"]),
            videos=int(data.get("videos", 0)),
            overall=data["overall"],
            by_fraction=data.get("by_fraction", {}),
            per_class=data.get("per_class", {}),
            objects=data.get("objects"),
            relations=data.get("relations", {}),
            parsing=data.get("parsing", {}),
            timing=data.get("timing", {}),
            noise=data.get("noise"),
        )


def pair_records(
    records: Sequence[PredictionRecord], instances: Sequence[LsaInstance]
) -> list[tuple[PredictionRecord, LsaInstance]]:
    """(video_id, fraction)으로 예측과 인스턴스를 짝짓는다.

    Raises:
        ValueError: 인스턴스에 대응하는 예측이 없는 경우
    """
    by_key = {(r.video_id, fraction_key(r.fraction)): r for r in records}
    pairs = []
    for instance in instances:
        key = (instance.video_id, fraction_key(instance.fraction))
        record = by_key.pop(key, None)
        if record is None:
            raise ValueError(f"예측 없음: {instance.video_id} @ {key[1]}")
        pairs.append((record, instance))
    if by_key:
        logger.warning(f"대응 인스턴스가 없는 예측 {len(by_key)}건 무시")
    return pairs


def _metrics(
    pairs: Sequence[tuple[PredictionRecord, LsaInstance]], k_values: Sequence[int]
) -> dict[str, dict[str, float | None]]:
    records = [r for r, _ in pairs]
    truths = [i.future for _, i in pairs]
    return {
        str(k): {
            "recall": corpus_recall_at_k(records, truths, k),
            "mean_recall": mean_recall_at_k(records, truths, k).value,
        }
        for k in k_values
    }


def _parsing_summary(records: Sequence[PredictionRecord]) -> dict[str, Any]:
    kinds: dict[str, int] = defaultdict(int)
    for record in records:
        for diagnostic in record.diagnostics:
            kinds[diagnostic.kind] += 1
    goa_runs = [r for r in records if r.mode == "with_goa"]
    oora_calls = sum(r.oora_calls for r in records)
    return {
        "records": len(records),
        "goa_fallback_rate": (
            sum(r.goa_fallback for r in goa_runs) / len(goa_runs) if goa_runs else None
        ),
        "oora_calls": oora_calls,
        "oora_failure_rate": (
            sum(r.oora_failures for r in records) / oora_calls if oora_calls else None
        ),
        "dropped_objects": sum(len(r.dropped_objects) for r in records),
        "fallback_states": kinds.get("fallback", 0),
        "diagnostics": dict(sorted(kinds.items())),
    }


def _stage_summary(latencies: Sequence[float]) -> dict[str, Any]:
    return {
        "calls": len(latencies),
        "total_s": sum(latencies),
        "mean_s": fmean(latencies) if latencies else None,
    }


def timing_summary(records: Sequence[PredictionRecord]) -> dict[str, Any]:
    """GOA/OORA 단계별 호출 수와 지연."""
    goa = [
        r.timing["goa_latency_s"]
        for r in records
        if r.timing.get("goa_latency_s") is not None
    ]
    oora = [latency for r in records for latency in r.timing.get("oora_latency_s", [])]
    return {"goa": _stage_summary(goa), "oora": _stage_summary(oora)}


def build_report(
    records: Sequence[PredictionRecord],
    instances: Sequence[LsaInstance],
    k_values: Sequence[int] = (10, 20, 50),
) -> EvalReport:
    """예측/정답 쌍으로 EvalReport 조립."""
    if not instances:
        raise ValueError("평가할 인스턴스가 없음")
    pairs = pair_records(records, instances)
    matched = [r for r, _ in pairs]
    truths = [i.future for _, i in pairs]

    by_fraction: dict[str, list[tuple[PredictionRecord, LsaInstance]]] = defaultdict(list)
    for pair in pairs:
        by_fraction[fraction_key(pair[1].fraction)].append(pair)

    noises = {i.noise for i in instances}
    noise = next(iter(noises)) if len(noises) == 1 else None
    if len(noises) > 1:
        logger.warning(f"인스턴스마다 노이즈 명세가 다름 ({len(noises)}종)")

    objects = object_set_metrics(matched, truths)
    report = EvalReport(
        k_values=list(k_values),
        videos=len({i.video_id for i in instances}),
        overall=_metrics(pairs, k_values),
        by_fraction={
            key: _metrics(group, k_values) for key, group in sorted(by_fraction.items())
        },
        per_class=mean_recall_at_k(matched, truths, max(k_values)).per_class,
        objects=objects.to_dict() if objects else None,
        relations=relation_accuracy(matched, truths),
        parsing=_parsing_summary(matched),
        timing=timing_summary(matched),
        noise=noise.to_dict() if noise else None,
    )
    logger.info(
        f"평가 완료: 인스턴스 {len(pairs)}건, "
        + ", ".join(f"R@{k}={_fmt(report.recall(k))}" for k in k_values)
    )
    return report


def _fmt(value: float | None, digits: int = 4) -> str:
    return "-" if value is None else f"{value:.{digits}f}"


def _delta(noisy: float | None, clean: float | None) -> tuple[float | None, float | None]:
    if noisy is None or clean is None:
        return None, None
    absolute = noisy - clean
    return absolute, (absolute / clean * 100.0 if clean else None)


def robustness_delta(
    clean: EvalReport, noisy_reports: Sequence[EvalReport], ks: Sequence[int] = (10, 50)
) -> dict[str, Any]:
    """노이즈 명세별 R@K와 깨끗한 리포트 대비 Δ.

    Returns:
        {"clean": {K: R@K}, "rows": [...], "avg_delta": [{"rate", K: 평균 상대 Δ(%)}]}
    """
    rows: list[dict[str, Any]] = []
    for report in noisy_reports:
        if report.noise is None:
            raise ValueError("노이즈 명세가 없는 리포트")
        row: dict[str, Any] = {
            "kind": report.noise["kind"],
            "frame_range": list(report.noise["frame_range"]),
            "rate": report.noise["rate"],
        }
        for k in ks:
            value = report.recall(k)
            absolute, relative = _delta(value, clean.recall(k))
            row[f"R@{k}"] = value
            row[f"delta@{k}"] = absolute
            row[f"delta_pct@{k}"] = relative
        rows.append(row)

    by_rate: dict[float, list[dict[str, Any]]] = defaultdict(list)
    for row in rows:
        by_rate[row["rate"]].append(row)
    averages = []
    for rate, group in sorted(by_rate.items()):
        entry: dict[str, Any] = {"rate": rate}
        for k in ks:
            values = [r[f"delta_pct@{k}"] for r in group if r[f"delta_pct@{k}"] is not None]
            entry[f"avg_delta_pct@{k}"] = fmean(values) if values else None
        averages.append(entry)

    return {"clean": {f"R@{k}": clean.recall(k) for k in ks}, "rows": rows, "avg_delta": averages}


def render_table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """정렬된 열 텍스트 표."""
    cells = [[str(h) for h in headers]] + [
        [_fmt(c) if isinstance(c, float) or c is None else str(c) for c in row] for row in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = [
        "  ".join(c.ljust(w) for c, w in zip(row, widths, strict=True)).rstrip()
        for row in cells
    ]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def report_rows(report: EvalReport) -> tuple[list[str], list[list[Any]]]:
    """관측 비율 × K 표 (마지막 행은 전체)."""
    headers = [
        "fraction",
        *(f"R@{k}" for k in report.k_values),
        *(f"mR@{k}" for k in report.k_values),
    ]
    rows: list[list[Any]] = []
    sections = [*report.by_fraction.items(), ("all", report.overall)]
    for key, metrics in sections:
        rows.append([
            key,
            *(metrics[str(k)]["recall"] for k in report.k_values),
            *(metrics[str(k)]["mean_recall"] for k in report.k_values),
        ])
    return headers, rows


def robustness_rows(
    table: dict[str, Any], ks: Sequence[int] = (10, 50)
) -> tuple[list[str], list[list[Any]]]:
    headers = ["kind", "range", "rate", *(f"R@{k}" for k in ks), *(f"Δ%@{k}" for k in ks)]
    rows: list[list[Any]] = []
    for row in table["rows"]:
        lo, hi = row["frame_range"]
        rows.append([
            row["kind"],
            f"{lo:g}-{hi:g}",
            f"{row['rate']:g}",
            *(row[f"R@{k}"] for k in ks),
            *(row[f"delta_pct@{k}"] for k in ks),
        ])
    for entry in table["avg_delta"]:
        rows.append([
            "Avg Δ", "", f"{entry['rate']:g}", *([None] * len(ks)),
            *(entry[f"avg_delta_pct@{k}"] for k in ks),
        ])
    return headers, rows


def to_csv(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow(["" if c is None else c for c in row])
    return buffer.getvalue()
