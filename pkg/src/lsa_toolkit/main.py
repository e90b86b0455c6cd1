"""LSA Toolkit CLI 진입점.

서브커맨드:
    bench build | stats | oracle | noise
    prompt render
    run anticipate
    eval recall | objects | relations | robustness
    loss score-transitions | export-weights

종료 코드: 0 성공, 1 검증/입력 오류, 2 외부 서비스(LLM) 실패.
로그는 stderr, 데이터는 파일 또는 stdout으로만 출력한다.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any, NoReturn

from pydantic import ValidationError

from src.lsa_toolkit import __version__
from src.lsa_toolkit.benchmark.analysis import (
    compute_object_dynamics,
    dataset_stats,
    oracle_ceiling,
    oracle_predictions,
)
from src.lsa_toolkit.benchmark.builder import build_benchmark
from src.lsa_toolkit.benchmark.noise import frame_error_rate, inject_noise
from src.lsa_toolkit.config.settings import LossConfig, Settings, get_settings
from src.lsa_toolkit.core.anticipator import Anticipator, BatchResult
from src.lsa_toolkit.core.json_parser import CorpusError, CorpusParser
from src.lsa_toolkit.core.sgg_bridge import map_back_to_boxes
from src.lsa_toolkit.evaluation.diagnostics import object_set_metrics, relation_accuracy
from src.lsa_toolkit.evaluation.report import (
    EvalReport,
    build_report,
    fraction_key,
    pair_records,
    render_table,
    report_rows,
    robustness_delta,
    robustness_rows,
    to_csv,
)
from src.lsa_toolkit.llm.client import BaseCompletionClient, ChatCompletionClient, LlmError
from src.lsa_toolkit.llm.mock import EchoLastFrameClient, FixtureClient
from src.lsa_toolkit.llm.request_log import RequestLog
from src.lsa_toolkit.losses.transition import score_transition_consistency
from src.lsa_toolkit.losses.weighting import export_token_weights
from src.lsa_toolkit.models.graph import GraphSequence
from src.lsa_toolkit.models.instance import LsaInstance, NoiseSpec
from src.lsa_toolkit.models.prediction import PredictionRecord
from src.lsa_toolkit.prompts.builder import build_goa_prompt, build_oora_prompt
from src.lsa_toolkit.storage.jsonl import (
    load_instances,
    load_predictions,
    read_json,
    save_instances,
    save_predictions,
    write_json,
)
from src.lsa_toolkit.storage.manifest import RunManifest, write_manifest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SERVICE = 2


class UsageError(Exception):
    """명령행 사용 오류 (종료 코드 1)."""


class ToolkitArgumentParser(argparse.ArgumentParser):
    """사용 오류 시 종료 코드 1로 끝나는 ArgumentParser."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def setup_logging(level: str = "INFO") -> None:
    """stderr 로깅 설정."""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


# === 인자 변환 ===


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"쉼표로 구분된 실수 목록이어야 함: {text}") from e


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"쉼표로 구분된 정수 목록이어야 함: {text}") from e


def _frame_range(text: str) -> tuple[float, float]:
    values = _float_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"범위는 lo,hi 형식이어야 함: {text}")
    return values[0], values[1]


# === 공통 헬퍼 ===


def _emit(data: Any) -> None:
    sys.stdout.write(json.dumps(data, ensure_ascii=False, indent=2) + "\n")


def _manifest(args: argparse.Namespace, settings: Settings, *inputs: Any) -> RunManifest:
    manifest = RunManifest(
        command=args.command_name,
        argv=list(args.argv),
        config_hash=settings.config_hash(),
    )
    for path in inputs:
        if path is not None:
            manifest.add_input(path)
    if args.config:
        manifest.add_input(args.config)
    return manifest


def _select(
    instances: Sequence[LsaInstance],
    fraction: float | None = None,
    video: str | None = None,
) -> list[LsaInstance]:
    selected = [
        i
        for i in instances
        if (fraction is None or abs(i.fraction - fraction) < 1e-9)
        and (video is None or i.video_id == video)
    ]
    if not selected:
        raise UsageError(f"선택된 인스턴스가 없음 (fraction={fraction}, video={video})")
    return selected


def resolve_paths(args: argparse.Namespace, settings: Settings) -> None:
    """명령행에 없는 경로를 설정 파일 값으로 채우고, 작업 전에 입력 파일을 확인한다."""
    if getattr(args, "benchmark", "") is None:
        args.benchmark = settings.benchmark_path
    if getattr(args, "predictions", "") is None:
        args.predictions = settings.predictions_path
    if args.group == "run" and args.out is None:
        args.out = settings.predictions_path
    if args.group == "eval" and args.out is None and settings.reports_path:
        args.out = str(Path(settings.reports_path) / f"{args.command}.json")

    for flag in ("benchmark", "predictions"):
        if not hasattr(args, flag):
            continue
        value = getattr(args, flag)
        if not value:
            raise UsageError(f"--{flag} 필요")
        if not Path(value).is_file():
            raise FileNotFoundError(value)
    if hasattr(args, "out") and args.out is None and args.group == "run":
        raise UsageError("--out 필요")


def _truths_for(
    records_path: str, benchmark_path: str
) -> tuple[list[PredictionRecord], list[GraphSequence]]:
    pairs = pair_records(load_predictions(records_path), load_instances(benchmark_path))
    return [r for r, _ in pairs], [i.future for _, i in pairs]


# === bench ===


def cmd_bench_build(args: argparse.Namespace, settings: Settings) -> int:
    corpus_path = args.corpus or settings.corpus_path
    if not corpus_path:
        raise UsageError("--corpus 필요")
    result = CorpusParser().parse_file(corpus_path)
    if not result.ok:
        first = result.errors[0]
        raise CorpusError(
            f"레코드 {len(result.errors)}건 스키마 오류, 첫 오류: {first.error}", corpus_path
        )
    split = None if settings.split in (None, "all") else settings.split
    instances = build_benchmark(result.records, settings.fractions, split, settings.min_frames)
    count = save_instances(args.out, instances)
    write_manifest(args.out, _manifest(args, settings, corpus_path))
    logger.info(f"벤치마크 저장: {args.out} ({count}건)")
    _emit({"instances": count, "out": args.out})
    return EXIT_OK


def cmd_bench_stats(args: argparse.Namespace, settings: Settings) -> int:
    stats = dataset_stats(load_instances(args.benchmark))
    if args.out:
        write_json(args.out, stats)
        write_manifest(args.out, _manifest(args, settings, args.benchmark))
    _emit(stats)
    return EXIT_OK


def cmd_bench_oracle(args: argparse.Namespace, settings: Settings) -> int:
    instances = load_instances(args.benchmark)
    fractions = sorted({i.fraction for i in instances})
    result: dict[str, Any] = {}
    for fraction in fractions:
        group = _select(instances, fraction)
        result[f"{fraction:g}"] = {
            "dynamics": compute_object_dynamics(group).to_dict(),
            "ceiling": {f"R@{k}": oracle_ceiling(group, k) for k in settings.k_values},
        }
    if args.predictions_out:
        save_predictions(args.predictions_out, oracle_predictions(instances))
        write_manifest(args.predictions_out, _manifest(args, settings, args.benchmark))
    if args.out:
        write_json(args.out, result)
        write_manifest(args.out, _manifest(args, settings, args.benchmark))
    _emit(result)
    return EXIT_OK


def cmd_bench_noise(args: argparse.Namespace, settings: Settings) -> int:
    instances = load_instances(args.benchmark)
    spec = NoiseSpec(
        kind=args.kind,
        frame_range=args.range,
        rate=args.rate,
        seed=args.seed if args.seed is not None else settings.seed,
    )
    noisy = [inject_noise(i, spec) for i in instances]
    rates = [
        frame_error_rate(clean.observed, dirty.observed)
        for clean, dirty in zip(instances, noisy, strict=True)
    ]
    measured = sum(rates) / len(rates) if rates else 0.0
    save_instances(args.out, noisy)
    manifest = _manifest(args, settings, args.benchmark)
    manifest.extra = {"noise": spec.to_dict(), "frame_error_rate": measured}
    write_manifest(args.out, manifest)
    logger.info(f"노이즈 주입 완료: {spec.label}, 측정 프레임 오류율 {measured:.4f}")
    _emit({"noise": spec.to_dict(), "instances": len(noisy), "frame_error_rate": measured})
    return EXIT_OK


# === prompt ===


def cmd_prompt_render(args: argparse.Namespace, settings: Settings) -> int:
    instance = _select(load_instances(args.benchmark), args.fraction, args.video)[0]
    future = instance.future_frame_ids
    if args.frames:
        future = args.frames
    if args.stage == "goa":
        bundle = build_goa_prompt(
            instance.observed,
            future,
            settings.one_shot,
            max_observed_segments=settings.max_observed_segments,
        )
    else:
        if not args.object:
            raise UsageError("--stage oora 에는 --object 필요")
        bundle = build_oora_prompt(
            instance.observed,
            args.object,
            future,
            settings.one_shot,
            max_observed_segments=settings.max_observed_segments,
        )
    if args.out:
        Path(args.out).write_text(bundle.text, encoding="utf-8")
    else:
        sys.stdout.write(bundle.text)
    return EXIT_OK


# === run ===


def build_client(settings: Settings, request_log: RequestLog | None) -> BaseCompletionClient:
    """설정에 따른 완료 클라이언트 생성."""
    if settings.mock == "echo-last-frame":
        return EchoLastFrameClient(max_in_flight=settings.parallelism, request_log=request_log)
    if settings.mock == "fixture":
        return FixtureClient.from_manifest(
            settings.fixture_path, max_in_flight=settings.parallelism, request_log=request_log
        )
    if not settings.has_api_key:
        logger.warning("LSA_API_KEY 미설정: 인증 없이 엔드포인트 호출")
    return ChatCompletionClient(
        api_key=settings.api_key, max_in_flight=settings.parallelism, request_log=request_log
    )


async def _anticipate(
    instances: Sequence[LsaInstance], settings: Settings, request_log: RequestLog | None
) -> BatchResult:
    client = build_client(settings, request_log)
    try:
        anticipator = Anticipator(
            client,
            settings.decode,
            one_shot=settings.one_shot,
            token_budget=settings.token_budget,
            max_observed_segments=settings.max_observed_segments,
        )
        return await anticipator.anticipate_many(
            instances, settings.mode, settings.parallelism
        )
    finally:
        await client.close()


def cmd_run_anticipate(args: argparse.Namespace, settings: Settings) -> int:
    benchmark = args.benchmark
    instances = _select(load_instances(benchmark), args.fraction)
    log_path = args.request_log or settings.request_log_path
    request_log = RequestLog(log_path) if log_path else None

    logger.info(
        f"예측 시작: {len(instances)}건, mode={settings.mode}, "
        f"backend={settings.mock or 'chat-completions'}, model={settings.decode.model}"
    )
    batch = asyncio.run(_anticipate(instances, settings, request_log))
    records = batch.records
    if args.map_boxes:
        observed = {(i.video_id, fraction_key(i.fraction)): i.observed for i in instances}
        records = [
            map_back_to_boxes(r, observed[(r.video_id, fraction_key(r.fraction))])
            for r in records
        ]
    count = save_predictions(args.out, records)
    manifest = _manifest(args, settings, benchmark, settings.fixture_path)
    manifest.extra = {
        "mode": settings.mode,
        "backend": settings.mock or "chat-completions",
        "failed": [f.to_dict() for f in batch.failures],
    }
    write_manifest(args.out, manifest)
    _emit({"predictions": count, "failed": len(batch.failures), "out": args.out})
    if not batch.ok:
        logger.error(f"예측 실패 {len(batch.failures)}건, 완료된 {count}건은 저장됨")
        return EXIT_SERVICE
    return EXIT_OK


# === eval ===


def _write_report(args: argparse.Namespace, settings: Settings, data: Any, *inputs: Any) -> None:
    if args.out:
        write_json(args.out, data)
        write_manifest(args.out, _manifest(args, settings, *inputs))


def cmd_eval_recall(args: argparse.Namespace, settings: Settings) -> int:
    report = build_report(
        load_predictions(args.predictions), load_instances(args.benchmark), settings.k_values
    )
    headers, rows = report_rows(report)
    if args.csv:
        Path(args.csv).write_text(to_csv(headers, rows), encoding="utf-8")
    _write_report(args, settings, report.to_dict(), args.predictions, args.benchmark)
    sys.stdout.write(render_table(headers, rows) + "\n")
    return EXIT_OK


def cmd_eval_objects(args: argparse.Namespace, settings: Settings) -> int:
    records, truths = _truths_for(args.predictions, args.benchmark)
    metrics = object_set_metrics(records, truths)
    data = metrics.to_dict() if metrics else None
    _write_report(args, settings, data, args.predictions, args.benchmark)
    _emit(data)
    return EXIT_OK


def cmd_eval_relations(args: argparse.Namespace, settings: Settings) -> int:
    records, truths = _truths_for(args.predictions, args.benchmark)
    data = relation_accuracy(records, truths)
    _write_report(args, settings, data, args.predictions, args.benchmark)
    _emit(data)
    return EXIT_OK


def cmd_eval_robustness(args: argparse.Namespace, settings: Settings) -> int:
    clean = EvalReport.from_dict(read_json(args.clean))
    noisy = [EvalReport.from_dict(read_json(path)) for path in args.noisy]
    table = robustness_delta(clean, noisy, args.k or (10, 50))
    headers, rows = robustness_rows(table, args.k or (10, 50))
    if args.csv:
        Path(args.csv).write_text(to_csv(headers, rows), encoding="utf-8")
    _write_report(args, settings, table, args.clean, *args.noisy)
    sys.stdout.write(render_table(headers, rows) + "\n")
    return EXIT_OK


# === loss ===


def cmd_loss_score_transitions(args: argparse.Namespace, settings: Settings) -> int:
    overrides = {
        key: value
        for key, value in (("tau", args.tau), ("delta", args.delta))
        if value is not None
    }
    if args.no_tau_gate:
        overrides["tau_gate"] = False
    config = LossConfig(**{**settings.loss.model_dump(), **overrides})
    records, truths = _truths_for(args.predictions, args.benchmark)
    per_video = [
        {
            "video_id": r.video_id,
            "fraction": r.fraction,
            **score_transition_consistency(r, t, config).to_dict(),
        }
        for r, t in zip(records, truths, strict=True)
    ]
    scored = [v["value"] for v in per_video if not v["no_valid_relations"]]
    data = {
        "config": config.model_dump(by_alias=True),
        "mean": sum(scored) / len(scored) if scored else None,
        "scored_videos": len(scored),
        "videos": per_video,
    }
    _write_report(args, settings, data, args.predictions, args.benchmark)
    _emit({k: data[k] for k in ("mean", "scored_videos")})
    return EXIT_OK


def cmd_loss_export_weights(args: argparse.Namespace, settings: Settings) -> int:
    beta = args.beta if args.beta is not None else settings.loss.beta
    data = export_token_weights(args.n, args.T, beta, args.token_counts)
    write_json(args.out, data)
    write_manifest(args.out, _manifest(args, settings))
    _emit({"graphs": data["graphs"], "normalizer": data["normalizer"]})
    return EXIT_OK


# === 파서 ===


def _add(
    group: Any, name: str, handler: Callable[[argparse.Namespace, Settings], int], help_text: str
) -> argparse.ArgumentParser:
    parser = group.add_parser(name, help=help_text)
    parser.set_defaults(handler=handler)
    return parser


def build_parser() -> ToolkitArgumentParser:
    """CLI 파서 구성."""
    parser = ToolkitArgumentParser(
        prog="lsa", description="언어 기반 장면 그래프 예측(LSA) 도구 모음"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="YAML 설정 파일")
    parser.add_argument("--log-level", help="로그 레벨 (DEBUG/INFO/WARNING/ERROR)")
    groups = parser.add_subparsers(
        dest="group", required=True, parser_class=ToolkitArgumentParser
    )

    # bench
    bench = groups.add_parser("bench", help="벤치마크 생성/분석").add_subparsers(
        dest="command", required=True, parser_class=ToolkitArgumentParser
    )
    p = _add(bench, "build", cmd_bench_build, "코퍼스 → 관측/미래 분할 벤치마크")
    p.add_argument("--corpus", help="교환 포맷 코퍼스 JSON/JSONL")
    p.add_argument("--fractions", type=_float_list, help="관측 비율 (예: 0.3,0.5,0.7,0.9)")
    p.add_argument("--split", help="사용할 split (all = 전체)")
    p.add_argument("--min-frames", type=int, help="최소 주석 프레임 수")
    p.add_argument("--out", required=True, help="벤치마크 JSONL 출력")

    p = _add(bench, "stats", cmd_bench_stats, "데이터셋 통계")
    p.add_argument("--benchmark")
    p.add_argument("--out")

    p = _add(bench, "oracle", cmd_bench_oracle, "연속 객체 가정 상한")
    p.add_argument("--benchmark")
    p.add_argument("--k", type=_int_list, help="K 목록 (예: 10,20,50)")
    p.add_argument("--out")
    p.add_argument("--predictions-out", help="오라클 예측 JSONL 출력")

    p = _add(bench, "noise", cmd_bench_noise, "관측 구간 노이즈 주입")
    p.add_argument("--benchmark")
    p.add_argument("--kind", required=True, choices=["drop", "modify"])
    p.add_argument("--range", type=_frame_range, default=(0.0, 1.0), help="lo,hi (0~1)")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)

    # prompt
    prompt = groups.add_parser("prompt", help="프롬프트 확인").add_subparsers(
        dest="command", required=True, parser_class=ToolkitArgumentParser
    )
    p = _add(prompt, "render", cmd_prompt_render, "GOA/OORA 프롬프트 출력")
    p.add_argument("--benchmark")
    p.add_argument("--video")
    p.add_argument("--fraction", type=float)
    p.add_argument("--stage", choices=["goa", "oora"], default="goa")
    p.add_argument("--object", help="OORA 대상 객체")
    p.add_argument("--frames", type=_int_list, help="미래 프레임 id (기본: 인스턴스의 미래)")
    p.add_argument("--one-shot", action="store_true", default=None)
    p.add_argument("--out")

    # run
    run_group = groups.add_parser("run", help="예측 실행").add_subparsers(
        dest="command", required=True, parser_class=ToolkitArgumentParser
    )
    p = _add(run_group, "anticipate", cmd_run_anticipate, "GOA → OORA 예측")
    p.add_argument("--benchmark")
    p.add_argument("--out", help="예측 JSONL 출력 (기본: predictions_path)")
    p.add_argument("--mode", choices=["with_goa", "without_goa"])
    p.add_argument("--fraction", type=float, help="이 관측 비율만 예측")
    p.add_argument("--mock", choices=["echo-last-frame", "fixture"])
    p.add_argument("--fixture", help="fixture 매니페스트 (--mock fixture)")
    p.add_argument("--model", help="모델 이름")
    p.add_argument("--one-shot", action="store_true", default=None)
    p.add_argument("--parallelism", type=int)
    p.add_argument("--request-log", help="요청 로그 JSONL")
    p.add_argument("--map-boxes", action="store_true", help="관측 bbox를 예측에 연결")

    # eval
    eval_group = groups.add_parser("eval", help="평가").add_subparsers(
        dest="command", required=True, parser_class=ToolkitArgumentParser
    )
    for name, handler, help_text in (
        ("recall", cmd_eval_recall, "Recall@K / meanRecall@K"),
        ("objects", cmd_eval_objects, "GOA 객체 집합 진단"),
        ("relations", cmd_eval_relations, "파티션별 관계 정확도"),
    ):
        p = _add(eval_group, name, handler, help_text)
        p.add_argument("--benchmark")
        p.add_argument("--predictions")
        p.add_argument("--out")
        if name == "recall":
            p.add_argument("--k", type=_int_list)
            p.add_argument("--csv")

    p = _add(eval_group, "robustness", cmd_eval_robustness, "노이즈 강건성 Δ 표")
    p.add_argument("--clean", required=True, help="깨끗한 벤치마크 리포트 JSON")
    p.add_argument("--noisy", required=True, nargs="+", help="노이즈 리포트 JSON 목록")
    p.add_argument("--k", type=_int_list, help="표에 넣을 K (기본 10,50)")
    p.add_argument("--out")
    p.add_argument("--csv")

    # loss
    loss = groups.add_parser("loss", help="손실 수치 도구").add_subparsers(
        dest="command", required=True, parser_class=ToolkitArgumentParser
    )
    p = _add(loss, "score-transitions", cmd_loss_score_transitions, "전이 일관성 점수")
    p.add_argument("--benchmark")
    p.add_argument("--predictions")
    p.add_argument("--tau", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--no-tau-gate", action="store_true")
    p.add_argument("--out")

    p = _add(loss, "export-weights", cmd_loss_export_weights, "GOA 토큰 가중치 내보내기")
    p.add_argument("--n", type=int, required=True, help="관측 그래프 수")
    p.add_argument("--T", type=int, required=True, help="마지막 미래 그래프 인덱스")
    p.add_argument("--beta", type=float)
    p.add_argument("--token-counts", type=_int_list, required=True, help="그래프별 토큰 수")
    p.add_argument("--out", required=True)

    return parser


def load_settings(args: argparse.Namespace) -> Settings:
    """설정 파일 + 명령행 플래그 병합."""
    overrides: dict[str, Any] = {
        "log_level": args.log_level,
        "fractions": getattr(args, "fractions", None),
        "split": getattr(args, "split", None),
        "min_frames": getattr(args, "min_frames", None),
        "k_values": getattr(args, "k", None),
        "mode": getattr(args, "mode", None),
        "mock": getattr(args, "mock", None),
        "fixture_path": getattr(args, "fixture", None),
        "one_shot": getattr(args, "one_shot", None),
        "parallelism": getattr(args, "parallelism", None),
    }
    settings = get_settings(args.config, **overrides)
    model = getattr(args, "model", None)
    if model:
        settings = settings.model_copy(
            update={"decode": settings.decode.model_copy(update={"model": model})}
        )
    return settings


def main(argv: Sequence[str] | None = None) -> int:
    """CLI 실행 후 종료 코드 반환."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    args.argv = argv
    args.command_name = f"{args.group} {args.command}"

    try:
        settings = load_settings(args)
    except (ValidationError, ValueError, FileNotFoundError) as e:
        setup_logging(args.log_level or "INFO")
        logger.error(f"설정 오류: {e}")
        return EXIT_VALIDATION
    setup_logging(settings.log_level)

    try:
        resolve_paths(args, settings)
        return args.handler(args, settings)
    except LlmError as e:
        logger.error(f"LLM 요청 실패 ({e.kind}, 시도 {e.attempts}회): {e}")
        return EXIT_SERVICE
    except FileNotFoundError as e:
        logger.error(f"파일 없음: {e}")
        return EXIT_VALIDATION
    except (UsageError, ValidationError, ValueError, OSError) as e:
        logger.error(f"{args.command_name} 실패: {e}")
        return EXIT_VALIDATION


def run() -> None:
    """콘솔 스크립트 진입점."""
    sys.exit(main())


if __name__ == "__main__":
    run()
