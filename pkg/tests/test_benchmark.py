"""벤치마크 빌더 / 분석 테스트."""

from __future__ import annotations

import json
import random

import pytest

from src.lsa_toolkit.benchmark.analysis import (
    compute_object_dynamics,
    dataset_stats,
    oracle_ceiling,
    oracle_frame_recall,
    oracle_predictions,
)
from src.lsa_toolkit.benchmark.builder import build_benchmark, split_index, split_video
from src.lsa_toolkit.core.json_parser import CorpusError, CorpusParser, EmptyCorpusError
from src.lsa_toolkit.core.merge import merge_sequence
from src.lsa_toolkit.evaluation.recall import corpus_recall_at_k
from src.lsa_toolkit.models.instance import LsaInstance, VideoRecord
from tests.conftest import make_state, simple_frame

OBJECTS = ["broom", "floor", "table", "doorway", "chair"]
ATTENTION = ["looking_at", "not_looking_at", "unsure"]
SPATIAL = ["above", "beneath", "in_front_of", "behind", "on_the_side_of", "in"]
CONTACT = ["holding", "touching", "not_contacting", "standing_on", "sitting_on"]


def rich_state(name: str):
    """트리플 4개짜리 상태."""
    return make_state(name, ["looking_at"], ["in_front_of", "beneath"], ["touching"])


def one_triple(name: str):
    return make_state(name, ["looking_at"])


def make_video(video_id: str, count: int, split: str = "test") -> VideoRecord:
    frames = tuple(simple_frame(i * 10, make_state("broom", ["looking_at"])) for i in range(count))
    return VideoRecord(video_id=video_id, split=split, frames=frames)


def make_instance(video_id: str, last, future, fraction: float = 0.5) -> LsaInstance:
    return LsaInstance(
        video_id=video_id,
        fraction=fraction,
        observed=merge_sequence([simple_frame(1, *last)], video_id),
        future=merge_sequence([simple_frame(2, *future)], video_id),
    )


def dynamics_corpus() -> list[LsaInstance]:
    """일관 61 / 새 객체 14 / 사라짐 25."""
    consistent = [rich_state(n) for n in ("broom", "floor", "table")]
    instances = [make_instance(f"c{i}", consistent, consistent) for i in range(61)]
    instances += [
        make_instance(f"n{i}", [one_triple("broom")], [one_triple("broom"), one_triple("doorway")])
        for i in range(14)
    ]
    instances += [
        make_instance(f"d{i}", [one_triple("broom"), one_triple("floor")], [one_triple("broom")])
        for i in range(25)
    ]
    return instances


def random_instance(rng: random.Random, index: int) -> LsaInstance:
    def random_frame(frame_id: int):
        names = rng.sample(OBJECTS, rng.randint(0, 4))
        states = [
            make_state(
                name,
                rng.sample(ATTENTION, rng.randint(0, 1)),
                rng.sample(SPATIAL, rng.randint(0, 2)),
                rng.sample(CONTACT, rng.randint(0, 2)),
            )
            for name in names
        ]
        return simple_frame(frame_id, *states)

    frames = [random_frame(i) for i in range(rng.randint(2, 8))]
    video = VideoRecord(video_id=f"v{index}", split="test", frames=tuple(frames))
    return split_video(video, rng.choice([0.3, 0.5, 0.7, 0.9]))


class TestSplit:
    """관측/미래 분할."""

    @pytest.mark.parametrize(
        ("count", "fraction", "expected"),
        [(10, 0.9, 9), (10, 0.3, 3), (10, 0.5, 5), (3, 0.3, 1), (2, 0.9, 1), (39, 0.9, 36)],
    )
    def test_split_index(self, count, fraction, expected):
        assert split_index(count, fraction) == expected

    @pytest.mark.parametrize(("count", "fraction"), [(1, 0.5), (10, 0.0), (10, 1.0)])
    def test_split_index_invalid(self, count, fraction):
        with pytest.raises(ValueError):
            split_index(count, fraction)

    def test_split_video(self, broom_video):
        instance = split_video(broom_video, 0.9)

        assert len(instance.observed.frames) == 36
        assert instance.future_frame_ids == [486, 499, 518]
        assert instance.observed.frame_ids[-1] == 484


class TestBuildBenchmark:
    """build_benchmark 테스트."""

    def test_videos_times_fractions(self):
        corpus = [make_video(f"v{i}", 10) for i in range(3)]

        instances = build_benchmark(corpus)

        assert len(instances) == 12
        assert [(i.video_id, i.fraction) for i in instances[:4]] == [
            ("v0", 0.3), ("v0", 0.5), ("v0", 0.7), ("v0", 0.9)
        ]
        for instance in instances:
            assert instance.future_frame_ids
            assert instance.observed.frame_ids[-1] < instance.future_frame_ids[0]

    def test_short_video_excluded(self):
        corpus = [make_video("long", 5), make_video("short", 2)]

        instances = build_benchmark(corpus, fractions=[0.5])

        assert [i.video_id for i in instances] == ["long"]

    def test_split_filter(self):
        corpus = [make_video("a", 5, "train"), make_video("b", 5, "test")]

        assert [i.video_id for i in build_benchmark(corpus, [0.5])] == ["b"]
        assert len(build_benchmark(corpus, [0.5], split=None)) == 2

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpusError):
            build_benchmark([])


class TestCorpusParser:
    """교환 포맷 파싱."""

    def test_record_errors_isolated(self, tmp_path):
        path = tmp_path / "corpus.json"
        path.write_text(json.dumps([
            {"video_id": "ok", "frames": [
                {"frame_id": 1, "objects": [{"name": "broom", "attention": ["looking_at"]}]}
            ]},
            {"video_id": "bad_object", "frames": [{"frame_id": 1, "objects": [{"name": "spoon"}]}]},
            {"video_id": "bad_order", "frames": [
                {"frame_id": 5, "objects": []}, {"frame_id": 3, "objects": []}
            ]},
            {"frames": []},
        ]), encoding="utf-8")

        result = CorpusParser().parse_file(path)

        assert [r.video_id for r in result.records] == ["ok"]
        assert [e.video_id for e in result.errors] == ["bad_object", "bad_order", None]
        assert not result.ok
        assert len(result.file_hash) == 64

    def test_jsonl(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        lines = [json.dumps({"video_id": f"v{i}", "split": "test", "frames": []}) for i in range(2)]
        path.write_text("\n".join(lines), encoding="utf-8")

        assert len(CorpusParser().parse_file(path).records) == 2

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "corpus.json"
        path.write_text("{not json", encoding="utf-8")

        with pytest.raises(CorpusError):
            CorpusParser().parse_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            CorpusParser().parse_file(tmp_path / "none.json")


class TestObjectDynamics:
    """객체 동역학 통계."""

    def test_rates(self):
        stats = compute_object_dynamics(dynamics_corpus())

        assert stats.consistent_rate == 0.61
        assert stats.new_object_rate == 0.14
        assert stats.disappeared_rate == 0.25
        assert stats.changed_rate == pytest.approx(0.39)
        assert stats.video_count == 100

    def test_flags_may_overlap(self):
        instance = make_instance("v", [one_triple("broom")], [one_triple("floor")])

        stats = compute_object_dynamics([instance])

        assert stats.new_object_rate == stats.disappeared_rate == 1.0
        assert stats.consistent_rate == 0.0

    def test_example_video(self, broom_instance):
        stats = compute_object_dynamics([broom_instance])
        assert stats.disappeared_rate == 1.0
        assert stats.new_object_rate == 0.0

    def test_mixed_fractions(self):
        a = make_instance("a", [one_triple("broom")], [one_triple("broom")], 0.3)
        b = make_instance("b", [one_triple("broom")], [one_triple("broom")], 0.5)

        with pytest.raises(ValueError):
            compute_object_dynamics([a, b])


class TestOracleCeiling:
    """연속 객체 오라클 상한."""

    def test_frame_recall_capped_by_k(self):
        frame = simple_frame(2, *(rich_state(n) for n in ("broom", "floor", "table")))
        persistent = {"broom", "floor", "table"}

        assert oracle_frame_recall(frame, persistent, 10) == 10 / 12
        assert oracle_frame_recall(frame, persistent, 20) == 1.0
        assert oracle_frame_recall(frame, {"broom"}, 20) == 4 / 12
        assert oracle_frame_recall(simple_frame(3), persistent, 10) is None

    def test_synthetic_corpus(self):
        expected = (61 * 10 / 12 + 14 * 0.5 + 25 * 1.0) / 100

        assert oracle_ceiling(dynamics_corpus(), 10) == pytest.approx(expected)
        assert oracle_ceiling(dynamics_corpus(), 20) == pytest.approx((61 + 7 + 25) / 100)

    def test_example_video(self, broom_instance):
        assert oracle_ceiling([broom_instance], 10) == 1.0

    @pytest.mark.parametrize("seed", range(25))
    @pytest.mark.parametrize("k", [1, 3, 10])
    def test_matches_explicit_oracle(self, seed, k):
        """명시적 오라클 예측을 Recall@K로 채점한 값과 정확히 같다."""
        rng = random.Random(seed)
        instances = [random_instance(rng, i) for i in range(rng.randint(1, 12))]

        predictions = oracle_predictions(instances)
        scored = corpus_recall_at_k(predictions, [i.future for i in instances], k)

        assert scored == oracle_ceiling(instances, k)


class TestDatasetStats:
    """데이터셋 통계."""

    def test_example_video(self, broom_video):
        instances = build_benchmark([broom_video])

        stats = dataset_stats(instances)

        assert stats["videos"] == 1
        assert stats["instances"] == 4
        assert set(stats["fractions"]) == {"0.3", "0.5", "0.7", "0.9"}
        assert stats["fractions"]["0.9"]["mean_future_frames"] == 3
        assert stats["fractions"]["0.9"]["mean_observed_frames"] == 36
        assert stats["vocabulary"]["objects_listed"] == 36
