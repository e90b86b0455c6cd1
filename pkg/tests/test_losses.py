"""손실 함수 수치 테스트.

손 계산 예시, 독립 brute-force 구현, 유한 차분 기울기 검사.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.lsa_toolkit.config.settings import LossConfig
from src.lsa_toolkit.core.merge import merge_sequence
from src.lsa_toolkit.losses.relation import (
    bce,
    bce_grad,
    binarize_probabilities,
    encode_multi_hot,
    oora_total_loss,
    sgg_relation_grad,
    sgg_relation_loss,
    threshold_margin_grad,
    threshold_margin_loss,
)
from src.lsa_toolkit.losses.transition import (
    RelationTrack,
    normalize,
    score_transition_consistency,
    symmetric_kl,
    transition_loss,
    transition_loss_grad,
    transition_matrices,
)
from src.lsa_toolkit.losses.weighting import (
    LossInputError,
    apply_token_weights,
    cosine_weight,
    export_token_weights,
    goa_weighted_loss,
    graph_weights,
)
from src.lsa_toolkit.models.prediction import PredictionRecord
from src.lsa_toolkit.models.vocabulary import DEFAULT_VOCABULARY
from tests.conftest import make_state, simple_frame

EPS = 1e-9
H = 1e-6


def numeric_grad(f, p: np.ndarray) -> np.ndarray:
    """중앙 차분."""
    grad = np.zeros_like(p)
    for i in range(p.size):
        up, down = p.copy(), p.copy()
        up[i] += H
        down[i] -= H
        grad[i] = (f(up) - f(down)) / (2 * H)
    return grad


def brute_transition(y, p, eps=EPS) -> float:
    """스칼라 루프로 계산한 관계 1개의 대칭 KL (게이트 없음)."""
    t_real = [[0.0, 0.0], [0.0, 0.0]]
    t_pred = [[0.0, 0.0], [0.0, 0.0]]
    for t in range(len(y) - 1):
        t_real[int(y[t])][int(y[t + 1])] += 1
        for i in range(2):
            for j in range(2):
                a = p[t] if i == 1 else 1 - p[t]
                b = p[t + 1] if j == 1 else 1 - p[t + 1]
                t_pred[i][j] += a * b
    real_sum = sum(map(sum, t_real)) + eps
    pred_sum = sum(map(sum, t_pred)) + eps
    total = 0.0
    for i in range(2):
        for j in range(2):
            r = max(t_real[i][j] / real_sum, eps)
            q = max(t_pred[i][j] / pred_sum, eps)
            total += q * math.log(q / r) + r * math.log(r / q)
    return 0.5 * total


class TestWeighting:
    """GOA 시간 가중치."""

    @pytest.mark.parametrize("beta", [0.0, 0.3, 0.5, 1.0])
    def test_endpoints(self, beta):
        assert cosine_weight(3, 2, 7, beta) == pytest.approx(1 + beta)
        assert cosine_weight(7, 2, 7, beta) == pytest.approx(1 - beta)
        assert cosine_weight(5, 2, 7, beta) == pytest.approx(1.0)

    def test_single_future_graph(self):
        assert cosine_weight(3, 2, 3, 0.5) == 1.5

    @pytest.mark.parametrize("beta", [0.0, 0.25, 0.5, 0.75, 1.0])
    def test_non_increasing(self, beta):
        weights = graph_weights(0, 12, beta)

        assert np.all(np.diff(weights) <= 1e-12)
        assert weights.min() >= 1 - beta - 1e-12
        assert weights.max() <= 1 + beta + 1e-12

    def test_out_of_range(self):
        with pytest.raises(LossInputError):
            cosine_weight(2, 2, 5, 0.5)
        with pytest.raises(LossInputError):
            cosine_weight(3, 2, 5, 1.5)

    def test_weighted_loss_example(self):
        assert goa_weighted_loss([[1, 1], [2]], 0, 2, 0.5) == pytest.approx(8 / 7, abs=1e-12)

    @pytest.mark.parametrize("beta", [0.0, 0.5, 1.0])
    def test_constant_losses(self, beta):
        assert goa_weighted_loss([[0.7, 0.7], [0.7], [0.7] * 3], 4, 7, beta) == pytest.approx(0.7)

    def test_beta_zero_is_token_mean(self):
        losses = [[1.0, 3.0], [2.0], [0.5, 0.5, 5.0]]
        assert goa_weighted_loss(losses, 0, 3, 0.0) == pytest.approx(12.0 / 6)

    def test_linear_in_losses(self):
        losses = [[1.0, 3.0], [2.0, 0.5]]
        scaled = [[4 * v for v in row] for row in losses]

        assert goa_weighted_loss(scaled, 1, 3, 0.5) == pytest.approx(
            4 * goa_weighted_loss(losses, 1, 3, 0.5)
        )

    @pytest.mark.parametrize(
        ("losses", "n", "T"),
        [([], 0, 2), ([[1.0]], 0, 2), ([[], []], 0, 2)],
    )
    def test_invalid_input(self, losses, n, T):  # noqa: N803
        with pytest.raises(LossInputError):
            goa_weighted_loss(losses, n, T, 0.5)

    def test_export_weights(self):
        exported = export_token_weights(0, 2, 0.5, [2, 1])

        assert exported["token_weights"] == [1.5, 1.5, 0.5]
        assert exported["normalizer"] == 3.5
        assert [g["t"] for g in exported["graphs"]] == [1, 2]

    def test_export_round_trip(self):
        exported = export_token_weights(0, 2, 0.5, [2, 1])

        assert apply_token_weights(exported, [1, 1, 2]) == pytest.approx(
            goa_weighted_loss([[1, 1], [2]], 0, 2, 0.5), abs=1e-12
        )

    def test_export_beta_zero(self):
        assert export_token_weights(3, 6, 0.0, [1, 2, 1])["token_weights"] == [1.0] * 4

    def test_apply_length_mismatch(self):
        exported = export_token_weights(0, 2, 0.5, [2, 1])
        with pytest.raises(LossInputError):
            apply_token_weights(exported, [1.0])


class TestTransitionMatrices:
    """전이 히스토그램."""

    def test_real_counts(self):
        track = RelationTrack("r", np.array([0, 0, 1, 1, 0]), np.full(5, 0.5))

        t_real, _ = transition_matrices(track)

        np.testing.assert_array_equal(t_real, [[1, 1], [1, 1]])

    def test_pred_equals_real_without_gate(self):
        y = np.array([0, 0, 1, 1, 0], dtype=float)
        track = RelationTrack("r", y, y.copy())

        t_real, t_pred = transition_matrices(track, tau=0.0)
        result = transition_loss([track], LossConfig(tau=0.0))

        np.testing.assert_array_equal(t_pred, t_real)
        assert result.value == 0.0

    def test_gate_switch_off(self):
        y = np.array([0, 0, 1, 1, 0], dtype=float)
        track = RelationTrack("r", y, y.copy())

        _, t_pred = transition_matrices(track, tau=0.2, gate=False)

        np.testing.assert_array_equal(t_pred, [[1, 1], [1, 1]])

    def test_constant_p_fails_gate(self):
        track = RelationTrack("r", np.array([0, 1, 1, 0]), np.full(4, 0.5))

        _, t_pred = transition_matrices(track, tau=0.2)

        np.testing.assert_array_equal(t_pred, np.zeros((2, 2)))

    def test_normalize_sums_to_one(self):
        matrix = np.array([[3.0, 1.0], [0.0, 4.0]])
        assert normalize(matrix).sum() == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize(
        ("y", "p"),
        [([1], [0.5]), ([1, 0], [0.5]), ([1, 2], [0.5, 0.5]), ([1, 0], [0.5, 1.5])],
    )
    def test_track_validation(self, y, p):
        with pytest.raises(LossInputError):
            RelationTrack("r", np.array(y), np.array(p))


class TestTransitionLoss:
    """대칭 KL 전이 손실."""

    def test_symmetric_kl_example(self):
        """[[0.4, 0.1], [0.1, 0.4]] vs 균등 분포 = 0.3·ln 2."""
        d_pred = np.array([[0.4, 0.1], [0.1, 0.4]])
        d_real = np.full((2, 2), 0.25)

        value = symmetric_kl(d_pred, d_real)

        assert value == pytest.approx(0.3 * math.log(2), abs=1e-12)
        assert value == pytest.approx(0.207947, abs=5e-6)

    def test_identical_is_zero(self):
        d = np.array([[0.1, 0.2], [0.3, 0.4]])
        assert symmetric_kl(d, d) == 0.0

    def test_delta_gate(self):
        track = RelationTrack("r", np.array([0, 1, 0]), np.array([0.1, 0.9, 0.1]))

        result = transition_loss([track], LossConfig(delta=5.0))

        assert result.no_valid_relations
        assert result.value == 0.0

    def test_empty_tracks(self):
        with pytest.raises(LossInputError):
            transition_loss([])

    def test_matches_brute_force(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            length = int(rng.integers(2, 7))
            tracks = [
                RelationTrack(f"r{i}", rng.integers(0, 2, length), rng.uniform(0, 1, length))
                for i in range(int(rng.integers(1, 4)))
            ]

            result = transition_loss(tracks, LossConfig(tau=0.0))

            expected = sum(brute_transition(t.y, t.p) for t in tracks) / len(tracks)
            assert result.value == pytest.approx(expected, rel=1e-9, abs=1e-12)
            assert result.value >= 0.0


class TestRelationLosses:
    """BCE / 임계값 마진 손실."""

    def test_bce_half(self):
        assert bce([0.5], [1]) == pytest.approx(math.log(2), abs=1e-12)

    def test_bce_confident(self):
        assert bce([1 - 1e-9], [1]) == pytest.approx(0.0, abs=1e-8)
        assert bce([1.0], [1]) < 1e-8

    def test_bce_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            size = int(rng.integers(1, 10))
            p = rng.uniform(0, 1, size)
            y = rng.integers(0, 2, size)

            expected = -sum(
                yi * math.log(pi) + (1 - yi) * math.log(1 - pi) for pi, yi in zip(p, y)
            ) / size

            assert bce(p, y) == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize(
        ("p", "y", "expected"), [(0.95, 1, 0.0), (0.7, 0, 0.2), (0.6, 1, 0.3), (0.4, 0, 0.0)]
    )
    def test_threshold_examples(self, p, y, expected):
        assert threshold_margin_loss([p], [y]) == pytest.approx(expected, abs=1e-12)

    def test_sgg_relation_loss(self):
        assert sgg_relation_loss([0.7], [0]) == pytest.approx(1.303973, abs=1e-6)
        assert sgg_relation_loss([0.7], [0], LossConfig(eta=0.0)) == bce([0.7], [0])

    def test_sgg_relation_loss_extremes(self):
        assert sgg_relation_loss([1.0, 0.0], [1, 0]) == pytest.approx(0.0, abs=1e-8)

    def test_oora_total(self):
        assert oora_total_loss(1.0, 0.5, 2.0, 0.03) == pytest.approx(1.56)
        assert oora_total_loss(1.0, 0.5, 2.0, 0.0) == 1.5
        assert oora_total_loss(0.0, 0.0, 0.0) == 0.0

    @pytest.mark.parametrize(("p", "y"), [([0.5], [1, 0]), ([], []), ([1.2], [1]), ([0.5], [2])])
    def test_invalid_input(self, p, y):
        with pytest.raises(LossInputError):
            bce(p, y)

    def test_multi_hot(self):
        vector = encode_multi_hot(["looking_at", "holding"])
        order = DEFAULT_VOCABULARY.all_relations

        assert vector.sum() == 2
        assert vector[order.index("holding")] == 1.0
        assert vector.size == len(order)
        with pytest.raises(LossInputError):
            encode_multi_hot(["flying"])

    def test_binarize_strict(self):
        np.testing.assert_array_equal(binarize_probabilities([0.6, 0.61, 0.2, 1.0]), [0, 1, 0, 1])


class TestGradients:
    """해석적 기울기 vs 유한 차분 (무작위 100건)."""

    @staticmethod
    def _samples(seed: int, avoid=()):
        rng = np.random.default_rng(seed)
        for _ in range(100):
            size = int(rng.integers(1, 7))
            p = rng.uniform(0.05, 0.95, size)
            for kink in avoid:
                p = np.where(np.abs(p - kink) < 1e-3, p + 2e-3, p)
            yield p, rng.integers(0, 2, size).astype(float)

    def test_bce(self):
        for p, y in self._samples(0):
            numeric = numeric_grad(lambda q, y=y: bce(q, y), p)
            np.testing.assert_allclose(bce_grad(p, y), numeric, rtol=1e-5, atol=1e-7)

    def test_threshold(self):
        for p, y in self._samples(1, avoid=(0.9, 0.5)):
            numeric = numeric_grad(lambda q, y=y: threshold_margin_loss(q, y), p)
            np.testing.assert_allclose(threshold_margin_grad(p, y), numeric, rtol=1e-5, atol=1e-7)

    def test_sgg_relation(self):
        for p, y in self._samples(2, avoid=(0.9, 0.5)):
            numeric = numeric_grad(lambda q, y=y: sgg_relation_loss(q, y), p)
            np.testing.assert_allclose(sgg_relation_grad(p, y), numeric, rtol=1e-5, atol=1e-7)

    def test_transition(self):
        config = LossConfig(tau=0.0)
        rng = np.random.default_rng(4)
        for _ in range(100):
            length = int(rng.integers(2, 6))
            y = rng.integers(0, 2, length).astype(float)
            p = rng.uniform(0.05, 0.95, length)

            analytic = transition_loss_grad([RelationTrack("r", y, p)], config)[0]
            numeric = numeric_grad(
                lambda q, y=y: transition_loss([RelationTrack("r", y, q)], config).value, p
            )

            np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-6)

    def test_transition_averages_over_valid(self):
        config = LossConfig(tau=0.0)
        y = np.array([0.0, 1.0, 1.0])
        p = np.array([0.2, 0.7, 0.4])

        single = transition_loss_grad([RelationTrack("a", y, p)], config)[0]
        pair = transition_loss_grad(
            [RelationTrack("a", y, p), RelationTrack("b", y, p)], config
        )

        np.testing.assert_allclose(pair[0], single / 2)


class TestTransitionScorer:
    """예측 레코드 전이 일관성 점수."""

    @staticmethod
    def _record(*frames) -> PredictionRecord:
        return PredictionRecord(video_id="v", fraction=0.5, mode="with_goa", future=frames)

    @staticmethod
    def _truth(*frames):
        return merge_sequence(list(frames), "v")

    def test_identical_is_zero(self):
        frames = [
            simple_frame(1, make_state("broom", contact=["holding"])),
            simple_frame(2, make_state("broom", contact=["touching"])),
            simple_frame(3, make_state("broom", contact=["holding"])),
        ]

        result = score_transition_consistency(
            self._record(*frames), self._truth(*frames), LossConfig(tau=0.0)
        )

        assert result.value == 0.0
        assert result.valid_count == 2

    def test_oscillating_prediction_positive(self):
        held = make_state("broom", contact=["holding"])
        truth = self._truth(*(simple_frame(i, held) for i in range(4)))
        record = self._record(
            simple_frame(0, held), simple_frame(1), simple_frame(2, held), simple_frame(3)
        )

        assert score_transition_consistency(record, truth).value > 0.0

    def test_three_frame_brute_force(self):
        truth = self._truth(
            simple_frame(1, make_state("broom", contact=["holding"])),
            simple_frame(2, make_state("broom", contact=["holding"])),
            simple_frame(3, make_state("broom", contact=["touching"])),
        )
        record = self._record(
            simple_frame(1, make_state("broom", contact=["holding"])),
            simple_frame(2, make_state("broom", contact=["touching"])),
            simple_frame(3, make_state("broom", contact=["touching"])),
        )

        result = score_transition_consistency(record, truth, LossConfig(tau=0.0))

        holding = brute_transition([1, 1, 0], [1, 0, 0])
        touching = brute_transition([0, 0, 1], [0, 1, 1])
        assert result.value == pytest.approx((holding + touching) / 2, rel=1e-12)
        assert set(result.per_relation) == {"broom:holding", "broom:touching"}

    def test_single_frame_skipped(self):
        frame = simple_frame(1, make_state("broom", contact=["holding"]))

        result = score_transition_consistency(self._record(frame), self._truth(frame))

        assert result.no_valid_relations


# === 관계 축 순서 불변성 ===

probabilities = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@st.composite
def relation_tracks(draw, max_tracks: int = 6):
    """같은 길이의 트랙 목록 (관계 이름 중복 허용)."""
    length = draw(st.integers(2, 6))
    labels = st.lists(st.sampled_from([0.0, 1.0]), min_size=length, max_size=length)
    probs = st.lists(probabilities, min_size=length, max_size=length)
    names = st.sampled_from(["holding", "touching"])
    count = draw(st.integers(1, max_tracks))
    return [
        RelationTrack(draw(names), np.array(draw(labels)), np.array(draw(probs)))
        for _ in range(count)
    ]


@st.composite
def labelled_probabilities(draw):
    """(p, y, 순열) 같은 길이."""
    size = draw(st.integers(1, 40))
    p = draw(st.lists(probabilities, min_size=size, max_size=size))
    y = draw(st.lists(st.sampled_from([0.0, 1.0]), min_size=size, max_size=size))
    order = draw(st.permutations(range(size)))
    return np.array(p), np.array(y), list(order)


class TestRelationOrderInvariance:
    """관계 축을 섞어도 손실 값은 같다."""

    def test_duplicate_relation_names_count_each_track(self):
        config = LossConfig(tau=0.0)
        a = RelationTrack("r", np.array([0.0, 1.0, 0.0, 1.0]), np.array([0.9, 0.1, 0.8, 0.2]))
        b = RelationTrack("r", np.array([1.0, 1.0, 1.0, 0.0]), np.array([0.5] * 4))
        single_a = transition_loss([a], config).value
        single_b = transition_loss([b], config).value

        forward = transition_loss([a, b], config)
        backward = transition_loss([b, a], config)

        assert forward.valid_count == backward.valid_count == 2
        assert forward.value == pytest.approx(backward.value)
        assert forward.value == pytest.approx((single_a + single_b) / 2)
        assert forward.per_relation["r"] == pytest.approx(forward.value)

    @settings(max_examples=300, deadline=None)
    @given(relation_tracks(), st.randoms(use_true_random=False))
    def test_transition_loss_track_order(self, tracks, rnd):
        shuffled = list(tracks)
        rnd.shuffle(shuffled)

        original = transition_loss(tracks)
        permuted = transition_loss(shuffled)

        assert permuted.valid_count == original.valid_count
        assert permuted.value == pytest.approx(original.value, rel=1e-9, abs=1e-12)
        assert permuted.per_relation.keys() == original.per_relation.keys()
        for name, value in original.per_relation.items():
            assert permuted.per_relation[name] == pytest.approx(value, rel=1e-9, abs=1e-12)

    @settings(max_examples=300, deadline=None)
    @given(labelled_probabilities())
    def test_bce_relation_order(self, case):
        p, y, order = case

        assert bce(p[order], y[order]) == pytest.approx(bce(p, y), rel=1e-9, abs=1e-12)

    @settings(max_examples=300, deadline=None)
    @given(labelled_probabilities())
    def test_threshold_margin_relation_order(self, case):
        p, y, order = case

        assert threshold_margin_loss(p[order], y[order], 0.9, 0.5) == pytest.approx(
            threshold_margin_loss(p, y, 0.9, 0.5), rel=1e-9, abs=1e-12
        )
