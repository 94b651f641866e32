import math

import numpy as np
import pytest
from helpers import brute_force_log_partition, brute_force_viterbi, enumerate_crf

from vlf.errors import InputError, NumericError
from vlf.kernel import ParamSet, fd_gradcheck
from vlf.seeding import rng
from vlf.tagging import TAGS, crf_log_partition, crf_nll_grad, crf_score, viterbi


class TestCrfScore:
    def test_single_position_has_no_transition(self):
        l = np.array([[1.0, 2.0, 3.0]])
        M = np.full((3, 3), 100.0)
        assert crf_score(l, M, ["I-Seg"]) == 2.0

    def test_zero_scores(self):
        l = np.zeros((4, 3))
        M = np.zeros((3, 3))
        for tags in (["O"] * 4, ["B-Seg", "I-Seg", "I-Seg", "O"]):
            assert crf_score(l, M, tags) == 0.0

    def test_hand_sum(self):
        l = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
        M = np.zeros((3, 3))
        M[0, 1] = 0.5
        assert crf_score(l, M, ["B-Seg", "I-Seg"]) == pytest.approx(3.5)

    def test_unknown_tag(self):
        with pytest.raises(IndexError):
            crf_score(np.zeros((1, 3)), np.zeros((3, 3)), ["X-Seg"])

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            crf_score(np.zeros((2, 3)), np.zeros((3, 3)), ["O"])


class TestLogPartition:
    def test_uniform_lattice_counts_paths(self):
        assert crf_log_partition(np.zeros((2, 3)), np.zeros((3, 3))) == pytest.approx(
            math.log(9), abs=1e-12
        )

    def test_single_step_is_logsumexp(self):
        l = np.array([[0.3, -1.2, 2.0]])
        expected = math.log(sum(math.exp(v) for v in l[0]))
        assert crf_log_partition(l, np.zeros((3, 3))) == pytest.approx(expected)

    def test_matches_enumeration(self):
        gen = rng(0, "crf-lz")
        for _ in range(25):
            k = int(gen.integers(1, 9))
            l = gen.normal(size=(k, 3))
            M = gen.normal(size=(3, 3))
            assert crf_log_partition(l, M) == pytest.approx(
                brute_force_log_partition(l, M), abs=1e-8
            )

    def test_stable_for_large_scores(self):
        l = np.full((5, 3), 1e3)
        M = np.full((3, 3), -1e3)
        assert math.isfinite(crf_log_partition(l, M))

    def test_non_finite_rejected(self):
        with pytest.raises(NumericError):
            crf_log_partition(np.array([[np.nan, 0, 0]]), np.zeros((3, 3)))


class TestNllGrad:
    def test_loss_vanishes_when_gold_dominates(self):
        l = np.full((3, 3), -50.0)
        gold = ["B-Seg", "I-Seg", "O"]
        for i, t in enumerate(gold):
            l[i, TAGS.index(t)] = 50.0
        loss, _, _ = crf_nll_grad(l, np.zeros((3, 3)), gold)
        assert loss < 1e-9

    def test_marginals_normalize(self):
        gen = rng(1, "crf-marg")
        l = gen.normal(size=(5, 3))
        M = gen.normal(size=(3, 3))
        gold = ["O", "B-Seg", "I-Seg", "O", "B-Seg"]
        _, grad_l, _ = crf_nll_grad(l, M, gold)
        onehot = np.zeros_like(grad_l)
        for i, t in enumerate(gold):
            onehot[i, TAGS.index(t)] = 1.0
        np.testing.assert_allclose((grad_l + onehot).sum(axis=1), 1.0, atol=1e-12)

    def test_gradients_match_finite_differences(self):
        gen = rng(2, "crf-fd")
        worst = 0.0
        for _ in range(5):
            k = 4
            params = ParamSet()
            params.add("l", gen.normal(size=(k, 3)))
            params.add("M", gen.normal(size=(3, 3)))
            gold = [TAGS[i] for i in gen.integers(0, 3, size=k)]

            def loss_fn(p):
                loss, gl, gm = crf_nll_grad(p["l"], p["M"], gold)
                p.add_grad("l", gl)
                p.add_grad("M", gm)
                return loss

            worst = max(worst, fd_gradcheck(loss_fn, params, eps=1e-4))
        assert worst < 1e-6

    def test_loss_non_negative(self):
        gen = rng(3, "crf-nn")
        for _ in range(20):
            k = int(gen.integers(1, 6))
            l = gen.normal(size=(k, 3))
            M = gen.normal(size=(3, 3))
            gold = [TAGS[i] for i in gen.integers(0, 3, size=k)]
            loss, _, _ = crf_nll_grad(l, M, gold)
            assert loss >= 0.0


class TestViterbi:
    def test_decoupled_lattice_is_per_position_argmax(self):
        gen = rng(4, "vit-dec")
        l = gen.normal(size=(6, 3))
        tags, _ = viterbi(l, np.zeros((3, 3)))
        expected = [TAGS[int(i)] for i in l.argmax(axis=1)]
        assert tags == expected

    def test_matches_exhaustive_argmax(self):
        gen = rng(5, "vit-ex")
        for _ in range(30):
            k = int(gen.integers(1, 9))
            l = gen.normal(size=(k, 3))
            M = gen.normal(size=(3, 3))
            expected_tags, expected_score = brute_force_viterbi(l, M)
            tags, score = viterbi(l, M)
            assert tags == expected_tags
            assert score == pytest.approx(expected_score, abs=1e-9)

    def test_score_consistency(self):
        gen = rng(6, "vit-sc")
        l = gen.normal(size=(5, 3))
        M = gen.normal(size=(3, 3))
        tags, score = viterbi(l, M)
        assert score == pytest.approx(crf_score(l, M, tags), abs=1e-12)

    def test_tie_break_prefers_low_tag_at_latest_position(self):
        # All-zero scores tie every sequence; the rule picks all B-Seg.
        tags, _ = viterbi(np.zeros((3, 3)), np.zeros((3, 3)))
        assert tags == ["B-Seg", "B-Seg", "B-Seg"]


class TestDistributionProperties:
    def test_probability_mass_sums_to_one(self):
        gen = rng(7, "crf-mass")
        for _ in range(10):
            k = int(gen.integers(1, 9))
            l = gen.normal(size=(k, 3))
            M = gen.normal(size=(3, 3))
            log_z = crf_log_partition(l, M)
            _, scores = enumerate_crf(l, M)
            assert np.exp(scores - log_z).sum() == pytest.approx(1.0, abs=1e-8)

    def test_emission_row_shift_invariance(self):
        gen = rng(8, "crf-shift")
        l = gen.normal(size=(5, 3))
        M = gen.normal(size=(3, 3))
        shifted = l.copy()
        shifted[2] += 7.5
        assert viterbi(shifted, M)[0] == viterbi(l, M)[0]
        assert crf_log_partition(shifted, M) == pytest.approx(
            crf_log_partition(l, M) + 7.5, abs=1e-9
        )
        gold = ["O", "O", "B-Seg", "I-Seg", "O"]
        assert crf_score(shifted, M, gold) == pytest.approx(
            crf_score(l, M, gold) + 7.5, abs=1e-12
        )
