import math

import pytest
from helpers import qg_pairs_fixture

from vlf.errors import ConfigError
from vlf.kernel import fd_gradcheck
from vlf.qgen import (
    SPECIALS,
    QuestionGenerator,
    Vocab,
    answer_window,
    answer_window_indices,
    qg_loss,
)
from vlf.subtitles import Cue, TimeSpan, build_word_timeline


class TestVocab:
    def test_build_is_dense_and_sorted(self):
        vocab = Vocab.build([["b", "a"], ["c", "a"]])
        assert vocab.tokens[: len(SPECIALS)] == list(SPECIALS)
        assert vocab.tokens[len(SPECIALS):] == ["a", "b", "c"]
        assert [vocab.token_to_id[t] for t in vocab.tokens] == list(range(len(vocab)))

    def test_unknown_tokens_map_to_unk(self):
        vocab = Vocab.build([["hello"]])
        assert vocab.encode(["hello", "zzz"]) == [
            vocab.token_to_id["hello"],
            vocab.unk_id,
        ]

    def test_round_trip_file(self, tmp_path):
        vocab = Vocab.build([["x", "y"]])
        vocab.save(tmp_path / "vocab.json")
        loaded = Vocab.load(tmp_path / "vocab.json")
        assert loaded.tokens == vocab.tokens

    def test_missing_specials_rejected(self):
        with pytest.raises(ConfigError):
            Vocab(["a", "b"])


class TestAnswerWindow:
    def _timeline(self):
        return build_word_timeline(
            [Cue("w1", TimeSpan(1, 2)), Cue("w2", TimeSpan(2, 4)), Cue("w3", TimeSpan(4, 6))]
        )

    def test_full_cover(self):
        timeline = self._timeline()
        assert answer_window(timeline, TimeSpan(0, 100)) == ["w1", "w2", "w3"]

    def test_empty_before_first_word(self):
        assert answer_window(self._timeline(), TimeSpan(0, 0)) == []

    def test_interval_intersection(self):
        assert answer_window(self._timeline(), TimeSpan(2.5, 4.5)) == ["w2", "w3"]

    def test_indices_align_with_words(self):
        timeline = self._timeline()
        assert answer_window_indices(timeline, TimeSpan(2.5, 4.5)) == [1, 2]


class TestQgLoss:
    def test_untrained_model_is_uniform(self):
        gen = QuestionGenerator(dim=16, seed=0)
        gen.build_vocab([["a", "b", "c", "d"]])
        loss = gen.loss_one(["a", "b"], ["c", "d"])
        assert loss == pytest.approx(math.log(len(gen.vocab_)), abs=1e-12)

    def test_empty_window_allowed(self):
        gen = QuestionGenerator(dim=16, seed=0)
        gen.build_vocab([["a", "b"]])
        assert gen.loss_one([], ["a"]) > 0.0

    def test_empty_question_rejected(self):
        gen = QuestionGenerator(dim=16, seed=0)
        gen.build_vocab([["a"]])
        with pytest.raises(ConfigError):
            gen.loss_one(["a"], [])

    def test_over_long_question_rejected(self):
        gen = QuestionGenerator(dim=16, max_len=5, seed=0)
        gen.build_vocab([["a"]])
        with pytest.raises(ConfigError):
            gen.loss_one(["a"], ["a"] * 6)

    def test_overfit_single_pair(self):
        gen = QuestionGenerator(dim=24, epochs=150, lr=1e-2, seed=0)
        window = ["first", "you", "wrap", "the", "ankle"]
        gold = ["how", "do", "you", "wrap", "it?"]
        gen.fit([window], [gold])
        assert gen.loss_one(window, gold) < 0.01

    def test_gradcheck(self):
        gen = QuestionGenerator(dim=8, ff=8, seed=1)
        gen.build_vocab([["a", "b", "c"]])
        window = ["a", "b"]
        question = ["c", "a"]

        def loss_fn(params):
            assert params is gen.params_
            return qg_loss(gen, window, question, train=True)

        assert fd_gradcheck(loss_fn, gen.params_, eps=1e-5) < 1e-4

    def test_permutation_sensitivity(self):
        pairs = qg_pairs_fixture()
        gen = QuestionGenerator(dim=24, epochs=120, lr=1e-2, seed=0)
        gen.fit([w for w, _ in pairs], [q for _, q in pairs])
        window, question = pairs[0]
        shuffled = [question[-1]] + question[1:-1] + [question[0]]
        assert gen.loss_one(window, shuffled) > gen.loss_one(window, question) + 0.1


class TestGenerate:
    def test_greedy_reproduces_overfit_gold(self):
        gen = QuestionGenerator(dim=24, epochs=150, lr=1e-2, seed=0)
        window = ["first", "you", "wrap", "the", "ankle"]
        gold = ["how", "do", "you", "wrap", "it?"]
        gen.fit([window], [gold])
        assert gen.generate(window, beam=1) == gold

    def test_length_cap(self):
        for seed in range(5):
            gen = QuestionGenerator(dim=8, max_len=6, seed=seed)
            gen.build_vocab([[f"t{i}" for i in range(10)]])
            out = gen.generate(["t1", "t2"], beam=2)
            assert len(out) <= 6

    def test_beam_score_dominates_greedy(self):
        for seed in range(8):
            gen = QuestionGenerator(dim=8, max_len=8, seed=seed)
            gen.build_vocab([[f"t{i}" for i in range(12)]])
            window = ["t3", "t4", "t5"]
            _, greedy_score = gen.generate(window, beam=1, return_score=True)
            _, beam_score = gen.generate(window, beam=5, return_score=True)
            assert beam_score >= greedy_score - 1e-12

    def test_deterministic(self):
        gen = QuestionGenerator(dim=8, seed=3)
        gen.build_vocab([[f"t{i}" for i in range(9)]])
        assert gen.generate(["t1"], beam=4) == gen.generate(["t1"], beam=4)

    def test_bad_beam_rejected(self):
        gen = QuestionGenerator(dim=8, seed=0)
        gen.build_vocab([["a"]])
        with pytest.raises(ConfigError):
            gen.generate(["a"], beam=0)


class TestFixturePerplexity:
    def test_overfit_five_pairs(self):
        pairs = qg_pairs_fixture()
        gen = QuestionGenerator(dim=32, epochs=250, lr=1e-2, seed=0)
        gen.fit([w for w, _ in pairs], [q for _, q in pairs])
        mean_loss = sum(gen.loss_one(w, q) for w, q in pairs) / len(pairs)
        assert math.exp(mean_loss) < 1.05


class TestPersistence:
    def test_save_load_round_trip(self, tmp_path):
        pairs = qg_pairs_fixture()[:2]
        gen = QuestionGenerator(dim=16, epochs=30, lr=1e-2, seed=0)
        gen.fit([w for w, _ in pairs], [q for _, q in pairs])
        gen.save(tmp_path / "m.vlfk", tmp_path / "v.json")
        clone = QuestionGenerator(dim=16, epochs=30, lr=1e-2, seed=0)
        clone.load(tmp_path / "m.vlfk", tmp_path / "v.json")
        for window, question in pairs:
            assert clone.generate(window) == gen.generate(window)
            assert clone.loss_one(window, question) == pytest.approx(
                gen.loss_one(window, question), abs=1e-12
            )
