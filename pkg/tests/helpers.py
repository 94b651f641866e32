"""Shared oracles and fixture builders for the test suite."""

from __future__ import annotations

import itertools

import numpy as np

from vlf.subtitles import Cue, TimeSpan, build_word_timeline
from vlf.tagging.crf import TAGS


def enumerate_crf(emissions: np.ndarray, transitions: np.ndarray):
    """Exhaustive scores over all tag sequences, vectorized.

    Returns (sequences [3^k, k], scores [3^k]).
    """
    k = emissions.shape[0]
    seqs = np.array(list(itertools.product(range(3), repeat=k)), dtype=np.int64)
    scores = emissions[np.arange(k)[None, :], seqs].sum(axis=1)
    if k > 1:
        scores = scores + transitions[seqs[:, :-1], seqs[:, 1:]].sum(axis=1)
    return seqs, scores


def brute_force_log_partition(emissions, transitions) -> float:
    _, scores = enumerate_crf(emissions, transitions)
    m = scores.max()
    return float(m + np.log(np.exp(scores - m).sum()))


def brute_force_viterbi(emissions, transitions):
    """Argmax sequence under the reverse-lexicographic tie rule."""
    seqs, scores = enumerate_crf(emissions, transitions)
    best = scores.max()
    optima = seqs[scores >= best - 1e-12]
    rows = sorted(map(tuple, optima), key=lambda y: tuple(reversed(y)))
    chosen = rows[0]
    return [TAGS[i] for i in chosen], float(best)


def brute_force_decode_span(start, end, max_span):
    best = (-np.inf, -1, -1)
    n = len(start)
    for i in range(n):
        for j in range(i, min(n, i + max_span)):
            score = start[i] + end[j]
            if score > best[0]:
                best = (score, i, j)
    return best[1], best[2]


# -- fixtures -----------------------------------------------------------------

_B_WORDS = ["start", "here", "we", "show", "the", "procedure"]
_I_WORDS = ["keep", "going", "with", "this", "same", "step"]
_O_WORDS = ["just", "chatting", "about", "the", "channel", "today"]


def separable_tagging_corpus(n_sequences: int = 10, seed: int = 0):
    """Sequences whose tags are recoverable from marker words alone."""
    gen = np.random.default_rng(seed)
    fillers = [f"word{i}" for i in range(20)]
    X, y = [], []
    for _ in range(n_sequences):
        k = int(gen.integers(4, 8))
        tags = []
        for i in range(k):
            if not tags or tags[-1] == "O":
                tags.append("B-Seg" if gen.random() < 0.5 else "O")
            elif tags[-1] in ("B-Seg", "I-Seg"):
                tags.append(gen.choice(["I-Seg", "O", "B-Seg"]))
        texts = []
        for tag in tags:
            pool = {"B-Seg": _B_WORDS, "I-Seg": _I_WORDS, "O": _O_WORDS}[tag]
            extra = gen.choice(fillers, size=3, replace=True)
            texts.append(" ".join(list(pool[:3]) + list(extra)))
        X.append(texts)
        y.append(tags)
    return X, y


LOCALIZER_TOPICS = ["bandage", "ankle", "shoulder", "knee", "wrist"]


def localizer_fixture(topics=None):
    """Five questions whose answers sit in the middle cues of each video."""
    from vlf.localize import LocalizerExample

    topics = topics or LOCALIZER_TOPICS
    X, y = [], []
    for t in topics:
        cues = [
            Cue("welcome to the channel friends", TimeSpan(0, 5)),
            Cue(f"now we treat the {t} slowly", TimeSpan(5, 11)),
            Cue(f"keep the {t} very steady now", TimeSpan(11, 17)),
            Cue("thanks for watching see you", TimeSpan(17, 22)),
        ]
        timeline = build_word_timeline(cues)
        question = f"how do you treat the {t}?".split()
        X.append(LocalizerExample(question, timeline))
        y.append(TimeSpan(5, 17))
    return X, y


def qg_pairs_fixture():
    """Five distinct (answer window, question) pairs."""
    pairs = []
    for verb, noun in [
        ("wrap", "ankle"),
        ("clean", "wound"),
        ("stretch", "hamstring"),
        ("ice", "knee"),
        ("massage", "shoulder"),
    ]:
        window = f"first you {verb} the {noun} slowly and carefully".split()
        question = f"how do you {verb} the {noun}?".split()
        pairs.append((window, question))
    return pairs
