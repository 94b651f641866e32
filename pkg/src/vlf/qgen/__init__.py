"""Question generation from answer windows."""

from .generator import QuestionGenerator, answer_window, answer_window_indices, qg_loss
from .vocab import BOS, EOS, MASK, PAD, SPECIALS, UNK, Vocab

__all__ = [
    "BOS",
    "EOS",
    "MASK",
    "PAD",
    "SPECIALS",
    "UNK",
    "Vocab",
    "QuestionGenerator",
    "answer_window",
    "answer_window_indices",
    "qg_loss",
]
