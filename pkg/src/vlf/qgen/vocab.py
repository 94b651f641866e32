"""Token vocabulary with reserved special ids.

Serialized as a JSON array of tokens where the array index is the id.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import ConfigError

PAD = "<pad>"
BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"
MASK = "<mask>"
SPECIALS = (PAD, BOS, EOS, UNK, MASK)


class Vocab:
    def __init__(self, tokens: list[str]):
        if tokens[: len(SPECIALS)] != list(SPECIALS):
            raise ConfigError(f"vocabulary must start with the specials {SPECIALS}")
        if len(set(tokens)) != len(tokens):
            raise ConfigError("vocabulary contains duplicate tokens")
        self.tokens = list(tokens)
        self.token_to_id = {t: i for i, t in enumerate(tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return self.token_to_id[PAD]

    @property
    def bos_id(self) -> int:
        return self.token_to_id[BOS]

    @property
    def eos_id(self) -> int:
        return self.token_to_id[EOS]

    @property
    def unk_id(self) -> int:
        return self.token_to_id[UNK]

    @classmethod
    def build(cls, token_sequences) -> "Vocab":
        """Vocabulary over all tokens seen, in sorted order after specials."""
        seen = set()
        for seq in token_sequences:
            seen.update(seq)
        seen -= set(SPECIALS)
        return cls(list(SPECIALS) + sorted(seen))

    def encode(self, tokens: list[str]) -> list[int]:
        unk = self.unk_id
        return [self.token_to_id.get(t, unk) for t in tokens]

    def decode(self, ids: list[int]) -> list[str]:
        return [self.tokens[i] for i in ids]

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.tokens, ensure_ascii=False), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "Vocab":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))
