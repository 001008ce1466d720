"""Shared tokenizer for the evaluation metrics.

Two schemes: plain whitespace splitting, and whitespace splitting with
every punctuation or symbol character separated into its own token.
Lowercasing, when enabled, is applied last.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

SCHEMES = ("whitespace", "punct_split")


@dataclass(frozen=True)
class TokenizerConfig:
    scheme: str = "whitespace"
    lowercase: bool = False

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown tokenizer scheme {self.scheme!r}, expected one of {SCHEMES}")


# Defaults used by the metrics: BLEU scores detokenized text case-sensitively
# with punctuation split off; TER normalization additionally lowercases.
BLEU_TOKENIZER = TokenizerConfig(scheme="punct_split", lowercase=False)
TER_NORMALIZED_TOKENIZER = TokenizerConfig(scheme="punct_split", lowercase=True)


def _is_punct(ch: str) -> bool:
    return not ch.isalnum() and not ch.isspace()


def _split_punct(word: str) -> List[str]:
    tokens: List[str] = []
    current: List[str] = []
    for ch in word:
        if _is_punct(ch):
            if current:
                tokens.append("".join(current))
                current = []
            tokens.append(ch)
        else:
            current.append(ch)
    if current:
        tokens.append("".join(current))
    return tokens


def tokenize(text: str, config: TokenizerConfig = TokenizerConfig()) -> List[str]:
    """Split text into tokens according to the configured scheme."""
    words = text.split()
    if config.scheme == "punct_split":
        tokens = [t for w in words for t in _split_punct(w)]
    else:
        tokens = words
    if config.lowercase:
        tokens = [t.lower() for t in tokens]
    return tokens
