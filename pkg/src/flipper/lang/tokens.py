"""Tokenizer shared by utterances and program text.

Whitespace-separated, with ``{ } [ ] , ;`` always split into their own tokens.
Token text is lowercased; spans index bytes of the original string.
"""
from __future__ import annotations

from dataclasses import dataclass

PUNCT = "{}[],;"


@dataclass(frozen=True)
class Token:
    text: str
    span: tuple[int, int]


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in PUNCT:
            out.append(Token(ch, (i, i + 1)))
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in PUNCT:
            j += 1
        out.append(Token(text[i:j].lower(), (i, j)))
        i = j
    return out


def token_texts(text: str) -> list[str]:
    return [t.text for t in tokenize(text)]
