"""Token vocabulary with reserved marker tokens.

The toolkit is generic over the token inventory: any scorer's subword
vocabulary can be wrapped in a :class:`Vocabulary` as long as encoding is
lossless (``decode(encode(s)) == s``). The built-in construction is
character-level, which is what the bundled test scorers use.

Nine ids are reserved ahead of the content tokens:

* ``[s]`` / ``[r]`` / ``[o]`` / ``[e]`` delimit subject, relation, object
  and the end of each triplet in a linearization;
* ``[bos]`` / ``[eos]`` bound generated sequences;
* ``[text]`` / ``[unc]`` / ``[con]`` separate the three segments of a
  boosted-model input (source text, unconstrained and constrained weak
  predictions).

Content encoding never emits a reserved id, so marker positions in a token
sequence are unambiguous even when the source text spells out a marker
string literally.
"""

from __future__ import annotations

import string
from typing import Iterable, Sequence

from .errors import UnknownTokenError

SUBJECT_MARKER = "[s]"
RELATION_MARKER = "[r]"
OBJECT_MARKER = "[o]"
END_MARKER = "[e]"
BOS_MARKER = "[bos]"
EOS_MARKER = "[eos]"
TEXT_SEGMENT = "[text]"
UNCONSTRAINED_SEGMENT = "[unc]"
CONSTRAINED_SEGMENT = "[con]"

SPECIAL_TOKENS = (
    BOS_MARKER,
    EOS_MARKER,
    SUBJECT_MARKER,
    RELATION_MARKER,
    OBJECT_MARKER,
    END_MARKER,
    TEXT_SEGMENT,
    UNCONSTRAINED_SEGMENT,
    CONSTRAINED_SEGMENT,
)


class Vocabulary:
    """Bijective token-string <-> id mapping with reserved marker ids.

    ``content_tokens`` may be single characters or longer pieces; encoding
    uses greedy longest-match, which reduces to per-character lookup for a
    character-level inventory.
    """

    def __init__(self, content_tokens: Sequence[str]):
        seen = set()
        for tok in content_tokens:
            if not tok:
                raise ValueError("content tokens must be non-empty")
            if tok in seen:
                raise ValueError(f"duplicate content token: {tok!r}")
            if any(marker in tok for marker in SPECIAL_TOKENS):
                raise ValueError(f"content token collides with a marker: {tok!r}")
            seen.add(tok)

        self._tokens: tuple[str, ...] = SPECIAL_TOKENS + tuple(content_tokens)
        self._ids: dict[str, int] = {t: i for i, t in enumerate(self._tokens)}
        self._n_special = len(SPECIAL_TOKENS)
        # char trie over content tokens for greedy longest-match encoding
        self._match_trie: dict = {}
        for tok in content_tokens:
            node = self._match_trie
            for ch in tok:
                node = node.setdefault(ch, {})
            node[None] = self._ids[tok]

    # -- special ids ----------------------------------------------------

    @property
    def bos(self) -> int:
        return self._ids[BOS_MARKER]

    @property
    def eos(self) -> int:
        return self._ids[EOS_MARKER]

    @property
    def subject(self) -> int:
        return self._ids[SUBJECT_MARKER]

    @property
    def relation(self) -> int:
        return self._ids[RELATION_MARKER]

    @property
    def object(self) -> int:
        return self._ids[OBJECT_MARKER]

    @property
    def end(self) -> int:
        return self._ids[END_MARKER]

    @property
    def text_segment(self) -> int:
        return self._ids[TEXT_SEGMENT]

    @property
    def unconstrained_segment(self) -> int:
        return self._ids[UNCONSTRAINED_SEGMENT]

    @property
    def constrained_segment(self) -> int:
        return self._ids[CONSTRAINED_SEGMENT]

    # -- basic queries ---------------------------------------------------

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self._tokens == other._tokens

    def __hash__(self) -> int:
        return hash(self._tokens)

    @property
    def content_tokens(self) -> tuple[str, ...]:
        return self._tokens[self._n_special:]

    def id_of(self, token: str) -> int:
        if token not in self._ids:
            raise KeyError(f"not a vocabulary token: {token!r}")
        return self._ids[token]

    def piece(self, token_id: int) -> str:
        if not 0 <= token_id < len(self._tokens):
            raise ValueError(f"unknown token id: {token_id}")
        return self._tokens[token_id]

    def is_special(self, token_id: int) -> bool:
        return 0 <= token_id < self._n_special

    # -- encoding / decoding ----------------------------------------------

    def encode(self, text: str) -> tuple[int, ...]:
        """Tokenize content text by greedy longest match.

        Never emits a reserved id. Raises :class:`UnknownTokenError` when no
        content token matches at some position.
        """
        out: list[int] = []
        pos = 0
        n = len(text)
        while pos < n:
            node = self._match_trie
            best = None
            best_end = pos
            i = pos
            while i < n:
                nxt = node.get(text[i])
                if nxt is None:
                    break
                node = nxt
                i += 1
                if None in node:
                    best = node[None]
                    best_end = i
            if best is None:
                raise UnknownTokenError(text, pos)
            out.append(best)
            pos = best_end
        return tuple(out)

    def decode(self, token_ids: Iterable[int]) -> str:
        """Concatenate content pieces; reserved ids are not content.

        Raises ValueError if the sequence contains a reserved id; use
        :func:`kbdecode.linearize.to_text` for sequences with markers.
        """
        pieces = []
        for t in token_ids:
            if self.is_special(t):
                raise ValueError(f"reserved token id in content sequence: {t}")
            pieces.append(self.piece(t))
        return "".join(pieces)

    # -- construction helpers ----------------------------------------------

    @classmethod
    def from_characters(cls, chars: Iterable[str]) -> "Vocabulary":
        ordered = sorted(set(chars))
        for ch in ordered:
            if len(ch) != 1:
                raise ValueError(f"from_characters expects single characters, got {ch!r}")
        return cls(ordered)

    @classmethod
    def for_texts(cls, texts: Iterable[str], extra_chars: str = "") -> "Vocabulary":
        chars = set(extra_chars)
        for text in texts:
            chars.update(text)
        return cls.from_characters(chars)

    @classmethod
    def ascii_basic(cls, extra_chars: str = "") -> "Vocabulary":
        """Printable-ASCII character vocabulary (spaces and newline included)."""
        chars = set(string.printable) - set("\x0b\x0c\r\t")
        chars.update(extra_chars)
        return cls.from_characters(chars)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {"content_tokens": list(self.content_tokens)}

    @classmethod
    def from_dict(cls, payload: dict) -> "Vocabulary":
        return cls(payload["content_tokens"])
