"""Entity/relation catalogs and token-level prefix indexes.

A :class:`PrefixIndex` answers "which tokens may come next" for the
tokenizations of a name set; a :class:`Catalog` bundles the entity and
relation indexes with their shared vocabulary. Both are immutable after
construction and safe to share across concurrent decoders. Restricting a
catalog (simulating names missing from the knowledge base) returns a view
that shares the trie storage, so per-sample restriction stays cheap even
for large catalogs.
"""

from __future__ import annotations

import json
import string
from typing import Iterable, Iterator, TextIO

from .errors import CatalogFormatError, InvalidPrefixError, UnknownEntityError
from .vocab import SPECIAL_TOKENS, Vocabulary


class PrefixIndex:
    """Trie over token-id sequences with name counts per node.

    Nodes are integers; node 0 is the root. ``_path_counts[n]`` is the
    number of indexed names whose tokenization passes through (or ends at)
    node ``n``; ``_terminal_counts[n]`` the number ending exactly there.
    A restricted view shares the arrays and layers removal deltas on top,
    so a node or terminal flag disappears exactly when every name through
    it was removed.
    """

    ROOT = 0

    def __init__(self):
        self._children: list[dict[int, int]] = [{}]
        self._path_counts: list[int] = [0]
        self._terminal_counts: list[int] = [0]
        self._removed_paths: dict[int, int] = {}
        self._removed_terminals: dict[int, int] = {}

    # -- construction ------------------------------------------------------

    def _insert(self, token_ids: Iterable[int]) -> None:
        node = self.ROOT
        self._path_counts[node] += 1
        for t in token_ids:
            nxt = self._children[node].get(t)
            if nxt is None:
                nxt = len(self._children)
                self._children[node][t] = nxt
                self._children.append({})
                self._path_counts.append(0)
                self._terminal_counts.append(0)
            node = nxt
            self._path_counts[node] += 1
        self._terminal_counts[node] += 1

    def without(self, sequences: Iterable[tuple[int, ...]]) -> "PrefixIndex":
        """View of this index with the given tokenizations removed.

        Every sequence must currently be terminal in the index. Views stack:
        removing S then T behaves exactly like removing S ∪ T.
        """
        view = PrefixIndex.__new__(PrefixIndex)
        view._children = self._children
        view._path_counts = self._path_counts
        view._terminal_counts = self._terminal_counts
        view._removed_paths = dict(self._removed_paths)
        view._removed_terminals = dict(self._removed_terminals)
        for seq in sequences:
            node = view.ROOT
            path = [node]
            for t in seq:
                node = view.step(node, t)
                if node is None:
                    raise KeyError(f"sequence not in index: {seq}")
                path.append(node)
            if not view.is_terminal(node):
                raise KeyError(f"sequence not terminal in index: {seq}")
            for n in path:
                view._removed_paths[n] = view._removed_paths.get(n, 0) + 1
            view._removed_terminals[node] = view._removed_terminals.get(node, 0) + 1
        return view

    # -- node-level queries (used by the decoder) ----------------------------

    def _live(self, node: int) -> bool:
        return self._path_counts[node] - self._removed_paths.get(node, 0) > 0

    def step(self, node: int, token_id: int) -> int | None:
        child = self._children[node].get(token_id)
        if child is None or not self._live(child):
            return None
        return child

    def children_of(self, node: int) -> set[int]:
        return {t for t, c in self._children[node].items() if self._live(c)}

    def is_terminal(self, node: int) -> bool:
        return self._terminal_counts[node] - self._removed_terminals.get(node, 0) > 0

    def is_empty(self) -> bool:
        return self._path_counts[self.ROOT] - self._removed_paths.get(self.ROOT, 0) <= 0

    # -- prefix-level queries -------------------------------------------------

    def walk(self, prefix: Iterable[int]) -> int:
        node = self.ROOT
        for i, t in enumerate(prefix):
            nxt = self.step(node, t)
            if nxt is None:
                raise InvalidPrefixError(tuple(prefix), i)
            node = nxt
        return node

    def allowed_next(self, prefix: Iterable[int]) -> tuple[set[int], bool]:
        """Tokens that extend ``prefix`` within the index, and whether a
        full name ends exactly at ``prefix``.

        Raises :class:`InvalidPrefixError` if ``prefix`` leaves the trie.
        """
        node = self.walk(prefix)
        return self.children_of(node), self.is_terminal(node)

    def iter_sequences(self) -> Iterator[tuple[int, ...]]:
        """All indexed tokenizations, in token-id lexicographic order."""
        stack: list[tuple[int, tuple[int, ...]]] = [(self.ROOT, ())]
        while stack:
            node, prefix = stack.pop()
            if self.is_terminal(node):
                yield prefix
            for t in sorted(self._children[node], reverse=True):
                child = self.step(node, t)
                if child is not None:
                    stack.append((child, prefix + (t,)))


def build_prefix_index(names: Iterable[str], vocab: Vocabulary) -> PrefixIndex:
    """Index the tokenizations of ``names``; deterministic given inputs.

    Raises :class:`~kbdecode.errors.UnknownTokenError` if a name is not
    coverable by ``vocab``.
    """
    index = PrefixIndex()
    for name in sorted(set(names)):
        index._insert(vocab.encode(name))
    return index


def allowed_next(index: PrefixIndex, prefix: Iterable[int]) -> tuple[set[int], bool]:
    return index.allowed_next(prefix)


def _check_name(name: str, kind: str) -> None:
    if not name:
        raise CatalogFormatError(f"empty {kind} name")
    if name != name.strip():
        raise CatalogFormatError(f"{kind} name has surrounding whitespace: {name!r}")
    for marker in SPECIAL_TOKENS:
        if marker in name:
            raise CatalogFormatError(f"{kind} name contains reserved marker {marker!r}: {name!r}")


class Catalog:
    """Immutable entity/relation name sets with prefix indexes.

    Names are matched byte-exactly: no case folding, no alias expansion.
    Names embedding a reserved marker string are rejected so every
    linearization stays unambiguous.
    """

    def __init__(self, entities: Iterable[str], relations: Iterable[str], vocab: Vocabulary):
        entity_set = frozenset(entities)
        relation_set = frozenset(relations)
        for name in entity_set:
            _check_name(name, "entity")
        for name in relation_set:
            _check_name(name, "relation")
        self.vocab = vocab
        self.entities = entity_set
        self.relations = relation_set
        self.entity_index = build_prefix_index(entity_set, vocab)
        self.relation_index = build_prefix_index(relation_set, vocab)

    def restrict(self, removed_entities: Iterable[str]) -> "Catalog":
        """Catalog view without ``removed_entities``; relations unchanged.

        Raises :class:`UnknownEntityError` if a name is not (or no longer)
        in this catalog's entity set. The original catalog is untouched.
        """
        removed = frozenset(removed_entities)
        for name in removed:
            if name not in self.entities:
                raise UnknownEntityError(name)
        view = Catalog.__new__(Catalog)
        view.vocab = self.vocab
        view.entities = self.entities - removed
        view.relations = self.relations
        view.entity_index = self.entity_index.without(
            self.vocab.encode(name) for name in sorted(removed)
        )
        view.relation_index = self.relation_index
        return view

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": "kbdecode/catalog@1",
            "vocab": self.vocab.to_dict(),
            "entities": sorted(self.entities),
            "relations": sorted(self.relations),
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, indent=1)
            fh.write("\n")

    @classmethod
    def from_dict(cls, payload: dict) -> "Catalog":
        if payload.get("format") != "kbdecode/catalog@1":
            raise CatalogFormatError(f"not a catalog manifest: format={payload.get('format')!r}")
        vocab = Vocabulary.from_dict(payload["vocab"])
        return cls(payload["entities"], payload["relations"], vocab)

    @classmethod
    def load(cls, path) -> "Catalog":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def iter_names(fh: TextIO) -> Iterator[str]:
    """Stream catalog names from a one-name-per-line file.

    Large files are never buffered whole. Blank lines and duplicates are
    format errors.
    """
    seen = set()
    for lineno, line in enumerate(fh, start=1):
        name = line.rstrip("\n")
        if not name.strip():
            raise CatalogFormatError(f"blank line at {lineno}")
        if name in seen:
            raise CatalogFormatError(f"duplicate name at line {lineno}: {name!r}")
        seen.add(name)
        yield name


def load_catalog(entities_path, relations_path, vocab: Vocabulary | None = None) -> Catalog:
    """Build a catalog from one-name-per-line files.

    With no vocabulary given, a character-level one is derived from the
    names plus printable ASCII so ordinary sample text stays encodable.
    """
    with open(entities_path, encoding="utf-8") as fh:
        entities = list(iter_names(fh))
    with open(relations_path, encoding="utf-8") as fh:
        relations = list(iter_names(fh))
    if vocab is None:
        chars = set(string.printable) - set("\x0b\x0c\r\t")
        for name in entities:
            chars.update(name)
        for name in relations:
            chars.update(name)
        vocab = Vocabulary.from_characters(chars)
    return Catalog(entities, relations, vocab)
