"""Catalogs and prefix indexes: which tokens may come next?

Builds a small knowledge-base catalog, walks its entity trie, and shows how
restricting the catalog (entities "missing from the KB") reshapes the
allowed-token sets without touching the original.
"""

from kbdecode import Catalog, InvalidPrefixError, Vocabulary

vocab = Vocabulary.ascii_basic()
catalog = Catalog(
    entities={"Pepsi", "PepsiCo", "Carol Douglas"},
    relations={"employer", "product or material produced"},
    vocab=vocab,
)

print("entities:", sorted(catalog.entities))
print("relations:", sorted(catalog.relations))

for prefix in ["", "Pepsi", "PepsiCo", "Carol "]:
    tokens, terminal = catalog.entity_index.allowed_next(vocab.encode(prefix))
    chars = sorted(vocab.piece(t) for t in tokens)
    print(f"after {prefix!r}: next characters {chars}, complete name: {terminal}")

try:
    catalog.entity_index.allowed_next(vocab.encode("Par"))
except InvalidPrefixError as err:
    print("'Par' is not a prefix of any entity ->", err)

print("\nrestricting the catalog: pretend 'Carol Douglas' vanished from the KB")
view = catalog.restrict({"Carol Douglas"})
tokens, _ = view.entity_index.allowed_next(())
print("first characters now:", sorted(vocab.piece(t) for t in tokens))
tokens, _ = catalog.entity_index.allowed_next(())
print("original catalog untouched:", sorted(vocab.piece(t) for t in tokens))
