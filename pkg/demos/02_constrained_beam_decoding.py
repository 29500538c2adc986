"""Constrained vs unconstrained beam search over the same scorer.

The scorer is a table scripted to prefer an output whose entity is not in
the catalog and whose relation name is misspelled. Unconstrained decoding
returns that raw output; constrained decoding masks each step to the tokens
that keep the sequence a valid linearization, so the same scorer is steered
onto catalog names.
"""

from kbdecode import (
    Catalog,
    StrictParseError,
    TableScorer,
    Vocabulary,
    beam_decode,
    parse_lenient,
    parse_strict,
    to_text,
)

vocab = Vocabulary.ascii_basic()
catalog = Catalog(
    entities={"Pepsi", "PepsiCo", "Carol Douglas"},
    relations={"employer", "product or material produced"},
    vocab=vocab,
)

text = "Carol Dollard works at PepsiCo, maker of Pepsi."
prompt = vocab.encode(text)
scorer = TableScorer.scripted(
    vocab,
    prompt,
    [
        "[s] Carol Dollard [r] employer [o] PepsiCo [e] [s] PepsiCo [r] produces [o] Pepsi [e]",
        "[s] Carol Douglas [r] employer [o] PepsiCo [e] [s] PepsiCo [r] product or material produced [o] Pepsi [e]",
    ],
)

print("input text:", text)

unconstrained = beam_decode(scorer, prompt, catalog=None, beam_width=3, max_len=120)
raw = unconstrained[0].content(vocab.eos)
print("\nunconstrained top-1:", to_text(raw, vocab))
report = parse_lenient(raw, vocab)
print("lenient parse:", [t.as_tuple() for t in report.triplets])
try:
    parse_strict(raw, catalog)
except StrictParseError as err:
    print("strict parse rejects it:", err)

constrained = beam_decode(scorer, prompt, catalog=catalog, beam_width=3, max_len=120)
for i, hyp in enumerate(constrained):
    print(f"\nconstrained #{i} (score {hyp.score:.3f}):", to_text(hyp.content(vocab.eos), vocab))
best = parse_strict(constrained[0].content(vocab.eos), catalog)
print("strict parse succeeds:", [t.as_tuple() for t in best])
