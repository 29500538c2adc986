"""Two-phase boosted inference on a complementary failure pair.

Phase 1 decodes the base scorer twice. The unconstrained pass invents an
out-of-KB person ("Carol Dollard") and misspells a relation ("produces");
the constrained pass substitutes a similarly named catalog entity ("Carol
Douglas") but fixes the relation. Each pass is wrong in a different way.

Phase 2 packs text + both weak predictions into one three-segment input and
lets a combiner scorer produce the final answer. Here the combiner keeps
the constrained triplets whose (subject, object) pair the unconstrained
pass also saw: the phantom-person triplet dies, the corrected product
triplet survives.
"""

import numpy as np

from kbdecode import (
    Catalog,
    Scorer,
    TableScorer,
    TripletSet,
    Vocabulary,
    assemble_boosted_input,
    boost_infer,
    dual_decode,
    parse_lenient,
    render,
    split_boosted_input,
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
base = TableScorer.scripted(
    vocab,
    prompt,
    [
        "[s] Carol Dollard [r] employer [o] PepsiCo [e] [s] PepsiCo [r] produces [o] Pepsi [e]",
        "[s] Carol Douglas [r] employer [o] PepsiCo [e] [s] PepsiCo [r] product or material produced [o] Pepsi [e]",
    ],
)

weak, y_u, y_c = dual_decode(base, text, catalog, beam_width=3, max_len=120)
print("phase 1, unconstrained:", to_text(y_u, vocab))
print("phase 1, constrained:  ", to_text(y_c, vocab))

assembled = assemble_boosted_input(text, weak.unconstrained, weak.constrained, vocab)
print("\nassembled boosted input:\n ", to_text(assembled, vocab))
x_tok, u_tok, c_tok = split_boosted_input(assembled, vocab)
assert x_tok == prompt and c_tok == render(weak.constrained, vocab)


class PairAgreementScorer(Scorer):
    """Keep constrained triplets whose entity pair the unconstrained pass
    also produced; spell out their linearization, then stop."""

    def __init__(self, vocab: Vocabulary, prompt_len: int):
        self.vocab = vocab
        self.prompt_len = prompt_len

    def next_logprobs(self, context):
        v = self.vocab
        prompt_part = tuple(context)[: self.prompt_len]
        generated = tuple(context)[self.prompt_len :]
        _, u_tok, c_tok = split_boosted_input(prompt_part, v)
        y_u = parse_lenient(u_tok, v).triplets
        y_c = parse_lenient(c_tok, v).triplets
        pairs = {(t.subject, t.object) for t in y_u}
        agreed = TripletSet(t for t in y_c if (t.subject, t.object) in pairs)
        target = render(agreed, v) + (v.eos,)
        nxt = target[len(generated)] if len(generated) < len(target) else v.eos
        probs = np.full(len(v), 0.05 / len(v))
        probs[nxt] += 0.95
        return np.log(probs / probs.sum())


boosted = PairAgreementScorer(vocab, len(assembled))
result = boost_infer(base, boosted, text, catalog, final_mode="constrained", beam_width=3, max_len=120)
print("\nphase 2, final constrained output:")
for t in result.triplets:
    print("  ", t.as_tuple())
