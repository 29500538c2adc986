"""Building preference pairs from two competing extractors.

A realness scorer picks the most natural-looking texts; two candidate
providers (constrained decodes of two different scorers) each propose a
triplet set; a judge picks the better one or discards the sample. The judge
here is the deterministic table judge that ships for tests; a remote judge
speaks the same request/response contract over any transport.
"""

from kbdecode import (
    Catalog,
    ConstrainedExtractionProvider,
    RemoteJudge,
    TableJudge,
    TableRealnessScorer,
    TableScorer,
    Sample,
    TripletSet,
    Verdict,
    Vocabulary,
    build_preferences,
    render_text,
    select_realistic,
)

vocab = Vocabulary.ascii_basic()
catalog = Catalog({"Pepsi", "PepsiCo", "Carol Douglas"},
                  {"employer", "product or material produced"}, vocab)

texts = [
    "Carol Douglas has been with PepsiCo since 2001.",
    "entity entity relation output text",
    "PepsiCo manufactures Pepsi in several countries.",
]
samples = [Sample(f"s{i}", t, TripletSet()) for i, t in enumerate(texts)]

realness = TableRealnessScorer({texts[0]: 0.95, texts[1]: 0.02, texts[2]: 0.91})
selected = select_realistic(samples, realness, k=2)
print("selected as most natural:", [s.id for s in selected])

scripts_a = {
    "s0": "[s] Carol Douglas [r] employer [o] PepsiCo [e]",
    "s2": "[s] PepsiCo [r] employer [o] Pepsi [e]",
}
scripts_b = {
    "s0": "[s] Carol Douglas [r] employer [o] Pepsi [e]",
    "s2": "[s] PepsiCo [r] product or material produced [o] Pepsi [e]",
}
scorer_a = TableScorer.scripted_many(
    vocab, [(vocab.encode(s.text), [scripts_a[s.id]]) for s in selected]
)
scorer_b = TableScorer.scripted_many(
    vocab, [(vocab.encode(s.text), [scripts_b[s.id]]) for s in selected]
)
gen_a = ConstrainedExtractionProvider(scorer_a, catalog, beam_width=3, max_len=80)
gen_b = ConstrainedExtractionProvider(scorer_b, catalog, beam_width=3, max_len=80)

judge = TableJudge({"s0": Verdict.PREFER_A, "s2": Verdict.PREFER_B}, samples)
records = build_preferences(selected, gen_a, gen_b, judge)

print(f"\n{len(records)} preference records:")
for rec in records:
    print("  prompt:  ", rec.prompt)
    print("  chosen:  ", render_text(rec.chosen))
    print("  rejected:", render_text(rec.rejected))

# the same judging logic over a wire transport
transport_log = []


def local_transport(request: dict) -> dict:
    transport_log.append(request)
    return {"verdict": "PreferA"}


remote = RemoteJudge(local_transport)
verdict = remote.judge(selected[0].text, records[0].chosen, records[0].rejected)
print("\nremote judge over a local transport returned:", verdict.value)
print("wire request keys:", sorted(transport_log[0]))
