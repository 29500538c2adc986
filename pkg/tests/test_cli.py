import json

import pytest

from kbdecode import (
    Catalog,
    Sample,
    TableScorer,
    Triplet,
    TripletSet,
    save_samples,
    save_scorer,
)
from kbdecode.cli import main
from kbdecode.linearize import render_text


@pytest.fixture()
def workspace(tmp_path, pepsi_scenario):
    """Catalog files, a three-sample dataset, and scripted scorer files."""
    ents = tmp_path / "entities.txt"
    rels = tmp_path / "relations.txt"
    ents.write_text("Pepsi\nPepsiCo\nCarol Douglas\n", encoding="utf-8")
    rels.write_text("employer\nproduct or material produced\n", encoding="utf-8")

    cat_path = tmp_path / "catalog.json"
    assert main(["catalog", "build", "--entities", str(ents), "--relations", str(rels), "--out", str(cat_path)]) == 0
    catalog = Catalog.load(cat_path)

    gold = TripletSet([Triplet("PepsiCo", "product or material produced", "Pepsi")])
    texts = [pepsi_scenario.text, pepsi_scenario.text + " (second copy)", pepsi_scenario.text + " (third copy)"]
    samples = [Sample(f"doc{i}", text, gold) for i, text in enumerate(texts)]
    data_path = tmp_path / "data.jsonl"
    save_samples(samples, data_path)

    prompts = [catalog.vocab.encode(text) for text in texts]
    base = TableScorer.scripted_many(
        catalog.vocab,
        [(p, [pepsi_scenario.unconstrained_text, pepsi_scenario.constrained_text]) for p in prompts],
    )
    base_path = tmp_path / "base.json"
    save_scorer(base, base_path)

    corrected = TableScorer.scripted_many(
        catalog.vocab, [(p, [pepsi_scenario.corrected_text]) for p in prompts]
    )
    corrected_path = tmp_path / "corrected.json"
    save_scorer(corrected, corrected_path)

    # the boosted scorer sees the assembled three-segment input as its prompt
    from kbdecode import assemble_boosted_input, dual_decode

    assembled_prompts = []
    for text in texts:
        weak, _, _ = dual_decode(base, text, catalog, beam_width=3, max_len=160)
        assembled_prompts.append(
            assemble_boosted_input(text, weak.unconstrained, weak.constrained, catalog.vocab)
        )
    boosted = TableScorer.scripted_many(
        catalog.vocab, [(p, [pepsi_scenario.corrected_text]) for p in assembled_prompts]
    )
    boosted_path = tmp_path / "boosted.json"
    save_scorer(boosted, boosted_path)

    return {
        "tmp": tmp_path,
        "catalog": cat_path,
        "data": data_path,
        "base": base_path,
        "corrected": corrected_path,
        "boosted": boosted_path,
        "gold": gold,
        "samples": samples,
    }


def test_catalog_build_writes_manifest(workspace):
    manifest = json.loads(workspace["catalog"].read_text(encoding="utf-8"))
    assert manifest["format"] == "kbdecode/catalog@1"
    assert sorted(manifest["entities"]) == ["Carol Douglas", "Pepsi", "PepsiCo"]
    sidecar = workspace["catalog"].with_name("catalog.json.manifest.json")
    assert json.loads(sidecar.read_text(encoding="utf-8"))["config"]["command"] == "catalog"


def test_decode_prints_linearization(workspace, pepsi_scenario, capsys):
    trace_path = workspace["tmp"] / "trace.json"
    code = main(
        [
            "decode",
            "--scorer", str(workspace["base"]),
            "--catalog", str(workspace["catalog"]),
            "--prompt", pepsi_scenario.text,
            "--constrained",
            "--beams", "3",
            "--max-len", "120",
            "--out", str(trace_path),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out.strip()
    assert out == pepsi_scenario.constrained_text
    trace = json.loads(trace_path.read_text(encoding="utf-8"))
    assert trace["config"]["beams"] == 3
    assert trace["hypotheses"][0]["text"] == pepsi_scenario.constrained_text
    assert trace["hypotheses"][0]["finished"]


def test_decode_flag_validation(workspace, pepsi_scenario):
    assert main(["decode", "--scorer", str(workspace["base"]), "--constrained", "--prompt", "x"]) == 1
    assert (
        main(
            [
                "decode",
                "--scorer", str(workspace["base"]),
                "--prompt", "x",
                "--prompt-file", str(workspace["data"]),
            ]
        )
        == 1
    )


def test_curate_requires_seed_and_is_byte_deterministic(workspace, capsys):
    out1 = workspace["tmp"] / "curated1.jsonl"
    code = main(["curate", "--in", str(workspace["data"]), "--out", str(out1)])
    assert code == 1
    assert "--seed" in capsys.readouterr().err

    assert main(["curate", "--in", str(workspace["data"]), "--out", str(out1), "--seed", "5"]) == 0
    out2 = workspace["tmp"] / "curated2.jsonl"
    assert main(["curate", "--in", str(workspace["data"]), "--out", str(out2), "--seed", "5"]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_phase1_assemble_build_train_flow(workspace, pepsi_scenario):
    tmp = workspace["tmp"]
    weak = tmp / "weak.jsonl"
    code = main(
        [
            "phase1",
            "--in", str(workspace["data"]),
            "--scorer", str(workspace["base"]),
            "--catalog", str(workspace["catalog"]),
            "--out", str(weak),
            "--beams", "3",
            "--max-len", "120",
        ]
    )
    assert code == 0
    rows = [json.loads(line) for line in weak.read_text(encoding="utf-8").splitlines()]
    assert rows[0]["unconstrained"] == pepsi_scenario.unconstrained_text
    assert rows[0]["constrained"] == pepsi_scenario.constrained_text

    assembled = tmp / "assembled.jsonl"
    code = main(
        [
            "assemble",
            "--in", str(workspace["data"]),
            "--weak", str(weak),
            "--catalog", str(workspace["catalog"]),
            "--out", str(assembled),
        ]
    )
    assert code == 0
    row = json.loads(assembled.read_text(encoding="utf-8").splitlines()[0])
    assert row["input_text"].startswith("[text] ")
    assert "[unc]" in row["input_text"] and "[con]" in row["input_text"]

    curated = tmp / "curated.jsonl"
    assert main(["curate", "--in", str(workspace["data"]), "--out", str(curated), "--seed", "3"]) == 0
    records = tmp / "train.jsonl"
    code = main(
        [
            "build-train",
            "--in", str(curated),
            "--scorer", str(workspace["base"]),
            "--catalog", str(workspace["catalog"]),
            "--out", str(records),
            "--beams", "3",
            "--max-len", "120",
        ]
    )
    assert code == 0
    lines = [json.loads(line) for line in records.read_text(encoding="utf-8").splitlines()]
    assert len(lines) == 3
    assert all(set(row) == {"id", "input_text", "target_text"} for row in lines)


def test_infer_and_eval_flow(workspace, pepsi_scenario):
    tmp = workspace["tmp"]
    preds = tmp / "preds.jsonl"
    code = main(
        [
            "infer",
            "--in", str(workspace["data"]),
            "--base-scorer", str(workspace["base"]),
            "--boosted-scorer", str(workspace["boosted"]),
            "--catalog", str(workspace["catalog"]),
            "--final-mode", "constrained",
            "--out", str(preds),
            "--beams", "3",
            "--max-len", "200",
        ]
    )
    assert code == 0
    rows = [json.loads(line) for line in preds.read_text(encoding="utf-8").splitlines()]
    assert len(rows) == 3
    expected = [list(t.as_tuple()) for t in workspace["gold"]]
    assert all(row["triplets"] == expected for row in rows)

    report1 = tmp / "report1.json"
    report2 = tmp / "report2.json"
    csv_path = tmp / "report.csv"
    argv = [
        "eval",
        "--pred", str(preds),
        "--gold", str(workspace["data"]),
        "--boot", "50",
        "--seed", "7",
        "--csv", str(csv_path),
    ]
    assert main(argv + ["--out", str(report1)]) == 0
    assert main(argv + ["--out", str(report2)]) == 0
    r1 = report1.read_bytes()
    r2 = report2.read_bytes()
    assert r1.replace(b"report1", b"X") == r2.replace(b"report2", b"X")

    report = json.loads(report1.read_text(encoding="utf-8"))
    assert report["config"]["seed"] == 7
    assert "ci" in report["micro"]
    header = csv_path.read_text(encoding="utf-8").splitlines()[0]
    assert header == "section,metric,value,ci_low,ci_high"


def test_eval_missing_seed_exits_one(workspace, capsys):
    code = main(
        [
            "eval",
            "--pred", str(workspace["data"]),
            "--gold", str(workspace["data"]),
            "--out", str(workspace["tmp"] / "r.json"),
        ]
    )
    assert code == 1
    assert "--seed" in capsys.readouterr().err


def test_buckets_and_report_commands(workspace, pepsi_scenario):
    tmp = workspace["tmp"]
    preds = tmp / "p.jsonl"
    gold_rows = []
    for s in workspace["samples"]:
        gold_rows.append({"id": s.id, "triplets": [list(t.as_tuple()) for t in s.gold]})
    preds.write_text(
        "\n".join(json.dumps(r, ensure_ascii=False) for r in gold_rows) + "\n", encoding="utf-8"
    )
    counts = tmp / "counts.tsv"
    counts.write_text("product or material produced\t5\nemployer\t1\n", encoding="utf-8")

    out = tmp / "buckets.json"
    code = main(
        [
            "buckets",
            "--pred", str(preds),
            "--gold", str(workspace["data"]),
            "--counts", str(counts),
            "--out", str(out),
            "--boot", "20",
            "--seed", "3",
        ]
    )
    assert code == 0
    table = json.loads(out.read_text(encoding="utf-8"))
    exponents = [row["exponent"] for row in table["buckets"]]
    assert exponents == [0, 2]

    csv_out = tmp / "buckets.csv"
    svg_out = tmp / "buckets.svg"
    code = main(
        [
            "report",
            "--pred", str(preds),
            "--gold", str(workspace["data"]),
            "--counts", str(counts),
            "--csv", str(csv_out),
            "--svg", str(svg_out),
            "--boot", "10",
            "--seed", "3",
        ]
    )
    assert code == 0
    assert csv_out.read_text(encoding="utf-8").startswith("exponent,")
    assert svg_out.read_text(encoding="utf-8").lstrip().startswith("<?xml")


def test_dpo_prep_command(workspace, pepsi_scenario):
    tmp = workspace["tmp"]
    scores = tmp / "scores.json"
    scores.write_text(json.dumps({"doc0": 0.9, "doc1": 0.8, "doc2": 0.1}), encoding="utf-8")
    rules = tmp / "rules.json"
    rules.write_text(json.dumps({"doc0": "PreferB", "doc1": "NeitherGood"}), encoding="utf-8")
    out = tmp / "prefs.jsonl"
    code = main(
        [
            "dpo-prep",
            "--in", str(workspace["data"]),
            "--scores", str(scores),
            "--judge-rules", str(rules),
            "--scorer-a", str(workspace["base"]),
            "--scorer-b", str(workspace["corrected"]),
            "--catalog", str(workspace["catalog"]),
            "--select-k", "2",
            "--out", str(out),
            "--beams", "3",
            "--max-len", "160",
        ]
    )
    assert code == 0
    rows = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]
    assert len(rows) == 1  # doc0 kept, doc1 judged NeitherGood, doc2 not selected
    assert rows[0]["chosen"] == render_text(workspace["gold"])


def test_unknown_subcommand_and_runtime_failure(workspace, capsys):
    assert main(["frobnicate"]) == 1
    capsys.readouterr()
    bad = workspace["tmp"] / "corrupt.jsonl"
    bad.write_text("not json\n", encoding="utf-8")
    code = main(
        [
            "eval",
            "--pred", str(bad),
            "--gold", str(workspace["data"]),
            "--out", str(workspace["tmp"] / "x.json"),
            "--boot", "5",
            "--seed", "1",
        ]
    )
    assert code == 2


def test_out_dir_environment_override(workspace, monkeypatch, pepsi_scenario):
    outdir = workspace["tmp"] / "rendered"
    monkeypatch.setenv("KBDECODE_OUT_DIR", str(outdir))
    code = main(["curate", "--in", str(workspace["data"]), "--out", "curated.jsonl", "--seed", "2"])
    assert code == 0
    assert (outdir / "curated.jsonl").is_file()
