"""Command-line entry point: one subcommand per pipeline stage.

Every stage is pipeable (JSONL in, JSONL or JSON out) and reproducible:
randomized stages demand an explicit --seed, and each run records its fully
resolved configuration — embedded under a "config" key in JSON reports, or
in a ``<out>.manifest.json`` sidecar next to JSONL outputs. Exit codes:
0 success, 1 argument/validation error, 2 runtime failure.

The only environment override is KBDECODE_OUT_DIR, which re-roots relative
output paths; seeds can never come from the environment.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import __version__
from .catalog import Catalog, load_catalog
from .curation import (
    curate,
    load_curated_samples,
    load_samples,
    save_curated_samples,
)
from .decoding import beam_decode
from .dpo_prep import (
    ConstrainedExtractionProvider,
    TableJudge,
    TableRealnessScorer,
    build_preferences,
    save_preference_records,
    select_realistic,
)
from .errors import KBDecodeError
from .evaluation import (
    EvalBatch,
    bucket_report,
    build_eval_batch,
    load_predictions,
    load_relation_counts,
    save_predictions,
    scores_with_ci,
)
from .linearize import from_text, to_text
from .pipeline import (
    assemble_boosted_input,
    boost_infer,
    build_boosted_training_set,
    dual_decode,
    save_boosted_records,
)
from .scorers import NgramScorer, load_scorer, save_scorer


class ValidationError(KBDecodeError):
    """Bad flag combination or unusable input; exits with code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _out_path(path: str) -> Path:
    root = os.environ.get("KBDECODE_OUT_DIR")
    p = Path(path)
    if root and not p.is_absolute():
        return Path(root) / p
    return p


def _require_file(path: str, flag: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"{flag}: no such file: {path}")
    return p


def _config_dict(args: argparse.Namespace) -> dict:
    skip = {"func"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return {"tool": "kbdecode", "version": __version__, **cfg}


def _write_json(path: Path, obj: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=1)
        fh.write("\n")


def _write_manifest(out: Path, args: argparse.Namespace) -> None:
    _write_json(out.with_name(out.name + ".manifest.json"), {"config": _config_dict(args)})


def _score_block(report) -> dict:
    block = {
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "n_docs": report.n_docs,
        "n_relations": report.n_relations,
    }
    if report.ci:
        block["ci"] = {k: list(v) for k, v in report.ci.items()}
    return block


# -- subcommands ----------------------------------------------------------------


def _cmd_catalog(args) -> int:
    _require_file(args.entities, "--entities")
    _require_file(args.relations, "--relations")
    catalog = load_catalog(args.entities, args.relations)
    out = _out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    catalog.save(out)
    _write_manifest(out, args)
    print(f"catalog: {len(catalog.entities)} entities, {len(catalog.relations)} relations -> {out}")
    return 0


def _cmd_scorer(args) -> int:
    _require_file(args.text, "--text")
    text = Path(args.text).read_text(encoding="utf-8")
    vocab = None
    if args.catalog:
        vocab = Catalog.load(_require_file(args.catalog, "--catalog")).vocab
    scorer = NgramScorer.fit(text, args.order, vocab)
    out = _out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_scorer(scorer, out)
    print(f"ngram scorer (order {args.order}) -> {out}")
    return 0


def _cmd_decode(args) -> int:
    scorer = load_scorer(_require_file(args.scorer, "--scorer"))
    catalog = None
    if args.constrained:
        if not args.catalog:
            raise ValidationError("--constrained requires --catalog")
    if args.catalog:
        catalog = Catalog.load(_require_file(args.catalog, "--catalog"))
    if (args.prompt is None) == (args.prompt_file is None):
        raise ValidationError("exactly one of --prompt / --prompt-file is required")
    text = args.prompt if args.prompt is not None else Path(args.prompt_file).read_text(encoding="utf-8").rstrip("\n")
    vocab = scorer.vocab
    prompt = vocab.encode(text)
    hyps = beam_decode(scorer, prompt, catalog if args.constrained else None, args.beams, args.max_len)
    best = to_text(hyps[0].content(vocab.eos), vocab) if hyps else ""
    print(best)
    if args.out:
        out = _out_path(args.out)
        trace = {
            "config": _config_dict(args),
            "hypotheses": [
                {
                    "text": to_text(h.content(vocab.eos), vocab),
                    "tokens": list(h.tokens),
                    "score": h.score,
                    "finished": h.finished,
                }
                for h in hyps
            ],
        }
        _write_json(out, trace)
    return 0


def _cmd_curate(args) -> int:
    samples = load_samples(_require_file(args.infile, "--in"))
    curated = curate(samples, args.fraction, args.max_removed, args.seed)
    out = _out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_curated_samples(curated, out)
    _write_manifest(out, args)
    altered = sum(1 for c in curated if c.removed_entities)
    print(f"curated {len(curated)} samples ({altered} altered) -> {out}")
    return 0


def _map_jobs(fn, items, jobs: int):
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _cmd_phase1(args) -> int:
    catalog = Catalog.load(_require_file(args.catalog, "--catalog"))
    scorer = load_scorer(_require_file(args.scorer, "--scorer"))
    samples = load_samples(_require_file(args.infile, "--in"))

    def decode_one(sample):
        _, y_u, y_c = dual_decode(scorer, sample.text, catalog, args.beams, args.max_len)
        return {
            "id": sample.id,
            "unconstrained": to_text(y_u, catalog.vocab),
            "constrained": to_text(y_c, catalog.vocab),
        }

    rows = _map_jobs(decode_one, samples, args.jobs)
    out = _out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        for obj in rows:
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
    _write_manifest(out, args)
    print(f"phase-1 decodes for {len(samples)} samples -> {out}")
    return 0


def _cmd_assemble(args) -> int:
    catalog = Catalog.load(_require_file(args.catalog, "--catalog"))
    vocab = catalog.vocab
    samples = load_samples(_require_file(args.infile, "--in"))
    weak: dict[str, tuple[str, str]] = {}
    with open(_require_file(args.weak, "--weak"), encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                weak[str(obj["id"])] = (obj["unconstrained"], obj["constrained"])
    out = _out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    from .linearize import parse_lenient, parse_strict

    with open(out, "w", encoding="utf-8") as fh:
        for sample in samples:
            if sample.id not in weak:
                raise ValidationError(f"--weak: no phase-1 record for sample {sample.id!r}")
            y_u_text, y_c_text = weak[sample.id]
            y_u = parse_lenient(from_text(y_u_text, vocab), vocab)
            y_c = parse_strict(from_text(y_c_text, vocab), catalog)
            assembled = assemble_boosted_input(sample.text, y_u, y_c, vocab)
            obj = {"id": sample.id, "input_text": to_text(assembled, vocab)}
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
    _write_manifest(out, args)
    print(f"assembled {len(samples)} boosted inputs -> {out}")
    return 0


def _cmd_build_train(args) -> int:
    catalog = Catalog.load(_require_file(args.catalog, "--catalog"))
    scorer = load_scorer(_require_file(args.scorer, "--scorer"))
    curated = load_curated_samples(_require_file(args.infile, "--in"))
    records = build_boosted_training_set(
        curated, scorer, catalog, args.beams, args.max_len, jobs=args.jobs
    )
    out = _out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_boosted_records(records, catalog.vocab, out)
    _write_manifest(out, args)
    print(f"{len(records)} boosted training records -> {out}")
    return 0


def _cmd_infer(args) -> int:
    catalog = Catalog.load(_require_file(args.catalog, "--catalog"))
    base = load_scorer(_require_file(args.base_scorer, "--base-scorer"))
    boosted = load_scorer(_require_file(args.boosted_scorer, "--boosted-scorer"))
    samples = load_samples(_require_file(args.infile, "--in"))

    def infer_one(sample):
        result = boost_infer(
            base, boosted, sample.text, catalog, args.final_mode, args.beams, args.max_len
        )
        return (sample.id, result.triplets)

    predictions = _map_jobs(infer_one, samples, args.jobs)
    out = _out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_predictions(predictions, out)
    _write_manifest(out, args)
    print(f"boosted predictions for {len(samples)} samples -> {out}")
    return 0


def _load_batch(args) -> EvalBatch:
    golds = load_samples(_require_file(args.gold, "--gold"))
    preds = load_predictions(_require_file(args.pred, "--pred"))
    return build_eval_batch(preds, [(s.id, s.gold) for s in golds])


def _cmd_eval(args) -> int:
    batch = _load_batch(args)
    universe = None
    if args.macro_universe == "catalog":
        if not args.catalog:
            raise ValidationError("--macro-universe catalog requires --catalog")
        universe = sorted(Catalog.load(_require_file(args.catalog, "--catalog")).relations)
    micro = scores_with_ci(batch, "micro", n_boot=args.boot, level=args.level, seed=args.seed)
    macro = scores_with_ci(
        batch,
        "macro",
        universe=universe,
        f1_mode=args.macro_f1,
        n_boot=args.boot,
        level=args.level,
        seed=args.seed,
    )
    report = {
        "config": _config_dict(args),
        "micro": _score_block(micro),
        "macro": _score_block(macro),
    }
    if args.counts:
        counts = load_relation_counts(_require_file(args.counts, "--counts"))
        table = bucket_report(batch, counts, n_boot=args.boot, level=args.level, seed=args.seed)
        report["buckets"] = _bucket_rows(table)
    out = _out_path(args.out)
    _write_json(out, report)
    if args.csv:
        _write_eval_csv(_out_path(args.csv), report)
    print(
        f"micro P/R/F1 = {micro.precision:.4f}/{micro.recall:.4f}/{micro.f1:.4f}  "
        f"macro P/R/F1 = {macro.precision:.4f}/{macro.recall:.4f}/{macro.f1:.4f} -> {out}"
    )
    return 0


def _bucket_rows(table) -> list[dict]:
    rows = []
    for b in table.buckets:
        rows.append(
            {
                "exponent": b.exponent,
                "count_range": [2**b.exponent, 2 ** (b.exponent + 1)],
                "relations": list(b.relations),
                "micro": _score_block(b.micro),
                "n_gold": b.n_gold,
                "n_pred": b.n_pred,
            }
        )
    if table.zero_count_relations:
        rows.append({"exponent": None, "relations": list(table.zero_count_relations), "micro": None})
    return rows


def _write_eval_csv(path: Path, report: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["section", "metric", "value", "ci_low", "ci_high"])
        for section in ("micro", "macro"):
            block = report[section]
            for metric in ("precision", "recall", "f1"):
                ci = block.get("ci", {}).get(metric, ["", ""])
                writer.writerow([section, metric, block[metric], ci[0], ci[1]])
        for row in report.get("buckets", []):
            if row["micro"] is None:
                continue
            ci = row["micro"].get("ci", {}).get("f1", ["", ""])
            writer.writerow([f"bucket:2^{row['exponent']}", "f1", row["micro"]["f1"], ci[0], ci[1]])


def _cmd_buckets(args) -> int:
    batch = _load_batch(args)
    counts = load_relation_counts(_require_file(args.counts, "--counts"))
    table = bucket_report(batch, counts, n_boot=args.boot, level=args.level, seed=args.seed)
    report = {"config": _config_dict(args), "buckets": _bucket_rows(table)}
    out = _out_path(args.out)
    _write_json(out, report)
    print(f"{len(table.buckets)} buckets -> {out}")
    return 0


def _cmd_dpo_prep(args) -> int:
    catalog = Catalog.load(_require_file(args.catalog, "--catalog"))
    samples = load_samples(_require_file(args.infile, "--in"))
    with open(_require_file(args.scores, "--scores"), encoding="utf-8") as fh:
        id_scores = {str(k): float(v) for k, v in json.load(fh).items()}
    with open(_require_file(args.judge_rules, "--judge-rules"), encoding="utf-8") as fh:
        rules = {str(k): str(v) for k, v in json.load(fh).items()}
    realness = TableRealnessScorer.from_id_scores(id_scores, samples, default=0.0)
    k = args.select_k if args.select_k is not None else len(samples)
    if k > len(samples):
        raise ValidationError(f"--select-k {k} exceeds sample count {len(samples)}")
    selected = select_realistic(samples, realness, k)
    gen_a = ConstrainedExtractionProvider(
        load_scorer(_require_file(args.scorer_a, "--scorer-a")), catalog, args.beams, args.max_len
    )
    gen_b = ConstrainedExtractionProvider(
        load_scorer(_require_file(args.scorer_b, "--scorer-b")), catalog, args.beams, args.max_len
    )
    judge = TableJudge(rules, samples)
    records = build_preferences(selected, gen_a, gen_b, judge, swap_trial=args.swap_trial, jobs=args.jobs)
    out = _out_path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_preference_records(records, out)
    _write_manifest(out, args)
    print(f"{len(records)} preference records from {len(selected)} selected samples -> {out}")
    return 0


def _cmd_report(args) -> int:
    batch = _load_batch(args)
    counts = load_relation_counts(_require_file(args.counts, "--counts"))
    table = bucket_report(batch, counts, n_boot=args.boot, level=args.level, seed=args.seed)
    out = _out_path(args.csv)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["exponent", "count_low", "count_high", "n_relations", "n_gold", "n_pred", "f1", "ci_low", "ci_high"]
        )
        for b in table.buckets:
            ci = b.micro.ci["f1"] if b.micro.ci else ("", "")
            writer.writerow(
                [b.exponent, 2**b.exponent, 2 ** (b.exponent + 1), len(b.relations), b.n_gold, b.n_pred, b.micro.f1, ci[0], ci[1]]
            )
    if args.svg:
        _render_bucket_svg(table, _out_path(args.svg))
    print(f"bucket table -> {out}" + (f", chart -> {_out_path(args.svg)}" if args.svg else ""))
    return 0


def _render_bucket_svg(table, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    exponents = [b.exponent for b in table.buckets]
    f1s = [b.micro.f1 for b in table.buckets]
    n_relations = [len(b.relations) for b in table.buckets]
    lows = [b.micro.ci["f1"][0] if b.micro.ci else b.micro.f1 for b in table.buckets]
    highs = [b.micro.ci["f1"][1] if b.micro.ci else b.micro.f1 for b in table.buckets]

    fig, ax1 = plt.subplots(figsize=(7, 4))
    ax1.bar(exponents, n_relations, color="lightgray", label="relations per bucket")
    ax1.set_xlabel("bucket (count in [2^i, 2^(i+1)))")
    ax1.set_ylabel("relations")
    ax2 = ax1.twinx()
    ax2.plot(exponents, f1s, marker="o", color="tab:blue", label="micro-F1")
    yerr = [
        [f - lo for f, lo in zip(f1s, lows)],
        [hi - f for f, hi in zip(f1s, highs)],
    ]
    ax2.errorbar(exponents, f1s, yerr=yerr, fmt="none", ecolor="tab:blue", capsize=3)
    ax2.set_ylabel("micro-F1")
    ax2.set_ylim(0, 1.05)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg")
    plt.close(fig)


# -- parser ------------------------------------------------------------------------


def _add_beam_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beams", type=int, default=10, help="beam width (default 10)")
    p.add_argument("--max-len", type=int, default=256, help="generation length budget")


def _add_boot_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--boot", type=int, default=50, help="bootstrap resamples (default 50)")
    p.add_argument("--level", type=float, default=0.95, help="confidence level (default 0.95)")
    p.add_argument("--seed", type=int, required=True, help="bootstrap seed (required)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kbdecode", description=__doc__)
    parser.add_argument("--version", action="version", version=f"kbdecode {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("catalog", help="build a catalog manifest from name files")
    catsub = p.add_subparsers(dest="catalog_command", required=True)
    pb = catsub.add_parser("build", help="tokenize names and emit the catalog manifest")
    pb.add_argument("--entities", required=True, help="entity names, one per line")
    pb.add_argument("--relations", required=True, help="relation names, one per line")
    pb.add_argument("--out", required=True, help="catalog manifest path (JSON)")
    pb.set_defaults(func=_cmd_catalog)

    p = sub.add_parser("scorer", help="fit file-backed scorers")
    scsub = p.add_subparsers(dest="scorer_command", required=True)
    pf = scsub.add_parser("fit-ngram", help="fit a Laplace-smoothed n-gram scorer on text")
    pf.add_argument("--text", required=True, help="training text file")
    pf.add_argument("--order", type=int, required=True, help="n-gram order K")
    pf.add_argument("--catalog", help="share this catalog's vocabulary")
    pf.add_argument("--out", required=True, help="scorer JSON path")
    pf.set_defaults(func=_cmd_scorer)

    p = sub.add_parser("decode", help="beam-decode one prompt")
    p.add_argument("--scorer", required=True)
    p.add_argument("--catalog", help="catalog manifest (required with --constrained)")
    p.add_argument("--prompt", help="prompt text")
    p.add_argument("--prompt-file", help="file with the prompt text")
    p.add_argument("--constrained", action="store_true", help="mask to catalog-valid continuations")
    p.add_argument("--out", help="JSON trace path")
    _add_beam_flags(p)
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("curate", help="simulate KB-incomplete samples by entity removal")
    p.add_argument("--in", dest="infile", required=True, help="dataset JSONL")
    p.add_argument("--out", required=True, help="curated JSONL")
    p.add_argument("--fraction", type=float, default=0.4, help="alteration probability (default 0.4)")
    p.add_argument("--max-removed", type=int, default=3, help="max entities removed (default 3)")
    p.add_argument("--seed", type=int, required=True, help="curation seed (required)")
    p.set_defaults(func=_cmd_curate)

    p = sub.add_parser("phase1", help="dual weak decode (unconstrained + constrained)")
    p.add_argument("--in", dest="infile", required=True, help="dataset JSONL")
    p.add_argument("--scorer", required=True, help="base scorer JSON")
    p.add_argument("--catalog", required=True)
    p.add_argument("--out", required=True, help="weak-predictions JSONL")
    _add_beam_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel decodes (default 1)")
    p.set_defaults(func=_cmd_phase1)

    p = sub.add_parser("assemble", help="pack text + weak predictions into boosted inputs")
    p.add_argument("--in", dest="infile", required=True, help="dataset JSONL")
    p.add_argument("--weak", required=True, help="phase1 output JSONL")
    p.add_argument("--catalog", required=True)
    p.add_argument("--out", required=True, help="assembled-inputs JSONL")
    p.set_defaults(func=_cmd_assemble)

    p = sub.add_parser("build-train", help="emit boosted-model training records from curated data")
    p.add_argument("--in", dest="infile", required=True, help="curated JSONL")
    p.add_argument("--scorer", required=True, help="base scorer JSON")
    p.add_argument("--catalog", required=True)
    p.add_argument("--out", required=True, help="training-records JSONL")
    p.add_argument("--jobs", type=int, default=1, help="parallel decodes (default 1)")
    _add_beam_flags(p)
    p.set_defaults(func=_cmd_build_train)

    p = sub.add_parser("infer", help="two-phase boosted inference")
    p.add_argument("--in", dest="infile", required=True, help="dataset JSONL (text used, gold ignored)")
    p.add_argument("--base-scorer", required=True)
    p.add_argument("--boosted-scorer", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument(
        "--final-mode",
        choices=("constrained", "unconstrained"),
        default="constrained",
        help="boosted decode mode (default constrained)",
    )
    p.add_argument("--out", required=True, help="predictions JSONL")
    p.add_argument("--jobs", type=int, default=1, help="parallel decodes (default 1)")
    _add_beam_flags(p)
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("eval", help="micro/macro scores with bootstrap CIs")
    p.add_argument("--pred", required=True, help="predictions JSONL")
    p.add_argument("--gold", required=True, help="gold dataset JSONL")
    p.add_argument("--counts", help="relation counts TSV; adds bucket section")
    p.add_argument("--catalog", help="catalog manifest for --macro-universe catalog")
    p.add_argument(
        "--macro-universe",
        choices=("batch", "catalog"),
        default="batch",
        help="relation universe for macro scores (default batch)",
    )
    p.add_argument(
        "--macro-f1",
        choices=("mean_per_relation", "harmonic"),
        default="mean_per_relation",
        help="macro-F1 aggregation (default mean_per_relation)",
    )
    p.add_argument("--out", required=True, help="JSON report path")
    p.add_argument("--csv", help="optional CSV flattening")
    _add_boot_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("buckets", help="relation-frequency bucket scores")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--counts", required=True, help="relation counts TSV")
    p.add_argument("--out", required=True, help="JSON report path")
    _add_boot_flags(p)
    p.set_defaults(func=_cmd_buckets)

    p = sub.add_parser("dpo-prep", help="build preference pairs from two candidate scorers")
    p.add_argument("--in", dest="infile", required=True, help="samples JSONL")
    p.add_argument("--scores", required=True, help="JSON {sample_id: realness score}")
    p.add_argument("--judge-rules", required=True, help="JSON {sample_id: verdict}")
    p.add_argument("--scorer-a", required=True)
    p.add_argument("--scorer-b", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--select-k", type=int, help="keep the k most realistic samples (default: all)")
    p.add_argument("--swap-trial", action="store_true", help="query both orders, keep consistent verdicts")
    p.add_argument("--jobs", type=int, default=1, help="parallel judge calls (default 1)")
    p.add_argument("--out", required=True, help="preference JSONL")
    _add_beam_flags(p)
    p.set_defaults(func=_cmd_dpo_prep)

    p = sub.add_parser("report", help="bucket table CSV plus optional SVG chart")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--counts", required=True)
    p.add_argument("--csv", required=True, help="CSV output path")
    p.add_argument("--svg", help="optional SVG chart path")
    _add_boot_flags(p)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"kbdecode: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"kbdecode: failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
