"""Command-line surface: every pipeline stage usable standalone on files."""
from __future__ import annotations

import argparse
import json
import sys

from . import amendments, datastore, metrics, pipeline, review
from .model import BillArticle, ConsolidationTriplet
from .references import extract_references
from .splitter import flatten_simple_modifications, split_article


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _node_to_dict(node) -> dict:
    return {
        "marker": node.marker,
        "level": node.level,
        "text": node.text,
        "source_range": list(node.source_range),
        "children": [_node_to_dict(c) for c in node.children],
    }


def cmd_split(args: argparse.Namespace) -> int:
    text = _read_text(args.input).rstrip("\n")
    root = split_article(BillArticle(number=args.number, text=text))
    if args.flatten:
        entries = flatten_simple_modifications(root)
        if args.json:
            print(json.dumps([{"path": p, "text": t} for p, t in entries], ensure_ascii=False, indent=2))
        else:
            for idx, (path, entry) in enumerate(entries, start=1):
                print(f"--- modification {idx} ({' > '.join(path) or 'whole article'}) ---")
                print(entry.strip())
    else:
        print(json.dumps(_node_to_dict(root), ensure_ascii=False, indent=2))
    return 0


def cmd_extract(args: argparse.Namespace) -> int:
    text = _read_text(args.input)
    aliases = json.loads(_read_text(args.aliases)) if args.aliases else {}
    refs = extract_references(text, {k.casefold(): v for k, v in aliases.items()})
    print(
        json.dumps(
            [datastore.reference_to_dict(r) for r in refs],
            ensure_ascii=False,
            indent=2,
        )
    )
    return 0


def cmd_consolidate(args: argparse.Namespace) -> int:
    if args.triplets:
        dataset = datastore.load(args.triplets)
        results = []
        for entry_id, triplet in dataset:
            try:
                results.append({"id": entry_id, "prediction": amendments.consolidate(triplet)})
            except amendments.AmendmentError as exc:
                results.append({"id": entry_id, "error": f"{type(exc).__name__}: {exc}"})
        for result in results:
            print(json.dumps(result, ensure_ascii=False))
        return 0
    instruction = _read_text(args.instruction)
    article = _read_text(args.article).rstrip("\n")
    triplet = ConsolidationTriplet(instruction=instruction, input=article)
    print(amendments.consolidate(triplet))
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    records = datastore.load_records(args.records)
    gold = json.loads(_read_text(args.gold)) if args.gold else {}
    strictness = "error" if args.strict else "skip"
    report = metrics.consolidation_report(records, gold, on_missing_gold=strictness)
    print(metrics.report_table(report))
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            json.dump(metrics.report_to_dict(report), fh, ensure_ascii=False, indent=2)
            fh.write("\n")

    errors = []
    curve_samples = []
    for record in records:
        gold_text = record.gold_text if record.gold_text is not None else gold.get(record.id)
        if record.prediction is not None and gold_text is not None:
            errors.append(metrics.word_error(record.prediction, gold_text).total)
            if record.prompt_tokens is not None:
                correct = metrics.is_correct(record.prediction, gold_text)
                curve_samples.append((record.prompt_tokens, correct))
    if errors:
        stats = metrics.aggregate(errors)
        print(
            f"word error: mean={stats.mean:.2f} median={stats.median:.1f} "
            f"ci95=±{stats.ci95_halfwidth:.2f} n={stats.n}"
        )
    if args.curve_out and curve_samples:
        thresholds = [64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384]
        points = metrics.correctness_curve(curve_samples, thresholds)
        with open(args.curve_out, "w", encoding="utf-8", newline="") as fh:
            fh.write(metrics.curve_to_csv(points))
    return 0


def cmd_curate(args: argparse.Namespace) -> int:
    dataset = datastore.load(args.input)
    result = datastore.curate(dataset)
    datastore.save(result.dataset, args.output)
    print(
        f"kept {len(result.dataset)} of {len(dataset)} triplets "
        f"(removed: {result.counts['no_modification']} no-modification, {result.counts['table']} table)"
    )
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    config = pipeline.load_config(
        args.config,
        output_override=args.output,
        backends_override=tuple(args.backend) if args.backend else None,
    )
    summary = pipeline.run(config)
    print(summary.format_text())
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    config = pipeline.load_config(args.config, output_override=args.output)
    records_path = f"{config.output_dir}/records.jsonl"
    review.serve_review(records_path, bind=config.review_bind, gold=config.gold)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="consolaw", description="Legislative consolidation toolkit")
    parser.add_argument("--config", help="pipeline config file (run/serve)")
    parser.add_argument("--output", help="output directory override")
    parser.add_argument("--backend", action="append", choices=["rule", "span", "llm", "all"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="decompose a bill article into simple modifications")
    p.add_argument("--input", required=True, help="text file with the article body")
    p.add_argument("--number", default="1", help="article number for the tree root")
    p.add_argument("--flatten", action="store_true", help="print simple modifications instead of the tree")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("extract", help="extract law-article references from a section")
    p.add_argument("--input", required=True)
    p.add_argument("--aliases", help="JSON file mapping anaphora to canonical act names")

    p = sub.add_parser("consolidate", help="apply a modification section to an article")
    p.add_argument("--instruction", help="text file with the modification section")
    p.add_argument("--article", help="text file with the existing article")
    p.add_argument("--triplets", help="JSONL dataset to consolidate instead of single files")

    p = sub.add_parser("evaluate", help="score records against gold annotations")
    p.add_argument("--records", required=True, help="records JSONL from a pipeline run")
    p.add_argument("--gold", help="JSON file mapping record ids to gold texts")
    p.add_argument("--strict", action="store_true", help="fail when a possible record has no gold")
    p.add_argument("--json-out", help="also write the report as JSON")
    p.add_argument("--curve-out", help="write correctness-vs-length curve points as CSV")

    p = sub.add_parser("curate", help="clean a triplet dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)

    sub.add_parser("run", help="run the full pipeline (uses --config)")
    sub.add_parser("serve", help="serve the review API (uses --config)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "split": cmd_split,
        "extract": cmd_extract,
        "consolidate": cmd_consolidate,
        "evaluate": cmd_evaluate,
        "curate": cmd_curate,
        "run": cmd_run,
        "serve": cmd_serve,
    }
    if args.command in ("run", "serve") and not args.config:
        parser.error(f"{args.command} requires --config")
    if args.command == "consolidate" and not args.triplets and not (args.instruction and args.article):
        parser.error("consolidate requires --triplets or both --instruction and --article")
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
