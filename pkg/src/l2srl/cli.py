"""Command-line surface: score, iaa, oracle, tuples, align, select, train,
tag, retrain.

Exit codes: 0 ok, 2 file parse error, 3 corpus mismatch, 4 pairing error,
5 model version mismatch, 1 anything else.
"""

import argparse
import json
import os
import sys

from l2srl import agreement, oracle, pipeline, scoring, tagger
from l2srl.corpus import (
    Corpus,
    load_alignments,
    load_corpus,
    pair_corpora,
    save_alignments,
    save_corpus,
)
from l2srl.errors import (
    MismatchedCorpora,
    MissingMetadata,
    PairingError,
    ParseError,
    VersionMismatch,
)

EXIT_PARSE = 2
EXIT_MISMATCH = 3
EXIT_PAIRING = 4
EXIT_VERSION = 5


def _common_flags(sub):
    sub.add_argument("--am-coarse", action="store_true", default=None,
                     help="collapse adjunct subtypes (AM-TMP == AM)")
    sub.add_argument("--seed", type=int, default=None, help="random seed")
    sub.add_argument("--out", default=None, help="directory for report files")
    sub.add_argument("--format", choices=("text", "tsv", "json"), default="text",
                     help="report format printed to stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l2srl",
        description="SRL toolkit for L2-L1 parallel corpora",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("score", help="score predicted annotations against gold")
    p.add_argument("pred")
    p.add_argument("gold")
    p.add_argument("--group-by", choices=("lang", "side", "lang,side"), default=None)
    _common_flags(p)
    p.set_defaults(func=cmd_score)

    p = subs.add_parser("iaa", help="inter-annotator agreement between two annotation files")
    p.add_argument("annotator_a")
    p.add_argument("annotator_b")
    _common_flags(p)
    p.set_defaults(func=cmd_iaa)

    p = subs.add_parser("oracle", help="sequential oracle-transform analysis")
    p.add_argument("pred")
    p.add_argument("gold")
    _common_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = subs.add_parser("tuples", help="extract word-level role tuples")
    p.add_argument("corpus")
    _common_flags(p)
    p.set_defaults(func=cmd_tuples)

    p = subs.add_parser("align", help="heuristic word alignment for paired corpora")
    p.add_argument("l2")
    p.add_argument("l1")
    p.add_argument("output", help="alignment file to write")
    _common_flags(p)
    p.set_defaults(func=cmd_align)

    p = subs.add_parser("select", help="agreement-based selection of consistent pairs")
    p.add_argument("l2")
    p.add_argument("l1")
    p.add_argument("--align", default="heuristic",
                   help="alignment file, or 'heuristic' (default)")
    p.add_argument("-p", "--threshold", type=float, default=0.9,
                   help="selection threshold (strictly-greater comparison)")
    _common_flags(p)
    p.set_defaults(func=cmd_select)

    p = subs.add_parser("train", help="train the linear-chain tagger")
    p.add_argument("corpus")
    p.add_argument("model", help="model file to write")
    p.add_argument("--epochs", type=int, default=10)
    _common_flags(p)
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("tag", help="tag a corpus at its gold predicate positions")
    p.add_argument("model")
    p.add_argument("corpus")
    p.add_argument("output", help="corpus file to write")
    _common_flags(p)
    p.set_defaults(func=cmd_tag)

    p = subs.add_parser("retrain", help="full selection-and-retraining loop")
    p.add_argument("--config", required=True, help="flat key=value config file")
    p.add_argument("--extend-with", choices=("l1", "l2", "both"), default=None,
                   help="which side of selected pairs extends the training set")
    _common_flags(p)
    p.set_defaults(func=cmd_retrain)
    return parser


def _emit_report(args, report, stem):
    text = scoring.report_to_text(report, stem)
    tsv = scoring.report_to_tsv(report)
    js = scoring.report_to_json(report)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for suffix, body in (("txt", text), ("tsv", tsv), ("json", js)):
            with open(os.path.join(args.out, f"{stem}.{suffix}"), "w", encoding="utf-8") as f:
                f.write(body)
    print({"text": text, "tsv": tsv, "json": js}[args.format], end="")


def cmd_score(args) -> int:
    pred = load_corpus(args.pred)
    gold = load_corpus(args.gold)
    am_coarse = bool(args.am_coarse)
    if args.group_by:
        report = scoring.score_grouped(pred, gold, args.group_by, am_coarse)
    else:
        report = scoring.score(pred, gold, am_coarse)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        matrix = scoring.confusion_matrix(pred, gold, am_coarse)
        with open(os.path.join(args.out, "confusion.tsv"), "w", encoding="utf-8") as f:
            f.write(scoring.confusion_to_tsv(matrix))
    _emit_report(args, report, "score")
    return 0


def cmd_iaa(args) -> int:
    a = load_corpus(args.annotator_a)
    b = load_corpus(args.annotator_b)
    report = scoring.score_grouped(a, b, "lang,side", bool(args.am_coarse))
    _emit_report(args, report, "iaa")
    return 0


def cmd_oracle(args) -> int:
    pred = load_corpus(args.pred)
    gold = load_corpus(args.gold)
    baseline, stages = oracle.oracle_sequence(pred, gold, bool(args.am_coarse))
    text_lines = [f"baseline      F {scoring.fmt2(baseline.f1):>6}"]
    tsv_rows = [("f1", "baseline", scoring.fmt2(baseline.f1))]
    payload = {"baseline": scoring.round2(baseline.f1), "stages": []}
    for stage in stages:
        text_lines.append(
            f"{stage.kind:<12}  F {scoring.fmt2(stage.report.f1):>6}"
            f"   gap closed {scoring.fmt2(stage.relative_improvement):>6}%"
        )
        tsv_rows.append(("f1", stage.kind, scoring.fmt2(stage.report.f1)))
        tsv_rows.append(
            ("gap_closed", stage.kind, scoring.fmt2(stage.relative_improvement))
        )
        payload["stages"].append(
            {
                "kind": stage.kind,
                "f1": scoring.round2(stage.report.f1),
                "gap_closed": scoring.round2(stage.relative_improvement),
            }
        )
    text = "\n".join(text_lines) + "\n"
    tsv = "\n".join("\t".join(r) for r in tsv_rows) + "\n"
    js = json.dumps(payload, indent=2) + "\n"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for suffix, body in (("txt", text), ("tsv", tsv), ("json", js)):
            with open(os.path.join(args.out, f"oracle.{suffix}"), "w", encoding="utf-8") as f:
                f.write(body)
    print({"text": text, "tsv": tsv, "json": js}[args.format], end="")
    return 0


def cmd_tuples(args) -> int:
    corpus = load_corpus(args.corpus)
    lines = ["sentence_id\tpredicate\targument\trole"]
    for sentence in corpus.sentences:
        for t in sorted(agreement.extract_tuples(sentence)):
            lines.append(f"{sentence.id}\t{t.predicate}\t{t.argument}\t{t.role}")
    body = "\n".join(lines) + "\n"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "tuples.tsv"), "w", encoding="utf-8") as f:
            f.write(body)
    print(body, end="")
    return 0


def _paired(l2: Corpus, l1: Corpus, align_spec: str):
    if align_spec == "heuristic":
        alignments = pipeline._heuristic_alignments(l2, l1)
    else:
        alignments = load_alignments(align_spec)
    return pair_corpora(l2, l1, alignments)


def cmd_align(args) -> int:
    l2 = load_corpus(args.l2)
    l1 = load_corpus(args.l1)
    pairs = _paired(l2, l1, "heuristic")
    save_alignments({p.alignment.pair_id: p.alignment for p in pairs}, args.output)
    print(f"wrote {len(pairs)} alignments to {args.output}")
    return 0


def cmd_select(args) -> int:
    l2 = load_corpus(args.l2)
    l1 = load_corpus(args.l1)
    pairs = _paired(l2, l1, args.align)
    # tuple matching defaults to coarse AM labels unless the caller says otherwise
    am_coarse = True if args.am_coarse is None else bool(args.am_coarse)
    config = agreement.SelectionConfig(p=args.threshold)
    recalls = [agreement.recall_pair(pair, am_coarse) for pair in pairs]
    chosen = [p for p, r in zip(pairs, recalls) if agreement.is_selected(r, config)]
    outdir = args.out or "."
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "selection.tsv"), "w", encoding="utf-8") as f:
        f.write(agreement.selection_tsv(pairs, recalls, config))
    save_corpus(Corpus(tuple(p.l2 for p in chosen)), os.path.join(outdir, "selected_l2.tsv"))
    save_corpus(Corpus(tuple(p.l1 for p in chosen)), os.path.join(outdir, "selected_l1.tsv"))
    ratio = len(chosen) / len(pairs) if pairs else 0.0
    print(f"pool {len(pairs)}  selected {len(chosen)}  ratio {ratio:.4f}  (p > {config.p})")
    return 0


def cmd_train(args) -> int:
    corpus = load_corpus(args.corpus)
    config = tagger.TrainConfig(
        epochs=args.epochs, seed=1 if args.seed is None else args.seed
    )
    model = tagger.train(corpus, config)
    tagger.save_model(model, args.model)
    print(
        f"trained on {len(corpus)} sentences: {len(model.emissions)} emission and "
        f"{len(model.transitions)} transition weights -> {args.model}"
    )
    return 0


def cmd_tag(args) -> int:
    model = tagger.load_model(args.model)
    corpus = load_corpus(args.corpus)
    tagged = tagger.tag_corpus(model, corpus)
    save_corpus(tagged, args.output)
    print(f"tagged {len(tagged)} sentences -> {args.output}")
    return 0


def cmd_retrain(args) -> int:
    config = pipeline.load_config(args.config)
    if args.am_coarse is not None:
        config.am_coarse = bool(args.am_coarse)
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out = args.out
    if args.extend_with is not None:
        config.extend_with = args.extend_with
    report = pipeline.run_retrain(config)
    os.makedirs(config.out, exist_ok=True)
    text = report.to_text()
    with open(os.path.join(config.out, "report.txt"), "w", encoding="utf-8") as f:
        f.write(text)
    with open(os.path.join(config.out, "report.tsv"), "w", encoding="utf-8") as f:
        f.write(report.to_tsv())
    with open(os.path.join(config.out, "report.json"), "w", encoding="utf-8") as f:
        f.write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    print({"text": text, "tsv": report.to_tsv(),
           "json": json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"}[args.format],
          end="")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"l2srl: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (MismatchedCorpora, MissingMetadata) as exc:
        print(f"l2srl: corpus mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except PairingError as exc:
        print(f"l2srl: {exc}", file=sys.stderr)
        return EXIT_PAIRING
    except VersionMismatch as exc:
        print(f"l2srl: {exc}", file=sys.stderr)
        return EXIT_VERSION
    except (ValueError, OSError) as exc:
        print(f"l2srl: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
