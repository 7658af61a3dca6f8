"""Command-line entry point: ``csgen <subcommand> ...``.

Exit codes: 0 success (output may be empty), 1 invalid input or
configuration, 2 a pipeline stage failed.
"""

import argparse
import json
import logging
import shutil
import sys
from pathlib import Path

from . import alignment, corpus_io, evaluation, sampling, synthesis
from .config import ConfigError, load_config, make_config
from .pipeline import StageError, run_evaluation, run_pipeline
from .toy import build_toy_fixture

log = logging.getLogger("csgen")

EXIT_OK, EXIT_INVALID, EXIT_STAGE = 0, 1, 2


def _load_any(path):
    """Synthetic corpora keep their masks and provenance; anything else
    loads as a plain labeled corpus."""
    with open(path, encoding="utf-8") as f:
        first = next((line for line in f if line.strip()), "")
    try:
        is_synthetic = "language_mask" in json.loads(first)
    except (json.JSONDecodeError, TypeError):
        is_synthetic = False
    if is_synthetic:
        return synthesis.load_synthetic(path), True
    return corpus_io.load_labeled_corpus(path), False


def _parse_sets(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value
    return out


def _emit(obj):
    json.dump(obj, sys.stdout, ensure_ascii=False, indent=2, sort_keys=True)
    sys.stdout.write("\n")


# --------------------------------------------------------------------------
# subcommands


def cmd_align(args):
    if args.corpus:
        pairs = corpus_io.load_parallel(corpus_io.load_labeled_corpus(args.corpus), args.pairs)
    else:
        pairs = corpus_io.load_bitext(args.pairs)
    if args.iters < 1:
        raise ConfigError("--iters must be >= 1")
    table = alignment.train_ibm1(pairs, args.iters)
    alignment.save_translation_table(table, args.out)
    if args.giza_dir:
        out = Path(args.giza_dir)
        out.mkdir(parents=True, exist_ok=True)
        for p in pairs:
            corpus_io.save_score_matrix(alignment.giza_matrix(p, table, args.epsilon), out / f"{p.id}.giza")
    _emit({"pairs": len(pairs), "iterations": args.iters, "log_likelihoods": table.log_likelihoods,
           "model": str(args.out)})
    return EXIT_OK


def cmd_synthesize(args):
    values = {
        "corpus": args.corpus, "pairs": args.pairs, "trees": args.trees, "attn_dir": args.attn_dir,
        "lexicon": args.lexicon, "translit": args.translit, "reverse": args.reverse,
        "bleu_floor": args.bleu_floor, "ibm_iterations": args.iters, "workers": args.workers,
        "out_dir": args.work_dir or f"{args.out}.work",
    }
    if args.giza:
        values["giza_dir" if Path(args.giza).is_dir() else "giza_model"] = args.giza
    values.update(_parse_sets(args.set))
    cfg = make_config({k: v for k, v in values.items() if v is not None})
    cfg.sample_total = None
    cfg.run_eval = False
    summary = run_pipeline(cfg)
    shutil.copyfile(Path(cfg.out_dir) / "synthetic.jsonl", args.out)
    _emit(summary)
    return EXIT_OK


def cmd_sample(args):
    items, is_synthetic = _load_any(args.synthetic)
    dist = sampling.LabelDistribution.from_corpus(corpus_io.load_labeled_corpus(args.dist_from))
    try:
        picked = sampling.stratified_sample(items, dist, args.total, args.seed)
    except sampling.StratificationError as exc:
        raise StageError("sample", str(exc)) from exc
    if is_synthetic:
        synthesis.save_synthetic(picked, args.out)
    else:
        corpus_io.save_labeled_corpus(picked, args.out)
    counts = {}
    for s in picked:
        counts[str(s.label)] = counts.get(str(s.label), 0) + 1
    _emit({"sampled": len(picked), "per_label": counts, "out": str(args.out)})
    return EXIT_OK


def cmd_eval(args):
    gold = corpus_io.load_labeled_corpus(args.train)
    synthetic = _load_any(args.augment)[0] if args.augment else []
    values = {"loss": args.loss, "folds": args.folds, "seed": args.seed, "epochs": args.epochs,
              "lr": args.lr, "test": args.test}
    if args.ratio is not None:
        values["ratio_grid"] = [args.ratio]
    elif args.grid:
        values["ratio_grid"] = [float(v) for v in args.grid.split(",")]
    cfg = make_config({k: v for k, v in values.items() if v is not None})
    if cfg.folds < 2 or not cfg.ratio_grid or any(r <= 0 for r in cfg.ratio_grid):
        raise ConfigError("need folds >= 2 and positive ratios")
    report = run_evaluation(cfg, gold, synthetic)
    if args.report:
        with open(args.report, "w", encoding="utf-8", newline="\n") as f:
            json.dump(report, f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")
    _emit({k: report[k] for k in ("gold_only_accuracy", "best_ratio", "augmented_accuracy", "cv_scores")})
    return EXIT_OK


def cmd_distance(args):
    a, _ = _load_any(args.a)
    b, _ = _load_any(args.b)
    print(repr(evaluation.feature_distance(a, b, evaluation.Featurizer(), seed=args.seed)))
    return EXIT_OK


def cmd_run(args):
    overrides = _parse_sets(args.set)
    if args.out_dir:
        overrides["out_dir"] = args.out_dir
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    cfg = load_config(args.config, overrides)
    _emit(run_pipeline(cfg))
    return EXIT_OK


def cmd_toy(args):
    out = build_toy_fixture(args.out)
    print(out / "config.yaml")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser():
    parser = argparse.ArgumentParser(prog="csgen", description="Synthesize labeled code-switched text.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("align", help="train an IBM Model 1 translation table")
    p.add_argument("--pairs", required=True, help="pairs JSONL; self-contained unless --corpus is given")
    p.add_argument("--corpus", help="labeled source corpus the pairs join onto")
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=alignment.GIZA_EPSILON)
    p.add_argument("--giza-dir", help="also write one <id>.giza matrix per pair here")
    p.add_argument("--out", required=True, help="translation table TSV")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("synthesize", help="generate and BLEU-filter synthetic sentences")
    p.add_argument("--corpus", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--trees")
    p.add_argument("--attn-dir")
    p.add_argument("--giza", help="translation table TSV or a directory of <id>.giza matrices")
    p.add_argument("--lexicon")
    p.add_argument("--translit", default="identity")
    p.add_argument("--reverse", required=True)
    p.add_argument("--bleu-floor", type=float, default=0.35)
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--work-dir", help="intermediate outputs (default: <out>.work)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="any other run setting")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("sample", help="label-stratified sample of a corpus")
    p.add_argument("--synthetic", required=True)
    p.add_argument("--dist-from", required=True, help="corpus whose label distribution is matched")
    p.add_argument("--total", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="cross-validated gold-only vs augmented training")
    p.add_argument("--train", required=True, help="gold labeled corpus")
    p.add_argument("--augment", help="synthetic corpus")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--ratio", type=float, help="fixed synthetic:gold ratio")
    group.add_argument("--grid", help="comma-separated ratios to search")
    p.add_argument("--loss", default="categorical", choices=["categorical", "ordinal"])
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test", help="held-out test corpus")
    p.add_argument("--report")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("distance", help="mean feature-space distance between two corpora")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("run", help="full pipeline from a YAML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("toy", help="write the toy English-Hindi fixture")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_toy)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except StageError as exc:
        log.error("%s", exc)
        return EXIT_STAGE
    except (ConfigError, corpus_io.CorpusFormatError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
