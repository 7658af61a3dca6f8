"""End-to-end synthesis: align, select segments, project, pick the best
candidate, threshold, sample and optionally evaluate."""

import json
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import alignment, corpus_io, evaluation, sampling, synthesis
from .config import RunConfig
from .providers import load_provider
from .source_segments import SegmentConfig, load_lexicon, select_source_segments
from .target_segments import METHODS, SegmentSelectionFailed, all_selections

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    def __init__(self, stage, message, sentence_id=None):
        where = f" (sentence {sentence_id})" if sentence_id is not None else ""
        super().__init__(f"stage {stage!r} failed{where}: {message}")
        self.stage = stage
        self.sentence_id = sentence_id


@dataclass
class Inputs:
    corpus: list
    pairs: list
    trees: dict
    attention: dict
    giza: dict
    table: object
    lexicon: object
    idf_src: object
    idf_tgt: object
    translit: object
    reverse: object
    gold: list = field(default_factory=list)


@dataclass
class Task:
    """One (sentence, source segment) synthesis attempt."""

    pair: corpus_io.ParallelPair
    segment: object
    selections: dict = field(default_factory=dict)
    error: str = None


def _write_json(obj, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")


def load_inputs(cfg: RunConfig, out_dir: Path) -> Inputs:
    try:
        corpus = corpus_io.load_labeled_corpus(cfg.corpus)
        pairs = corpus_io.load_parallel(corpus, cfg.pairs)
        trees = corpus_io.load_trees(cfg.trees, corpus) if cfg.trees else {}
        attention = corpus_io.load_matrix_dir(cfg.attn_dir, pairs, ".attn") if cfg.attn_dir else {}
        lexicon = load_lexicon(cfg.lexicon) if cfg.lexicon else None
        translit = load_provider(cfg.translit, "transliterate")
        reverse = load_provider(cfg.reverse, "reverse")
        gold = corpus_io.load_labeled_corpus(cfg.gold) if cfg.gold else []
    except (corpus_io.CorpusFormatError, OSError, ValueError, ImportError, AttributeError) as exc:
        raise StageError("load", str(exc)) from exc

    table = None
    giza = {}
    try:
        if cfg.giza_dir:
            giza = corpus_io.load_matrix_dir(cfg.giza_dir, pairs, ".giza")
        else:
            if cfg.giza_model:
                table = alignment.load_translation_table(cfg.giza_model)
            else:
                table = alignment.train_ibm1(pairs, cfg.ibm_iterations)
                alignment.save_translation_table(table, out_dir / "model.tsv")
            giza = {p.id: alignment.giza_matrix(p, table, cfg.giza_epsilon) for p in pairs}
    except (corpus_io.CorpusFormatError, OSError, ValueError) as exc:
        raise StageError("align", str(exc)) from exc

    idf_src = alignment.build_idf((s.tokens for s in corpus), cfg.idf_a, cfg.idf_b)
    idf_tgt = alignment.build_idf((p.target_tokens for p in pairs), cfg.idf_a, cfg.idf_b)
    return Inputs(corpus, pairs, trees, attention, giza, table, lexicon, idf_src, idf_tgt,
                  translit, reverse, gold)


def _select_for_pair(pair, inputs: Inputs, cfg: RunConfig):
    seg_cfg = SegmentConfig(cfg.min_abs_polarity, cfg.max_opinion_len, cfg.max_candidates_per_sentence)
    segments = select_source_segments(pair.source, inputs.trees.get(pair.id), inputs.lexicon, seg_cfg)
    tasks = []
    for seg in segments:
        task = Task(pair, seg)
        try:
            task.selections = all_selections(
                seg.span, pair.source.tokens, pair.target_tokens,
                attention=inputs.attention.get(pair.id), giza=inputs.giza.get(pair.id),
                idf_src=inputs.idf_src, idf_tgt=inputs.idf_tgt,
                max_len=cfg.max_target_span, normalize=cfg.normalize_span_scores)
        except SegmentSelectionFailed as exc:
            task.error = str(exc)
        tasks.append(task)
    return tasks


def _map_ordered(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _guard(stage, fn):
    def wrapped(item):
        try:
            return fn(item)
        except StageError:
            raise
        except Exception as exc:
            sid = getattr(getattr(item, "pair", item), "id", None)
            raise StageError(stage, f"{type(exc).__name__}: {exc}", sid) from exc
    return wrapped


def _synthesize_task(task: Task, inputs: Inputs, cfg: RunConfig, cutoffs):
    """Returns (winner or None, outcome, candidate methods, projection errors)."""
    if task.error is not None:
        return None, "failed", [], 0
    candidates = []
    errors = 0
    for method, sel in task.selections.items():
        try:
            candidates.append(synthesis.project(
                task.pair.source, task.pair.target_tokens, task.segment.span, sel, inputs.translit))
        except synthesis.ProjectionError as exc:
            log.warning("%s: %s", task.pair.id, exc)
            errors += 1
    if not candidates:
        return None, "failed", [], errors
    methods = [c.provenance.method for c in candidates]
    try:
        winner = synthesis.select_best(candidates, task.pair.source, inputs.reverse, cutoffs, cfg.bleu_max_n)
    except synthesis.CandidateFiltered:
        return None, "filtered", methods, errors
    return winner, "selected", methods, errors


def run_pipeline(cfg: RunConfig) -> dict:
    """Run every stage and persist its output under ``cfg.out_dir``.

    Returns the summary that is also written to ``summary.json``.
    """
    cfg.validate()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    inputs = load_inputs(cfg, out_dir)
    outputs = {}
    if inputs.table is not None and (out_dir / "model.tsv").exists():
        outputs["model"] = str(out_dir / "model.tsv")

    # segment and target span selection
    per_pair = _map_ordered(_guard("select", lambda p: _select_for_pair(p, inputs, cfg)),
                            inputs.pairs, cfg.workers)
    tasks = [t for group in per_pair for t in group]
    sel_path = out_dir / "selections.jsonl"
    corpus_io.dump_jsonl((_task_record(t) for t in tasks), sel_path)
    outputs["selections"] = str(sel_path)

    # projection and best-candidate choice
    cutoffs = synthesis.compute_cutoffs(
        (s for t in tasks for s in t.selections.values()),
        cfg.similarity_cutoff_percentile, cfg.dissimilarity_cutoff_percentile)
    results = _map_ordered(_guard("synthesize", lambda t: _synthesize_task(t, inputs, cfg, cutoffs)),
                           tasks, cfg.workers)
    winners = [r[0] for r in results if r[0] is not None]
    outcome = Counter(r[1] for r in results)
    cand_hist = Counter(m for r in results for m in r[2])
    winner_hist = Counter(w.provenance.method for w in winners)
    all_path = out_dir / "synthetic_all.jsonl"
    synthesis.save_synthetic(winners, all_path)
    outputs["synthetic_all"] = str(all_path)

    # BLEU threshold
    retained = synthesis.threshold_filter(winners, cfg.bleu_floor)
    if not retained:
        log.warning("no synthetic sentence reached the BLEU floor %s", cfg.bleu_floor)
    synth_path = out_dir / "synthetic.jsonl"
    synthesis.save_synthetic(retained, synth_path)
    outputs["synthetic"] = str(synth_path)

    summary = {
        "sentences": len(inputs.pairs),
        "tasks": {
            "generated": len(tasks),
            "retained": len(retained),
            "filtered": outcome["filtered"] + (len(winners) - len(retained)),
            "failed": outcome["failed"],
            "filtered_by_cutoff": outcome["filtered"],
            "filtered_by_bleu": len(winners) - len(retained),
        },
        "projection_errors": sum(r[3] for r in results),
        "methods": {
            m: {
                "selections": sum(1 for t in tasks if m in t.selections),
                "candidates_passing_cutoff": sum(
                    1 for t in tasks if m in t.selections
                    and cutoffs.passes(m, t.selections[m].score)),
                "candidates": cand_hist[m],
                "winners": winner_hist[m],
                "retained": sum(1 for w in retained if w.provenance.method == m),
            }
            for m in METHODS
        },
        "cutoffs": cutoffs.thresholds,
        "bleu_floor": cfg.bleu_floor,
    }

    # stratified sampling
    if cfg.sample_total is not None:
        if not retained:
            log.warning("skipping sampling: the synthetic corpus is empty")
            summary["sampled"] = 0
        else:
            dist = sampling.LabelDistribution.from_corpus(inputs.gold)
            try:
                sampled = sampling.stratified_sample(retained, dist, cfg.sample_total, cfg.seed)
            except sampling.StratificationError as exc:
                raise StageError("sample", str(exc)) from exc
            sample_path = out_dir / "sampled.jsonl"
            synthesis.save_synthetic(sampled, sample_path)
            outputs["sampled"] = str(sample_path)
            summary["sampled"] = len(sampled)
            summary["sample_distribution"] = {str(k): v for k, v in dist.proportions.items()}

    if cfg.run_eval:
        report = run_evaluation(cfg, inputs.gold, retained)
        report_path = out_dir / "report.json"
        _write_json(report, report_path)
        outputs["report"] = str(report_path)
        summary["eval"] = {k: report[k] for k in ("best_ratio", "gold_only_accuracy", "augmented_accuracy")}

    summary["outputs"] = {k: Path(v).name for k, v in outputs.items()}
    _write_json(summary, out_dir / "summary.json")
    return summary


def run_evaluation(cfg: RunConfig, gold, synthetic) -> dict:
    """Grid-search the synthetic:gold ratio and compare against gold alone."""
    train_kwargs = {"loss": cfg.loss, "epochs": cfg.epochs, "lr": cfg.lr, "batch_size": cfg.batch_size}
    featurizer = evaluation.Featurizer()
    try:
        baseline = evaluation.cross_validate(gold, (), 0.0, cfg.folds, cfg.seed, featurizer, train_kwargs)
        if synthetic:
            best, scores = evaluation.grid_search_ratio(
                gold, synthetic, cfg.ratio_grid, cfg.folds, cfg.seed, featurizer, train_kwargs)
        else:
            best, scores = None, {}
    except ValueError as exc:
        raise StageError("eval", str(exc)) from exc
    report = {
        "gold_only_accuracy": float(sum(baseline) / len(baseline)),
        "gold_only_folds": baseline,
        "cv_scores": {str(k): v for k, v in scores.items()},
        "best_ratio": best,
        "augmented_accuracy": scores.get(best) if best is not None else None,
        "config": cfg.to_json(),
    }
    if synthetic:
        report["distance_gold_synthetic"] = evaluation.feature_distance(gold, synthetic, featurizer, cfg.seed)
        report["distance_gold_gold"] = evaluation.feature_distance(gold, gold, featurizer, cfg.seed)
    if cfg.test is not None:
        test = corpus_io.load_labeled_corpus(cfg.test)
        report["test"] = evaluate_on_test(gold, synthetic, test, best or 0.0, cfg.seed, featurizer, train_kwargs)
    return report


def evaluate_on_test(gold, synthetic, test, ratio, seed, featurizer, train_kwargs) -> dict:
    """Train on gold plus ``ratio * |gold|`` stratified synthetic text and
    score on ``test``."""
    train = list(gold)
    size = int(round(ratio * len(train)))
    if size > 0:
        dist = sampling.LabelDistribution.from_corpus(gold)
        train += sampling.stratified_sample(synthetic, dist, size, seed)
    kwargs = dict(train_kwargs)
    kwargs.setdefault("seed", seed)
    model = evaluation.train_classifier(train, featurizer, **kwargs)
    metrics = evaluation.evaluate(model, test)
    metrics["per_label"] = {str(k): v for k, v in metrics["per_label"].items()}
    metrics["ratio"] = ratio
    metrics["train_size"] = len(train)
    metrics["distance_train_test"] = evaluation.feature_distance(train, test, featurizer, seed)
    return metrics


def _task_record(task: Task) -> dict:
    rec = {
        "source_id": task.pair.id,
        "span": list(task.segment.span),
        "origin": task.segment.origin,
        "selections": {m: {"span": list(s.span), "score": s.score} for m, s in task.selections.items()},
    }
    if task.segment.polarity_score is not None:
        rec["polarity"] = task.segment.polarity_score
    if task.error is not None:
        rec["error"] = task.error
    return rec
