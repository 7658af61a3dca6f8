"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest
import scipy.sparse as sp

from csgen import alignment, evaluation, sampling, synthesis
from csgen import target_segments as ts
from csgen.config import load_config
from csgen.corpus_io import LabeledSentence, load_labeled_corpus, load_parallel
from csgen.pipeline import run_pipeline
from csgen.providers import load_provider
from csgen.transport import emd
from conftest import make_pair
import oracles


def verdict(capsys, number, ok, detail):
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def test_1_emd_matches_lp_oracle(capsys):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst_lp = worst_assign = 0.0
    for _ in range(200):
        m, n = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        d = rng.random((m, n))
        value = emd(d).objective
        worst_lp = max(worst_lp, abs(value - oracles.emd_lp(d)))
        worst_assign = max(worst_assign, abs(value - oracles.emd_assignment(d)))
    elapsed = time.perf_counter() - start
    verdict(capsys, 1, max(worst_lp, worst_assign) <= 1e-9 and elapsed < 10,
            f"200 cases, max |EMD - LP| = {worst_lp:.2e}, max |EMD - assignment| = {worst_assign:.2e} "
            f"(tol 1e-9), {elapsed:.2f}s (< 10s)")


def _brute(p_s, src, tgt, a, g, idf_s, idf_t):
    lo, hi = p_s
    limit = min(len(tgt), max(2 * (hi - lo), hi - lo + 3))
    cand = oracles.spans(len(tgt), limit)
    out = {}
    g_mass = g[:, lo:hi].sum(axis=1)
    w_s = np.array([oracles.sigmoid(idf_s.a * idf_s.raw(w) - idf_s.b) for w in src[lo:hi]])
    w_t = np.array([oracles.sigmoid(idf_t.a * idf_t.raw(w) - idf_t.b) for w in tgt])
    a_mass = w_t * (a[:, lo:hi] @ w_s)
    for method, mass in ((ts.MAXSIM_GIZA, g_mass), (ts.MAXSIM_ATTN_IDF, a_mass)):
        values = {s: oracles.product_objective(mass, s) for s in cand}
        out[method] = oracles.brute_best(values, True, p_s, len(tgt), len(src))
    for method, base in ((ts.MINDIS_EMD_ATTN, a), (ts.MINDIS_EMD_GIZA, g)):
        values = {s: oracles.emd_assignment(1 - base[s[0]:s[1], lo:hi]) for s in cand}
        out[method] = oracles.brute_best(values, False, p_s, len(tgt), len(src), rtol=1e-9)
    return out


def test_2_span_selectors_match_enumeration(capsys):
    rng = np.random.default_rng(77)
    start = time.perf_counter()
    mismatches = []
    for case in range(100):
        s_len, t_len = int(rng.integers(1, 7)), int(rng.integers(1, 13))
        lo = int(rng.integers(0, s_len))
        hi = int(rng.integers(lo + 1, s_len + 1))
        src = tuple(f"s{i}" for i in range(s_len))
        tgt = tuple(f"t{i}" for i in range(t_len))
        # every fifth case is quantized so ties actually occur
        if case % 5 == 0:
            a = rng.choice([0.25, 0.5, 1.0], size=(t_len, s_len))
            g = rng.choice([0.25, 0.5, 1.0], size=(t_len, s_len))
        else:
            a, g = rng.random((t_len, s_len)), rng.random((t_len, s_len))
        idf_s = alignment.build_idf([src, src[: s_len // 2 + 1]])
        idf_t = alignment.build_idf([tgt, tgt[: t_len // 2 + 1]])
        got = ts.all_selections((lo, hi), src, tgt, a, g, idf_s, idf_t)
        for method, (best, span) in _brute((lo, hi), src, tgt, a, g, idf_s, idf_t).items():
            sel = got.get(method)
            if sel is None or sel.span != span or not math.isclose(sel.score, best, rel_tol=1e-9, abs_tol=1e-9):
                mismatches.append((case, method))
    elapsed = time.perf_counter() - start
    verdict(capsys, 2, not mismatches and elapsed < 30,
            f"100 fixtures x 4 selectors, {len(mismatches)} mismatch(es), {elapsed:.2f}s (< 30s)")


def test_3_ibm1_properties(capsys):
    rng = np.random.default_rng(5)
    src_vocab = [f"e{i}" for i in range(15)]
    tgt_vocab = [f"f{i}" for i in range(18)]
    pairs = [make_pair(list(rng.choice(src_vocab, size=rng.integers(1, 7))),
                       list(rng.choice(tgt_vocab, size=rng.integers(1, 8))), sid=f"p{k}")
             for k in range(50)]
    full = alignment.train_ibm1(pairs, iterations=10)
    ll = full.log_likelihoods
    monotone = all(b >= a - 1e-9 for a, b in zip(ll, ll[1:]))
    worst_norm = max(max(alignment.train_ibm1(pairs, iterations=k).normalization_errors().values())
                     for k in range(1, 11))
    single = alignment.train_ibm1([make_pair(["house"], ["casa"])], iterations=1).prob("casa", "house")
    verdict(capsys, 3, monotone and worst_norm <= 1e-6 and single == 1.0,
            f"log-likelihood nondecreasing={monotone}, max normalization error {worst_norm:.1e} "
            f"(tol 1e-6), single-pair t={single!r}")


def test_4_bleu(capsys):
    same = synthesis.bleu(["the", "cat", "sat"], ["the", "cat", "sat"])
    short = synthesis.bleu(["the", "cat"], ["the", "cat", "sat"], max_n=2)
    verdict(capsys, 4, same == 1.0 and abs(short - 0.6065) <= 1e-4,
            f"bleu(x,x)={same!r}, example={short:.6f} (target 0.6065 +- 1e-4)")


def _tree_bytes(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def test_5_pipeline_invariants(capsys, toy_dir, toy_run, tmp_path):
    out, summary, cfg = toy_run
    corpus = {s.id: s for s in load_labeled_corpus(cfg.corpus)}
    pairs = {p.id: p for p in load_parallel(list(corpus.values()), cfg.pairs)}
    translit = load_provider(cfg.translit, "transliterate")
    problems = []
    synth = synthesis.load_synthetic(out / "synthetic.jsonl")
    for c in synth:
        prov = c.provenance
        src = corpus.get(prov.source_id)
        if src is None:
            problems.append((c.id, "unknown source"))
            continue
        lo, hi = prov.span
        j, k = prov.target_span
        n = len(src.tokens)
        tail = n - hi
        checks = [
            synthesis.SRC in c.language_mask and synthesis.TGT in c.language_mask,
            c.label == src.label,
            c.tokens[:lo] == src.tokens[:lo],
            c.tokens[len(c.tokens) - tail:] == src.tokens[hi:],
            list(c.tokens[lo:len(c.tokens) - tail]) == translit.transliterate(list(pairs[src.id].target_tokens[j:k])),
            prov.method in ts.METHODS,
            0 <= lo < hi <= n and (lo, hi) != (0, n),
            0 <= j < k <= len(pairs[src.id].target_tokens),
            prov.bleu is not None and cfg.bleu_floor <= prov.bleu <= 1.0,
            math.isfinite(prov.method_score),
        ]
        if not all(checks):
            problems.append((c.id, checks.index(False)))
    rerun = tmp_path / "rerun"
    run_pipeline(load_config(toy_dir / "config.yaml", {"out_dir": str(rerun)}))
    identical = _tree_bytes(rerun) == _tree_bytes(out)
    ok = summary["sentences"] >= 40 and len(synth) > 0 and not problems and identical
    verdict(capsys, 5, ok, f"{summary['sentences']} sentences, {len(synth)} synthetic, "
                           f"{len(problems)} invariant violation(s), rerun byte-identical={identical}")


def test_6_stratified_sampling(capsys):
    rng = np.random.default_rng(6)
    bad = 0
    for case in range(20):
        k = int(rng.integers(1, 5))
        labels = sorted(rng.choice([-2, -1, 0, 1, 2], size=k, replace=False).tolist())
        weights = rng.integers(1, 10, size=k)
        dist = sampling.LabelDistribution({lab: w / weights.sum() for lab, w in zip(labels, weights)})
        total = int(rng.integers(1, 80))
        pool = [LabeledSentence(f"{lab}_{i}", ("w",), lab) for lab in labels for i in range(80)]
        expected = _hamilton(dist.proportions, total)
        first = sampling.stratified_sample(pool, dist, total, seed=case)
        second = sampling.stratified_sample(pool, dist, total, seed=case)
        counts = {lab: sum(s.label == lab for s in first) for lab in labels}
        if counts != expected or sum(counts.values()) != total or first != second:
            bad += 1
    verdict(capsys, 6, bad == 0, f"20 cases, {bad} with wrong counts or non-reproducible samples")


def _hamilton(props, total):
    from fractions import Fraction
    labels = sorted(props)
    quotas = [Fraction(props[k]).limit_denominator(10**12) * total for k in labels]
    floors = [math.floor(q) for q in quotas]
    order = sorted(range(len(labels)), key=lambda i: (floors[i] - quotas[i], labels[i]))
    for i in order[:total - sum(floors)]:
        floors[i] += 1
    return dict(zip(labels, floors))


def test_7_loss_gradients(capsys):
    rng = np.random.default_rng(7)
    X = sp.csr_matrix(rng.random((5, 6)) * (rng.random((5, 6)) < 0.7))
    W, b = rng.normal(size=(3, 6)), rng.normal(size=3)
    y = np.array([0, 1, 2, 2, 0])
    h = 1e-6
    worst = 0.0
    for loss in evaluation.LOSSES:
        _, gW, gb = evaluation.loss_and_grad(W, b, X, y, loss)
        f = lambda W_, b_: evaluation.loss_and_grad(W_, b_, X, y, loss, grad=False)
        for idx in np.ndindex(W.shape):
            e = np.zeros_like(W)
            e[idx] = h
            num = (f(W + e, b) - f(W - e, b)) / (2 * h)
            worst = max(worst, abs(num - gW[idx]) / max(1.0, abs(num)))
        for kk in range(3):
            e = np.zeros(3)
            e[kk] = h
            num = (f(W, b + e) - f(W, b - e)) / (2 * h)
            worst = max(worst, abs(num - gb[kk]) / max(1.0, abs(num)))
    far = evaluation.ordinal_weights([0], [2], 3)[0]
    near = evaluation.ordinal_weights([0], [1], 3)[0]
    verdict(capsys, 7, worst <= 1e-4 and (far, near) == (3.0, 2.0),
            f"max relative gradient error {worst:.1e} (tol 1e-4), ordinal weights extreme={far} adjacent={near}")


def test_8_directional_augmentation(capsys, toy_dir, toy_run):
    out, _, cfg = toy_run
    gold = load_labeled_corpus(toy_dir / "gold.jsonl")
    synth = synthesis.load_synthetic(out / "synthetic.jsonl")
    rows = []
    for seed in range(5):
        base = float(np.mean(evaluation.cross_validate(gold, (), 0.0, 3, seed)))
        best, scores = evaluation.grid_search_ratio(gold, synth, folds=3, seed=seed)
        rows.append((seed, base, best, scores[best]))
    base_mean = float(np.mean([r[1] for r in rows]))
    aug_mean = float(np.mean([r[3] for r in rows]))
    per_seed = all(r[3] >= r[1] for r in rows)
    detail = ", ".join(f"seed {s}: {b:.3f} -> {a:.3f} @ {r}" for s, b, r, a in rows)
    verdict(capsys, 8, per_seed and aug_mean >= base_mean,
            f"gold-only {base_mean:.3f} vs augmented {aug_mean:.3f} ({detail})")


def test_9_feature_distance(capsys):
    single = [LabeledSentence("a", ("kya", "baat", "hai"), 1)]
    zero = evaluation.feature_distance(single, single)
    one_hot = evaluation.Featurizer(analyzer="word", ngram_range=(1, 1))
    root2 = evaluation.feature_distance([LabeledSentence("x", ("alpha",), 0)],
                                        [LabeledSentence("y", ("omega",), 1)], one_hot)
    f = evaluation.Featurizer()
    a = [LabeledSentence(str(i), tuple(t.split()), 0) for i, t in
         enumerate(["movie ekdum bakwaas", "the acting was mast", "theek thaak"])]
    b = [LabeledSentence(str(i), tuple(t.split()), 0) for i, t in enumerate(["kamaal ka gaana", "boring plot"])]
    xa, xb = f.transform(a).toarray(), f.transform(b).toarray()
    brute = sum(math.sqrt(sum((p - q) ** 2 for p, q in zip(u, v))) for u in xa for v in xb) / (len(a) * len(b))
    got = evaluation.feature_distance(a, b, f)
    ok = zero == 0.0 and abs(root2 - math.sqrt(2)) <= 1e-9 and abs(got - brute) <= 1e-12
    verdict(capsys, 9, ok, f"self={zero!r}, disjoint one-hot={root2!r} (sqrt 2 +- 1e-9), "
                           f"3x2 |impl - brute| = {abs(got - brute):.1e}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
