"""Hashed character n-gram features, a linear classifier with categorical or
ordinal cross-entropy, metrics, feature-space distances and the
synthetic:gold ratio grid search."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from sklearn.feature_extraction.text import HashingVectorizer

from .sampling import LabelDistribution, StratificationError, stratified_folds, stratified_sample

log = logging.getLogger(__name__)

CATEGORICAL = "categorical_ce"
ORDINAL = "ordinal_ce"
LOSSES = (CATEGORICAL, ORDINAL)
DEFAULT_RATIO_GRID = (0.25, 0.5, 1.0, 1.5, 2.0)
MAX_DISTANCE_PAIRS = 10**6


@dataclass(frozen=True)
class Featurizer:
    ngram_range: tuple = (1, 4)
    n_features: int = 2**18
    normalize: bool = True
    analyzer: str = "char"

    def _vectorizer(self):
        return HashingVectorizer(
            analyzer=self.analyzer,
            ngram_range=tuple(self.ngram_range),
            n_features=self.n_features,
            alternate_sign=False,
            norm="l2" if self.normalize else None,
            lowercase=True,
            token_pattern=r"\S+" if self.analyzer == "word" else None,
        )

    def transform(self, corpus) -> sp.csr_matrix:
        texts = [" ".join(item.tokens) for item in corpus]
        return self._vectorizer().transform(texts).tocsr()


def feature_distance(a, b, featurizer: Featurizer = Featurizer(), seed: int = 0,
                     max_pairs: int = MAX_DISTANCE_PAIRS) -> float:
    """Mean Euclidean distance over all cross pairs of feature vectors.

    Distances are taken on explicit difference vectors, so identical
    sentences give exactly 0. Beyond ``max_pairs`` pairs a seeded uniform
    sample of ``max_pairs`` pairs is averaged instead.
    """
    a, b = list(a), list(b)
    if not a or not b:
        raise ValueError("both corpora must be non-empty")
    xa, xb = featurizer.transform(a), featurizer.transform(b)
    na, nb = xa.shape[0], xb.shape[0]

    def row_norms(diff):
        return np.sqrt(np.asarray(diff.multiply(diff).sum(axis=1)).ravel())

    if na * nb <= max_pairs:
        parts = []
        for i in range(na):
            parts.extend(row_norms(xb - xa[np.full(nb, i)]).tolist())
        return math.fsum(parts) / (na * nb)
    rng = np.random.default_rng(seed)
    ia = rng.integers(0, na, size=max_pairs)
    ib = rng.integers(0, nb, size=max_pairs)
    parts = []
    for start in range(0, max_pairs, 20000):
        sl = slice(start, start + 20000)
        parts.extend(row_norms(xa[ia[sl]] - xb[ib[sl]]).tolist())
    return math.fsum(parts) / max_pairs


# --------------------------------------------------------------------------
# classifier


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def ordinal_weights(y_idx, pred_idx, num_classes):
    """1 + |true rank - predicted rank|; two-class tasks get weight 1."""
    if num_classes < 3:
        return np.ones(len(y_idx))
    return 1.0 + np.abs(np.asarray(y_idx) - np.asarray(pred_idx))


def loss_and_grad(W, b, X, y_idx, loss=CATEGORICAL, l2=0.0, grad=True):
    """Mean (optionally rank-weighted) cross-entropy and its gradients.

    The ordinal weight depends on the argmax class and is held fixed when
    differentiating; it is piecewise constant in the parameters. With
    ``grad=False`` only the loss value is returned.
    """
    y_idx = np.asarray(y_idx)
    n = X.shape[0]
    k = W.shape[0]
    z = np.asarray(X @ W.T) + b
    p = _softmax(z)
    if loss == ORDINAL:
        w = ordinal_weights(y_idx, z.argmax(axis=1), k)
    elif loss == CATEGORICAL:
        w = np.ones(n)
    else:
        raise ValueError(f"unknown loss {loss!r}")
    nll = -np.log(np.maximum(p[np.arange(n), y_idx], 1e-300))
    value = float(np.dot(w, nll) / n)
    if l2:
        value += 0.5 * l2 * float(np.sum(W * W))
    if not grad:
        return value
    r = p.copy()
    r[np.arange(n), y_idx] -= 1.0
    r *= (w / n)[:, None]
    grad_W = np.asarray((X.T @ r).T)
    if l2:
        grad_W = grad_W + l2 * W
    grad_b = r.sum(axis=0)
    return value, grad_W, grad_b


@dataclass
class LinearClassifier:
    W: np.ndarray
    b: np.ndarray
    classes: tuple
    loss: str
    featurizer: Featurizer = field(default_factory=Featurizer)
    history: list = field(default_factory=list)

    def decision_function(self, corpus):
        X = self.featurizer.transform(corpus)
        return np.asarray(X @ self.W.T) + self.b

    def predict(self, corpus):
        scores = self.decision_function(corpus)
        return [self.classes[i] for i in scores.argmax(axis=1)]


def train_classifier(train, featurizer: Featurizer = Featurizer(), loss=CATEGORICAL,
                     epochs=30, lr=4.0, seed=0, batch_size=16, l2=0.0) -> LinearClassifier:
    """Mini-batch gradient descent on multinomial logistic regression.

    Classes are ordered by label value, which also fixes the ordinal ranks
    (-1, 0, +1 -> 0, 1, 2). Example order per epoch comes from ``seed``.
    """
    train = list(train)
    if not train:
        raise ValueError("training corpus is empty")
    classes = tuple(sorted({s.label for s in train}))
    if len(classes) < 2:
        raise ValueError("training corpus needs at least two distinct labels")
    if loss not in LOSSES:
        raise ValueError(f"unknown loss {loss!r}")
    index = {c: i for i, c in enumerate(classes)}
    X = featurizer.transform(train)
    y = np.array([index[s.label] for s in train])
    k, d = len(classes), X.shape[1]
    W = np.zeros((k, d))
    b = np.zeros(k)
    rng = np.random.default_rng(seed)
    history = []
    n = X.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            rows = order[start:start + batch_size]
            Xb = X[rows]
            cols = np.unique(Xb.indices)
            sub = Xb[:, cols]
            _, gW, gb = loss_and_grad(W[:, cols], b, sub, y[rows], loss, l2)
            W[:, cols] -= lr * gW
            b -= lr * gb
        history.append(loss_and_grad(W, b, X, y, loss, l2, grad=False))
    return LinearClassifier(W, b, classes, loss, featurizer, history)


def evaluate(model: LinearClassifier, test) -> dict:
    """Accuracy, per-label precision/recall/F1, micro- and macro-F1."""
    test = list(test)
    if not test:
        raise ValueError("test corpus is empty")
    gold = [s.label for s in test]
    pred = model.predict(test)
    return classification_metrics(gold, pred, labels=model.classes)


def classification_metrics(gold, pred, labels=None) -> dict:
    labels = sorted(set(gold) | set(pred) | set(labels or ()))
    n = len(gold)
    correct = sum(g == p for g, p in zip(gold, pred))
    per_label = {}
    for lab in labels:
        tp = sum(g == lab and p == lab for g, p in zip(gold, pred))
        fp = sum(g != lab and p == lab for g, p in zip(gold, pred))
        fn = sum(g == lab and p != lab for g, p in zip(gold, pred))
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        per_label[lab] = {"precision": prec, "recall": rec, "f1": f1, "support": tp + fn}
    # single-label multiclass: micro precision = micro recall = accuracy
    micro = correct / n
    return {
        "accuracy": correct / n,
        "micro_f1": micro,
        "macro_f1": sum(v["f1"] for v in per_label.values()) / len(per_label),
        "per_label": per_label,
        "n": n,
    }


# --------------------------------------------------------------------------
# augmentation experiments


def cross_validate(gold, synthetic=(), ratio=0.0, folds=3, seed=0, featurizer=Featurizer(),
                   train_kwargs=None) -> list:
    """Per-fold validation accuracy with each training fold augmented by
    ``round(ratio * |training fold|)`` synthetic sentences sampled to the
    fold's label distribution."""
    gold = list(gold)
    synthetic = list(synthetic)
    train_kwargs = dict(train_kwargs or {})
    train_kwargs.setdefault("seed", seed)
    parts = stratified_folds([s.label for s in gold], folds, seed)
    accs = []
    for k, held in enumerate(parts):
        held_set = set(held)
        train = [s for i, s in enumerate(gold) if i not in held_set]
        valid = [gold[i] for i in held]
        size = int(round(ratio * len(train)))
        if size > 0:
            dist = LabelDistribution.from_corpus(train)
            train = train + stratified_sample(synthetic, dist, size, seed=seed * 1009 + k)
        model = train_classifier(train, featurizer, **train_kwargs)
        accs.append(evaluate(model, valid)["accuracy"])
    return accs


def grid_search_ratio(gold, synthetic, grid=DEFAULT_RATIO_GRID, folds=3, seed=0,
                      featurizer=Featurizer(), train_kwargs=None):
    """Pick the synthetic:gold ratio with the best mean cross-validated accuracy.

    Returns ``(best_ratio, {ratio: mean_accuracy})``. Ratios the synthetic
    pool cannot supply are skipped with a warning; ties go to the smaller
    ratio.
    """
    if folds < 2:
        raise ValueError("need at least two folds")
    scores = {}
    for ratio in sorted(grid):
        try:
            accs = cross_validate(gold, synthetic, ratio, folds, seed, featurizer, train_kwargs)
        except StratificationError as exc:
            log.warning("skipping ratio %s: %s", ratio, exc)
            continue
        scores[ratio] = float(np.mean(accs))
    if not scores:
        raise ValueError("the synthetic pool is too small for every ratio in the grid")
    best = max(scores.items(), key=lambda kv: (kv[1], -kv[0]))[0]
    return best, scores
