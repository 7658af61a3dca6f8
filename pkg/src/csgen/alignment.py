"""Word-pair alignment signals.

IBM Model 1 lexical translation probabilities score word-pair correspondence,
and a sigmoid-squashed IDF measures word rarity on either corpus side.
"""

import logging
import math
import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .corpus_io import CorpusFormatError, ParallelPair

log = logging.getLogger(__name__)

NULL = "<NULL>"
# Lookup floor for word pairs absent from the translation table.
GIZA_EPSILON = 1e-6


@dataclass
class TranslationTable:
    """Lexical probabilities t(target | source).

    ``probs[source][target]`` holds the probability; the source vocabulary
    includes the ``NULL`` token.
    """

    probs: dict
    source_vocab: frozenset = frozenset()
    target_vocab: frozenset = frozenset()
    log_likelihoods: list = field(default_factory=list)

    def prob(self, target_word, source_word, default=0.0):
        return self.probs.get(source_word, {}).get(target_word, default)

    def normalization_errors(self):
        return {e: abs(sum(row.values()) - 1.0) for e, row in self.probs.items()}


def _initial_table(pairs):
    target_vocab = set()
    cooc = defaultdict(set)
    for p in pairs:
        target_vocab.update(p.target_tokens)
        for e in (NULL,) + p.source.tokens:
            cooc[e].update(p.target_tokens)
    uniform = 1.0 / len(target_vocab)
    probs = {e: {f: uniform for f in sorted(fs)} for e, fs in cooc.items()}
    return probs, target_vocab


def corpus_log_likelihood(pairs: Sequence[ParallelPair], probs) -> float:
    """Model 1 log-likelihood, dropping the constant length term."""
    total = 0.0
    for p in pairs:
        src = (NULL,) + p.source.tokens
        norm = math.log(len(src))
        for f in p.target_tokens:
            mass = sum(probs[e].get(f, 0.0) for e in src)
            total += math.log(mass) - norm
    return total


def _em_step(pairs, probs):
    counts = defaultdict(lambda: defaultdict(float))
    for p in pairs:
        src = (NULL,) + p.source.tokens
        for f in p.target_tokens:
            weights = [probs[e][f] for e in src]
            z = sum(weights)
            for e, w in zip(src, weights):
                counts[e][f] += w / z
    new = {}
    for e in sorted(counts):
        row = counts[e]
        total = sum(row.values())
        new[e] = {f: c / total for f, c in sorted(row.items())}
    return new


def train_ibm1(pairs: Sequence[ParallelPair], iterations: int = 10, init: str = "uniform") -> TranslationTable:
    """Estimate t(target | source) with IBM Model 1 EM from a uniform start.

    A NULL token is prepended to every source sentence. The result is fully
    determined by the corpus; ``log_likelihoods`` records the corpus
    log-likelihood before the first and after every iteration.
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if init != "uniform":
        raise ValueError(f"unsupported init {init!r}; only 'uniform' is available")
    pairs = list(pairs)
    if not pairs:
        raise ValueError("cannot train an alignment model on an empty corpus")
    probs, target_vocab = _initial_table(pairs)
    history = [corpus_log_likelihood(pairs, probs)]
    for it in range(iterations):
        probs = _em_step(pairs, probs)
        history.append(corpus_log_likelihood(pairs, probs))
        log.debug("ibm1 iteration %d: log-likelihood %.6f", it + 1, history[-1])
    return TranslationTable(
        probs=probs,
        source_vocab=frozenset(probs),
        target_vocab=frozenset(target_vocab),
        log_likelihoods=history,
    )


def giza_matrix(pair: ParallelPair, table: TranslationTable, epsilon: float = GIZA_EPSILON) -> np.ndarray:
    """G[i][j] = t(target_i | source_j); unseen word pairs get ``epsilon``."""
    src = pair.source.tokens
    tgt = pair.target_tokens
    mat = np.empty((len(tgt), len(src)))
    for j, e in enumerate(src):
        row = table.probs.get(e, {})
        for i, f in enumerate(tgt):
            mat[i, j] = row.get(f, epsilon)
    mat.setflags(write=False)
    return mat


def save_translation_table(table: TranslationTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for e in sorted(table.probs):
            for tgt, p in sorted(table.probs[e].items()):
                f.write(f"{tgt}\t{e}\t{p!r}\n")


def load_translation_table(path) -> TranslationTable:
    probs = defaultdict(dict)
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise CorpusFormatError(f"line {lineno}: expected target<TAB>source<TAB>prob")
            tgt, e, p = parts
            try:
                value = float(p)
            except ValueError:
                raise CorpusFormatError(f"line {lineno}: bad probability {p!r}") from None
            if not 0.0 <= value <= 1.0:
                raise CorpusFormatError(f"line {lineno}: probability {value} outside [0, 1]")
            probs[e][tgt] = value
    target_vocab = {f for row in probs.values() for f in row}
    return TranslationTable(dict(probs), frozenset(probs), frozenset(target_vocab))


# --------------------------------------------------------------------------
# rarity


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


@dataclass(frozen=True)
class IdfModel:
    idf: dict
    a: float = 1.0
    b: float = 0.0
    num_documents: int = 0

    @property
    def max_idf(self) -> float:
        return max(self.idf.values()) if self.idf else 0.0

    def raw(self, word) -> float:
        value = self.idf.get(word)
        return self.max_idf if value is None else value


def build_idf(documents: Iterable[Sequence[str]], a: float = 1.0, b=None) -> IdfModel:
    """idf(w) = ln(N / df(w)) with df counted over sentences.

    ``b`` defaults to ``a * median(idf)`` so the median word squashes to 0.5.
    """
    docs = [tuple(d) for d in documents]
    if not docs:
        raise ValueError("cannot build idf from an empty corpus")
    df = Counter()
    for d in docs:
        df.update(set(d))
    n = len(docs)
    idf = {w: math.log(n / c) for w, c in sorted(df.items())}
    if b is None:
        b = a * statistics.median(idf.values())
    return IdfModel(idf=idf, a=float(a), b=float(b), num_documents=n)


# Largest and smallest doubles strictly inside (0, 1).
_BELOW_ONE = 1.0 - 2.0**-53
_ABOVE_ZERO = 5e-324


def squashed_idf(word, model: IdfModel) -> float:
    """I(w) = sigmoid(a * idf(w) - b); unseen words take the largest idf.

    The value is kept strictly inside (0, 1) even where the double-precision
    sigmoid saturates.
    """
    return min(_BELOW_ONE, max(_ABOVE_ZERO, sigmoid(model.a * model.raw(word) - model.b)))


def squashed_idf_vector(words: Sequence[str], model: IdfModel) -> np.ndarray:
    return np.array([squashed_idf(w, model) for w in words])
