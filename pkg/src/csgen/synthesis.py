"""Projection of target spans into source sentences and candidate selection
by reverse-translation BLEU."""

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .corpus_io import CorpusFormatError, LabeledSentence, dump_jsonl
from .providers import ProviderError
from .target_segments import METHODS, SIMILARITY_METHODS, TargetSelection

log = logging.getLogger(__name__)

SRC, TGT = "SRC", "TGT"
BLEU_EPSILON = 1e-9


class ProjectionError(RuntimeError):
    pass


class CandidateFiltered(ValueError):
    """No candidate survived the per-method score cutoffs."""


@dataclass(frozen=True)
class Provenance:
    source_id: str
    span: tuple
    method: str
    method_score: float
    target_span: tuple
    bleu: Optional[float] = None

    def to_json(self):
        return {
            "source_id": self.source_id,
            "span": list(self.span),
            "method": self.method,
            "method_score": self.method_score,
            "bleu": self.bleu,
            "target_span": list(self.target_span),
        }


@dataclass(frozen=True)
class SyntheticSentence:
    id: str
    tokens: tuple
    language_mask: tuple
    label: int
    provenance: Provenance

    def __post_init__(self):
        if len(self.tokens) != len(self.language_mask):
            raise ValueError("language mask length differs from token count")
        if SRC not in self.language_mask or TGT not in self.language_mask:
            raise ValueError("a synthetic sentence needs both source and target tokens")

    @property
    def bleu(self):
        return self.provenance.bleu

    def to_json(self):
        return {
            "id": self.id,
            "tokens": list(self.tokens),
            "language_mask": list(self.language_mask),
            "label": self.label,
            "provenance": self.provenance.to_json(),
        }

    @classmethod
    def from_json(cls, rec):
        prov = rec["provenance"]
        return cls(
            id=str(rec["id"]),
            tokens=tuple(rec["tokens"]),
            language_mask=tuple(rec["language_mask"]),
            label=int(rec["label"]),
            provenance=Provenance(
                source_id=str(prov["source_id"]),
                span=tuple(prov["span"]),
                method=prov["method"],
                method_score=float(prov["method_score"]),
                target_span=tuple(prov.get("target_span", ())),
                bleu=None if prov.get("bleu") is None else float(prov["bleu"]),
            ),
        )


def save_synthetic(corpus, path):
    dump_jsonl((c.to_json() for c in corpus), path)


def load_synthetic(path):
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                out.append(SyntheticSentence.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorpusFormatError(f"line {lineno}: bad synthetic record ({exc})") from None
    return out


def project(s: LabeledSentence, target_tokens: Sequence[str], p_s, selection: TargetSelection,
            translit) -> SyntheticSentence:
    """Replace ``s[lo:hi]`` by the transliterated target span."""
    lo, hi = p_s
    n = len(s.tokens)
    if not 0 <= lo < hi <= n:
        raise ProjectionError(f"source span [{lo}, {hi}) out of range for {n} tokens")
    if lo == 0 and hi == n:
        raise ProjectionError("replacing the entire sentence would not code-switch it")
    if not 0 <= selection.lo < selection.hi <= len(target_tokens):
        raise ProjectionError(f"target span {selection.span} out of range")
    segment = list(target_tokens[selection.lo:selection.hi])
    try:
        inserted = list(translit.transliterate(segment))
    except ProviderError as exc:
        raise ProjectionError(f"transliteration failed for {s.id!r}: {exc}") from exc
    if len(inserted) != len(segment):
        raise ProjectionError(f"transliteration changed the token count for {s.id!r}")
    tokens = s.tokens[:lo] + tuple(inserted) + s.tokens[hi:]
    mask = (SRC,) * lo + (TGT,) * len(inserted) + (SRC,) * (n - hi)
    prov = Provenance(s.id, (lo, hi), selection.method, float(selection.score), selection.span)
    return SyntheticSentence(f"{s.id}:{lo}-{hi}", tokens, mask, s.label, prov)


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: Sequence[str], reference: Sequence[str], max_n: int = 4,
         epsilon: float = BLEU_EPSILON) -> float:
    """Smoothed sentence-level BLEU.

    Orders run from 1 to min(max_n, len(reference)); a zero match count or
    an order the candidate is too short for contributes ``epsilon``.
    """
    if not reference:
        raise ValueError("reference must be non-empty")
    if not candidate:
        return 0.0
    candidate, reference = list(candidate), list(reference)
    orders = min(max_n, len(reference))
    log_p = 0.0
    for n in range(1, orders + 1):
        cand = _ngrams(candidate, n)
        total = sum(cand.values())
        ref = _ngrams(reference, n)
        matches = sum(min(c, ref[g]) for g, c in cand.items())
        p = matches / total if matches else epsilon
        log_p += math.log(p)
    c, r = len(candidate), len(reference)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return min(1.0, bp * math.exp(log_p / orders))


@dataclass(frozen=True)
class MethodCutoffs:
    """Lower cutoffs for similarity methods, upper cutoffs for EMD methods."""

    thresholds: dict

    def passes(self, method, score) -> bool:
        limit = self.thresholds.get(method)
        if limit is None:
            return True
        if method in SIMILARITY_METHODS:
            return score >= limit
        return score <= limit


def compute_cutoffs(selections, similarity_percentile=20.0, dissimilarity_percentile=80.0) -> MethodCutoffs:
    """Per-method percentile cutoffs over all selections of a run."""
    by_method = {}
    for sel in selections:
        by_method.setdefault(sel.method, []).append(sel.score)
    thresholds = {}
    for method in METHODS:
        scores = by_method.get(method)
        if not scores:
            continue
        pct = similarity_percentile if method in SIMILARITY_METHODS else dissimilarity_percentile
        thresholds[method] = float(np.percentile(np.asarray(scores), pct))
    return MethodCutoffs(thresholds)


def word_overlap(a, b) -> int:
    return len(set(a) & set(b))


def select_best(candidates: Sequence[SyntheticSentence], s: LabeledSentence, rev,
                cutoffs: Optional[MethodCutoffs] = None, max_n: int = 4) -> SyntheticSentence:
    """Keep the candidate whose reverse translation scores the highest BLEU
    against ``s``; ties go to larger type overlap with ``s``, then to method
    order. Candidates whose reverse translation fails rank below the rest
    and carry BLEU 0.
    """
    pool = list(candidates)
    if cutoffs is not None:
        pool = [c for c in pool if cutoffs.passes(c.provenance.method, c.provenance.method_score)]
    if not pool:
        raise CandidateFiltered(f"no candidate for {s.id!r} passed the score cutoffs")
    ranked = []
    for cand in pool:
        try:
            back = rev.reverse_translate(list(cand.tokens))
            ok = True
            score = bleu(back, s.tokens, max_n)
        except ProviderError as exc:
            log.warning("reverse translation failed for %s: %s", cand.id, exc)
            ok, score = False, 0.0
        method_rank = METHODS.index(cand.provenance.method) if cand.provenance.method in METHODS else len(METHODS)
        key = (ok, score, word_overlap(cand.tokens, s.tokens), -method_rank)
        ranked.append((key, cand, score))
    _, winner, score = max(ranked, key=lambda r: r[0])
    return replace(winner, provenance=replace(winner.provenance, bleu=score))


def threshold_filter(corpus, bleu_floor: float):
    if not 0.0 <= bleu_floor <= 1.0:
        raise ValueError(f"bleu_floor must be in [0, 1], got {bleu_floor}")
    return [c for c in corpus if c.provenance.bleu is not None and c.provenance.bleu >= bleu_floor]
