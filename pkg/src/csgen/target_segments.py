"""Target-side span selection for a given source segment.

Four selectors are available. Two maximise a product of per-target-word
alignment mass (Giza scores, or IDF-weighted attention) and two minimise the
earth mover's distance under ``1 - score`` word distances.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .alignment import IdfModel, squashed_idf_vector
from .transport import emd

log = logging.getLogger(__name__)

MAXSIM_GIZA = "MAXSIM_GIZA"
MAXSIM_ATTN_IDF = "MAXSIM_ATTN_IDF"
MINDIS_EMD_ATTN = "MINDIS_EMD_ATTN"
MINDIS_EMD_GIZA = "MINDIS_EMD_GIZA"
METHODS = (MAXSIM_GIZA, MAXSIM_ATTN_IDF, MINDIS_EMD_ATTN, MINDIS_EMD_GIZA)
SIMILARITY_METHODS = frozenset({MAXSIM_GIZA, MAXSIM_ATTN_IDF})

# Objectives closer than this (relative) are treated as ties.
TIE_RTOL = 1e-12


class NoAlignmentSignal(ValueError):
    """The score matrix carries no mass for the source segment."""


class SegmentSelectionFailed(ValueError):
    """None of the selectors produced a target span."""


@dataclass(frozen=True)
class TargetSelection:
    lo: int
    hi: int
    method: str
    score: float

    @property
    def span(self):
        return (self.lo, self.hi)

    def __len__(self):
        return self.hi - self.lo


def max_target_span(src_len: int, tgt_len: int, cap=None) -> int:
    """Longest target span considered: max(2|p|, |p|+3), bounded by |t|."""
    limit = max(2 * src_len, src_len + 3) if cap is None else cap
    return max(1, min(tgt_len, limit))


def candidate_spans(tgt_len: int, max_len: int):
    for j in range(tgt_len):
        for y in range(1, min(max_len, tgt_len - j) + 1):
            yield j, j + y


def _check_inputs(p_s, mat, src_len):
    lo, hi = p_s
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2:
        raise ValueError("score matrix must be two-dimensional")
    if src_len is not None and mat.shape[1] != src_len:
        raise ValueError(f"score matrix has {mat.shape[1]} columns for a {src_len}-token source")
    if not 0 <= lo < hi <= mat.shape[1]:
        raise ValueError(f"source span [{lo}, {hi}) out of range")
    return lo, hi, mat


def tie_key(span, p_s, tgt_len, src_len):
    """Order for equal objectives: positional closeness, then length, then start."""
    j, end = span
    rel = abs(j / tgt_len - p_s[0] / src_len)
    return (rel, end - j, j)


def _pick(scored, better, p_s, tgt_len, src_len):
    """``scored`` is a list of (objective, span); ``better`` is +1 to maximise."""
    best_val = None
    for val, _ in scored:
        if best_val is None or better * (val - best_val) > 0:
            best_val = val
    tol = TIE_RTOL * max(1.0, abs(best_val))
    tied = [span for val, span in scored if abs(val - best_val) <= tol]
    tied.sort(key=lambda sp: tie_key(sp, p_s, tgt_len, src_len))
    return best_val, tied[0]


def _maxsim(row_mass, p_s, src_len, method, max_len, normalize):
    """Best span by sum of log row masses; zero mass makes a span -inf."""
    tgt_len = len(row_mass)
    with np.errstate(divide="ignore"):
        logs = np.log(row_mass)
    scored = []
    for j, end in candidate_spans(tgt_len, max_len):
        seg = logs[j:end]
        if np.isneginf(seg).any():
            continue
        total = math.fsum(seg)
        if normalize:
            total /= end - j
        scored.append((total, (j, end)))
    if not scored:
        raise NoAlignmentSignal(f"{method}: every target span has zero alignment mass")
    best, span = _pick(scored, +1, p_s, tgt_len, src_len)
    return TargetSelection(span[0], span[1], method, math.exp(best))


def maxsim_giza(p_s, target_tokens, giza, max_len=None, normalize=False) -> TargetSelection:
    """argmax over target spans of prod_{w_t} sum_{w_s in p_s} G[w_t, w_s].

    ``score`` is the product itself (its geometric mean when ``normalize``).
    """
    lo, hi, g = _check_inputs(p_s, giza, None)
    if g.shape[0] != len(target_tokens):
        raise ValueError("score matrix rows do not match the target sentence")
    mass = g[:, lo:hi].sum(axis=1)
    limit = max_target_span(hi - lo, len(target_tokens), max_len)
    return _maxsim(mass, (lo, hi), g.shape[1], MAXSIM_GIZA, limit, normalize)


def maxsim_attention_idf(p_s, target_tokens, attention, idf_src: IdfModel, idf_tgt: IdfModel,
                         source_tokens=None, max_len=None, normalize=False) -> TargetSelection:
    """argmax of prod_{w_t} I(w_t) sum_{w_s in p_s} I(w_s) A[w_t, w_s].

    ``source_tokens`` supplies the words for the source-side IDF weights.
    """
    if source_tokens is None:
        raise ValueError("source_tokens are needed for the source-side idf weights")
    lo, hi, a = _check_inputs(p_s, attention, len(source_tokens))
    if a.shape[0] != len(target_tokens):
        raise ValueError("score matrix rows do not match the target sentence")
    w_src = squashed_idf_vector(source_tokens[lo:hi], idf_src)
    w_tgt = squashed_idf_vector(target_tokens, idf_tgt)
    mass = w_tgt * (a[:, lo:hi] @ w_src)
    limit = max_target_span(hi - lo, len(target_tokens), max_len)
    return _maxsim(mass, (lo, hi), a.shape[1], MAXSIM_ATTN_IDF, limit, normalize)


def mindissim(p_s, target_tokens, base, kind="ATTN", max_len=None) -> TargetSelection:
    """argmin over target spans of EMD(q_t, p_s) with distances 1 - base.

    Entries above 1 are clamped. A segment whose columns are all zero has
    a flat EMD landscape and raises NoAlignmentSignal.
    """
    method = {"ATTN": MINDIS_EMD_ATTN, "GIZA": MINDIS_EMD_GIZA}.get(kind)
    if method is None:
        raise ValueError(f"kind must be ATTN or GIZA, got {kind!r}")
    lo, hi, b = _check_inputs(p_s, base, None)
    if b.shape[0] != len(target_tokens):
        raise ValueError("score matrix rows do not match the target sentence")
    if (b > 1).any():
        log.warning("%s: clamping %d score(s) above 1", method, int((b > 1).sum()))
        b = np.minimum(b, 1.0)
    block = b[:, lo:hi]
    if not block.any():
        raise NoAlignmentSignal(f"{method}: source segment has no alignment mass")
    dist = 1.0 - block
    tgt_len = len(target_tokens)
    limit = max_target_span(hi - lo, tgt_len, max_len)
    scored = [(emd(dist[j:end]).objective, (j, end)) for j, end in candidate_spans(tgt_len, limit)]
    best, span = _pick(scored, -1, (lo, hi), tgt_len, b.shape[1])
    return TargetSelection(span[0], span[1], method, best)


def all_selections(p_s, source_tokens, target_tokens, attention=None, giza=None,
                   idf_src: Optional[IdfModel] = None, idf_tgt: Optional[IdfModel] = None,
                   max_len=None, normalize=False) -> dict:
    """Run every selector that has its inputs; failures leave a slot empty.

    Returns ``{method: TargetSelection}`` in method order. Raises
    SegmentSelectionFailed when no selector succeeds.
    """
    out = {}
    errors = {}
    jobs = []
    if giza is not None:
        jobs.append((MAXSIM_GIZA, lambda: maxsim_giza(p_s, target_tokens, giza, max_len, normalize)))
    if attention is not None and idf_src is not None and idf_tgt is not None:
        jobs.append((MAXSIM_ATTN_IDF, lambda: maxsim_attention_idf(
            p_s, target_tokens, attention, idf_src, idf_tgt, source_tokens, max_len, normalize)))
    if attention is not None:
        jobs.append((MINDIS_EMD_ATTN, lambda: mindissim(p_s, target_tokens, attention, "ATTN", max_len)))
    if giza is not None:
        jobs.append((MINDIS_EMD_GIZA, lambda: mindissim(p_s, target_tokens, giza, "GIZA", max_len)))
    for method, job in jobs:
        try:
            out[method] = job()
        except NoAlignmentSignal as exc:
            errors[method] = str(exc)
    if not out:
        detail = "; ".join(errors.values()) or "no score matrices available"
        raise SegmentSelectionFailed(f"span [{p_s[0]}, {p_s[1]}): {detail}")
    return {m: out[m] for m in METHODS if m in out}
