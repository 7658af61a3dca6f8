"""Candidate source segments: NP/VP/SBAR constituents and opinionated spans."""

import math
import re
from dataclasses import dataclass, field
from typing import Optional

from .corpus_io import CorpusFormatError, LabeledSentence, ParseTree

NP, VP, SBAR, OPINION = "NP", "VP", "SBAR", "OPINION"
CONSTITUENT_LABELS = (NP, VP, SBAR)
# Lower rank wins when capping and when deduplicating identical spans.
PRIORITY = {OPINION: 0, SBAR: 1, VP: 2, NP: 3}

DEFAULT_NEGATIONS = frozenset(
    "not no never n't nothing nobody none neither nor cannot without".split())
DEFAULT_INTENSIFIERS = frozenset(
    "very really so too extremely quite absolutely totally most more".split())
NEGATION_WINDOW = 3


@dataclass(frozen=True)
class SpanCandidate:
    lo: int
    hi: int
    origin: str
    polarity_score: Optional[float] = None

    def __post_init__(self):
        if not 0 <= self.lo < self.hi:
            raise ValueError(f"invalid span [{self.lo}, {self.hi})")
        if self.origin not in PRIORITY:
            raise ValueError(f"unknown span origin {self.origin!r}")

    @property
    def span(self):
        return (self.lo, self.hi)

    def __len__(self):
        return self.hi - self.lo


@dataclass(frozen=True)
class PolarityLexicon:
    """Word valences plus negation and intensifier word sets.

    Valences are divided by ``scale`` to land in [-1, 1]; a VADER-style
    lexicon on [-4, 4] therefore uses ``scale=4``.
    """

    valences: dict
    negations: frozenset = DEFAULT_NEGATIONS
    intensifiers: frozenset = DEFAULT_INTENSIFIERS
    scale: float = 1.0

    def __post_init__(self):
        for w, v in self.valences.items():
            if not math.isfinite(v):
                raise ValueError(f"valence of {w!r} is not finite")
        if not self.scale > 0:
            raise ValueError("lexicon scale must be positive")

    def valence(self, word):
        return self.valences.get(word.lower())

    def is_modifier(self, word):
        w = word.lower()
        return w in self.negations or w in self.intensifiers


def load_lexicon(path, scale=None, negations=DEFAULT_NEGATIONS,
                 intensifiers=DEFAULT_INTENSIFIERS) -> PolarityLexicon:
    """Read ``word<TAB>valence`` lines (extra columns are ignored).

    Without an explicit ``scale`` the largest absolute valence, floored at 1,
    is used.
    """
    valences = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise CorpusFormatError(f"line {lineno}: expected word<TAB>valence")
            try:
                valences[parts[0].strip().lower()] = float(parts[1])
            except ValueError:
                raise CorpusFormatError(f"line {lineno}: bad valence {parts[1]!r}") from None
    if scale is None:
        scale = max([1.0] + [abs(v) for v in valences.values()])
    return PolarityLexicon(valences, frozenset(negations), frozenset(intensifiers), float(scale))


_FUNCTION_TAG = re.compile(r"[-=]\d+$|-[A-Z]+(?:-[A-Z]+)*$")


def base_label(label: str) -> str:
    """Strip Penn function tags and indices: ``NP-SBJ-1`` -> ``NP``."""
    if label.startswith("-"):
        return label
    prev = None
    while prev != label:
        prev = label
        label = _FUNCTION_TAG.sub("", label)
    return label


def constituent_candidates(tree: ParseTree, labels=CONSTITUENT_LABELS):
    """Every NP, VP or SBAR subtree covering at least two tokens."""
    out = []
    for node in tree.subtrees():
        if node.is_preterminal:
            continue
        label = base_label(node.label)
        if label in labels and node.hi - node.lo >= 2:
            out.append(SpanCandidate(node.lo, node.hi, label))
    return out


def span_polarity(tokens, lo, hi, lexicon: PolarityLexicon):
    """Mean normalized valence of the in-lexicon tokens of ``tokens[lo:hi]``.

    The sign flips when an odd number of negation words sits within three
    tokens before the first sentiment-bearing token. Returns None when the
    span holds no lexicon word.
    """
    values = []
    head = None
    for k in range(lo, hi):
        v = lexicon.valence(tokens[k])
        if v is not None:
            values.append(v)
            if head is None:
                head = k
    if not values:
        return None
    score = sum(values) / len(values) / lexicon.scale
    window = tokens[max(0, head - NEGATION_WINDOW):head]
    if sum(1 for w in window if w.lower() in lexicon.negations) % 2:
        score = -score
    return max(-1.0, min(1.0, score))


def opinion_candidates(sentence: LabeledSentence, lexicon: PolarityLexicon,
                       min_abs_polarity: float = 0.5, max_len: int = 6):
    """Maximal strongly polar spans of 2..max_len tokens.

    A span must begin and end on a lexicon word, negation or intensifier, so
    neutral context words never pad it out. A qualifying span is dropped when
    a qualifying superspan exists.
    """
    if not 0 < min_abs_polarity <= 1:
        raise ValueError(f"min_abs_polarity must be in (0, 1], got {min_abs_polarity}")
    if max_len < 2:
        raise ValueError("max_len must be at least 2")
    toks = sentence.tokens
    n = len(toks)

    def boundary_ok(k):
        return lexicon.valence(toks[k]) is not None or lexicon.is_modifier(toks[k])

    qualifying = []
    for lo in range(n):
        if not boundary_ok(lo):
            continue
        for hi in range(lo + 2, min(n, lo + max_len) + 1):
            if not boundary_ok(hi - 1):
                continue
            score = span_polarity(toks, lo, hi, lexicon)
            if score is not None and abs(score) >= min_abs_polarity:
                qualifying.append((lo, hi, score))
    out = []
    for lo, hi, score in qualifying:
        dominated = any(lo2 <= lo and hi <= hi2 and (lo2, hi2) != (lo, hi)
                        for lo2, hi2, _ in qualifying)
        if not dominated:
            out.append(SpanCandidate(lo, hi, OPINION, score))
    return out


@dataclass(frozen=True)
class SegmentConfig:
    min_abs_polarity: float = 0.5
    max_opinion_len: int = 6
    max_candidates_per_sentence: Optional[int] = None
    labels: tuple = field(default=CONSTITUENT_LABELS)


def select_source_segments(sentence: LabeledSentence, tree: Optional[ParseTree],
                           lexicon: Optional[PolarityLexicon], config: SegmentConfig = SegmentConfig()):
    """Union of constituent and opinion candidates, one per span.

    Spans covering the whole sentence are left out since replacing them
    would not code-switch anything. When a span arises from several origins
    the highest-priority origin (OPINION > SBAR > VP > NP) is kept; the same
    order decides which candidates survive the per-sentence cap.
    """
    pool = []
    if tree is not None:
        if tree.leaves != sentence.tokens:
            raise ValueError(f"tree leaves do not match tokens of sentence {sentence.id!r}")
        pool.extend(constituent_candidates(tree, config.labels))
    if lexicon is not None:
        pool.extend(opinion_candidates(sentence, lexicon, config.min_abs_polarity,
                                       config.max_opinion_len))
    n = len(sentence.tokens)
    best = {}
    for cand in pool:
        if cand.lo == 0 and cand.hi == n:
            continue
        cur = best.get(cand.span)
        if cur is None or PRIORITY[cand.origin] < PRIORITY[cur.origin]:
            best[cand.span] = cand
    chosen = list(best.values())
    cap = config.max_candidates_per_sentence
    if cap is not None and len(chosen) > cap:
        chosen.sort(key=lambda c: (PRIORITY[c.origin], c.lo, c.hi))
        chosen = chosen[:cap]
    chosen.sort(key=lambda c: (c.lo, c.hi))
    return chosen
