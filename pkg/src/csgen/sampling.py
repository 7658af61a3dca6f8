"""Label-stratified sampling and fold construction."""

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np


class StratificationError(ValueError):
    def __init__(self, label, need, have):
        super().__init__(f"label {label}: need {need} sentence(s), have {have}")
        self.label = label
        self.need = need
        self.have = have


@dataclass(frozen=True)
class LabelDistribution:
    proportions: Mapping

    def __post_init__(self):
        props = {k: float(v) for k, v in sorted(self.proportions.items())}
        if not props:
            raise ValueError("label distribution is empty")
        if any(v < 0 for v in props.values()):
            raise ValueError("label proportions must be non-negative")
        if abs(sum(props.values()) - 1.0) > 1e-9:
            raise ValueError(f"label proportions sum to {sum(props.values())}, not 1")
        object.__setattr__(self, "proportions", props)

    @classmethod
    def from_corpus(cls, corpus):
        counts = Counter(s.label for s in corpus)
        if not counts:
            raise ValueError("cannot take a label distribution from an empty corpus")
        total = sum(counts.values())
        return cls({k: c / total for k, c in counts.items()})

    def labels(self):
        return list(self.proportions)


def largest_remainder_counts(dist: LabelDistribution, total: int) -> dict:
    """Hamilton apportionment of ``total`` over the labels.

    Leftover units go to the largest fractional parts; equal remainders are
    served in ascending label order.
    """
    if total < 0:
        raise ValueError("total must be non-negative")
    quotas = {k: Fraction(v).limit_denominator(10**12) * total for k, v in dist.proportions.items()}
    counts = {k: int(q) for k, q in quotas.items()}
    leftover = total - sum(counts.values())
    order = sorted(quotas, key=lambda k: (-(quotas[k] - counts[k]), k))
    for k in order[:leftover]:
        counts[k] += 1
    return counts


def stratified_sample(corpus, target_dist: LabelDistribution, total: int, seed: int = 0) -> list:
    """Sample ``total`` items without replacement matching ``target_dist``.

    The chosen items keep their corpus order.
    """
    if total < 1:
        raise ValueError("total must be at least 1")
    counts = largest_remainder_counts(target_dist, total)
    items = list(corpus)
    pools = {}
    for idx, item in enumerate(items):
        pools.setdefault(item.label, []).append(idx)
    rng = np.random.default_rng(seed)
    chosen = []
    for label in sorted(counts):
        need = counts[label]
        have = len(pools.get(label, ()))
        if have < need or (have == 0 and target_dist.proportions[label] > 0):
            raise StratificationError(label, max(need, 1), have)
        if need:
            picked = rng.choice(have, size=need, replace=False)
            chosen.extend(pools[label][i] for i in picked)
    chosen.sort()
    return [items[i] for i in chosen]


def stratified_folds(labels, folds: int, seed: int = 0) -> list:
    """Partition positions ``0..len(labels)-1`` into ``folds`` disjoint folds,
    dealing each label's shuffled members round-robin."""
    if folds < 2:
        raise ValueError("need at least two folds")
    if len(labels) < folds:
        raise ValueError(f"cannot split {len(labels)} items into {folds} folds")
    rng = np.random.default_rng(seed)
    by_label = {}
    for i, lab in enumerate(labels):
        by_label.setdefault(lab, []).append(i)
    out = [[] for _ in range(folds)]
    k = 0
    for lab in sorted(by_label):
        members = by_label[lab]
        for pos in rng.permutation(len(members)):
            out[k % folds].append(members[pos])
            k += 1
    return [sorted(f) for f in out]
