"""Independent reference computations used to cross-check the package."""

import itertools
import math

import numpy as np
from scipy.optimize import linprog


def em_ibm1(corpus, iters):
    """Dense-array Model 1 EM; ``corpus`` is [(source_words, target_words)]."""
    S = sorted({w for s, _ in corpus for w in s} | {"<NULL>"})
    T = sorted({w for _, t in corpus for w in t})
    si = {w: i for i, w in enumerate(S)}
    ti = {w: i for i, w in enumerate(T)}
    cooc = np.zeros((len(S), len(T)), bool)
    for s, t in corpus:
        for e in ["<NULL>", *s]:
            for f in t:
                cooc[si[e], ti[f]] = True
    tab = np.where(cooc, 1.0 / len(T), 0.0)
    for _ in range(iters):
        c = np.zeros_like(tab)
        for s, t in corpus:
            es = [si[e] for e in ["<NULL>", *s]]
            for f in t:
                col = tab[es, ti[f]]
                for e, v in zip(es, col):
                    c[e, ti[f]] += v / col.sum()
        tab = c / c.sum(axis=1, keepdims=True)
    return {(e, f): tab[si[e], ti[f]] for e in S for f in T if cooc[si[e], ti[f]]}


def emd_lp(d):
    """Balanced transport LP solved by HiGHS.

    ``d`` has shape (m, n); every row ships 1/m and every column receives 1/n.
    """
    d = np.asarray(d, dtype=float)
    m, n = d.shape
    a_eq, b_eq = [], []
    for i in range(m):
        row = np.zeros((m, n))
        row[i, :] = 1
        a_eq.append(row.ravel())
        b_eq.append(1.0 / m)
    for j in range(n):
        col = np.zeros((m, n))
        col[:, j] = 1
        a_eq.append(col.ravel())
        b_eq.append(1.0 / n)
    res = linprog(d.ravel(), A_eq=np.array(a_eq), b_eq=b_eq, bounds=(0, None), method="highs")
    assert res.success
    return res.fun


def emd_square_assignment(d):
    """For square d the uniform transport optimum is a permutation (Birkhoff)."""
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    return min(sum(d[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n))) / n


def spans(tgt_len, max_len):
    return [(j, j + y) for j in range(tgt_len) for y in range(1, max_len + 1) if j + y <= tgt_len]


def product_objective(mass, span):
    """Plain (linear-space) product of per-word masses."""
    return math.prod(mass[span[0]:span[1]])


def brute_best(values, maximize, p_s, tgt_len, src_len, rtol=1e-12):
    """Exhaustive optimum plus the set of spans within tolerance, resolved
    by positional closeness, length, start."""
    best = max(values.values()) if maximize else min(values.values())
    tol = rtol * max(1.0, abs(best))
    tied = [sp for sp, v in values.items() if abs(v - best) <= tol]
    tied.sort(key=lambda sp: (abs(sp[0] / tgt_len - p_s[0] / src_len), sp[1] - sp[0], sp[0]))
    return best, tied[0]


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def emd_assignment(d):
    """Uniform transport as an mn x mn assignment problem.

    Row i is split into n unit suppliers and column j into m unit consumers;
    integrality of the transport polytope makes the optimum equal.
    """
    from scipy.optimize import linear_sum_assignment

    d = np.asarray(d, dtype=float)
    m, n = d.shape
    big = np.repeat(np.repeat(d, n, axis=0), m, axis=1)
    r, c = linear_sum_assignment(big)
    return float(big[r, c].sum()) / (m * n)
