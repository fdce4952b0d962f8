"""Independent reference implementations used as test oracles.

These deliberately avoid the package's fast paths: plain loops, dicts and
dense linear algebra.
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np

from mrmrfs import measures
from mrmrfs.forest import train_forest
from mrmrfs.selector import pair_rdc_params


def mi_from_pairs(pairs) -> float:
    """Plug-in mutual information (nats) by enumerating joint cells."""
    pairs = list(pairs)
    n = len(pairs)
    joint = Counter(pairs)
    px = Counter(a for a, _ in pairs)
    py = Counter(b for _, b in pairs)
    total = 0.0
    for (a, b), c in joint.items():
        pxy = c / n
        total += pxy * math.log(pxy / ((px[a] / n) * (py[b] / n)))
    return total


def mi_from_table(table) -> float:
    pairs = []
    for i, row in enumerate(np.asarray(table)):
        for j, c in enumerate(row):
            pairs.extend([(i, j)] * int(c))
    return mi_from_pairs(pairs)


def pearson_loops(x, y) -> float:
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def natural_spline_dense(knots, values, x):
    """Natural cubic spline via a dense solve for the second derivatives."""
    w = np.asarray(knots, float)
    v = np.asarray(values, float)
    k = w.size
    h = np.diff(w)
    a = np.zeros((k, k))
    rhs = np.zeros(k)
    a[0, 0] = a[-1, -1] = 1.0
    for i in range(1, k - 1):
        a[i, i - 1] = h[i - 1]
        a[i, i] = 2 * (h[i - 1] + h[i])
        a[i, i + 1] = h[i]
        rhs[i] = 6 * ((v[i + 1] - v[i]) / h[i] - (v[i] - v[i - 1]) / h[i - 1])
    m = np.linalg.solve(a, rhs)
    out = []
    for t in np.atleast_1d(x):
        i = min(max(int(np.searchsorted(w, t, side="right")) - 1, 0), k - 2)
        hi = h[i]
        A = (w[i + 1] - t) / hi
        B = (t - w[i]) / hi
        out.append(A * v[i] + B * v[i + 1]
                   + ((A ** 3 - A) * m[i] + (B ** 3 - B) * m[i + 1]) * hi * hi / 6.0)
    return np.array(out)


def naive_select(data, method, max_features, forest_params=None, rdc_params=None,
                 bins=measures.DEFAULT_BINS, eps=1e-6):
    """Greedy mRMR with every score recomputed from scratch at each step."""
    y = data.labels
    m = data.m
    selected = []

    def relevance(i):
        if method.relevance == "mutual_information":
            return measures.mutual_information(data.column(i), y, bins)
        if method.relevance == "f_statistic":
            return measures.f_statistic(data.column(i), y)
        return float(train_forest(data, forest_params).importance[i])

    def measure(i, s):
        a, b = min(i, s), max(i, s)
        if method.redundancy == "abs_pearson":
            return abs(measures.pearson(data.column(a), data.column(b)))
        if method.redundancy == "mutual_information":
            return measures.mutual_information(data.column(a), data.column(b), bins)
        return measures.rdc(data.column(a), data.column(b),
                            pair_rdc_params(rdc_params or measures.RdcParams(), a, b))

    constant = [bool(np.all(data.column(j) == data.column(j)[0])) for j in range(m)]
    while len(selected) < max_features:
        cands = [i for i in range(m) if i not in selected and not constant[i]]
        if not cands:
            break
        best_i, best_score = None, None
        for i in cands:
            rel = relevance(i)
            if not selected or method.scheme == "relevance_only":
                score = rel
            else:
                total = 0.0
                for s in selected:
                    total += measure(i, s)
                red = total / len(selected)
                score = rel - red if method.scheme == "difference" else rel / max(red, eps)
            if best_score is None or score > best_score:
                best_i, best_score = i, score
        selected.append(best_i)
    return selected
