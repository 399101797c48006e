"""Slow, direct reference implementations used only as test oracles.

Nothing here imports from the package: splits are found by enumerating every
(feature, midpoint) pair and counting rows one at a time, and metrics are
evaluated straight from the label lists.
"""

import itertools
import math


def gini(counts):
    total = sum(counts)
    acc = 0.0
    for c in counts:
        p = c / total
        acc = acc + p * p
    return 1.0 - acc


def weighted(left, right):
    nl, nr = sum(left), sum(right)
    n = nl + nr
    return (nl / n) * gini(left) + (nr / n) * gini(right)


def mid(a, b):
    m = (a + b) / 2.0
    return a if m >= b else m


def enumerate_splits(rows, X, y, n_classes, features=None):
    """Every candidate as (impurity, feature, threshold, n_left, n_right)."""
    features = range(len(X[0])) if features is None else features
    out = []
    for f in features:
        values = sorted({X[r][f] for r in rows})
        for a, b in zip(values, values[1:]):
            thr = mid(a, b)
            left = [0] * n_classes
            right = [0] * n_classes
            for r in rows:
                if X[r][f] <= thr:
                    left[y[r]] += 1
                else:
                    right[y[r]] += 1
            out.append((weighted(left, right), f, thr, sum(left), sum(right)))
    return out


def best_split(rows, X, y, n_classes, features=None):
    cands = enumerate_splits(rows, X, y, n_classes, features)
    return min(cands) if cands else None


def grow(rows, X, y, n_classes, depth=0, max_depth=None, min_split=2, min_leaf=1):
    counts = [0] * n_classes
    for r in rows:
        counts[y[r]] += 1
    leaf = {"leaf": counts.index(max(counts))}
    if sum(1 for c in counts if c) <= 1 or len(rows) < min_split:
        return leaf
    if max_depth is not None and depth >= max_depth:
        return leaf
    split = best_split(rows, X, y, n_classes)
    if split is None or min(split[3], split[4]) < min_leaf:
        return leaf
    _, f, thr, _, _ = split
    return {
        "f": f,
        "t": thr,
        "l": grow([r for r in rows if X[r][f] <= thr], X, y, n_classes, depth + 1,
                  max_depth, min_split, min_leaf),
        "r": grow([r for r in rows if X[r][f] > thr], X, y, n_classes, depth + 1,
                  max_depth, min_split, min_leaf),
    }


def predict(node, row):
    while "leaf" not in node:
        node = node["l"] if row[node["f"]] <= node["t"] else node["r"]
    return node["leaf"]


def depth(node):
    if "leaf" in node:
        return 0
    return 1 + max(depth(node["l"]), depth(node["r"]))


def metrics(y_true, y_pred, n_classes):
    """Table of formulas evaluated class by class from raw label lists."""
    n = len(y_true)
    correct = sum(1 for t, p in zip(y_true, y_pred) if t == p)
    acc = correct / n
    prec, rec, f1, sup = [], [], [], []
    for c in range(n_classes):
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == c and p != c)
        pc = tp / (tp + fp) if tp + fp else 0.0
        rc = tp / (tp + fn) if tp + fn else 0.0
        fc = 2 * pc * rc / (pc + rc) if pc + rc else 0.0
        prec.append(pc)
        rec.append(rc)
        f1.append(fc)
        sup.append(tp + fn)
    w = lambda v: sum(a * b for a, b in zip(v, sup)) / n
    p_o = acc
    p_e = sum(
        sum(1 for t in y_true if t == c) * sum(1 for p in y_pred if p == c)
        for c in range(n_classes)
    ) / (n * n)
    if p_e == 1.0:
        kappa = 1.0 if p_o == 1.0 else 0.0
    else:
        kappa = (p_o - p_e) / (1 - p_e)
    return {
        "accuracy": acc,
        "error_rate": 1 - acc,
        "precision": w(prec),
        "recall": w(rec),
        "f1": w(f1),
        "cohen_kappa": kappa,
    }


def pair_auc(is_pos, scores):
    pos = [s for p, s in zip(is_pos, scores) if p]
    neg = [s for p, s in zip(is_pos, scores) if not p]
    if not pos or not neg:
        return None
    wins = 0.0
    for a, b in itertools.product(pos, neg):
        wins += 1.0 if a > b else 0.5 if a == b else 0.0
    return wins / (len(pos) * len(neg))


def ovr_auc(y_true, scores, n_classes):
    vals, weights = [], []
    for c in range(n_classes):
        a = pair_auc([t == c for t in y_true], [row[c] for row in scores])
        if a is not None:
            vals.append(a)
            weights.append(sum(1 for t in y_true if t == c))
    return sum(v * w for v, w in zip(vals, weights)) / sum(weights)


def population_moments(values):
    n = len(values)
    mu = math.fsum(values) / n
    return mu, math.sqrt(math.fsum((v - mu) ** 2 for v in values) / n)
