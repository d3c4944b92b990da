"""Clustering quality against ground-truth labels.

Partitions and covers are mappings from a community name to a set of element
ids. The scores restrict both sides to the elements they share.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Hashable, List, Mapping, Optional, Set

import numpy as np

log = logging.getLogger(__name__)

Cover = Mapping[Hashable, Set]

LFK_VARIANT = "lfk-2009-mean"


@dataclass
class ConfusionMatrix:
    counts: np.ndarray
    rows: list
    cols: list

    @property
    def row_sums(self):
        return self.counts.sum(axis=1)

    @property
    def col_sums(self):
        return self.counts.sum(axis=0)

    @property
    def total(self):
        return int(self.counts.sum())

    def to_json(self):
        return {
            "rows": [str(r) for r in self.rows],
            "cols": [str(c) for c in self.cols],
            "counts": self.counts.tolist(),
        }


def _as_cover(c):
    if isinstance(c, Mapping):
        return {k: set(v) for k, v in c.items()}
    return {i: set(v) for i, v in enumerate(c)}


def _key_order(k):
    return (type(k).__name__, k) if isinstance(k, (int, str)) else (type(k).__name__, repr(k))


def restrict(truth, found):
    """Both covers cut down to the elements present in both, empty sets dropped.

    Communities come back in sorted key order so that floating-point sums do
    not depend on hash seeds.
    """
    a, b = _as_cover(truth), _as_cover(found)
    universe = set().union(*a.values()) & set().union(*b.values()) if a and b else set()

    def cut(c):
        return {k: c[k] & universe for k in sorted(c, key=_key_order) if c[k] & universe}

    return cut(a), cut(b), universe


def confusion(truth, found) -> ConfusionMatrix:
    a, b, _ = restrict(truth, found)
    rows, cols = list(a), list(b)
    counts = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for i, r in enumerate(rows):
        ar = a[r]
        for j, c in enumerate(cols):
            counts[i, j] = len(ar & b[c])
    return ConfusionMatrix(counts, rows, cols)


def _xlogx_ratio(n, total):
    return n * math.log(n / total) if n else 0.0


def _same_partition(a, b):
    return len(a) == len(b) and set(map(frozenset, a.values())) == set(map(frozenset, b.values()))


def nmi(truth, found):
    """Normalized mutual information from the confusion matrix, natural logs.

    Written for partitions; on overlapping covers it is the plain
    confusion-matrix generalization.
    """
    a, b, _ = restrict(truth, found)
    cm = confusion(a, b)
    n = cm.total
    if n == 0:
        raise ValueError("no common elements to compare")
    if _same_partition(a, b):
        return 1.0
    ri, cj = cm.row_sums, cm.col_sums
    num = 0.0
    for i in range(len(cm.rows)):
        for j in range(len(cm.cols)):
            nij = int(cm.counts[i, j])
            if nij:
                num += nij * math.log(nij * n / (int(ri[i]) * int(cj[j])))
    num *= -2.0
    den = sum(_xlogx_ratio(int(x), n) for x in ri) + sum(_xlogx_ratio(int(x), n) for x in cj)
    if den == 0.0:
        return 0.0
    return min(1.0, max(0.0, num / den))


def _h(p):
    return -p * math.log(p) if p > 0 else 0.0


def _h2(k, n):
    return _h(k / n) + _h((n - k) / n)


def _conditional_norm(xs, ys, n):
    """Mean over x in xs of H(x | ys) / H(x), with the LFK acceptance rule."""
    total = 0.0
    counted = 0
    ys = list(ys)
    y_sizes = [len(y) for y in ys]
    for x in xs:
        nx = len(x)
        hx = _h2(nx, n)
        if hx == 0.0:
            # x is the whole universe: nothing left to explain
            counted += 1
            continue
        best = hx
        for y, ny in zip(ys, y_sizes):
            n11 = len(x & y) if nx <= ny else len(y & x)
            n10 = nx - n11
            n01 = ny - n11
            n00 = n - n11 - n10 - n01
            p11, p10, p01, p00 = n11 / n, n10 / n, n01 / n, n00 / n
            if _h(p11) + _h(p00) <= _h(p01) + _h(p10):
                continue
            cond = _h(p11) + _h(p10) + _h(p01) + _h(p00) - _h2(ny, n)
            if cond < best:
                best = cond
        total += max(best, 0.0) / hx
        counted += 1
    return total / counted


def lfk_nmi(truth, found):
    """Lancichinetti-Fortunato-Kertesz NMI for covers (overlapping communities).

    1 - (H(X|Y)_norm + H(Y|X)_norm) / 2, where each community is matched with
    its best complement-consistent counterpart.
    """
    a, b, universe = restrict(truth, found)
    if not a or not b:
        raise ValueError("lfk_nmi needs two non-empty covers with common elements")
    n = len(universe)
    hxy = _conditional_norm(a.values(), b.values(), n)
    hyx = _conditional_norm(b.values(), a.values(), n)
    return min(1.0, max(0.0, 1.0 - 0.5 * (hxy + hyx)))


def jaccard_matrix(truth, found):
    """Pairwise Jaccard of the raw sets (callers restrict first if they need to)."""
    a, b = _as_cover(truth), _as_cover(found)
    rows, cols = list(a), list(b)
    m = np.zeros((len(rows), len(cols)))
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            inter = len(a[r] & b[c])
            if inter:
                m[i, j] = inter / len(a[r] | b[c])
    return m, rows, cols


def mcr(label, truth, found):
    """Largest share of the label's tweets that a single cluster captures."""
    a, b, _ = restrict(truth, found)
    members = a.get(label)
    if not members:
        raise ValueError(f"no tweets carry label {label!r}")
    best = max((len(members & c) for c in b.values()), default=0)
    return best / len(members)


class GroundTruth:
    """tweet id -> set of labels."""

    def __init__(self, labels: Optional[Dict[str, frozenset]] = None):
        self.labels: Dict[str, frozenset] = dict(labels or {})

    def add(self, tweet_id, labels):
        if labels:
            self.labels[tweet_id] = frozenset(labels)

    def discard(self, tweet_id):
        self.labels.pop(tweet_id, None)

    def __len__(self):
        return len(self.labels)

    def cover(self, ids=None):
        out = defaultdict(set)
        items = self.labels.items() if ids is None else (
            (i, self.labels[i]) for i in ids if i in self.labels
        )
        for tid, labs in items:
            for lab in labs:
                out[lab].add(tid)
        return dict(out)

    @classmethod
    def from_tweets(cls, tweets):
        gt = cls()
        for t in tweets:
            gt.add(t.id, t.labels)
        return gt


@dataclass
class WindowScore:
    window_end: int
    lfk_nmi: float
    nmi: float
    n_clusters: int
    n_retired: int
    n_tweets: int
    mcr: Dict[str, float]
    label_counts: Dict[str, int]
    confusion: ConfusionMatrix
    jaccard: np.ndarray


def evaluate_snapshot(snapshot, truth: GroundTruth) -> Optional[WindowScore]:
    """Score one snapshot; None (with a warning) when it shares no tweets with the labels."""
    found = {c.id: set(c.tweet_ids) for c in snapshot.clusters if c.tweet_ids}
    ids = set().union(*found.values()) if found else set()
    gt = truth.cover(ids)
    a, b, universe = restrict(gt, found)
    if not universe:
        log.warning("window %s: no labeled tweets in any cluster, skipped", snapshot.window_end)
        return None
    cm = confusion(a, b)
    jac, _, _ = jaccard_matrix(a, b)
    return WindowScore(
        window_end=snapshot.window_end,
        lfk_nmi=lfk_nmi(a, b),
        nmi=nmi(a, b),
        n_clusters=len(snapshot.clusters),
        n_retired=len(snapshot.retired),
        n_tweets=len(universe),
        mcr={lab: mcr(lab, a, b) for lab in sorted(a)},
        label_counts={lab: len(a[lab]) for lab in sorted(a)},
        confusion=cm,
        jaccard=jac,
    )


def mean_scores(scores: List[WindowScore]):
    if not scores:
        return float("nan"), float("nan")
    return (
        float(np.mean([s.lfk_nmi for s in scores])),
        float(np.mean([s.nmi for s in scores])),
    )
