"""Protomeme similarity measures and their combinators.

All four measures work on anything exposing the feature view attributes
``user_vector``, ``content_vector`` (both :class:`SparseVector`),
``tweet_ids`` and ``diffusion_set`` (sized containers). That covers both
protomemes and cluster centroids.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple


@dataclass(frozen=True)
class SimilarityWeights:
    user: float = 0.25
    content: float = 0.25
    tweet: float = 0.25
    network: float = 0.25

    def __post_init__(self):
        ws = self.as_tuple()
        if any(not 0.0 <= w <= 1.0 for w in ws):
            raise ValueError(f"weights must lie in [0, 1]: {ws}")
        if abs(sum(ws) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {sum(ws)!r}")

    def as_tuple(self):
        return (self.user, self.content, self.tweet, self.network)

    @classmethod
    def parse(cls, text):
        parts = [float(x) for x in text.split(",")]
        if len(parts) != 4:
            raise ValueError("expected four comma-separated weights w_u,w_c,w_t,w_n")
        return cls(*parts)


@dataclass(frozen=True)
class SimilarityMode:
    """Either ``max`` (default) or ``linear`` with weights."""

    kind: str = "max"
    weights: Optional[SimilarityWeights] = None

    def __post_init__(self):
        if self.kind not in ("max", "linear"):
            raise ValueError(f"unknown similarity mode {self.kind!r}")
        if self.kind == "linear" and self.weights is None:
            object.__setattr__(self, "weights", SimilarityWeights())

    @classmethod
    def linear(cls, weights):
        if not isinstance(weights, SimilarityWeights):
            weights = SimilarityWeights(*weights)
        return cls("linear", weights)


MAX = SimilarityMode("max")


def _clip(x):
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def cosine(u, v):
    nu, nv = u.norm(), v.norm()
    if nu == 0 or nv == 0:
        return 0.0
    return _clip(u.dot(v) / (nu * nv))


def set_cosine(a, b):
    """|a ∩ b| / sqrt(|a| |b|) for sized containers supporting ``in``."""
    if not a or not b:
        return 0.0
    if len(a) > len(b):
        a, b = b, a
    common = sum(1 for x in a if x in b)
    return _clip(common / math.sqrt(len(a) * len(b)))


def sim_user(p, q):
    return cosine(p.user_vector, q.user_vector)


def sim_content(p, q):
    return cosine(p.content_vector, q.content_vector)


def sim_tweet(p, q):
    return set_cosine(p.tweet_ids, q.tweet_ids)


def sim_network(p, q):
    return set_cosine(p.diffusion_set, q.diffusion_set)


def similarities(p, q) -> Tuple[float, float, float, float]:
    return sim_user(p, q), sim_content(p, q), sim_tweet(p, q), sim_network(p, q)


def combine_linear(sims, weights: SimilarityWeights):
    return _clip(sum(w * s for w, s in zip(weights.as_tuple(), sims)))


def sim_linear(p, q, weights: SimilarityWeights):
    return combine_linear(similarities(p, q), weights)


def sim_max(p, q):
    return max(similarities(p, q))


def similarity(p, q, mode: SimilarityMode = MAX):
    if mode.kind == "max":
        return sim_max(p, q)
    return sim_linear(p, q, mode.weights)


def distance(p, q, mode: SimilarityMode = MAX):
    return 1.0 - similarity(p, q, mode)
