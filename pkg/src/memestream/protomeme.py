"""Protomemes: tweets grouped by a shared entity, with cached feature vectors."""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

from memestream.ingest import Entity, TweetFeatures


class SparseVector:
    """Term -> weight map with a running squared norm.

    Weights are term or tweet counts, so with integer inputs the cached norm
    is exact and never drifts under add/subtract sequences.
    """

    __slots__ = ("_w", "_sq")

    def __init__(self, entries=None):
        self._w = {}
        self._sq = 0
        if entries:
            self.update(entries)

    def add(self, term, weight=1):
        old = self._w.get(term, 0)
        new = old + weight
        if new < 0:
            raise ValueError(f"negative weight for {term!r}")
        self._sq += new * new - old * old
        if new == 0:
            self._w.pop(term, None)
        else:
            self._w[term] = new

    def update(self, entries, sign=1):
        items = entries.items() if hasattr(entries, "items") else entries
        for term, weight in items:
            self.add(term, sign * weight)

    def dot(self, other):
        a, b = self._w, other._w
        if len(a) > len(b):
            a, b = b, a
        get = b.get
        return sum(w * get(t, 0) for t, w in a.items())

    def norm(self):
        return math.sqrt(self._sq)

    def total(self):
        return sum(self._w.values())

    def get(self, term, default=0):
        return self._w.get(term, default)

    def __getitem__(self, term):
        return self._w.get(term, 0)

    def __contains__(self, term):
        return term in self._w

    def __len__(self):
        return len(self._w)

    def __iter__(self):
        return iter(self._w)

    def items(self):
        return self._w.items()

    def to_dict(self):
        return dict(self._w)

    def copy(self):
        v = SparseVector()
        v._w = dict(self._w)
        v._sq = self._sq
        return v

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self._w == other._w

    def __repr__(self):
        return f"SparseVector({self._w!r})"


@dataclass(eq=True)
class Protomeme:
    """Tweets sharing one entity.

    ``tweets`` keeps the analyzed payloads of the tweets still in the window so
    the vectors can be rebuilt exactly when some of them expire.
    """

    entity: Entity
    tweets: Dict[str, TweetFeatures] = field(default_factory=dict)
    user_vector: SparseVector = field(default_factory=SparseVector)
    content_vector: SparseVector = field(default_factory=SparseVector)
    diffusion_set: set = field(default_factory=set)
    first_seen: Optional[int] = None
    last_seen: Optional[int] = None

    @property
    def key(self):
        return self.entity

    @property
    def tweet_ids(self):
        return self.tweets.keys()

    def __len__(self):
        return len(self.tweets)

    def merge_tweet(self, tf: TweetFeatures):
        """Add one tweet. Returns the diffusion users that were new to this protomeme,
        or ``None`` if the tweet was already present."""
        if self.entity not in tf.entities:
            raise ValueError(f"tweet {tf.id} does not contain {self.entity}")
        if tf.id in self.tweets:
            return None
        self.tweets[tf.id] = tf
        self.user_vector.add(tf.author)
        self.content_vector.update(tf.terms)
        fresh = tf.diffusion - self.diffusion_set
        self.diffusion_set |= fresh
        if self.first_seen is None or tf.timestamp < self.first_seen:
            self.first_seen = tf.timestamp
        if self.last_seen is None or tf.timestamp > self.last_seen:
            self.last_seen = tf.timestamp
        return fresh

    def expire(self, cutoff):
        """Drop tweets with timestamp <= cutoff and rebuild. Returns self, or None if empty."""
        if self.first_seen is not None and self.first_seen > cutoff:
            return self
        survivors = [tf for tf in self.tweets.values() if tf.timestamp > cutoff]
        if not survivors:
            return None
        fresh = from_tweets(self.entity, survivors)
        self.__dict__.update(fresh.__dict__)
        return self


def from_tweets(entity, tweets):
    p = Protomeme(entity)
    for tf in tweets:
        p.merge_tweet(tf)
    return p


def build_protomemes(batch):
    """One protomeme per distinct entity in ``batch``, in order of first appearance."""
    out = {}
    for tf in batch:
        for ent in tf.entities:
            p = out.get(ent)
            if p is None:
                p = out[ent] = Protomeme(ent)
            p.merge_tweet(tf)
    return list(out.values())


def merge_tweet(p, tf):
    p.merge_tweet(tf)
    return p


def expire_tweets(p, cutoff):
    """Functional form of :meth:`Protomeme.expire`; ``None`` marks an emptied protomeme."""
    return p.expire(cutoff)
