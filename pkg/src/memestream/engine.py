"""Online K-means stream clustering with outlier-driven LRU replacement.

:class:`PSC` clusters protomemes and keeps recurring protomeme keys in the
cluster that already holds them. :class:`B1` and :class:`B2` are the
per-tweet baselines (content only, and content plus follower network).
All three share the window expiry, the outlier test and the replacement
policy implemented in :class:`OnlineClusterer`.
"""

import enum
import logging
import math
import random
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional

from memestream import simil
from memestream.ingest import Analyzer, Tweet, TweetFeatures
from memestream.protomeme import SparseVector, build_protomemes
from memestream.window import WindowConfig, WindowModel, expiry_cutoff, step_end

log = logging.getLogger(__name__)

ALGORITHMS = ("psc", "b1", "b2")


@dataclass(frozen=True)
class EngineConfig:
    k: int = 11
    n_sigmas: float = 2.0
    window: WindowConfig = field(default_factory=WindowConfig)
    similarity: simil.SimilarityMode = simil.MAX
    algorithm: str = "psc"
    b2_alpha: float = 0.5
    seed: int = 0
    # a point sharing nothing with any centroid has no meaningful nearest cluster
    zero_sim_outlier: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.n_sigmas > 0:
            raise ValueError("n_sigmas must be positive")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if not 0.0 <= self.b2_alpha <= 1.0:
            raise ValueError("b2_alpha must lie in [0, 1]")
        if self.window.model is WindowModel.DAMPED:
            raise ValueError("the clusterers support the sliding and landmark models only")

    def to_dict(self):
        d = asdict(self)
        d["window"]["model"] = self.window.model.value
        sim = self.similarity
        d["similarity"] = {
            "kind": sim.kind,
            "weights": list(sim.weights.as_tuple()) if sim.weights else None,
        }
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        w = dict(d.pop("window"))
        w["model"] = WindowModel(w["model"])
        s = d.pop("similarity")
        if s["kind"] == "linear":
            sim = simil.SimilarityMode.linear(s["weights"])
        else:
            sim = simil.MAX
        return cls(window=WindowConfig(**w), similarity=sim, **d)


@dataclass
class OutlierHistory:
    """Running mean and variance (Welford) of every nearest-centroid distance seen."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def record(self, d):
        self.count += 1
        delta = d - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (d - self.mean)

    @property
    def std(self):
        if self.count == 0:
            return 0.0
        return math.sqrt(max(self.m2, 0.0) / self.count)

    def is_outlier(self, d, n_sigmas):
        # sigma is undefined below two samples; nothing is an outlier yet
        if self.count < 2:
            return False
        return d > self.mean + n_sigmas * self.std


class Outcome(enum.Enum):
    EXISTING_BY_KEY = "existing_by_key"
    NEAREST = "nearest"
    REPLACED_LRU = "replaced_lru"
    NEW = "new"


@dataclass(frozen=True)
class Assignment:
    outcome: Outcome
    cluster_id: int
    distance: Optional[float] = None
    victim: Optional[int] = None


class Centroid:
    """Summed user/content vectors and multiset unions of tweet ids and diffusion users.

    Cosine is scale invariant, so sums stand in for means. The multisets count
    how many members contribute each element, which makes removal exact.
    """

    __slots__ = ("user_vector", "content_vector", "tweet_ids", "diffusion_set")

    def __init__(self):
        self.user_vector = SparseVector()
        self.content_vector = SparseVector()
        self.tweet_ids = Counter()
        self.diffusion_set = Counter()

    def add_point(self, p, sign=1):
        self.user_vector.update(p.user_vector.items(), sign)
        self.content_vector.update(p.content_vector.items(), sign)
        _count(self.tweet_ids, p.tweet_ids, sign)
        _count(self.diffusion_set, p.diffusion_set, sign)

    def remove_point(self, p):
        self.add_point(p, -1)

    def add_tweet(self, tf: TweetFeatures, fresh_users):
        """A member absorbed ``tf`` and gained ``fresh_users`` in its diffusion set."""
        self.user_vector.add(tf.author)
        self.content_vector.update(tf.terms)
        self.tweet_ids[tf.id] += 1
        _count(self.diffusion_set, fresh_users, 1)

    @classmethod
    def from_members(cls, members):
        c = cls()
        for p in members:
            c.add_point(p)
        return c

    def __eq__(self, other):
        if not isinstance(other, Centroid):
            return NotImplemented
        return (
            self.user_vector == other.user_vector
            and self.content_vector == other.content_vector
            and self.tweet_ids == other.tweet_ids
            and self.diffusion_set == other.diffusion_set
        )


def _count(counter, items, sign):
    for x in items:
        n = counter[x] + sign
        if n:
            counter[x] = n
        else:
            del counter[x]


@dataclass(eq=False)
class Cluster:
    id: int
    created_at: int
    last_updated: int
    touched: int = 0
    members: Dict[object, object] = field(default_factory=dict)
    centroid: Centroid = field(default_factory=Centroid)
    # aggregates owned by subclasses (B2 keeps author neighborhoods here)
    aux: Counter = field(default_factory=Counter)

    @property
    def tweet_ids(self):
        return self.centroid.tweet_ids.keys()

    def __len__(self):
        return len(self.members)


class TweetPoint:
    """A single tweet as a data point, for the per-tweet baselines."""

    __slots__ = ("tf", "user_vector", "content_vector")

    def __init__(self, tf: TweetFeatures):
        self.tf = tf
        self.user_vector = SparseVector({tf.author: 1})
        self.content_vector = SparseVector(tf.terms)

    @property
    def key(self):
        return self.tf.id

    @property
    def tweets(self):
        return {self.tf.id: self.tf}

    @property
    def tweet_ids(self):
        return (self.tf.id,)

    @property
    def diffusion_set(self):
        return self.tf.diffusion

    @property
    def first_seen(self):
        return self.tf.timestamp

    last_seen = first_seen

    def expire(self, cutoff):
        return None if self.tf.timestamp <= cutoff else self


@dataclass
class ClusterRecord:
    id: int
    tweet_ids: List[str]
    keys: Optional[List[str]] = None

    def to_json(self):
        d = {"id": self.id, "tweet_ids": self.tweet_ids}
        if self.keys is not None:
            d["keys"] = self.keys
        return d


@dataclass
class Snapshot:
    """Cluster contents at the end of one step. Retired clusters carry no tweets:
    they emptied because everything they held left the window."""

    window_end: int
    clusters: List[ClusterRecord]
    retired: List[dict]
    skipped: int = 0

    def to_json(self):
        return {
            "window_end": self.window_end,
            "clusters": [c.to_json() for c in self.clusters],
            "retired": self.retired,
            "skipped": self.skipped,
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            window_end=d["window_end"],
            clusters=[ClusterRecord(c["id"], list(c["tweet_ids"]), c.get("keys")) for c in d["clusters"]],
            retired=list(d.get("retired", [])),
            skipped=d.get("skipped", 0),
        )

    def cover(self):
        return {c.id: set(c.tweet_ids) for c in self.clusters}


class OnlineClusterer:
    key_matching = False

    def __init__(self, config: EngineConfig, analyzer: Optional[Analyzer] = None):
        self.config = config
        self.analyzer = analyzer or Analyzer()
        self.rng = random.Random(config.seed)
        self.history = OutlierHistory()
        self.clusters: Dict[int, Cluster] = {}
        self._key_index: Dict[object, int] = {}
        self._next_id = 0
        self._clock = 0
        self.T = None
        self.skipped = 0
        self.n_replaced = 0

    # hooks -------------------------------------------------------------
    def make_points(self, tfs: List[TweetFeatures]) -> list:
        raise NotImplementedError

    def similarity(self, point, cluster: Cluster) -> float:
        raise NotImplementedError

    def distance(self, point, cluster: Cluster) -> float:
        return 1.0 - self.similarity(point, cluster)

    def _attach(self, cluster, point):
        cluster.members[point.key] = point
        cluster.centroid.add_point(point)
        if self.key_matching:
            self._key_index[point.key] = cluster.id

    def _detach(self, cluster, point):
        cluster.centroid.remove_point(point)

    # cluster bookkeeping -----------------------------------------------
    def _touch(self, cluster):
        self._clock += 1
        cluster.touched = self._clock
        if self.T is not None:
            cluster.last_updated = max(cluster.last_updated, self.T)

    def _new_cluster(self, point):
        now = self.T if self.T is not None else point.last_seen
        c = Cluster(id=self._next_id, created_at=now, last_updated=now)
        self._next_id += 1
        self.clusters[c.id] = c
        self._attach(c, point)
        self._touch(c)
        return c

    def _drop_cluster(self, cid):
        c = self.clusters.pop(cid)
        if self.key_matching:
            for key in c.members:
                self._key_index.pop(key, None)
        return c

    def _absorb(self, cluster, point):
        """Merge a protomeme into the member with the same key."""
        member = cluster.members[point.key]
        for tf in point.tweets.values():
            fresh = member.merge_tweet(tf)
            if fresh is not None:
                cluster.centroid.add_tweet(tf, fresh)

    def lru(self):
        # touched is a strictly increasing assignment clock, so no ties remain
        return min(self.clusters.values(), key=lambda c: (c.touched, c.id))

    # algorithm ---------------------------------------------------------
    def seed(self, points):
        """Up to K singleton clusters from randomly sampled points; the rest are assigned."""
        n = min(self.config.k, len(points))
        chosen = sorted(self.rng.sample(range(len(points)), n))
        picked = set(chosen)
        for i in chosen:
            self._new_cluster(points[i])
        return [self.assign(p) for i, p in enumerate(points) if i not in picked]

    def assign(self, point) -> Assignment:
        if self.key_matching:
            cid = self._key_index.get(point.key)
            if cid is not None:
                c = self.clusters[cid]
                self._absorb(c, point)
                self._touch(c)
                return Assignment(Outcome.EXISTING_BY_KEY, cid)
        if not self.clusters:
            return Assignment(Outcome.NEW, self._new_cluster(point).id)

        best, d_min = None, math.inf
        for c in self.clusters.values():
            d = self.distance(point, c)
            if d < d_min:
                best, d_min = c, d
        outlier = self.history.is_outlier(d_min, self.config.n_sigmas)
        if self.config.zero_sim_outlier and d_min >= 1.0:
            outlier = True
        self.history.record(d_min)

        if not outlier:
            self._attach(best, point)
            self._touch(best)
            return Assignment(Outcome.NEAREST, best.id, d_min)
        if len(self.clusters) < self.config.k:
            return Assignment(Outcome.NEW, self._new_cluster(point).id, d_min)
        victim = self.lru()
        self._drop_cluster(victim.id)
        self.n_replaced += 1
        c = self._new_cluster(point)
        return Assignment(Outcome.REPLACED_LRU, c.id, d_min, victim=victim.id)

    def expire(self, T):
        """Remove out-of-window tweets; returns clusters that became empty."""
        cutoff = expiry_cutoff(T, self.config.window)
        if cutoff is None:
            return []
        retired = []
        for c in list(self.clusters.values()):
            for key, p in list(c.members.items()):
                if p.first_seen > cutoff:
                    continue
                self._detach(c, p)
                kept = p.expire(cutoff)
                if kept is None:
                    del c.members[key]
                    if self.key_matching:
                        self._key_index.pop(key, None)
                else:
                    c.members[key] = kept
                    c.centroid.add_point(kept)
                    self._reattach(c, kept)
            if not c.members:
                retired.append(self._drop_cluster(c.id))
        return retired

    def _reattach(self, cluster, point):
        """Re-add subclass aggregates after a member was rebuilt by expiry."""

    def step(self, T, tweets: Iterable[Tweet]) -> Snapshot:
        dt = self.config.window.delta_t
        if self.T is not None and T <= self.T:
            raise ValueError(f"steps must advance: {T} after {self.T}")
        self.T = T
        batch, skipped = [], 0
        for t in tweets:
            if T - dt < t.timestamp <= T:
                batch.append(t)
            else:
                skipped += 1
        if skipped:
            log.warning("step %d: skipped %d tweet(s) outside (%d, %d]", T, skipped, T - dt, T)
        self.skipped += skipped

        retired = self.expire(T)
        batch.sort(key=lambda t: t.timestamp)
        points = self.make_points([self.analyzer(t) for t in batch])
        if points:
            if not self.clusters:
                self.seed(points)
            else:
                for p in points:
                    self.assign(p)
        return self.snapshot(retired, skipped)

    def snapshot(self, retired=(), skipped=0):
        recs = [
            ClusterRecord(c.id, sorted(c.centroid.tweet_ids), self._member_keys(c))
            for c in self.clusters.values()
        ]
        ret = [{"id": c.id, "created_at": c.created_at, "last_updated": c.last_updated} for c in retired]
        return Snapshot(self.T, recs, ret, skipped)

    def _member_keys(self, cluster):
        return None

    def run(self, tweets: Iterable[Tweet]) -> Iterator[Snapshot]:
        """Group a timestamp-ordered stream into steps and yield one snapshot per step.

        Tweets belonging to a step that was already processed are skipped.
        """
        cfg = self.config.window
        current, buf, late = None, [], 0
        for t in tweets:
            te = step_end(t.timestamp, cfg)
            if current is None:
                current = te
            if te == current:
                buf.append(t)
            elif te > current:
                yield self._flush(current, buf, late)
                buf, late = [t], 0
                current += cfg.delta_t
                while current < te:
                    yield self._flush(current, [], 0)
                    current += cfg.delta_t
            else:
                late += 1
        if current is not None:
            yield self._flush(current, buf, late)

    def _flush(self, T, buf, late):
        snap = self.step(T, buf)
        if late:
            log.warning("step %d: skipped %d late tweet(s)", T, late)
            self.skipped += late
            snap.skipped += late
        return snap

    def stored_tweet_ids(self):
        out = set()
        for c in self.clusters.values():
            out.update(c.centroid.tweet_ids)
        return out

    # invariants, used by tests -----------------------------------------
    def check(self):
        cutoff = expiry_cutoff(self.T, self.config.window) if self.T is not None else None
        seen_keys = {}
        for c in self.clusters.values():
            assert c.members, f"cluster {c.id} is empty"
            assert c.centroid == Centroid.from_members(c.members.values()), f"centroid {c.id} drifted"
            assert c.last_updated >= c.created_at
            for key, p in c.members.items():
                assert key not in seen_keys, f"key {key} in clusters {seen_keys[key]} and {c.id}"
                seen_keys[key] = c.id
                if cutoff is not None:
                    assert all(tf.timestamp > cutoff for tf in p.tweets.values())
        if self.key_matching:
            assert seen_keys == self._key_index


class PSC(OnlineClusterer):
    """Protomeme stream clustering."""

    key_matching = True

    def make_points(self, tfs):
        return build_protomemes(tfs)

    def similarity(self, point, cluster):
        return simil.similarity(point, cluster.centroid, self.config.similarity)

    def _member_keys(self, cluster):
        return sorted(str(k) for k in cluster.members)


class B1(OnlineClusterer):
    """Per-tweet Online K-means on TF content cosine alone."""

    def make_points(self, tfs):
        return [TweetPoint(tf) for tf in tfs]

    def similarity(self, point, cluster):
        return simil.cosine(point.content_vector, cluster.centroid.content_vector)


class FollowerGraph:
    """Undirected view of a follower edge list; neighborhoods include the node itself."""

    def __init__(self, edges=()):
        self.adj: Dict[str, set] = {}
        self._closed: Dict[str, frozenset] = {}
        for a, b in edges:
            self.add_edge(a, b)

    def add_edge(self, follower, followee):
        self.adj.setdefault(follower, set()).add(followee)
        self.adj.setdefault(followee, set()).add(follower)
        self._closed.pop(follower, None)
        self._closed.pop(followee, None)

    def closed_neighborhood(self, user):
        """Empty for users absent from the graph."""
        n = self._closed.get(user)
        if n is None:
            nbrs = self.adj.get(user)
            n = frozenset() if nbrs is None else frozenset(nbrs | {user})
            self._closed[user] = n
        return n

    def __contains__(self, user):
        return user in self.adj

    @classmethod
    def load(cls, path):
        """Text edge list, one ``follower_id followee_id`` pair per line; '#' starts a comment."""
        g = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 'follower followee'")
                g.add_edge(*parts)
        return g

    def dump(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for a in sorted(self.adj):
                for b in sorted(self.adj[a]):
                    if a < b:
                        fh.write(f"{a} {b}\n")


class B2(B1):
    """Per-tweet clustering on content plus follower-network overlap.

    similarity = alpha * content cosine + (1 - alpha) * Jaccard between the
    author's closed neighborhood and the union of the cluster authors' ones.
    """

    def __init__(self, config, analyzer=None, graph: Optional[FollowerGraph] = None):
        super().__init__(config, analyzer)
        self.graph = graph or FollowerGraph()

    def _neigh(self, point):
        return self.graph.closed_neighborhood(point.tf.author)

    def _attach(self, cluster, point):
        super()._attach(cluster, point)
        cluster.aux.update(self._neigh(point))

    def _detach(self, cluster, point):
        super()._detach(cluster, point)
        cluster.aux.subtract(self._neigh(point))
        for x in self._neigh(point):
            if cluster.aux[x] <= 0:
                del cluster.aux[x]

    def _reattach(self, cluster, point):
        cluster.aux.update(self._neigh(point))

    def network_similarity(self, point, cluster):
        mine = self._neigh(point)
        theirs = cluster.aux
        if not mine or not theirs:
            return 0.0
        inter = sum(1 for x in mine if x in theirs)
        return inter / (len(mine) + len(theirs) - inter)

    def similarity(self, point, cluster):
        a = self.config.b2_alpha
        content = simil.cosine(point.content_vector, cluster.centroid.content_vector)
        if a == 1.0:
            return content
        return a * content + (1.0 - a) * self.network_similarity(point, cluster)


def make_engine(config: EngineConfig, analyzer=None, graph=None) -> OnlineClusterer:
    if config.algorithm == "psc":
        return PSC(config, analyzer)
    if config.algorithm == "b1":
        return B1(config, analyzer)
    return B2(config, analyzer, graph)


def run_psc(stream, config, analyzer=None):
    return list(PSC(config, analyzer).run(stream))


def run_b1(stream, config, analyzer=None):
    return list(B1(config, analyzer).run(stream))


def run_b2(stream, follower_graph, config, analyzer=None):
    return list(B2(config, analyzer, follower_graph).run(stream))
