"""Tweet records, JSONL parsing and single-pass entity extraction."""

import enum
import json
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Iterator, Mapping, Optional

from memestream.porter import stem


class ParseError(ValueError):
    """A JSONL record could not be decoded."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class SchemaError(ParseError):
    """A decoded record is missing a field or has a field of the wrong type."""


@dataclass(frozen=True)
class Tweet:
    id: str
    timestamp: int
    author_id: str
    text: str
    retweet_of_author: Optional[str] = None
    # ground-truth labels, read only by evaluation
    labels: frozenset = frozenset()


class EntityKind(enum.Enum):
    HASHTAG = "hashtag"
    MENTION = "mention"
    URL = "url"
    PHRASE = "phrase"


@dataclass(frozen=True)
class Entity:
    kind: EntityKind
    key: str

    def __post_init__(self):
        if not self.key:
            raise ValueError("entity key must be non-empty")

    def __str__(self):
        return f"{self.kind.value}:{self.key}"


@dataclass(frozen=True, eq=False)
class TweetFeatures:
    """Everything the clusterers need from one tweet, computed once at ingestion."""

    id: str
    timestamp: int
    author: str
    retweet_of: Optional[str]
    mentions: tuple
    terms: Mapping[str, int]
    entities: tuple

    @property
    def diffusion(self):
        users = {self.author, *self.mentions}
        if self.retweet_of is not None:
            users.add(self.retweet_of)
        return users

    def __eq__(self, other):
        if not isinstance(other, TweetFeatures):
            return NotImplemented
        return (
            self.id == other.id
            and self.timestamp == other.timestamp
            and self.author == other.author
            and self.retweet_of == other.retweet_of
            and self.mentions == other.mentions
            and dict(self.terms) == dict(other.terms)
            and self.entities == other.entities
        )

    __hash__ = None


_REQUIRED = ("id", "timestamp", "author_id", "text")


def _as_id(value, name, lineno):
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise SchemaError(f"field {name!r} must be a string", lineno)
    value = str(value)
    if not value:
        raise SchemaError(f"field {name!r} must be non-empty", lineno)
    return value


def parse_tweet(line, lineno=None):
    """Decode one JSONL record into a :class:`Tweet`."""
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON ({exc.msg})", lineno) from None
    if not isinstance(rec, dict):
        raise ParseError("record is not a JSON object", lineno)
    missing = [k for k in _REQUIRED if k not in rec]
    if missing:
        raise SchemaError(f"missing required field(s): {', '.join(missing)}", lineno)

    ts = rec["timestamp"]
    if isinstance(ts, float) and ts.is_integer():
        ts = int(ts)
    if isinstance(ts, bool) or not isinstance(ts, int):
        raise SchemaError("field 'timestamp' must be an integer", lineno)
    if ts < 0:
        raise SchemaError("field 'timestamp' must be >= 0", lineno)
    if not isinstance(rec["text"], str):
        raise SchemaError("field 'text' must be a string", lineno)

    rt = rec.get("retweet_of_author")
    if rt is not None:
        rt = _as_id(rt, "retweet_of_author", lineno)
    labels = rec.get("labels")
    if labels is None:
        labels = []
    if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
        raise SchemaError("field 'labels' must be a list of strings", lineno)
    return Tweet(
        id=_as_id(rec["id"], "id", lineno),
        timestamp=ts,
        author_id=_as_id(rec["author_id"], "author_id", lineno),
        text=rec["text"],
        retweet_of_author=rt,
        labels=frozenset(labels),
    )


def read_tweets(stream) -> Iterator[Tweet]:
    """Yield tweets from an open JSONL text stream, skipping blank lines."""
    for lineno, line in enumerate(stream, 1):
        if line.strip():
            yield parse_tweet(line, lineno)


def tweet_to_json(t: Tweet):
    rec = {"id": t.id, "timestamp": t.timestamp, "author_id": t.author_id, "text": t.text}
    if t.retweet_of_author is not None:
        rec["retweet_of_author"] = t.retweet_of_author
    if t.labels:
        rec["labels"] = sorted(t.labels)
    return json.dumps(rec, ensure_ascii=False, separators=(",", ":"))


def load_stopwords(path=None):
    """One word per line. ``None`` loads the bundled English list."""
    if path is None:
        text = resources.files("memestream").joinpath("data/stopwords.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def load_labels(path):
    """Hashtag list for blinding; one per line, leading '#' optional."""
    with open(path, encoding="utf-8") as fh:
        return normalize_labels(fh.read().split())


def normalize_labels(labels):
    return frozenset("#" + x.lower().lstrip("#") for x in labels if x.strip("#"))


# schemeless forms need a path so "e.g." or "U.S." never match
_URL_RE = re.compile(
    r"(?:https?://|www\.)\S+|(?<![\w@#/.])(?:[a-z0-9-]+\.)+[a-z]{2,}/\S*",
    re.IGNORECASE,
)
_URL_TRAIL = ".,;:!?)]}'\"…"
_URL_HOST_RE = re.compile(r"^((?:https?://)?[^/]+)(.*)$", re.IGNORECASE | re.DOTALL)
_HASHTAG_RE = re.compile(r"(?<!\w)#(\w+)")
_MENTION_RE = re.compile(r"(?<!\w)@(\w+)")
_WORD_RE = re.compile(r"[^\W_]+")


def _normalize_url(raw):
    url = raw.rstrip(_URL_TRAIL)
    m = _URL_HOST_RE.match(url)
    return m.group(1).lower() + m.group(2)


def _unique(seq):
    return list(dict.fromkeys(seq))


def tokenize(text, stopwords, blind=frozenset()):
    """Split ``text`` into (hashtags, mentions, urls, stemmed words).

    URLs are cut first so that '#' or '@' inside a link is not read as an entity.
    Hashtags listed in ``blind`` are dropped entirely.
    """
    urls = []

    def _cut_url(m):
        urls.append(_normalize_url(m.group(0)))
        return " "

    rest = _URL_RE.sub(_cut_url, text)
    hashtags = []

    def _cut_tag(m):
        tag = "#" + m.group(1).lower()
        if tag not in blind:
            hashtags.append(tag)
        return " "

    rest = _HASHTAG_RE.sub(_cut_tag, rest)
    mentions = []

    def _cut_mention(m):
        mentions.append("@" + m.group(1).lower())
        return " "

    rest = _MENTION_RE.sub(_cut_mention, rest)
    words = [stem(w) for w in _WORD_RE.findall(rest.lower()) if w not in stopwords]
    return hashtags, mentions, [u for u in urls if u], words


def _entities(hashtags, mentions, urls, words):
    out = [Entity(EntityKind.HASHTAG, h) for h in _unique(hashtags)]
    out += [Entity(EntityKind.MENTION, m) for m in _unique(mentions)]
    out += [Entity(EntityKind.URL, u) for u in _unique(urls)]
    if words:
        out.append(Entity(EntityKind.PHRASE, " ".join(words)))
    return out


def extract_entities(t, stopwords, blind=frozenset()):
    """Hashtags, mentions and URLs in order of appearance, then at most one phrase."""
    text = t.text if isinstance(t, Tweet) else t
    return _entities(*tokenize(text, stopwords, blind))


class Analyzer:
    """Turns :class:`Tweet` records into :class:`TweetFeatures` in one pass over the text.

    Content terms are the stemmed residual words plus the hashtag and mention
    tokens; URLs are entities only.
    """

    def __init__(self, stopwords=None, blind=()):
        self.stopwords = load_stopwords() if stopwords is None else frozenset(stopwords)
        self.blind = normalize_labels(blind)

    def __call__(self, t: Tweet) -> TweetFeatures:
        hashtags, mentions, urls, words = tokenize(t.text, self.stopwords, self.blind)
        terms = Counter(words)
        terms.update(hashtags)
        terms.update(mentions)
        return TweetFeatures(
            id=t.id,
            timestamp=t.timestamp,
            author=t.author_id,
            retweet_of=t.retweet_of_author,
            mentions=tuple(_unique(m[1:] for m in mentions)),
            terms=dict(terms),
            entities=tuple(_entities(hashtags, mentions, urls, words)),
        )
