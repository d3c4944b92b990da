import io
import json

import pytest
from hypothesis import given, strategies as st

from memestream.ingest import (
    Analyzer, Entity, EntityKind, ParseError, SchemaError, Tweet, extract_entities,
    load_stopwords, parse_tweet, read_tweets, tweet_to_json,
)

from conftest import tw

OBAMA = ("Tell your friends: #Obamacare is helping young people afford health insurance. "
         "(via @OFATruthTeam) pic.twitter.com/s9QHilsSjO")
# frozen from the nltk reference stemmer over "tell friends helping young people afford health insurance"
OBAMA_PHRASE = "tell friend help young peopl afford health insur"

SW = load_stopwords()


def test_parse_minimal():
    t = parse_tweet('{"id":"1","timestamp":100,"author_id":"u1","text":"hello"}')
    assert t == Tweet("1", 100, "u1", "hello")


def test_parse_retweet():
    t = parse_tweet('{"id":"2","timestamp":100,"author_id":"u2","text":"RT","retweet_of_author":"u1"}')
    assert t.retweet_of_author == "u1"


def test_missing_text_is_schema_error():
    with pytest.raises(SchemaError):
        parse_tweet('{"id":"1","timestamp":100,"author_id":"u1"}', lineno=3)


def test_malformed_json_reports_line():
    with pytest.raises(ParseError) as e:
        list(read_tweets(io.StringIO('{"id":"1","timestamp":1,"author_id":"a","text":"x"}\n{oops\n')))
    assert e.value.lineno == 2
    assert "line 2" in str(e.value)


@pytest.mark.parametrize("rec", [
    {"id": "", "timestamp": 1, "author_id": "a", "text": "x"},
    {"id": "1", "timestamp": -1, "author_id": "a", "text": "x"},
    {"id": "1", "timestamp": "7", "author_id": "a", "text": "x"},
    {"id": "1", "timestamp": 1, "author_id": "a", "text": 5},
    {"id": "1", "timestamp": 1, "author_id": "a", "text": "x", "labels": "#a"},
])
def test_schema_violations(rec):
    with pytest.raises(SchemaError):
        parse_tweet(json.dumps(rec))


def test_integer_ids_coerced():
    t = parse_tweet('{"id":17,"timestamp":1,"author_id":9,"text":"x"}')
    assert (t.id, t.author_id) == ("17", "9")


def test_worked_example_entities():
    ents = extract_entities(tw(1, 0, "u", OBAMA), SW)
    assert ents == [
        Entity(EntityKind.HASHTAG, "#obamacare"),
        Entity(EntityKind.MENTION, "@ofatruthteam"),
        Entity(EntityKind.URL, "pic.twitter.com/s9QHilsSjO"),
        Entity(EntityKind.PHRASE, OBAMA_PHRASE),
    ]


def test_hashtags_only_no_phrase():
    assert extract_entities("#a #b", SW) == [
        Entity(EntityKind.HASHTAG, "#a"), Entity(EntityKind.HASHTAG, "#b")]


def test_empty_text():
    assert extract_entities("", SW) == []


def test_url_path_case_kept_host_lowered():
    ents = extract_entities("see HTTP://Example.COM/AbC, now", SW)
    assert Entity(EntityKind.URL, "http://example.com/AbC") in ents


def test_hash_inside_url_is_not_a_hashtag():
    ents = extract_entities("http://x.org/page#frag", SW)
    assert [e.kind for e in ents] == [EntityKind.URL]


def test_blinded_hashtag_disappears():
    a = Analyzer(blind=["Obamacare"])
    tf = a(tw(1, 0, "u", OBAMA))
    keys = {e.key for e in tf.entities}
    assert "#obamacare" not in keys
    assert "#obamacare" not in tf.terms


def test_features():
    tf = Analyzer()(tw(1, 5, "U1", "RT @bob: health health #Care", rt="bob"))
    assert tf.mentions == ("bob",)
    assert tf.terms == {"health": 2, "#care": 1, "@bob": 1}
    assert tf.diffusion == {"U1", "bob"}


def test_duplicate_entities_collapse():
    ents = extract_entities("#x #X @a @A", SW)
    assert ents == [Entity(EntityKind.HASHTAG, "#x"), Entity(EntityKind.MENTION, "@a")]


def test_empty_entity_key_rejected():
    with pytest.raises(ValueError):
        Entity(EntityKind.PHRASE, "")


_tweets = st.builds(
    Tweet,
    id=st.text(min_size=1, max_size=8),
    timestamp=st.integers(0, 10**9),
    author_id=st.text(min_size=1, max_size=8),
    text=st.text(max_size=60),
    retweet_of_author=st.none() | st.text(min_size=1, max_size=8),
    labels=st.frozensets(st.text(min_size=1, max_size=5), max_size=3),
)


@given(_tweets)
def test_json_round_trip(t):
    assert parse_tweet(tweet_to_json(t)) == t


@given(st.text(max_size=80))
def test_entity_invariants(text):
    ents = extract_entities(text, SW)
    assert len(ents) == len(set(ents))
    assert sum(e.kind is EntityKind.PHRASE for e in ents) <= 1
    for e in ents:
        assert e.key
        if e.kind in (EntityKind.HASHTAG, EntityKind.MENTION):
            assert e.key == e.key.lower()
