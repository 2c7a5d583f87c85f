"""Shared fixtures: document construction, randomized text generation,
and on-disk corpus trees."""

from __future__ import annotations

import random

import pytest

from corpusforge.dedup import content_digest
from corpusforge.records import Document
from corpusforge.textnorm import load_stopwords

# Vocabulary pools for randomized documents: ordinary words, stop words,
# punctuation-adjacent tokens, unicode, numerics, and trigger phrases.
PLAIN_WORDS = [
    "apple", "banana", "carrot", "delta", "echo", "foxtrot", "gamma",
    "harbor", "island", "jungle", "kernel", "lemon", "meadow", "nectar",
    "orbit", "pillar", "quartz", "river", "stone", "timber", "umbra",
    "velvet", "willow", "xenon", "yonder", "zephyr",
]
STOPPY = ["the", "and", "of", "to", "in", "a", "is", "that", "it", "for"]
SPICY = [
    "HELLO", "WORLD", "NASA", "{", "}", "{x}", "#tag", "#", "...", "…",
    "3.14", "1,000", "it's", "well-known", "co-op", "--", "''", "¡hola!",
    "naïve", "Ω", "№5", "javascript", "JavaScript", "lorem", "ipsum",
    "Lorem Ipsum", "•", "• item", "–dash", "end...", "maybe…", "42",
    "x2", "2x", "C3PO", "...start", "a.b", "e.g.", "etc.", "“quoted”",
]
LINE_ENDINGS = ["", ".", "!", "?", "...", "…", ",", ":", "”"]


def random_text(rng: random.Random, max_words: int = 200) -> str:
    """A randomized multi-line document exercising every signal path."""
    total = rng.randint(0, max_words)
    parts: list[str] = []
    while sum(len(p.split()) for p in parts) < total:
        n = rng.randint(1, 12)
        words = []
        for _ in range(n):
            pool = rng.choice((PLAIN_WORDS, PLAIN_WORDS, STOPPY, SPICY))
            words.append(rng.choice(pool))
        line = " ".join(words) + rng.choice(LINE_ENDINGS)
        if rng.random() < 0.1:
            line = "  " + line + " "
        parts.append(line)
        # occasionally repeat an earlier line to create duplicate n-grams
        if parts and rng.random() < 0.2:
            parts.append(rng.choice(parts))
    return "\n".join(parts)


def make_doc(text: str, **overrides) -> Document:
    values = dict(
        url="http://example.com/page",
        date_download="2023-04-08T10:00:00Z",
        digest="sha256:" + content_digest(text),
        length=len(text),
        nlines=text.count("\n") + 1 if text else 0,
        source_domain="example.com",
        title="",
        raw_content=text,
        cc_segment="crawl-data/CC/segments/0/wet/0.warc.wet.gz",
        original_nlines=text.count("\n") + 1 if text else 0,
        original_length=len(text),
        line_ids=list(range(text.count("\n") + 1 if text else 0)),
        language="en",
        language_score=0.98,
        perplexity=320.5,
        bucket="head",
    )
    values.update(overrides)
    return Document(**values)


@pytest.fixture(scope="session")
def en_stopwords():
    return load_stopwords("en")


@pytest.fixture()
def rng():
    return random.Random(0xC0FFEE)
