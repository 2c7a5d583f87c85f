"""Normalization, tokenization, sentence and line segmentation."""

import random

from oracles import oracle_normalize, oracle_sentence_count

from corpusforge.textnorm import (
    analyze,
    line_spans,
    normalize,
    normalize_with_map,
    normalized_word_positions,
    split_sentences,
    tokenize_words,
)

from conftest import random_text


def test_normalize_basics():
    assert normalize("Hello, World!") == "hello world"
    assert normalize("  a   b\t\nc ") == "a b c"
    assert normalize("") == ""
    assert normalize("!!! ... ???") == ""


def test_normalize_keeps_interior_apostrophes_and_hyphens():
    assert normalize("it's") == "it's"
    assert normalize("rock 'n' roll") == "rock n roll"  # edge apostrophes go
    assert normalize("well-known co-op") == "well-known co-op"
    # edge positions are stripped
    assert normalize("'quoted'") == "quoted"
    assert normalize("-dash- trail-") == "dash trail"
    assert normalize("a - b") == "a b"


def test_normalize_nfc_and_casefold():
    # decomposed e + combining acute composes, then lowercases
    assert normalize("Café") == "café"
    assert normalize("STRASSE Ω") == "strasse ω"


def test_normalize_matches_oracle_randomized(rng):
    for _ in range(300):
        text = random_text(rng, max_words=60)
        assert normalize(text) == oracle_normalize(text)


def test_offset_map_points_into_raw():
    raw = "  Hello,   WORLD-wide  (web)! "
    norm, offsets = normalize_with_map(raw)
    assert len(offsets) == len(norm)
    for i, ch in enumerate(norm):
        if ch == " ":
            assert raw[offsets[i]].isspace()
        else:
            assert raw[offsets[i]].lower() == ch


def test_tokenize_words_spans():
    words = tokenize_words("One two, THREE!")
    assert [w.text for w in words] == ["one", "two", "three"]
    raw = "One two, THREE!"
    for w in words:
        assert raw[w.start:w.end].lower() == w.text


def test_sentence_counting():
    assert split_sentences("One. Two! Three?") == 3
    assert split_sentences("No terminator here") == 1
    assert split_sentences("Version 3.14 is out.") == 1  # interior dot
    assert split_sentences("Ends mid way. And trails") == 2
    assert split_sentences("... ! ?") == 0  # no alphanumeric content
    assert split_sentences("") == 0


def test_sentence_counting_matches_oracle(rng):
    for _ in range(300):
        text = random_text(rng, max_words=40)
        assert split_sentences(text) == oracle_sentence_count(text)


def test_line_spans_tile_and_match_split():
    for text in ["", "a", "a\nb", "a\n", "\n", "a\n\nb\n", "x" * 5]:
        spans = line_spans(text)
        assert len(spans) == (len(text.split("\n")) if text else 0)
        pos = 0
        for start, end in spans:
            assert start == pos and end >= start
            pos = end
        if text:
            assert pos == len(text)
            for (start, end), line in zip(spans, text.split("\n")):
                assert text[start:end].rstrip("\n") == line


def test_normalized_word_positions_roundtrip(rng):
    for _ in range(100):
        text = random_text(rng, max_words=30)
        view = analyze(text)
        for (start, end), word in zip(
            normalized_word_positions(view), view.word_texts
        ):
            assert view.normalized[start:end] == word
