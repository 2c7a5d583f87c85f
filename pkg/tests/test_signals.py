"""Rule-based quality signals against the brute-force references, plus
targeted edge cases for blocklists, line signals, and code heuristics."""

import dataclasses

import pytest

import oracles

from corpusforge.signals import (
    code_quality_metrics,
    content_signals,
    count_blocklist_phrases,
    doc_natlang_signals,
    doc_repetition_signals,
    frac_chars_dupe_ngrams,
    frac_chars_top_ngram,
    line_signals,
    load_ldnoobw,
    load_ut1,
    ut1_categories,
)
from corpusforge.textnorm import analyze

from conftest import make_doc, random_text


def _natlang_dict(doc, view, stopwords):
    return dataclasses.asdict(doc_natlang_signals(doc, view, stopwords))


def test_natlang_signals_match_oracle(rng, en_stopwords):
    for _ in range(200):
        text = random_text(rng, max_words=120)
        doc = make_doc(text)
        got = _natlang_dict(doc, analyze(text), en_stopwords)
        expected = oracles.oracle_natlang(text, en_stopwords)
        assert got == expected, text


def test_natlang_empty_document(en_stopwords):
    doc = make_doc("")
    values = _natlang_dict(doc, analyze(""), en_stopwords)
    assert all(v == 0.0 for v in values.values())


def test_symbol_counting_is_left_to_right():
    # "...." = one "..." match then a lone dot; "……" = two ellipsis chars
    doc = make_doc("word .... more ……")
    view = analyze(doc.raw_content)
    sig = doc_natlang_signals(doc, view, frozenset())
    assert sig.rps_doc_symbol_to_word_ratio == 3 / 2


def test_all_caps_requires_alpha_only():
    doc = make_doc("NASA C3PO A HTTP2 OK!")
    view = analyze(doc.raw_content)
    sig = doc_natlang_signals(doc, view, frozenset())
    # raw whitespace words: NASA, C3PO, A, HTTP2, OK! -> caps: NASA, A
    assert sig.rps_doc_frac_all_caps_words == 2 / 5


def test_repetition_signals_match_oracle(rng):
    for _ in range(200):
        text = random_text(rng, max_words=120)
        view = analyze(text)
        got = dataclasses.asdict(doc_repetition_signals(view))
        assert got == oracles.oracle_repetition(text), text


def test_dupe_ngrams_counts_characters_once():
    # "a b c d e" twice: both occurrences of the repeated 5-gram are
    # covered (18 of 19 chars; the separating space is outside both)
    view = analyze("a b c d e a b c d e")
    assert frac_chars_dupe_ngrams(view, 5) == 18 / 19
    # no repeated 5-gram in distinct words
    assert frac_chars_dupe_ngrams(analyze("a b c d e f g h i j"), 5) == 0.0


def test_top_ngram_tie_breaks_to_longer_gram():
    # "aa bb" and "c d" both occur twice; the longer one is attributed
    view = analyze("aa bb x c d y aa bb z c d")
    got = frac_chars_top_ngram(view, 2)
    assert got == 2 * len("aa bb") / len(view.normalized)


def test_top_ngram_clamps_to_one():
    # "x x" occurs 5 times overlapping; 5 * 3 chars > 11 total, so clamp
    view = analyze("x x x x x x")
    assert frac_chars_top_ngram(view, 2) == 1.0


def test_blocklist_phrase_matching(en_stopwords):
    phrases = frozenset({"bad", "very bad", "very bad thing"})
    words = "a very bad thing and a bad one plus very bad stuff".split()
    # longest-match: "very bad thing", then "bad", then "very bad"
    assert count_blocklist_phrases(words, phrases) == 3
    assert count_blocklist_phrases(words, frozenset()) == 0
    assert oracles.oracle_blocklist_count(words, phrases) == 3


def test_vendored_blocklists_load():
    for lang in ("en", "de", "fr", "es", "it"):
        assert load_ldnoobw(lang)
    table, names = load_ut1()
    assert names == sorted(names) and len(names) >= 2
    assert ut1_categories("nsfw.example.com", table) == [names.index("adult")]
    # subdomain inherits the parent domain's categories
    assert ut1_categories("x.y.nsfw.example.com", table) == [names.index("adult")]
    assert ut1_categories("clean.example.org", table) == []


def test_content_signals(en_stopwords):
    table, names = load_ut1()
    blocklist = load_ldnoobw("en")
    doc = make_doc("nothing objectionable here", source_domain="nsfw.example.com")
    cs = content_signals(doc, analyze(doc.raw_content), blocklist, table)
    assert cs.rps_doc_ldnoobw_words == 0
    assert cs.rps_doc_ut1_blacklist == [names.index("adult")]


def test_line_signals_match_oracle(rng):
    for _ in range(200):
        text = random_text(rng, max_words=80)
        doc = make_doc(text)
        ls = line_signals(doc)
        expected = oracles.oracle_line_signals(text)
        assert ls.ending_with_terminal_punctution_mark == expected[
            "rps_lines_ending_with_terminal_punctution_mark"
        ]
        assert ls.javascript_counts == expected["rps_lines_javascript_counts"]
        assert ls.num_words == expected["rps_lines_num_words"]
        assert ls.numerical_chars_fraction == expected[
            "rps_lines_numerical_chars_fraction"
        ]
        assert ls.start_with_bulletpoint == expected[
            "rps_lines_start_with_bulletpoint"
        ]
        assert ls.uppercase_letter_fraction == expected[
            "rps_lines_uppercase_letter_fraction"
        ]
        # spans tile the document and match nlines
        assert len(ls.spans) == (len(text.split("\n")) if text else 0)


def test_line_signals_specifics():
    doc = make_doc('He said. ”\n• bullet item\nJavaScript and javascript:\n12a')
    ls = line_signals(doc)
    assert ls.ending_with_terminal_punctution_mark == [1, 0, 0, 0]
    assert ls.start_with_bulletpoint == [0, 1, 0, 0]
    assert ls.javascript_counts == [0, 0, 2, 0]
    assert ls.numerical_chars_fraction[3] == 2 / 3


def test_code_quality_metrics():
    m = code_quality_metrics("pkg/module.py", "abc def\nxy")
    assert m.max_line_length == 7
    assert m.avg_line_length == (7 + 2) / 2
    assert m.alnum_prop == 8 / 10
    assert m.alpha_token_ratio == 8 / 3
    assert m.extension_ok

    assert code_quality_metrics("Dockerfile", "FROM x").extension_ok
    assert code_quality_metrics("deep/path/Makefile", "all:").extension_ok
    assert not code_quality_metrics("notes.txt", "hi").extension_ok
    assert not code_quality_metrics("noext", "hi").extension_ok
    # extension matching is case-sensitive: .C is whitelisted, .c also is
    assert code_quality_metrics("a.C", "x").extension_ok
    empty = code_quality_metrics("a.py", "")
    assert empty.max_line_length == 0 and empty.avg_line_length == 0.0


@pytest.mark.parametrize("n", [5, 7, 10])
def test_dupe_fraction_handles_short_docs(n):
    assert frac_chars_dupe_ngrams(analyze("one two three"), n) == 0.0
    assert frac_chars_dupe_ngrams(analyze(""), n) == 0.0
