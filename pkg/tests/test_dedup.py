"""Bloom filter, MinHash/LSH, clustering, SimHash, and line dedup."""

import random

import numpy as np
import pytest

from corpusforge.dedup import (
    BloomFilter,
    DuplicateRecord,
    cluster_and_select,
    content_digest,
    detection_probability,
    estimate_jaccard,
    exact_dedup_pass,
    hamming_distance,
    line_dedup,
    lsh_candidates,
    minhash_for_words,
    minhash_signature,
    near_dup,
    pick_banding,
    shingles,
    simhash64,
)
from corpusforge.errors import ConfigError

from conftest import make_doc


def test_bloom_no_false_negatives():
    bloom = BloomFilter(capacity=1000, error_rate=0.01)
    keys = [f"key-{i}" for i in range(1000)]
    for k in keys:
        bloom.add(k)
    assert all(k in bloom for k in keys)


def test_bloom_sizing_and_validation():
    bloom = BloomFilter(capacity=100_000, error_rate=0.01)
    assert bloom.num_bits == 958_506
    assert bloom.num_hashes == 7
    with pytest.raises(ConfigError):
        BloomFilter(capacity=0)
    with pytest.raises(ConfigError):
        BloomFilter(capacity=10, error_rate=1.5)


def test_bloom_capacity_warning():
    bloom = BloomFilter(capacity=5, error_rate=0.01)
    for i in range(5):
        bloom.add(str(i))
    with pytest.warns(UserWarning, match="past design capacity"):
        bloom.add("overflow")


def test_bloom_union_and_save_load(tmp_path):
    a = BloomFilter(capacity=100)
    b = BloomFilter(capacity=100)
    a.add("left")
    b.add("right")
    merged = a.union(b)
    assert "left" in merged and "right" in merged
    path = tmp_path / "bloom.json"
    merged.save(str(path))
    restored = BloomFilter.load(str(path))
    assert "left" in restored and "right" in restored
    assert restored.inserted_count == 2
    with pytest.raises(ConfigError):
        a.union(BloomFilter(capacity=999))


def test_exact_dedup_keeps_first_occurrence():
    entries = [
        ("d0", "s0", content_digest("same")),
        ("d1", "s0", content_digest("other")),
        ("d2", "s1", content_digest("same")),
        ("d3", "s1", content_digest("same")),
    ]
    bloom = BloomFilter(capacity=100)
    records = list(exact_dedup_pass(entries, bloom))
    assert [(r.doc_id, r.kept_representative_id) for r in records] == [
        ("d2", "d0"),
        ("d3", "d0"),
    ]


def test_shingles():
    words = [f"w{i}" for i in range(15)]
    assert len(shingles(words)) == 3  # 15 - 13 + 1
    # short documents fall back to one whole-document shingle
    assert len(shingles(["only", "two"])) == 1
    assert shingles([]) == set()


def test_minhash_identity_and_determinism():
    words = ["lorem"] + [f"tok{i}" for i in range(30)]
    sig1 = minhash_for_words(words)
    sig2 = minhash_for_words(list(words))
    assert sig1.dtype == np.uint64 and len(sig1) == 128
    assert np.array_equal(sig1, sig2)
    assert estimate_jaccard(sig1, sig2) == 1.0
    empty = minhash_signature(set())
    assert np.all(empty == np.iinfo(np.uint64).max)


def test_estimate_jaccard_tracks_overlap():
    base = {f"sh{i}".encode() for i in range(200)}
    other = {f"sh{i}".encode() for i in range(100)} | {
        f"xx{i}".encode() for i in range(100)
    }
    est = estimate_jaccard(minhash_signature(base), minhash_signature(other))
    true_j = 100 / 300
    assert abs(est - true_j) < 0.15


def test_pick_banding():
    for level in (0.7, 0.8, 0.9, 1.0):
        b, r = pick_banding(level)
        assert b * r <= 128
        assert abs((1.0 / b) ** (1.0 / r) - level) < 0.05
    assert pick_banding(1.0) == (1, 128)
    assert 0.0 < detection_probability(0.9, 9, 13) < 1.0


def test_lsh_candidates_find_identical_signatures():
    sig_a = minhash_for_words([f"a{i}" for i in range(20)])
    sig_c = minhash_for_words([f"c{i}" for i in range(20)])
    pairs = lsh_candidates([("x", sig_a), ("y", sig_a), ("z", sig_c)])
    assert ("x", "y") in pairs
    assert not any("z" in p for p in pairs)
    with pytest.raises(ConfigError):
        lsh_candidates([], bands=10, rows=13)


def test_cluster_and_select_deterministic_under_shuffle():
    order = {f"d{i}": i for i in range(6)}
    shards = {k: "s" for k in order}
    pairs = [("d1", "d0"), ("d2", "d1"), ("d4", "d5")]
    expected = [
        ("d1", "d0"), ("d2", "d0"), ("d5", "d4"),
    ]
    for seed in range(5):
        shuffled = list(pairs)
        random.Random(seed).shuffle(shuffled)
        records = cluster_and_select(shuffled, order, shards)
        assert [(r.doc_id, r.kept_representative_id) for r in records] == expected


def test_cluster_rejects_unknown_ids():
    from corpusforge.errors import RecordError

    with pytest.raises(RecordError):
        cluster_and_select([("a", "b")], {"a": 0}, {})


def test_simhash_near_duplicates():
    words = [f"tok{i}" for i in range(60)]
    tweaked = words[:-1] + ["changed"]
    different = [f"other{i}" for i in range(60)]
    assert simhash64(words) == simhash64(list(words))
    assert near_dup(simhash64(words), simhash64(words), max_hamming=0)
    assert hamming_distance(simhash64(words), simhash64(tweaked)) < hamming_distance(
        simhash64(words), simhash64(different)
    )


def test_line_dedup_within_and_across_documents():
    d1 = make_doc("alpha one\nshared line\nalpha two")
    d2 = make_doc("shared line\nbeta one")
    out = list(line_dedup([d1, d2]))
    assert out[0].raw_content == d1.raw_content  # first doc untouched
    assert out[1].raw_content == "beta one"
    assert out[1].nlines == 1 and out[1].line_ids == [1]
    assert out[1].digest == content_digest("beta one")
    assert out[1].original_nlines == d2.original_nlines
    # repeated line inside one document
    d3 = make_doc("same\nsame\nnew")
    out3 = list(line_dedup([d3]))
    assert out3[0].raw_content == "same\nnew"


def test_duplicate_record_json():
    rec = DuplicateRecord("d1", "shard", "d0")
    assert '"representative_id":"d0"' in rec.to_json()
