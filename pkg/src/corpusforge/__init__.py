"""corpusforge: desk-scale web-corpus curation.

Annotates documents with quality signals, deduplicates exactly (Bloom
filter) and fuzzily (MinHash LSH), and filters with configurable rule
sets (C4, Gopher, custom presets).
"""

__version__ = "0.1.0"
