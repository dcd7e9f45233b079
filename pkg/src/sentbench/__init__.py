"""Sentence representation toolkit: bag-of-words aggregation of word vectors,
shallow downstream probes and a deterministic evaluation harness."""

__version__ = "0.1.0"
