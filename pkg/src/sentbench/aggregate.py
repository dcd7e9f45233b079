"""Bag-of-words aggregation of token vectors into sentence vectors.

Three strategies: plain mean, frequency-weighted mean with common-component
removal, and mean concatenated with componentwise max.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from .lexicon import FrequencyTable, WordVectorTable, sentence_token_vectors, unigram_probability

DEFAULT_SIF_A = 1e-3
POWER_ITER_MAX = 100
POWER_ITER_TOL = 1e-10


@dataclass(frozen=True)
class Mean:
    """Arithmetic mean of token vectors."""


@dataclass(frozen=True)
class MeanMaxConcat:
    """Mean pooling concatenated with componentwise max pooling (2d output)."""


@dataclass(frozen=True)
class Sif:
    """Weighted mean with weights a/(a+p(w)) plus common-component removal.

    ``component`` is the fitted unit principal direction; it is absent until
    fitted on a corpus.
    """

    freq: FrequencyTable
    a: float = DEFAULT_SIF_A
    component: np.ndarray | None = None

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("smoothing parameter a must be positive")
        if self.component is not None:
            norm = np.linalg.norm(self.component)
            if abs(norm - 1.0) > 1e-9:
                raise ValueError("component must be a unit vector")


AggregationStrategy = Union[Mean, Sif, MeanMaxConcat]


def output_dim(strategy: AggregationStrategy, d: int) -> int:
    return 2 * d if isinstance(strategy, MeanMaxConcat) else d


def _stack(vs: Sequence[np.ndarray], dim: int | None):
    if len(vs) == 0:
        if dim is None:
            raise ValueError("empty sequence needs an explicit dim")
        return None
    arr = np.asarray(vs, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("mixed vector dimensions")
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"vectors have dim {arr.shape[1]}, expected {dim}")
    return arr


def mean_pool(vs: Sequence[np.ndarray], dim: int | None = None) -> np.ndarray:
    """Componentwise average; an empty sequence yields the zero vector."""
    arr = _stack(vs, dim)
    if arr is None:
        return np.zeros(dim)
    return arr.mean(axis=0)


def max_pool(vs: Sequence[np.ndarray], dim: int | None = None) -> np.ndarray:
    """Componentwise maximum; an empty sequence yields the zero vector."""
    arr = _stack(vs, dim)
    if arr is None:
        return np.zeros(dim)
    return arr.max(axis=0)


def mean_max_concat(vs: Sequence[np.ndarray], dim: int | None = None) -> np.ndarray:
    """Mean pooling followed by max pooling, concatenated (length 2d)."""
    return np.concatenate([mean_pool(vs, dim), max_pool(vs, dim)])


def sif_weight(a: float, p: float) -> float:
    """Smooth inverse-frequency weight a/(a+p), in (0, 1]."""
    if a <= 0:
        raise ValueError("a must be positive")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be a probability")
    return a / (a + p)


def sif_weighted_mean(
    tokens: Sequence[str], vs: Sequence[np.ndarray], strat: Sif
) -> np.ndarray:
    """Weighted arithmetic mean (1/n) sum_i w(p(token_i)) * v_i, with the fitted
    common component removed when present. Empty input yields a zero vector of
    the component's dim (no removal)."""
    if len(tokens) != len(vs):
        raise ValueError("tokens and vectors must have equal length")
    if len(vs) == 0:
        if strat.component is None:
            raise ValueError("empty input needs a fitted component for the dim")
        return np.zeros(len(strat.component))
    arr = _stack(vs, None)
    weights = np.array(
        [sif_weight(strat.a, unigram_probability(strat.freq, tok)) for tok in tokens]
    )
    result = (weights[:, None] * arr).sum(axis=0) / len(vs)
    if strat.component is not None:
        result = remove_common_component(result, strat.component)
    return result


def fit_common_component(
    M: np.ndarray, max_iter: int = POWER_ITER_MAX, tol: float = POWER_ITER_TOL, seed: int = 0
) -> np.ndarray:
    """First right singular direction of the uncentred matrix M (n x d), by
    power iteration on M^T M. The sign is fixed so the first nonzero coordinate
    is positive; the result is unit length."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] < 1:
        raise ValueError("need a matrix with at least one row")
    if not np.any(M):
        raise ValueError("all-zero matrix has no principal direction")
    B = M.T @ M
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(M.shape[1])
    x /= np.linalg.norm(x)
    for _ in range(max_iter):
        y = B @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            # start vector landed in the null space; restart
            x = rng.standard_normal(M.shape[1])
            x /= np.linalg.norm(x)
            continue
        y /= norm
        # B is PSD so no sign flipping between iterations
        if np.linalg.norm(y - x) < tol:
            x = y
            break
        x = y
    nonzero = np.nonzero(np.abs(x) > 1e-12)[0]
    if nonzero.size and x[nonzero[0]] < 0:
        x = -x
    return x / np.linalg.norm(x)


def remove_common_component(v: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Subtract the projection of v onto the unit direction c."""
    v = np.asarray(v, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if v.shape != c.shape:
        raise ValueError("dimension mismatch")
    if abs(np.linalg.norm(c) - 1.0) > 1e-9:
        raise ValueError("c must be a unit vector")
    return v - (v @ c) * c


def embed_corpus(
    sentences: Sequence[Sequence[str]],
    table: WordVectorTable,
    strat: AggregationStrategy,
    fit_rows: Sequence[int] | None = None,
    normalize_tokens: bool = True,
) -> np.ndarray:
    """One sentence vector per token sequence, stacked as rows.

    For the weighted-mean strategy the common component is fitted on
    ``fit_rows`` only (typically the training split) and removed from every
    row, so held-out rows never influence the fit.
    """
    d = table.dim
    out = np.zeros((len(sentences), output_dim(strat, d)))
    if isinstance(strat, Mean):
        for i, toks in enumerate(sentences):
            out[i] = mean_pool(sentence_token_vectors(table, toks, normalize_tokens), d)
        return out
    if isinstance(strat, MeanMaxConcat):
        for i, toks in enumerate(sentences):
            out[i] = mean_max_concat(sentence_token_vectors(table, toks, normalize_tokens), d)
        return out
    if isinstance(strat, Sif):
        if fit_rows is None or len(fit_rows) == 0:
            raise ValueError("SIF aggregation needs non-empty fit_rows")
        unfitted = replace(strat, component=None)
        for i, toks in enumerate(sentences):
            iv_tokens, vecs = [], []
            for tok in toks:
                vec = table.entries.get(tok)
                if vec is None:
                    continue
                iv_tokens.append(tok)
                vecs.append(vec / np.linalg.norm(vec) if normalize_tokens else vec)
            if vecs:
                out[i] = sif_weighted_mean(iv_tokens, vecs, unfitted)
        component = fit_common_component(out[np.asarray(fit_rows, dtype=int)])
        for i in range(len(sentences)):
            out[i] = remove_common_component(out[i], component)
        return out
    raise TypeError(f"unknown strategy {strat!r}")
