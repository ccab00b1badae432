"""Seeded synthetic inputs: planted-feature corpora and price series with a known jump."""

from __future__ import annotations

import itertools
from datetime import date, timedelta

import numpy as np

from .core import CandidateSeries, Market, Outcome, from_log_likelihood
from .ingest import Corpus, Document

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"
NORMAL_MAD = 0.6744897501960817  # MAD of a standard normal


def background_vocabulary(size: int = 300) -> list[str]:
    """Distinct three-syllable nonsense words, deterministic."""
    syllables = [c + v for c, v in itertools.product(_CONSONANTS, _VOWELS)]
    words = ("".join(p) for p in itertools.product(syllables, repeat=3))
    return list(itertools.islice(words, 0, size * 97, 97))


def planted_corpus(
    seed: int = 0,
    pivot: date = date(1996, 8, 6),
    n_neg: int = 40,
    n_pos: int = 20,
    planted: tuple[tuple[str, int, int], ...] = (("meteorite", 20, 0), ("martian", 10, 2)),
    vocab_size: int = 200,
    doc_length: int = 60,
) -> Corpus:
    """Negative docs dated before ``pivot``, positive docs within the following week.

    Each ``(word, k_pos, k_neg)`` in ``planted`` is inserted into exactly
    ``k_pos`` positive and ``k_neg`` negative documents. Background words
    come from one vocabulary shared by both sides.
    """
    rng = np.random.default_rng(seed)
    vocab = background_vocabulary(vocab_size)
    docs = [[str(w) for w in rng.choice(vocab, size=doc_length)] for _ in range(n_neg + n_pos)]
    neg_ids = np.arange(n_neg)
    pos_ids = np.arange(n_neg, n_neg + n_pos)
    for word, k_pos, k_neg in planted:
        for idx in list(rng.choice(pos_ids, size=k_pos, replace=False)) + list(rng.choice(neg_ids, size=k_neg, replace=False)):
            words = docs[idx]
            words.insert(int(rng.integers(0, len(words) + 1)), word)
    out = []
    for i, words in enumerate(docs):
        if i < n_neg:
            day = pivot - timedelta(days=int(rng.integers(1, 60)))
        else:
            day = pivot + timedelta(days=int(rng.integers(0, 7)))
        out.append(Document(f"doc{i:04d}", day, "synthetic", " ".join(words)))
    return Corpus(tuple(out))


def jump_series(
    seed: int = 0,
    days: int = 60,
    noise_mad: float = 0.05,
    jump: float = 1.0,
    jump_index: int | None = None,
    start: date = date(2000, 1, 1),
    market_id: str = "jump",
    candidate_id: str = "A",
) -> tuple[Market, date]:
    """Binary market whose daily log-likelihood changes are Gaussian noise plus one jump.

    Noise has median absolute deviation ``noise_mad``; the jump has
    magnitude ``jump`` and random sign. Returns the market and the date
    on which the jumped price is first observed.
    """
    rng = np.random.default_rng(seed)
    sigma = noise_mad / NORMAL_MAD
    steps = rng.normal(0.0, sigma, size=days - 1)
    if jump_index is None:
        jump_index = int(rng.integers(5, days - 6))
    steps[jump_index] = jump * (1.0 if rng.random() < 0.5 else -1.0)
    ll = np.concatenate([[0.0], np.cumsum(steps)])
    prices = [from_log_likelihood(x) for x in ll]
    end = start + timedelta(days=days - 1)
    series = CandidateSeries(market_id, candidate_id, Outcome.WON, np.arange(-(days - 1), 1), prices, end)
    return Market(market_id, (series,)), start + timedelta(days=jump_index + 1)
