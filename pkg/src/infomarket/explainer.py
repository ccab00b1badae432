"""Ranking n-gram features that separate news after a pivotal date from news before it."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Iterable

from .errors import EmptySide, InvalidCounts, NoFeatures
from .ingest import Corpus, Document

PHI = 1e-6
MAX_NGRAM = 3

_TOKEN = re.compile(r"[^\W_]+(?:'[^\W_]+)*")
_NUMBER = re.compile(r"\d+(?:st|nd|rd|th|s|'s)?")
_MONTHS = frozenset(
    "january february march april may june july august september october november december "
    "jan feb mar apr jun jul aug sep sept oct nov dec".split()
)


def tokenize(text: str) -> list[str]:
    """Lowercased runs of letters and digits; inner apostrophes are kept."""
    return _TOKEN.findall(text.lower().replace("’", "'"))


def _removed_mask(tokens: list[str]) -> list[bool]:
    numeric = [bool(_NUMBER.fullmatch(t)) for t in tokens]
    removed = list(numeric)
    for i, tok in enumerate(tokens):
        if tok in _MONTHS:
            if (i > 0 and numeric[i - 1]) or (i + 1 < len(tokens) and numeric[i + 1]):
                removed[i] = True
    return removed


def _segments(text: str) -> list[list[str]]:
    tokens = tokenize(text)
    segments, current = [], []
    for tok, gone in zip(tokens, _removed_mask(tokens)):
        if gone:
            if current:
                segments.append(current)
            current = []
        else:
            current.append(tok)
    if current:
        segments.append(current)
    return segments


def extract_features(doc: Document | str, max_n: int = MAX_NGRAM) -> set[str]:
    """Set of 1..max_n-grams, after dropping numbers and dates.

    Numbers, ordinals and month names written next to a number are removed;
    no n-gram bridges a removed token.
    """
    text = doc.text if isinstance(doc, Document) else doc
    feats = set()
    for seg in _segments(text):
        for n in range(1, max_n + 1):
            for i in range(len(seg) - n + 1):
                feats.add(" ".join(seg[i : i + n]))
    return feats


def normalize_stop_entry(entry: str) -> str:
    return " ".join(tokenize(entry))


def load_stoplist(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(e for e in (normalize_stop_entry(line) for line in fh) if e)


def is_stopped(feature: str, stoplist: frozenset[str]) -> bool:
    """True if the feature, or any contiguous part of it, is stoplisted."""
    if not stoplist:
        return False
    toks = feature.split(" ")
    for n in range(1, len(toks) + 1):
        for i in range(len(toks) - n + 1):
            if " ".join(toks[i : i + n]) in stoplist:
                return True
    return False


@dataclass(frozen=True)
class SplitSpec:
    pivot_date: date
    positive_window_days: int = 7
    negative_window_days: int | None = None

    def __post_init__(self):
        if self.positive_window_days < 1:
            raise ValueError("positive_window_days must be positive")
        if self.negative_window_days is not None and self.negative_window_days < 1:
            raise ValueError("negative_window_days must be positive")


def split_corpus(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus]:
    """Return ``(negative, positive)``.

    Positive: ``pivot <= date < pivot + positive_window_days``. Negative:
    anything earlier than the pivot, optionally only the last
    ``negative_window_days`` days. Everything else is dropped.
    """
    pos_end = spec.pivot_date + timedelta(days=spec.positive_window_days)
    neg_start = None
    if spec.negative_window_days is not None:
        neg_start = spec.pivot_date - timedelta(days=spec.negative_window_days)
    neg, pos = [], []
    for doc in corpus:
        if spec.pivot_date <= doc.date < pos_end:
            pos.append(doc)
        elif doc.date < spec.pivot_date and (neg_start is None or doc.date >= neg_start):
            neg.append(doc)
    if not neg or not pos:
        raise EmptySide(f"split at {spec.pivot_date} leaves {len(neg)} negative and {len(pos)} positive documents")
    return Corpus(tuple(neg)), Corpus(tuple(pos))


def document_frequencies(corpus: Iterable[Document], max_n: int = MAX_NGRAM) -> Counter:
    counts: Counter = Counter()
    for doc in corpus:
        counts.update(extract_features(doc, max_n))
    return counts


@dataclass(frozen=True)
class FeatureCounts:
    """Surviving features mapped to ``(pos_df, neg_df)``."""

    counts: dict[str, tuple[int, int]]
    pos_total: int
    neg_total: int

    def __len__(self):
        return len(self.counts)

    def __contains__(self, feature):
        return feature in self.counts


def filter_features(
    pos: Corpus,
    neg: Corpus,
    min_pos_fraction: float = 0.075,
    stoplist: Iterable[str] = (),
    max_n: int = MAX_NGRAM,
) -> FeatureCounts:
    """Drop stoplisted features, then those in too few positive documents.

    No generic stop-word list is applied; frequent function words survive
    and are left to score low.
    """
    if not len(pos) or not len(neg):
        raise EmptySide("both corpora must be non-empty")
    stop = frozenset(normalize_stop_entry(s) for s in stoplist) - {""}
    pos_df = document_frequencies(pos, max_n)
    neg_df = document_frequencies(neg, max_n)
    need = min_pos_fraction * len(pos)
    kept = {
        f: (c, neg_df.get(f, 0))
        for f, c in pos_df.items()
        if c >= need - 1e-9 and not is_stopped(f, stop)
    }
    if not kept:
        raise NoFeatures("no feature survives the stoplist and frequency filter")
    return FeatureCounts(kept, len(pos), len(neg))


def _entropy(q: float, phi: float) -> float:
    if q <= 0.0:
        q = phi
    elif q >= 1.0:
        q = 1.0 - phi
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


def expected_entropy_loss(pos_df: int, neg_df: int, pos_total: int, neg_total: int, phi: float = PHI) -> float:
    """Class entropy minus the expected class entropy once the feature is seen, in bits.

    Probabilities of exactly 0 or 1 inside an entropy are replaced by
    ``phi`` and ``1 - phi``; the result is floored at 0.

    >>> round(expected_entropy_loss(8, 2, 10, 10), 4)
    0.2781
    """
    for name, v in (("pos_df", pos_df), ("neg_df", neg_df), ("pos_total", pos_total), ("neg_total", neg_total)):
        if isinstance(v, bool) or int(v) != v:
            raise InvalidCounts(f"{name} must be an integer, got {v!r}")
    pos_df, neg_df, pos_total, neg_total = int(pos_df), int(neg_df), int(pos_total), int(neg_total)
    if pos_total < 1 or neg_total < 1:
        raise InvalidCounts("totals must be at least 1")
    if not (0 <= pos_df <= pos_total and 0 <= neg_df <= neg_total):
        raise InvalidCounts("document frequencies must lie in [0, total]")

    n = pos_total + neg_total
    prior = _entropy(pos_total / n, phi)
    with_f = pos_df + neg_df
    without_f = n - with_f
    loss = 0.0
    # written as a weighted sum of per-branch losses so equal class ratios give exactly 0
    if with_f:
        loss += (with_f / n) * (prior - _entropy(pos_df / with_f, phi))
    if without_f:
        loss += (without_f / n) * (prior - _entropy((pos_total - pos_df) / without_f, phi))
    return max(loss, 0.0)


@dataclass(frozen=True)
class FeatureStat:
    feature: str
    pos_df: int
    neg_df: int
    pos_total: int
    neg_total: int
    entropy_loss: float


@dataclass(frozen=True)
class ExplainConfig:
    min_pos_fraction: float = 0.075
    stoplist: frozenset[str] = field(default_factory=frozenset)
    top_k: int | None = 10
    phi: float = PHI
    max_n: int = MAX_NGRAM


def rank_features(pos: Corpus, neg: Corpus, config: ExplainConfig | None = None) -> list[FeatureStat]:
    """Score surviving features and sort by entropy loss.

    Ties go to the feature in more positive documents, then alphabetical.
    """
    config = config or ExplainConfig()
    counts = filter_features(pos, neg, config.min_pos_fraction, config.stoplist, config.max_n)
    stats = [
        FeatureStat(f, p, q, counts.pos_total, counts.neg_total,
                    expected_entropy_loss(p, q, counts.pos_total, counts.neg_total, config.phi))
        for f, (p, q) in counts.counts.items()
    ]
    stats.sort(key=lambda s: (-s.entropy_loss, -s.pos_df, s.feature))
    if config.top_k is not None:
        stats = stats[: config.top_k]
    return stats


RANK_HEADER = ("rank", "feature", "entropy_loss", "pos_df", "neg_df")


def rank_rows(stats: Iterable[FeatureStat]):
    return [(i, s.feature, s.entropy_loss, s.pos_df, s.neg_df) for i, s in enumerate(stats, start=1)]


def explain(corpus: Corpus, spec: SplitSpec, config: ExplainConfig | None = None) -> list[FeatureStat]:
    neg, pos = split_corpus(corpus, spec)
    return rank_features(pos, neg, config)
