"""Domain types and the price/score transforms.

Prices are probabilities in [0, 1]. The likelihood and log-likelihood
transforms are singular at 0 and 1, so they clamp prices into
``[delta, 1 - delta]`` first (``DELTA`` by default).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import date
from typing import Iterator, Sequence

import numpy as np

from .errors import AllZero, EmptyMarket, IndexOutOfRange, NoWinner, SchemaError

DELTA = 1e-6


class Outcome(enum.Enum):
    WON = "won"
    LOST = "lost"

    @classmethod
    def parse(cls, text: str) -> "Outcome":
        return cls(text.strip().lower())


def clamp(p: float, delta: float = DELTA) -> float:
    return min(max(float(p), delta), 1.0 - delta)


def to_likelihood(p: float, delta: float = DELTA) -> float:
    """Odds implied by a price, ``p / (1 - p)`` after clamping."""
    q = clamp(p, delta)
    return q / (1.0 - q)


def to_log_likelihood(p: float, delta: float = DELTA) -> float:
    q = clamp(p, delta)
    if q == 0.5:
        return 0.0
    return math.log(q) - math.log1p(-q)


def from_log_likelihood(ll: float) -> float:
    if not math.isfinite(ll):
        raise ValueError(f"log-likelihood price must be finite, got {ll!r}")
    if ll >= 0:
        return 1.0 / (1.0 + math.exp(-ll))
    e = math.exp(ll)
    return e / (1.0 + e)


def log_likelihood_array(prices, delta: float = DELTA) -> np.ndarray:
    """Vectorised :func:`to_log_likelihood`."""
    q = np.clip(np.asarray(prices, dtype=float), delta, 1.0 - delta)
    return np.log(q) - np.log1p(-q)


def normalize_prices(raw: Sequence[float]) -> list[float]:
    values = [float(x) for x in raw]
    if any(x < 0 or math.isnan(x) for x in values):
        raise ValueError("prices must be non-negative")
    total = math.fsum(values)
    if not values or total <= 0.0:
        raise AllZero("cannot normalise prices that are all zero")
    return [x / total for x in values]


def log_score(probs: Sequence[float], winner_index: int, delta: float = DELTA) -> float:
    """Natural log of the probability given to the realised outcome.

    Only the lower clamp applies here: a winner priced at exactly 1 scores
    exactly 0, while a winner priced at 0 scores ``ln(delta)`` instead of
    minus infinity.
    """
    if not 0 <= winner_index < len(probs):
        raise IndexOutOfRange(f"winner index {winner_index} outside 0..{len(probs) - 1}")
    p = float(probs[winner_index])
    if p >= 1.0:
        return 0.0
    return math.log(max(p, delta))


@dataclass(frozen=True)
class PricePoint:
    day_offset: int
    price: float

    def __post_init__(self):
        if self.day_offset > 0:
            raise ValueError("day_offset must be <= 0 (final trading day is 0)")
        if not 0.0 <= self.price <= 1.0:
            raise ValueError(f"price {self.price} outside [0, 1]")


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if arr.ndim != 1:
        raise ValueError("expected a one-dimensional sequence")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CandidateSeries:
    """Daily prices of one outcome plus its eventual label.

    ``offsets`` are day offsets relative to the market's final trading day,
    strictly increasing. ``end_date`` is the calendar date of offset 0 when
    known; it lets detected events be reported as dates.
    """

    market_id: str
    candidate_id: str
    outcome: Outcome
    offsets: np.ndarray
    prices: np.ndarray
    end_date: date | None = None

    def __post_init__(self):
        offsets = _frozen_array(self.offsets, np.int64)
        prices = _frozen_array(self.prices, np.float64)
        if offsets.shape != prices.shape:
            raise ValueError("offsets and prices must have the same length")
        if offsets.size and np.any(np.diff(offsets) <= 0):
            raise ValueError(f"{self.market_id}/{self.candidate_id}: offsets must be strictly increasing")
        if np.any(~np.isfinite(prices)) or np.any(prices < 0):
            raise ValueError(f"{self.market_id}/{self.candidate_id}: prices must be finite and >= 0")
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "outcome", Outcome(self.outcome))

    @classmethod
    def from_points(cls, market_id, candidate_id, outcome, points, end_date=None):
        points = list(points)
        return cls(
            market_id,
            candidate_id,
            outcome,
            [p.day_offset for p in points],
            [p.price for p in points],
            end_date,
        )

    @property
    def won(self) -> bool:
        return self.outcome is Outcome.WON

    @property
    def points(self) -> list[PricePoint]:
        return [PricePoint(int(o), float(p)) for o, p in zip(self.offsets, self.prices)]

    def __len__(self) -> int:
        return int(self.offsets.size)

    def price_at(self, offset: int) -> float | None:
        i = int(np.searchsorted(self.offsets, offset))
        if i < self.offsets.size and self.offsets[i] == offset:
            return float(self.prices[i])
        return None

    def date_of(self, offset: int) -> date | None:
        if self.end_date is None:
            return None
        return date.fromordinal(self.end_date.toordinal() + int(offset))

    def shifted(self, delta_days: int) -> "CandidateSeries":
        """Same series with every offset moved by ``delta_days``."""
        end = self.end_date
        if end is not None:
            end = date.fromordinal(end.toordinal() - delta_days)
        return CandidateSeries(
            self.market_id, self.candidate_id, self.outcome, self.offsets + delta_days, self.prices, end
        )

    def __eq__(self, other):
        if not isinstance(other, CandidateSeries):
            return NotImplemented
        return (
            self.market_id == other.market_id
            and self.candidate_id == other.candidate_id
            and self.outcome is other.outcome
            and self.end_date == other.end_date
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.prices, other.prices)
        )

    def __hash__(self):
        return hash((self.market_id, self.candidate_id, self.outcome, self.end_date, self.prices.tobytes()))


@dataclass(frozen=True)
class Market:
    """A set of mutually exclusive candidates sharing one ``market_id``.

    With two or more candidates exactly one must have won. A market with a
    single candidate is binary: the candidate is an event whose complement
    is implicit, so it may carry either label.
    """

    market_id: str
    candidates: tuple[CandidateSeries, ...] = field(default_factory=tuple)

    def __post_init__(self):
        cands = tuple(self.candidates)
        object.__setattr__(self, "candidates", cands)
        if not cands:
            raise EmptyMarket(f"market {self.market_id!r} has no candidates")
        ids = [c.candidate_id for c in cands]
        if len(set(ids)) != len(ids):
            raise SchemaError(f"market {self.market_id!r} has duplicate candidate ids")
        for c in cands:
            if c.market_id != self.market_id:
                raise SchemaError(f"candidate {c.candidate_id!r} belongs to {c.market_id!r}, not {self.market_id!r}")
        winners = sum(c.won for c in cands)
        if len(cands) > 1 and winners == 0:
            raise NoWinner(f"market {self.market_id!r} has no winning candidate")
        if winners > 1:
            raise SchemaError(f"market {self.market_id!r} has {winners} winning candidates")

    @property
    def is_binary(self) -> bool:
        return len(self.candidates) == 1

    @property
    def winner_index(self) -> int | None:
        for i, c in enumerate(self.candidates):
            if c.won:
                return i
        return None

    def __iter__(self) -> Iterator[CandidateSeries]:
        return iter(self.candidates)

    def offsets(self) -> np.ndarray:
        """Sorted union of every candidate's day offsets."""
        return np.unique(np.concatenate([c.offsets for c in self.candidates]))

    def forecast_at(self, offset: int) -> tuple[list[float], int] | None:
        """Normalised outcome distribution on one day and the index of the winner.

        Binary markets yield ``(p, 1 - p)``. Candidates without a price that
        day are left out; ``None`` means no usable forecast exists (winner
        unpriced or every price zero).
        """
        if self.is_binary:
            c = self.candidates[0]
            p = c.price_at(offset)
            if p is None:
                return None
            p = min(max(p, 0.0), 1.0)
            return [p, 1.0 - p], (0 if c.won else 1)
        raw, win = [], None
        for c in self.candidates:
            p = c.price_at(offset)
            if p is None:
                continue
            if c.won:
                win = len(raw)
            raw.append(p)
        if win is None:
            return None
        try:
            return normalize_prices(raw), win
        except AllZero:
            return None
