"""Coin-flip model of information release.

The event E is "at least ceil(n/2) tails in n fair flips". Flips are revealed
one at a time and the market price is always the exact probability of E given
what has been revealed so far, so prices form a martingale by construction.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from datetime import date
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, logsumexp

from .core import CandidateSeries, Market, Outcome
from .errors import ConfigError, InvalidState

SIM_END_DATE = date(2000, 11, 7)
SIM_CANDIDATE = "E"
RNG_ALGORITHM = "numpy PCG64 seeded by SeedSequence(entropy=seed, spawn_key=(market_index,))"

_LN2 = math.log(2.0)
_BATCH = 4096


def _threshold(n: int) -> int:
    return (n + 1) // 2


def event_probability(n: int, i: int, k: int) -> float:
    """Probability of E after ``i`` tails in ``k`` revealed flips out of ``n``.

    Sums the binomial tail in log space, so it stays finite for large ``n``.

    >>> event_probability(3, 0, 1)
    0.25
    """
    n, i, k = int(n), int(i), int(k)
    if n < 1 or not 0 <= i <= k <= n:
        raise InvalidState(f"need 0 <= i <= k <= n and n >= 1, got n={n}, i={i}, k={k}")
    remaining = n - k
    need = _threshold(n) - i
    if need <= 0:
        return 1.0
    if need > remaining:
        return 0.0
    j = np.arange(need, remaining + 1)
    log_terms = gammaln(remaining + 1) - gammaln(j + 1) - gammaln(remaining - j + 1)
    return min(1.0, float(np.exp(logsumexp(log_terms) - remaining * _LN2)))


@lru_cache(maxsize=8)
def _tail_table(n: int) -> tuple[np.ndarray, ...]:
    """``table[m][t] = Pr(Binomial(m, 1/2) >= t)`` for ``t = 0 .. m + 1``.

    Built with a reversed log-space cumulative sum; row ``m`` has ``m + 2``
    entries so that ``t = m + 1`` gives exactly 0.
    """
    rows = []
    for m in range(n + 1):
        j = np.arange(m + 1)
        log_pmf = gammaln(m + 1) - gammaln(j + 1) - gammaln(m - j + 1) - m * _LN2
        tail = np.exp(np.logaddexp.accumulate(log_pmf[::-1])[::-1])
        row = np.empty(m + 2)
        row[: m + 1] = np.minimum(tail, 1.0)
        row[0] = 1.0
        row[m + 1] = 0.0
        row.setflags(write=False)
        rows.append(row)
    return tuple(rows)


def price_table_lookup(n: int, tails: np.ndarray, k: int) -> np.ndarray:
    """Vectorised :func:`event_probability` for many tail counts at one ``k``."""
    remaining = n - k
    need = np.clip(_threshold(n) - np.asarray(tails), 0, remaining + 1)
    return _tail_table(n)[remaining][need]


@dataclass(frozen=True)
class SimConfig:
    n: int = 1200
    i0: int = 0
    k0: int = 0
    flips_per_step: int = 2
    num_markets: int = 22
    seed: int = 0

    def __post_init__(self):
        for name in ("n", "i0", "k0", "flips_per_step", "num_markets", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if self.n < 1:
            raise ConfigError("n must be positive")
        if not 0 <= self.i0 <= self.k0 <= self.n:
            raise ConfigError("need 0 <= i0 <= k0 <= n")
        if self.flips_per_step < 1:
            raise ConfigError("flips_per_step must be positive")
        if self.num_markets < 1:
            raise ConfigError("num_markets must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return {key: int(value) for key, value in asdict(self).items()}

    @property
    def recorded_steps(self) -> np.ndarray:
        """Flip counts (after k0) at which a price is recorded.

        Starts with the prior at 0 and always ends with the final flip, even
        when the number of flips is not a multiple of ``flips_per_step``.
        """
        total = self.n - self.k0
        steps = np.arange(0, total + 1, self.flips_per_step)
        if steps[-1] != total:
            steps = np.append(steps, total)
        return steps


@dataclass
class SimState:
    """Running tally: ``i`` tails among ``k`` revealed flips."""

    n: int
    i: int = 0
    k: int = 0

    def reveal(self, tail: bool) -> None:
        if self.k >= self.n:
            raise InvalidState("all flips already revealed")
        self.k += 1
        self.i += int(bool(tail))

    @property
    def price(self) -> float:
        return event_probability(self.n, self.i, self.k)


def market_rng(seed: int, market_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(market_index),))))


def market_id_for(index: int) -> str:
    return f"sim-{index:06d}"


def _simulate_block(config: SimConfig, indices) -> list[CandidateSeries]:
    n_flips = config.n - config.k0
    flips = np.empty((len(indices), n_flips), dtype=np.int8)
    for row, idx in enumerate(indices):
        flips[row] = market_rng(config.seed, idx).integers(0, 2, size=n_flips, dtype=np.int8)
    tails = np.zeros((len(indices), n_flips + 1), dtype=np.int32)
    np.cumsum(flips, axis=1, out=tails[:, 1:])
    tails += config.i0

    steps = config.recorded_steps
    prices = np.empty((len(indices), steps.size))
    for col, s in enumerate(steps):
        prices[:, col] = price_table_lookup(config.n, tails[:, s], config.k0 + int(s))
    offsets = np.arange(-(steps.size - 1), 1)
    won = tails[:, -1] >= _threshold(config.n)

    return [
        CandidateSeries(
            market_id_for(idx),
            SIM_CANDIDATE,
            Outcome.WON if won[row] else Outcome.LOST,
            offsets,
            prices[row],
            SIM_END_DATE,
        )
        for row, idx in enumerate(indices)
    ]


def simulate_market(config: SimConfig, market_index: int) -> CandidateSeries:
    """Run one market. The flip stream depends only on ``(seed, market_index)``."""
    return _simulate_block(config, [market_index])[0]


def simulate_ensemble(config: SimConfig) -> list[Market]:
    markets = []
    for start in range(0, config.num_markets, _BATCH):
        block = range(start, min(start + _BATCH, config.num_markets))
        markets.extend(Market(s.market_id, (s,)) for s in _simulate_block(config, block))
    return markets
