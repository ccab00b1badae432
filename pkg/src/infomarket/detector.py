"""Flagging days that follow unusually large log-likelihood price moves."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from datetime import date
from typing import Iterable

import numpy as np

from .core import DELTA, CandidateSeries, log_likelihood_array
from .errors import TooShort

log = logging.getLogger(__name__)

MAD_SCALE = 1.4826
METHODS = ("robust_z", "abs_threshold", "top_k")
DEFAULT_PARAMETER = {"robust_z": 4.0, "abs_threshold": 1.0, "top_k": 5}


@dataclass(frozen=True)
class DetectionPolicy:
    method: str = "robust_z"
    parameter: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {', '.join(METHODS)}")
        if self.parameter is None:
            object.__setattr__(self, "parameter", DEFAULT_PARAMETER[self.method])
        if self.method == "top_k":
            if float(self.parameter) != int(self.parameter) or int(self.parameter) < 1:
                raise ValueError("top_k needs a positive integer k")
            object.__setattr__(self, "parameter", int(self.parameter))
        elif not self.parameter >= 0:
            raise ValueError("threshold must be non-negative")


@dataclass(frozen=True)
class EventHit:
    """A flagged day: the later day of a one-day price pair."""

    market_id: str
    candidate_id: str
    date: date | None
    day_offset: int
    delta_ll: float
    robust_z: float

    header = ("market_id", "candidate_id", "date", "delta_ll", "robust_z")

    def row(self):
        day = self.date.isoformat() if self.date is not None else str(self.day_offset)
        return (self.market_id, self.candidate_id, day, self.delta_ll, self.robust_z)


def daily_changes(series: CandidateSeries, include_gaps: bool = False, delta: float = DELTA):
    """Log-likelihood change per consecutive-day pair, with the later day's offset."""
    if len(series) < 2:
        return np.empty(0), np.empty(0, dtype=np.int64)
    ll = log_likelihood_array(series.prices, delta)
    keep = np.ones(len(series) - 1, dtype=bool) if include_gaps else np.diff(series.offsets) == 1
    return np.diff(ll)[keep], series.offsets[1:][keep]


def robust_z(values: np.ndarray) -> np.ndarray:
    """``(x - median) / (1.4826 * MAD)``.

    When the MAD is zero, values equal to the median score 0 and every
    other value scores +/-inf, so all of them pass any threshold.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return values.copy()
    med = float(np.median(values))
    dev = values - med
    mad = float(np.median(np.abs(dev)))
    if mad > 0:
        return dev / (MAD_SCALE * mad)
    if np.any(dev != 0):
        log.info("MAD is zero; every change off the median is flagged")
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(dev == 0, 0.0, np.sign(dev) * math.inf)


def _select(delta_ll: np.ndarray, z: np.ndarray, order_key: np.ndarray, policy: DetectionPolicy) -> np.ndarray:
    if policy.method == "robust_z":
        return np.flatnonzero(np.abs(z) >= policy.parameter)
    if policy.method == "abs_threshold":
        return np.flatnonzero(np.abs(delta_ll) >= policy.parameter)
    # largest magnitude first, earlier day wins ties
    ranked = np.lexsort((order_key, -np.abs(delta_ll)))
    return np.sort(ranked[: policy.parameter])


def _min_points(policy: DetectionPolicy) -> int:
    return 3 if policy.method == "robust_z" else 2


def detect_events(series: CandidateSeries, policy: DetectionPolicy | None = None, include_gaps: bool = False) -> list[EventHit]:
    """Flag days in one series according to ``policy``; output is date-ordered."""
    policy = policy or DetectionPolicy()
    if len(series) < _min_points(policy):
        raise TooShort(f"{policy.method} needs at least {_min_points(policy)} points, got {len(series)}")
    d, offsets = daily_changes(series, include_gaps)
    z = robust_z(d)
    hits = _select(d, z, offsets, policy)
    return [
        EventHit(series.market_id, series.candidate_id, series.date_of(int(offsets[i])), int(offsets[i]), float(d[i]), float(z[i]))
        for i in hits
    ]


def detect_events_pooled(
    series_list: Iterable[CandidateSeries], policy: DetectionPolicy | None = None, include_gaps: bool = False
) -> list[EventHit]:
    """Like :func:`detect_events`, but median, MAD and top-k span every series.

    Output is ordered by date (offset when dates are unknown), then by
    position in the input.
    """
    policy = policy or DetectionPolicy()
    series_list = list(series_list)
    for s in series_list:
        if len(s) < 2:
            raise TooShort(f"series {s.market_id}/{s.candidate_id} has fewer than 2 points")
    if sum(len(s) for s in series_list) < _min_points(policy):
        raise TooShort(f"{policy.method} needs at least {_min_points(policy)} points")

    changes, keys, owners, offsets = [], [], [], []
    for idx, s in enumerate(series_list):
        d, off = daily_changes(s, include_gaps)
        changes.append(d)
        offsets.append(off)
        owners.append(np.full(d.size, idx))
        if s.end_date is not None:
            keys.append(off + s.end_date.toordinal())
        else:
            keys.append(off.astype(np.int64))
    if not changes:
        return []
    d = np.concatenate(changes)
    key = np.concatenate(keys)
    owner = np.concatenate(owners)
    off = np.concatenate(offsets)
    z = robust_z(d)
    hits = _select(d, z, key * (len(series_list) + 1) + owner, policy)
    hits = sorted(hits.tolist(), key=lambda i: (key[i], owner[i]))
    out = []
    for i in hits:
        s = series_list[owner[i]]
        out.append(EventHit(s.market_id, s.candidate_id, s.date_of(int(off[i])), int(off[i]), float(d[i]), float(z[i])))
    return out
