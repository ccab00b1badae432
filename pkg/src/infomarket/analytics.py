"""Statistics over aligned price series.

Covers the average log-score curve, daily log-likelihood changes and their
density, winner/loser change ratios, and the bin-level checks that a price
process behaves like a calibrated forecast (martingale, e^eps law, drift
towards the realised outcome).

Most functions work on :class:`Transitions`, a flat table of consecutive-day
price pairs pooled over every candidate. Standard errors for the
conditional checks are cluster-robust: samples from the same market share
an outcome, so per-market sums of influence terms are treated as the
independent units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import DELTA, Market, Outcome, log_likelihood_array, log_score
from .errors import NoSamples, TooFewPoints, TooFewSamples

MIN_CELL_COUNT = 100


# --------------------------------------------------------------------------
# bins


def price_edges(bins: int = 20) -> np.ndarray:
    if bins < 1:
        raise ValueError("bins must be positive")
    return np.linspace(0.0, 1.0, bins + 1)


def epsilon_edges(low: float = 1e-3, high: float = 20.0, bins_per_sign: int = 40) -> np.ndarray:
    """Log-spaced bins over ``|eps|``, mirrored for negative changes.

    The central bin ``[-low, low)`` collects zero and near-zero changes.
    """
    if not 0 < low < high or bins_per_sign < 1:
        raise ValueError("need 0 < low < high and bins_per_sign >= 1")
    mags = np.geomspace(low, high, bins_per_sign + 1)
    return np.concatenate([-mags[::-1], mags])


def linear_edges(low: float, high: float, width: float) -> np.ndarray:
    count = int(round((high - low) / width))
    return np.linspace(low, high, count + 1)


def default_ll_edges() -> np.ndarray:
    """Bins over the previous log-likelihood price for conditional analysis."""
    return linear_edges(-5.0, 5.0, 0.25)


def default_step_edges() -> np.ndarray:
    """Linear change bins used inside log-likelihood strata."""
    return linear_edges(-3.0, 3.0, 0.1)


def _check_edges(edges) -> np.ndarray:
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be at least two strictly increasing values")
    return edges


def _bin_index(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Half-open bins, except the last which also takes its upper edge. -1 = outside."""
    idx = np.searchsorted(edges, values, side="right") - 1
    idx[values == edges[-1]] = edges.size - 2
    idx[(idx < 0) | (idx > edges.size - 2)] = -1
    return idx


def _centers(edges: np.ndarray) -> np.ndarray:
    return 0.5 * (edges[:-1] + edges[1:])


# --------------------------------------------------------------------------
# log score curve


@dataclass(frozen=True)
class CurvePoint:
    day_offset: int
    mean_score: float
    num_markets: int


@dataclass(frozen=True)
class LogScoreCurve:
    points: tuple[CurvePoint, ...]

    header = ("day_offset", "mean_score", "num_markets")

    def rows(self):
        return [(p.day_offset, p.mean_score, p.num_markets) for p in self.points]

    @property
    def offsets(self) -> np.ndarray:
        return np.array([p.day_offset for p in self.points])

    @property
    def scores(self) -> np.ndarray:
        return np.array([p.mean_score for p in self.points])


def _market_scores(market: Market, delta: float) -> dict[int, float]:
    if market.is_binary:
        c = market.candidates[0]
        p = np.clip(c.prices, 0.0, 1.0)
        winner_p = p if c.won else 1.0 - p
        scores = np.where(winner_p >= 1.0, 0.0, np.log(np.maximum(winner_p, delta)))
        return dict(zip(c.offsets.tolist(), scores.tolist()))
    out = {}
    for offset in market.offsets().tolist():
        forecast = market.forecast_at(offset)
        if forecast is not None:
            probs, win = forecast
            out[offset] = log_score(probs, win, delta)
    return out


def average_log_score_curve(markets: Iterable[Market], delta: float = DELTA) -> LogScoreCurve:
    """Mean log score per day offset over the markets priced on that day."""
    totals: dict[int, list[float]] = {}
    for market in markets:
        for offset, score in _market_scores(market, delta).items():
            totals.setdefault(offset, []).append(score)
    points = tuple(
        CurvePoint(offset, math.fsum(scores) / len(scores), len(scores)) for offset, scores in sorted(totals.items())
    )
    return LogScoreCurve(points)


# --------------------------------------------------------------------------
# transitions and epsilon samples


@dataclass(frozen=True)
class Transitions:
    """Consecutive-day price pairs pooled across series.

    ``cluster`` numbers the market each pair came from; ``day_offset`` is
    the later day of the pair.
    """

    prev: np.ndarray
    next: np.ndarray
    won: np.ndarray
    cluster: np.ndarray
    day_offset: np.ndarray
    market_ids: tuple[str, ...]
    candidate_ids: tuple[str, ...]
    series: np.ndarray
    delta: float = DELTA

    def __len__(self):
        return int(self.prev.size)

    @property
    def ll_prev(self) -> np.ndarray:
        return log_likelihood_array(self.prev, self.delta)

    @property
    def ll_next(self) -> np.ndarray:
        return log_likelihood_array(self.next, self.delta)

    @property
    def epsilon(self) -> np.ndarray:
        return self.ll_next - self.ll_prev


def transitions(markets: Iterable[Market], include_gaps: bool = False, delta: float = DELTA) -> Transitions:
    prev, nxt, won, cluster, day, series = [], [], [], [], [], []
    market_ids, candidate_ids = [], []
    for m_index, market in enumerate(markets):
        for c in market.candidates:
            s_index = len(market_ids)
            market_ids.append(c.market_id)
            candidate_ids.append(c.candidate_id)
            if len(c) < 2:
                continue
            keep = np.ones(len(c) - 1, dtype=bool) if include_gaps else np.diff(c.offsets) == 1
            prev.append(c.prices[:-1][keep])
            nxt.append(c.prices[1:][keep])
            day.append(c.offsets[1:][keep])
            k = int(keep.sum())
            won.append(np.full(k, c.won))
            cluster.append(np.full(k, m_index))
            series.append(np.full(k, s_index))

    def cat(parts, dtype):
        return np.concatenate(parts).astype(dtype) if parts else np.empty(0, dtype=dtype)

    return Transitions(
        cat(prev, float),
        cat(nxt, float),
        cat(won, bool),
        cat(cluster, np.int64),
        cat(day, np.int64),
        tuple(market_ids),
        tuple(candidate_ids),
        cat(series, np.int64),
        delta,
    )


@dataclass(frozen=True)
class EpsilonSample:
    value: float
    outcome: Outcome
    market_id: str
    candidate_id: str
    day_offset: int


def epsilon_samples(markets: Iterable[Market], include_gaps: bool = False, delta: float = DELTA) -> list[EpsilonSample]:
    """One log-likelihood change per consecutive-day pair per candidate."""
    t = transitions(markets, include_gaps, delta)
    eps = t.epsilon.tolist()
    return [
        EpsilonSample(
            e,
            Outcome.WON if w else Outcome.LOST,
            t.market_ids[s],
            t.candidate_ids[s],
            d,
        )
        for e, w, s, d in zip(eps, t.won.tolist(), t.series.tolist(), t.day_offset.tolist())
    ]


def _eps_and_won(samples) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(samples, Transitions):
        return samples.epsilon, samples.won
    samples = list(samples)
    values = np.array([s.value for s in samples], dtype=float)
    won = np.array([s.outcome is Outcome.WON for s in samples], dtype=bool)
    return values, won


# --------------------------------------------------------------------------
# density


@dataclass(frozen=True)
class DensityEstimate:
    epsilon: np.ndarray
    density: np.ndarray
    window: int

    header = ("epsilon", "density")

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.epsilon.tolist(), self.density.tolist()))

    def rows(self):
        return self.points

    def integral(self) -> float:
        """Trapezoid-rule area under the estimate."""
        order = np.argsort(self.epsilon, kind="stable")
        x, y = self.epsilon[order], self.density[order]
        return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def empirical_density(samples: Sequence[float], window: int = 50) -> DensityEstimate:
    """Rank-window derivative of the empirical CDF.

    With values sorted in descending order as ``x[1] >= x[2] >= ...`` and
    ``y[i]`` the CDF at rank ``i``, the density at ``x[i]`` is::

        (y[i - window] - y[i + window]) / (x[i - window] - x[i + window])

    for ranks at least ``window`` away from either end. ``y`` is taken from
    ranks, so the numerator is always ``2 * window / N`` and ties only
    matter through the denominator; points whose window spans a single
    tied value are dropped.
    """
    if window < 1:
        raise ValueError("window must be positive")
    x = np.sort(np.asarray(samples, dtype=float))[::-1]
    n = x.size
    if n < 2 * window + 1:
        raise TooFewSamples(f"need at least {2 * window + 1} samples for window {window}, got {n}")
    # y[i] = (n - i) / n, so every rank difference is exactly 2 * window / n;
    # taking the constant keeps mirrored samples bit-for-bit symmetric
    dy = 2 * window / n
    dx = x[: n - 2 * window] - x[2 * window :]
    centre = x[window : n - window]
    ok = dx > 0
    # near-ties can make dx subnormal; the density is then +inf, not an error
    with np.errstate(over="ignore"):
        density = dy / dx[ok]
    return DensityEstimate(centre[ok], density, window)


# --------------------------------------------------------------------------
# winner / loser ratios


@dataclass(frozen=True)
class RatioBin:
    bin_low: float
    bin_high: float
    count_won: int
    count_lost: int
    ratio: float | None

    @property
    def bin_center(self) -> float:
        return 0.5 * (self.bin_low + self.bin_high)

    @property
    def theory(self) -> float:
        return math.exp(self.bin_center)

    @property
    def defined(self) -> bool:
        return self.ratio is not None


RATIO_HEADER = ("bin_center", "ratio", "theory", "count_won", "count_lost")


def ratio_rows(bins: Iterable[RatioBin]):
    return [
        (b.bin_center, "" if b.ratio is None else b.ratio, b.theory, b.count_won, b.count_lost) for b in bins
    ]


def winner_loser_ratio(samples, bin_edges=None) -> list[RatioBin]:
    """Frequency of each change among winners over its frequency among losers.

    ``samples`` is a list of :class:`EpsilonSample` or a :class:`Transitions`.
    Bins without any losing sample have ``ratio=None``.
    """
    edges = _check_edges(epsilon_edges() if bin_edges is None else bin_edges)
    eps, won = _eps_and_won(samples)
    total_won, total_lost = int(won.sum()), int((~won).sum())
    if total_won == 0 or total_lost == 0:
        raise NoSamples("need samples from both winning and losing candidates")
    idx = _bin_index(eps, edges)
    nb = edges.size - 1
    cw = np.bincount(idx[(idx >= 0) & won], minlength=nb)
    cl = np.bincount(idx[(idx >= 0) & ~won], minlength=nb)
    out = []
    for j in range(nb):
        ratio = None
        if cl[j] > 0:
            ratio = (cw[j] / total_won) / (cl[j] / total_lost)
        out.append(RatioBin(float(edges[j]), float(edges[j + 1]), int(cw[j]), int(cl[j]), ratio))
    return out


def _cell_counts(t: Transitions, ll_edges, step_edges):
    a_idx = _bin_index(t.ll_prev, ll_edges)
    e_idx = _bin_index(t.epsilon, step_edges)
    ok = (a_idx >= 0) & (e_idx >= 0)
    shape = (ll_edges.size - 1, step_edges.size - 1)
    won = np.zeros(shape)
    lost = np.zeros(shape)
    np.add.at(won, (a_idx[ok & t.won], e_idx[ok & t.won]), 1)
    np.add.at(lost, (a_idx[ok & ~t.won], e_idx[ok & ~t.won]), 1)
    # stratum totals include changes that fall outside the step grid
    in_a = a_idx >= 0
    won_a = np.bincount(a_idx[in_a & t.won], minlength=shape[0]).astype(float)
    lost_a = np.bincount(a_idx[in_a & ~t.won], minlength=shape[0]).astype(float)
    return a_idx, e_idx, won, lost, won_a, lost_a


def stratified_winner_loser_ratio(t: Transitions, ll_edges=None, step_edges=None) -> list[RatioBin]:
    """Winner/loser change ratio holding the previous log-likelihood price fixed.

    Within each stratum of the previous log-likelihood price the ratio of
    class-normalised frequencies is computed; strata are combined with a
    Mantel-Haenszel weighting. Pooling over all previous prices instead (as
    :func:`winner_loser_ratio` does) mixes strata whose change distributions
    differ, which bends the curve away from ``e**eps``.
    """
    ll_edges = _check_edges(default_ll_edges() if ll_edges is None else ll_edges)
    step_edges = _check_edges(default_step_edges() if step_edges is None else step_edges)
    if not t.won.any() or t.won.all():
        raise NoSamples("need samples from both winning and losing candidates")
    _, _, won, lost, won_a, lost_a = _cell_counts(t, ll_edges, step_edges)
    won_a, lost_a = won_a[:, None], lost_a[:, None]
    n_a = np.maximum(won_a + lost_a, 1)
    num = (won * lost_a / n_a).sum(axis=0)
    den = (lost * won_a / n_a).sum(axis=0)
    cw, cl = won.sum(axis=0), lost.sum(axis=0)
    out = []
    for j in range(step_edges.size - 1):
        ratio = float(num[j] / den[j]) if den[j] > 0 else None
        out.append(RatioBin(float(step_edges[j]), float(step_edges[j + 1]), int(cw[j]), int(cl[j]), ratio))
    return out


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    num_bins: int


def fit_exponential_law(bins: Iterable[RatioBin], min_count: int = MIN_CELL_COUNT) -> LineFit:
    """Least-squares line of ``log(ratio)`` on bin centre over well-populated bins."""
    used = [b for b in bins if b.ratio and b.count_won >= min_count and b.count_lost >= min_count]
    if len(used) < 2:
        raise TooFewPoints(f"need two bins with >= {min_count} samples per class, got {len(used)}")
    x = np.array([b.bin_center for b in used])
    y = np.log([b.ratio for b in used])
    slope, intercept = np.polyfit(x, y, 1)
    return LineFit(float(slope), float(intercept), len(used))


# --------------------------------------------------------------------------
# conditional price statistics


@dataclass(frozen=True)
class ConditionalStats:
    """Next-day prices for pairs whose earlier price fell in one bin.

    ``a`` is the bin centre; ``mean_prev`` the average earlier price of the
    pairs actually in the bin, which is what the martingale and drift
    checks compare against. ``var_next`` is a population variance.
    """

    bin_low: float
    bin_high: float
    a: float
    count: int
    mean_prev: float
    mean_next: float
    var_next: float
    count_won: int
    mean_next_given_won: float
    drift_se: float
    gain_se: float

    header = (
        "bin_low",
        "bin_high",
        "a",
        "count",
        "mean_prev",
        "mean_next",
        "var_next",
        "count_won",
        "mean_next_given_won",
        "expected_drift",
        "drift_se",
    )

    @property
    def martingale_se(self) -> float:
        return math.sqrt(self.var_next / self.count) if self.count else math.nan

    @property
    def expected_drift(self) -> float:
        """Predicted ``mean_next_given_won - mean_prev``: variance over price."""
        return self.var_next / self.mean_prev if self.mean_prev > 0 else math.nan

    @property
    def drift(self) -> float:
        return self.mean_next_given_won - self.mean_prev

    def row(self):
        return (
            self.bin_low,
            self.bin_high,
            self.a,
            self.count,
            self.mean_prev,
            self.mean_next,
            self.var_next,
            self.count_won,
            self.mean_next_given_won,
            self.expected_drift,
            self.drift_se,
        )


def _cluster_se(psi: np.ndarray, cluster: np.ndarray, n: int) -> float:
    sums = np.bincount(cluster, weights=psi)
    return float(math.sqrt(np.dot(sums, sums)) / n)


def conditional_stats(data, bin_edges=None) -> list[ConditionalStats]:
    """Per earlier-price bin summaries of the next-day price.

    ``data`` is a list of markets or a :class:`Transitions`. Empty bins are
    omitted. ``drift_se`` is the standard error of
    ``drift - expected_drift`` and ``gain_se`` that of ``drift``.
    """
    t = data if isinstance(data, Transitions) else transitions(data)
    edges = _check_edges(price_edges() if bin_edges is None else bin_edges)
    idx = _bin_index(t.prev, edges)
    _, cluster = np.unique(t.cluster, return_inverse=True)
    out = []
    for j in range(edges.size - 1):
        sel = idx == j
        n = int(sel.sum())
        if n == 0:
            continue
        p0, p1 = t.prev[sel], t.next[sel]
        w = t.won[sel].astype(float)
        cl = cluster[sel]
        mp = float(p0.mean())
        m1 = float(p1.mean())
        m2 = float(np.mean(p1 * p1))
        var = max(float(np.mean((p1 - m1) ** 2)), 0.0)
        n_won = int(w.sum())
        drift_se = gain_se = math.nan
        if n_won:
            frac_won = n_won / n
            mean_won = float(np.dot(w, p1) / n_won)
            psi_won = (w * p1 - mean_won * w) / frac_won
            psi_prev = p0 - mp
            gain_se = _cluster_se(psi_won - psi_prev, cl, n)
            if mp > 0:
                psi_var = (p1 * p1 - m2) - 2.0 * m1 * (p1 - m1)
                psi = psi_won - psi_prev - psi_var / mp + (var / mp**2) * psi_prev
                drift_se = _cluster_se(psi, cl, n)
        else:
            mean_won = math.nan
        out.append(
            ConditionalStats(
                float(edges[j]),
                float(edges[j + 1]),
                float(0.5 * (edges[j] + edges[j + 1])),
                n,
                mp,
                m1,
                var,
                n_won,
                mean_won,
                drift_se,
                gain_se,
            )
        )
    return out


@dataclass(frozen=True)
class LLRatioCell:
    """Winner-conditioned over unconditioned change frequency in one (a, eps) cell."""

    a: float
    epsilon: float
    count_won: int
    count_all: int
    ratio: float | None
    se: float | None
    insufficient: bool
    theory_binned: float | None = None

    header = ("a", "epsilon", "ratio", "theory", "theory_binned", "se", "count_won", "count_all", "insufficient")

    @property
    def theory(self) -> float:
        """Formula at the bin centre."""
        return conditional_ratio_theory(self.a, self.epsilon)

    @property
    def z(self) -> float:
        if self.ratio is None or not self.se:
            return math.nan
        return (self.ratio - self.theory) / self.se

    @property
    def z_binned(self) -> float:
        """Like :attr:`z`, against the formula averaged over the cell's own samples."""
        if self.ratio is None or not self.se or self.theory_binned is None:
            return math.nan
        return (self.ratio - self.theory_binned) / self.se

    def row(self):
        return (
            self.a,
            self.epsilon,
            "" if self.ratio is None else self.ratio,
            self.theory,
            "" if self.theory_binned is None else self.theory_binned,
            "" if self.se is None else self.se,
            self.count_won,
            self.count_all,
            int(self.insufficient),
        )


def conditional_ratio_theory(a: float, epsilon: float) -> float:
    """``(e^a + 1) / (e^a + e^-eps)`` evaluated without overflow."""
    if a >= 0:
        return (1.0 + math.exp(-a)) / (1.0 + math.exp(-a - epsilon))
    return (math.exp(a) + 1.0) / (math.exp(a) + math.exp(-epsilon))


def conditional_ll_ratio(data, ll_edges=None, step_edges=None, min_count: int = MIN_CELL_COUNT) -> list[LLRatioCell]:
    """Empirical ``Pr(eps | won, a) / Pr(eps | a)`` per occupied (a, eps) cell.

    Cells with fewer than ``min_count`` winning or total samples are kept
    but flagged ``insufficient`` with no ratio. The standard error comes
    from a cluster-robust delta method on the log ratio.

    ``theory_binned`` is the exact prediction for the whole cell: the mean
    next price over the cell divided by the mean previous price over the
    stratum. For a single point it reduces to the bin-centre formula, but
    unlike the centre value it carries no bias of order the bin width.
    """
    t = data if isinstance(data, Transitions) else transitions(data)
    ll_edges = _check_edges(default_ll_edges() if ll_edges is None else ll_edges)
    step_edges = _check_edges(default_step_edges() if step_edges is None else step_edges)
    a_idx, e_idx, won, lost, won_strata, _ = _cell_counts(t, ll_edges, step_edges)
    total = won + lost
    a_centers, e_centers = _centers(ll_edges), _centers(step_edges)
    _, cluster = np.unique(t.cluster, return_inverse=True)
    w_all = t.won
    p_prev = np.asarray(t.prev, dtype=float)
    p_next = np.asarray(t.next, dtype=float)

    out = []
    for i in range(ll_edges.size - 1):
        in_a = a_idx == i
        n_a = int(in_a.sum())
        won_a = float(won_strata[i])
        if n_a == 0:
            continue
        cl_a = cluster[in_a]
        e_a = e_idx[in_a]
        w_a = w_all[in_a].astype(float)
        frac_won = won_a / n_a
        # per-cluster totals within the stratum
        keys, inv = np.unique(cl_a, return_inverse=True)
        n_c = np.bincount(inv).astype(float)
        w_c = np.bincount(inv, weights=w_a)
        base_c = n_c - (w_c / frac_won if won_a else 0.0)
        base = float(np.dot(base_c, base_c))
        mean_prev_a = float(p_prev[in_a].mean())
        p_next_a = p_next[in_a]
        for j in range(step_edges.size - 1):
            if total[i, j] == 0:
                continue
            cw, ct = int(won[i, j]), int(total[i, j])
            if cw < min_count or ct < min_count:
                out.append(LLRatioCell(float(a_centers[i]), float(e_centers[j]), cw, ct, None, None, True))
                continue
            frac_x = ct / n_a
            frac_wx = cw / n_a
            ratio = (frac_wx / frac_won) / frac_x
            x = (e_a == j).astype(float)
            x_c = np.bincount(inv, weights=x)
            wx_c = np.bincount(inv, weights=x * w_a)
            extra = wx_c / frac_wx - x_c / frac_x
            psi_sq = base + float(np.dot(extra, 2.0 * base_c + extra))
            se = ratio * math.sqrt(max(psi_sq, 0.0)) / n_a
            binned = float(p_next_a[e_a == j].mean()) / mean_prev_a if mean_prev_a > 0 else None
            out.append(LLRatioCell(float(a_centers[i]), float(e_centers[j]), cw, ct, float(ratio), se, False, binned))
    return out


# --------------------------------------------------------------------------
# power law


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    r_squared: float
    num_points: int


def fit_power_law_tail(density: DensityEstimate, epsilon_min: float) -> PowerLawFit:
    """Least-squares slope of log density against log epsilon above ``epsilon_min``."""
    if epsilon_min <= 0:
        raise ValueError("epsilon_min must be positive")
    sel = (density.epsilon >= epsilon_min) & (density.density > 0)
    if int(sel.sum()) < 5:
        raise TooFewPoints(f"need >= 5 positive density points at epsilon >= {epsilon_min}, got {int(sel.sum())}")
    x = np.log(density.epsilon[sel])
    y = np.log(density.density[sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(slope), r2, int(sel.sum()))


# --------------------------------------------------------------------------
# theory validation suite


@dataclass(frozen=True)
class CheckResult:
    check: str
    cell: str
    value: float
    expected: float
    tolerance: float
    passed: bool

    header = ("check", "cell", "value", "expected", "tolerance", "passed")

    def row(self):
        return (self.check, self.cell, self.value, self.expected, self.tolerance, int(self.passed))


@dataclass(frozen=True)
class ValidationReport:
    results: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def summary(self) -> dict[str, bool]:
        out: dict[str, bool] = {}
        for r in self.results:
            out[r.check] = out.get(r.check, True) and r.passed
        return out

    def rows(self):
        return [r.row() for r in self.results]


@dataclass(frozen=True)
class ValidationConfig:
    bins: int = 20
    min_count: int = MIN_CELL_COUNT
    sigmas: float = 3.0
    one_sided_z: float = 1.6448536269514722
    slope_tolerance: float = 0.1
    intercept_tolerance: float = 0.1
    cell_pass_fraction: float = 0.95


def martingale_checks(stats: Iterable[ConditionalStats], cfg: ValidationConfig) -> list[CheckResult]:
    out = []
    for s in stats:
        if s.count < cfg.min_count:
            continue
        tol = cfg.sigmas * s.martingale_se
        out.append(
            CheckResult(
                "martingale",
                f"[{s.bin_low:.3f},{s.bin_high:.3f})",
                s.mean_next,
                s.mean_prev,
                tol,
                abs(s.mean_next - s.mean_prev) <= tol,
            )
        )
    return out


def drift_checks(stats: Iterable[ConditionalStats], cfg: ValidationConfig) -> list[CheckResult]:
    out = []
    for s in stats:
        if s.count_won < cfg.min_count or not s.var_next > 0 or not s.mean_prev > 0:
            continue
        cell = f"[{s.bin_low:.3f},{s.bin_high:.3f})"
        tol = cfg.sigmas * s.drift_se
        out.append(CheckResult("variance_drift", cell, s.drift, s.expected_drift, tol, abs(s.drift - s.expected_drift) <= tol))
        margin = cfg.one_sided_z * s.gain_se
        out.append(CheckResult("winner_gain", cell, s.drift, 0.0, margin, s.drift > margin))
    return out


def validate_theory(data, cfg: ValidationConfig | None = None, ll_edges=None, step_edges=None) -> ValidationReport:
    """Run every calibration check on pooled transitions.

    Checks: per-bin martingale, the e^eps law on the stratified winner/loser
    ratio (slope and intercept), the conditional ratio formula per (a, eps)
    cell (as a pass fraction), the variance drift of winners and its
    positivity. A check with no evaluable cell fails.
    """
    cfg = cfg or ValidationConfig()
    t = data if isinstance(data, Transitions) else transitions(data)
    stats = conditional_stats(t, price_edges(cfg.bins))
    results: list[CheckResult] = []

    mart = martingale_checks(stats, cfg)
    results.extend(mart or [CheckResult("martingale", "none", math.nan, math.nan, math.nan, False)])

    try:
        fit = fit_exponential_law(stratified_winner_loser_ratio(t, ll_edges, step_edges), cfg.min_count)
        results.append(
            CheckResult("exp_law_slope", f"{fit.num_bins} bins", fit.slope, 1.0, cfg.slope_tolerance,
                        abs(fit.slope - 1.0) <= cfg.slope_tolerance)
        )
        results.append(
            CheckResult("exp_law_intercept", f"{fit.num_bins} bins", fit.intercept, 0.0, cfg.intercept_tolerance,
                        abs(fit.intercept) <= cfg.intercept_tolerance)
        )
    except (TooFewPoints, NoSamples):
        results.append(CheckResult("exp_law_slope", "none", math.nan, 1.0, cfg.slope_tolerance, False))
        results.append(CheckResult("exp_law_intercept", "none", math.nan, 0.0, cfg.intercept_tolerance, False))

    cells = [c for c in conditional_ll_ratio(t, ll_edges, step_edges, cfg.min_count) if not c.insufficient]
    if cells:
        within = sum(abs(c.z_binned) <= cfg.sigmas for c in cells)
        frac = within / len(cells)
        results.append(
            CheckResult("conditional_ratio", f"{within}/{len(cells)} cells", frac, cfg.cell_pass_fraction, 0.0,
                        frac >= cfg.cell_pass_fraction)
        )
    else:
        results.append(CheckResult("conditional_ratio", "none", math.nan, cfg.cell_pass_fraction, 0.0, False))

    drift = drift_checks(stats, cfg)
    if drift:
        results.extend(drift)
    else:
        results.append(CheckResult("variance_drift", "none", math.nan, math.nan, math.nan, False))
        results.append(CheckResult("winner_gain", "none", math.nan, 0.0, math.nan, False))
    return ValidationReport(tuple(results))
