"""Worked input/output examples for each public operation."""

import csv
import io
import math
from datetime import date

import numpy as np
import pytest

from infomarket.analytics import (
    DensityEstimate,
    average_log_score_curve,
    conditional_ll_ratio,
    conditional_ratio_theory,
    conditional_stats,
    empirical_density,
    epsilon_samples,
    fit_power_law_tail,
    stratified_winner_loser_ratio,
    transitions,
    winner_loser_ratio,
)
from infomarket.cli import main
from infomarket.core import (
    CandidateSeries,
    Market,
    Outcome,
    from_log_likelihood,
    log_score,
    normalize_prices,
    to_likelihood,
    to_log_likelihood,
)
from infomarket.detector import DetectionPolicy, detect_events
from infomarket.errors import AllZero, DuplicateId, EmptySide, NoSamples, ParseError, SchemaError, TooFewPoints, TooFewSamples
from infomarket.explainer import (
    ExplainConfig,
    SplitSpec,
    expected_entropy_loss,
    extract_features,
    filter_features,
    rank_features,
    split_corpus,
)
from infomarket.ingest import Corpus, Document, align_markets, markets_from_rows, read_corpus, read_price_rows, write_prices
from infomarket.simulator import SimConfig, event_probability, simulate_ensemble, simulate_market
from infomarket.synthetic import planted_corpus

LN9 = math.log(9.0)
PIVOT = date(2000, 5, 20)


def market(mid, prices, won=True, cid="E", end=date(2000, 11, 7), offsets=None):
    offsets = list(range(-(len(prices) - 1), 1)) if offsets is None else offsets
    return Market(mid, (CandidateSeries(mid, cid, Outcome.WON if won else Outcome.LOST, offsets, prices, end),))


def cli(*argv):
    return main([str(a) for a in argv])


# --------------------------------------------------------------------------
# transforms and scores


def test_likelihood_examples():
    assert to_likelihood(0.5) == 1.0
    assert to_likelihood(0.9) == pytest.approx(9.0, rel=1e-12)
    assert to_likelihood(1.0) == pytest.approx(999999.0, rel=1e-9)


def test_log_likelihood_examples():
    assert to_log_likelihood(0.5) == 0.0
    assert to_log_likelihood(0.9) == pytest.approx(2.1972245773362196, rel=1e-12)
    assert to_log_likelihood(0.1) == pytest.approx(-2.1972245773362196, rel=1e-12)
    assert from_log_likelihood(0.0) == 0.5
    assert from_log_likelihood(LN9) == pytest.approx(0.9, rel=1e-12)
    assert from_log_likelihood(to_log_likelihood(0.3)) == pytest.approx(0.3, abs=1e-12)


def test_normalize_examples():
    assert normalize_prices([0.2, 0.2, 0.1]) == pytest.approx([0.4, 0.4, 0.2])
    assert normalize_prices([1.0]) == [1.0]
    with pytest.raises(AllZero):
        normalize_prices([0, 0])


def test_log_score_examples():
    assert log_score([1.0], 0) == 0.0
    assert log_score([0.5, 0.5], 0) == pytest.approx(-0.6931471805599453)
    assert log_score([0.25] * 4, 2) == pytest.approx(-1.3862943611198906)


# --------------------------------------------------------------------------
# ingest


HEADER = "market_id,candidate_id,date,price,outcome\n"


def parse(text):
    return markets_from_rows(read_price_rows(io.StringIO(text)))


def test_two_candidate_file():
    text = (
        HEADER
        + "ny,clinton,2000-11-05,0.60,won\n"
        + "ny,lazio,2000-11-05,0.40,lost\n"
        + "ny,clinton,2000-11-06,0.62,\n"
        + "ny,lazio,2000-11-06,0.38,\n"
        + "ny,clinton,2000-11-07,0.70,\n"
        + "ny,lazio,2000-11-07,0.30,\n"
    )
    (m,) = parse(text)
    assert len(m.candidates) == 2 and all(len(c) == 3 for c in m.candidates)
    assert m.winner_index == 0
    assert list(m.candidates[0].offsets) == [-2, -1, 0]


def test_last_row_wins_example():
    (m,) = parse(HEADER + "x,a,2000-01-01,0.4,won\nx,a,2000-01-01,0.6,won\n")
    assert list(m.candidates[0].prices) == [0.6]


def test_two_winners_rejected():
    with pytest.raises(SchemaError):
        parse(HEADER + "x,a,2000-01-01,0.5,won\nx,b,2000-01-01,0.5,won\n")


def test_corpus_examples():
    line = '{{"doc_id": "{0}", "date": "2000-01-0{1}", "source": "s", "text": "t"}}\n'
    assert len(read_corpus([line.format(f"d{i}", i) for i in range(1, 4)])) == 3
    with pytest.raises(ParseError) as info:
        read_corpus([line.format("a", 1), '{"doc_id": "b", "source": "s", "text": "t"}\n'])
    assert info.value.line == 2 and "date" in str(info.value)
    with pytest.raises(DuplicateId):
        read_corpus([line.format("a", 1), line.format("a", 2)])


def test_alignment_examples():
    (m,) = parse(HEADER + "p,b,2000-11-06,0.5,won\np,b,2000-11-07,0.6,won\n")
    s = m.candidates[0]
    assert s.date_of(0) == date(2000, 11, 7) and s.date_of(-1) == date(2000, 11, 6)
    assert align_markets([m]) == [m]
    (single,) = align_markets(parse(HEADER + "q,a,2001-03-03,0.5,won\n"))
    assert list(single.candidates[0].offsets) == [0]


# --------------------------------------------------------------------------
# simulator


def test_event_probability_examples():
    assert event_probability(1, 0, 0) == pytest.approx(0.5, abs=1e-15)
    assert event_probability(3, 2, 2) == 1.0
    assert event_probability(3, 0, 1) == pytest.approx(0.25, abs=1e-15)
    assert event_probability(4, 1, 2) == pytest.approx(0.75, abs=1e-15)


def test_single_flip_market():
    cfg = SimConfig(n=1, flips_per_step=1, num_markets=1)
    s = simulate_market(cfg, 0)
    assert s.prices[0] == pytest.approx(0.5, abs=1e-15)
    assert s.prices[-1] == (1.0 if s.won else 0.0)
    assert simulate_market(cfg, 0) == s


def test_ensemble_win_rate(validation_ensemble):
    p = event_probability(100, 0, 0)
    won = np.mean([m.candidates[0].won for m in validation_ensemble])
    assert abs(won - p) <= 3 * math.sqrt(p * (1 - p) / len(validation_ensemble))


def test_default_ensemble_shape():
    markets = simulate_ensemble(SimConfig())
    assert len(markets) == 22 and all(len(m.candidates[0]) == 601 for m in markets)
    assert len(simulate_ensemble(SimConfig(num_markets=1))) == 1
    assert simulate_ensemble(SimConfig(n=50, num_markets=5, seed=1)) != simulate_ensemble(SimConfig(n=50, num_markets=5, seed=2))


# --------------------------------------------------------------------------
# analytics


def test_curve_examples():
    assert list(average_log_score_curve([market("a", [1.0] * 4)]).scores) == [0.0] * 4
    a = CandidateSeries("m", "a", Outcome.WON, [-2, -1, 0], [0.5] * 3, date(2000, 1, 1))
    b = CandidateSeries("m", "b", Outcome.LOST, [-2, -1, 0], [0.5] * 3, date(2000, 1, 1))
    curve = average_log_score_curve([Market("m", (a, b))])
    assert curve.scores == pytest.approx([-0.6931471805599453] * 3)
    curve = average_log_score_curve([market("s", [0.5] * 3), market("l", [0.5] * 5)])
    assert [(p.day_offset, p.num_markets) for p in curve.points] == [(-4, 1), (-3, 1), (-2, 2), (-1, 2), (0, 2)]


def test_epsilon_examples():
    (s,) = epsilon_samples([market("a", [0.5, 0.9])])
    assert s.value == pytest.approx(LN9, rel=1e-12)
    assert [x.value for x in epsilon_samples([market("c", [0.3] * 5)])] == [0.0] * 4
    assert epsilon_samples([market("g", [0.3, 0.6], offsets=[-3, -1])]) == []


def test_density_examples():
    x = np.random.default_rng(1).uniform(size=100_001)
    est = empirical_density(x, 2000)
    assert np.mean(np.abs(est.density - 1.0) <= 0.05) >= 0.99
    assert est.integral() == pytest.approx(1.0, abs=0.1)
    assert empirical_density(x, 50).integral() == pytest.approx(1.0, abs=0.1)
    with pytest.raises(TooFewSamples):
        empirical_density(np.arange(50.0), 50)


def test_ratio_near_zero_change():
    t = transitions(simulate_ensemble(SimConfig(n=2000, flips_per_step=1, num_markets=500, seed=1)))
    (b,) = stratified_winner_loser_ratio(t, None, [-0.05, 0.05])
    assert b.ratio == pytest.approx(1.0, abs=0.1)


def test_ratio_at_ln2(validation_ensemble):
    t = transitions(validation_ensemble)
    ln2 = math.log(2.0)
    (b,) = stratified_winner_loser_ratio(t, None, [ln2 - 0.05, ln2 + 0.05])
    se = math.sqrt(1 / b.count_won + 1 / b.count_lost)
    assert abs(math.log(b.ratio) - ln2) <= 3 * se


def test_ratio_needs_losers():
    with pytest.raises(NoSamples):
        winner_loser_ratio(transitions([market("a", [0.2, 0.4, 0.6])]))


def test_constant_market_stats():
    stats = conditional_stats(transitions([market("c", [0.37] * 10)]))
    (s,) = stats
    assert s.var_next == 0.0 and s.mean_next == s.mean_prev == 0.37


def test_conditional_theory_examples():
    assert conditional_ratio_theory(0.0, 0.0) == 1.0
    assert conditional_ratio_theory(0.0, math.log(2.0)) == pytest.approx(4 / 3)
    pairs = [market(f"m{i}", [0.5, 0.6], won=i % 2 == 0) for i in range(10)]
    cells = conditional_ll_ratio(transitions(pairs))
    assert cells and all(c.insufficient for c in cells)


def test_power_law_examples():
    eps = np.geomspace(1.0, 20.0, 30)
    fit = fit_power_law_tail(DensityEstimate(eps, eps**-2.0, 50), 1.0)
    assert fit.exponent == pytest.approx(-2.0, abs=1e-9) and fit.r_squared == pytest.approx(1.0)
    noise = np.exp(np.random.default_rng(2).normal(0, 0.01, size=eps.size))
    fit = fit_power_law_tail(DensityEstimate(eps, 0.3 * eps**-1.5 * noise, 50), 1.0)
    assert fit.exponent == pytest.approx(-1.5, abs=0.1)
    with pytest.raises(TooFewPoints):
        fit_power_law_tail(DensityEstimate(eps[:3], eps[:3] ** -2.0, 50), 1.0)


# --------------------------------------------------------------------------
# detector


def series_from_steps(steps):
    ll = np.concatenate([[0.0], np.cumsum(steps)])
    return CandidateSeries("m", "c", Outcome.WON, np.arange(-len(steps), 1), [from_log_likelihood(x) for x in ll], date(2000, 1, 31))


def test_detector_examples():
    assert detect_events(series_from_steps([0.0] * 20)) == []
    steps = [0.0] * 31
    steps[17] = 3.0
    (hit,) = detect_events(series_from_steps(steps))
    assert hit.day_offset == -(31 - 18) and hit.delta_ll == pytest.approx(3.0)
    # 0.5 -> 0.75 -> 0.5 gives two changes of exactly equal size
    s = CandidateSeries("m", "c", Outcome.WON, [-4, -3, -2, -1, 0], [0.52, 0.5, 0.75, 0.5, 0.99], date(2000, 1, 31))
    top = detect_events(s, DetectionPolicy("top_k", 2))
    assert [h.day_offset for h in top] == [-2, 0]


# --------------------------------------------------------------------------
# explainer


def doc(i, day, text="word"):
    return Document(f"d{i}", day, "s", text)


def test_split_examples():
    p = PIVOT
    corpus = Corpus((doc(1, date(2000, 5, 17)), doc(2, date(2000, 5, 22)), doc(3, date(2000, 5, 30)), doc(4, p)))
    neg, pos = split_corpus(corpus, SplitSpec(p, 7))
    assert [d.doc_id for d in neg] == ["d1"]
    assert [d.doc_id for d in pos] == ["d2", "d4"]
    with pytest.raises(EmptySide):
        split_corpus(Corpus((doc(1, date(2000, 6, 30)),)), SplitSpec(p, 7))


def test_feature_examples():
    assert extract_features("Rick Lazio") == {"rick", "lazio", "rick lazio"}
    assert extract_features("May 19, 2000 rally") == {"rally"}
    assert extract_features("") == set()


def test_filter_examples():
    neg = Corpus((doc(100, date(2000, 1, 1), "zzz"),))
    pos = Corpus(tuple(doc(i, PIVOT, ("one " if i < 1 else "") + ("two " if i < 2 else "") + "google groups rest")
                       for i in range(20)))
    counts = filter_features(pos, neg, 0.075, stoplist=["google"])
    assert "one" not in counts
    assert counts.counts["two"] == (2, 0)
    assert "google" not in counts and "google groups" not in counts and "groups" in counts


def test_entropy_examples():
    assert expected_entropy_loss(10, 0, 10, 10) == pytest.approx(1.0, abs=1e-4)
    assert expected_entropy_loss(10, 10, 10, 10) == 0.0
    assert expected_entropy_loss(8, 2, 10, 10) == pytest.approx(0.2781, abs=5e-5)


def test_ranking_examples():
    corpus = planted_corpus(seed=2)
    neg, pos = split_corpus(corpus, SplitSpec(date(1996, 8, 6)))
    assert rank_features(pos, neg)[0].feature == "meteorite"
    same = rank_features(pos, pos, ExplainConfig(top_k=None))
    assert all(s.entropy_loss == 0.0 for s in same)
    promoted = rank_features(pos, neg, ExplainConfig(stoplist=frozenset({"meteorite"})))
    assert promoted[0].feature == "martian"


# --------------------------------------------------------------------------
# command line


def rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_cli_simulate_examples(tmp_path):
    out = tmp_path / "s.csv"
    assert cli("simulate", "--n", 1200, "--flips-per-step", 2, "--markets", 22, "--seed", 7, "--out", out) == 0
    assert len({r[0] for r in rows(out)[1:]}) == 22
    first = out.read_bytes()
    assert cli("simulate", "--n", 1200, "--flips-per-step", 2, "--markets", 22, "--seed", 7, "--out", out) == 0
    assert out.read_bytes() == first
    assert cli("simulate", "--markets", 0, "--out", out) == 2


def test_cli_score_examples(tmp_path):
    src, out = tmp_path / "s.csv", tmp_path / "o.csv"
    cli("simulate", "--n", 51, "--markets", 5, "--out", src)
    assert cli("score", src, "--out", out) == 0
    assert rows(out)[-1][:2] == ["0", "0.0"]
    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    assert cli("score", empty, "--out", out) == 2
    two = tmp_path / "two.csv"
    write_prices([market("a", [0.4, 0.6]), market("b", [0.5, 0.5, 0.7], won=False)], two)
    assert cli("score", two, "--out", out) == 0
    assert [r[2] for r in rows(out)[1:]] == ["1", "2", "2"]


def test_cli_validate_examples(tmp_path, capsys):
    out = tmp_path / "v.csv"
    src = tmp_path / "s.csv"
    cli("simulate", "--n", 100, "--flips-per-step", 1, "--markets", 10000, "--seed", 7, "--out", src)
    from infomarket.ingest import load_prices

    biased = [
        market(m.market_id, np.minimum(m.candidates[0].prices + 0.05, 1.0), won=m.candidates[0].won)
        for m in load_prices(src)
    ]
    bad = tmp_path / "biased.csv"
    write_prices(biased, bad)
    assert cli("validate", bad, "--out", out) == 1
    assert "FAIL martingale" in capsys.readouterr().err
    assert cli("validate", "--bins", 0, "--out", out) == 2


@pytest.mark.slow
def test_cli_validate_large_ensemble(tmp_path, capsys):
    out = tmp_path / "v.csv"
    assert cli("validate", "--markets", 100_000, "--seed", 7, "--out", out) == 0
    assert "FAIL" not in capsys.readouterr().err


def test_cli_detect_examples(tmp_path):
    # noise with median 0 and MAD 0.05, plus one change five scaled MADs out
    noise = [-0.1, -0.05, 0.0, 0.05, 0.1] * 8
    steps = noise[:20] + [5 * 1.4826 * 0.05] + noise[20:]
    s = series_from_steps(steps)
    src, out = tmp_path / "j.csv", tmp_path / "h.csv"
    write_prices([Market("m", (s,))], src)
    assert cli("detect", src, "--out", out) == 0
    assert len(rows(out)) == 2 and rows(out)[1][2] == s.date_of(-20).isoformat()
    flat = tmp_path / "flat.csv"
    write_prices([market("f", [0.4] * 30)], flat)
    assert cli("detect", flat, "--out", out) == 0
    assert rows(out) == [["market_id", "candidate_id", "date", "delta_ll", "robust_z"]]
    assert cli("detect", src, "--method", "top_k", "--k", 3, "--out", out) == 0
    assert len(rows(out)) == 4
