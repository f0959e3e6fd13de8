import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pmsignal.crossplatform import (
    PlatformQuote,
    WeightSchedule,
    align_locf,
    common_knowledge_signal,
    consistency_scan,
    divergence_spread,
    internal_consistency,
    parse_quotes,
    read_quotes,
)
from pmsignal.errors import EmptySeries, MissingNoPrice, MissingPlatformPrice, WeightSumViolation
from pmsignal.timeutil import DAY, HOUR


class TestCommonKnowledge:
    def test_single_platform(self):
        assert common_knowledge_signal({"a": 0.61}, {"a": 1.0}) == 0.61

    def test_equal_weights(self):
        assert common_knowledge_signal({"a": 0.6, "b": 0.7}, {"a": 0.5, "b": 0.5}) == pytest.approx(0.65, abs=1e-12)

    def test_weighted(self):
        assert common_knowledge_signal({"a": 0.5, "b": 1.0}, {"a": 0.8, "b": 0.2}) == pytest.approx(0.6, abs=1e-12)

    def test_weight_sum(self):
        with pytest.raises(WeightSumViolation):
            common_knowledge_signal({"a": 0.5, "b": 0.5}, {"a": 0.5, "b": 0.49})

    def test_missing_price(self):
        with pytest.raises(MissingPlatformPrice):
            common_knowledge_signal({"a": 0.5}, {"a": 0.5, "b": 0.5})

    def test_schedule_steps(self):
        ws = WeightSchedule.from_json({"a": [[0, 1.0], [100, 0.25]], "b": [[0, 0.0], [100, 0.75]]})
        assert common_knowledge_signal({"a": 0.4, "b": 0.8}, ws, 50) == 0.4
        assert common_knowledge_signal({"a": 0.4, "b": 0.8}, ws, 100) == pytest.approx(0.7, abs=1e-12)

    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(0.01, 1)), min_size=1, max_size=8), st.randoms())
    def test_convex_and_permutation_invariant(self, rows, rnd):
        total = sum(w for _, w in rows)
        prices = {f"k{i}": p for i, (p, _) in enumerate(rows)}
        weights = {f"k{i}": w / total for i, (_, w) in enumerate(rows)}
        v = common_knowledge_signal(prices, weights)
        assert min(prices.values()) <= v <= max(prices.values())
        labels = list(prices)
        perm = labels[:]
        rnd.shuffle(perm)
        relabel = dict(zip(labels, perm))
        v2 = common_knowledge_signal({relabel[k]: p for k, p in prices.items()},
                                     {relabel[k]: w for k, w in weights.items()})
        assert v2 == pytest.approx(v, abs=1e-12)


def const(p, n=5, step=HOUR, t0=0):
    return [(t0 + k * step, p) for k in range(n)]


class TestSpread:
    def test_boundary_not_breach(self):
        sp = divergence_spread(const(0.60), const(0.58), 2.0)
        assert np.all(sp.spread_pp == 2.0) and not sp.breach.any()

    def test_identical(self):
        sp = divergence_spread(const(0.55), const(0.55), 2.0)
        assert np.all(sp.spread_pp == 0) and sp.n_breaches == 0

    def test_four_points(self):
        sp = divergence_spread(const(0.62), const(0.58), 2.0)
        assert np.all(sp.spread_pp == 4.0) and sp.breach.all()

    def test_empty(self):
        with pytest.raises(EmptySeries):
            divergence_spread([], const(0.5))

    def test_no_values_before_first_observation(self):
        a = [(0, 0.5), (10, 0.52), (30, 0.53)]
        b = [(15, 0.49), (30, 0.50)]
        grid, (pa, pb) = align_locf(a, b)
        assert grid.tolist() == [15, 30]
        assert pa.tolist() == [0.52, 0.53] and pb.tolist() == [0.49, 0.50]

    series = st.lists(st.tuples(st.integers(0, 1000), st.floats(0, 1).map(lambda p: round(p, 6))), min_size=1, max_size=20)

    @given(series, series, st.floats(0, 10))
    def test_symmetry(self, a, b, be):
        x, y = divergence_spread(a, b, be), divergence_spread(b, a, be)
        np.testing.assert_array_equal(x.spread_pp, y.spread_pp)
        np.testing.assert_array_equal(x.breach, y.breach)
        assert x.timestamps[0] >= max(min(t for t, _ in a), min(t for t, _ in b))


class TestConsistency:
    def q(self, yes, no, platform="a", day=0):
        return PlatformQuote(platform, day * DAY + HOUR, yes, no)

    def test_complementary(self):
        r = internal_consistency(self.q(0.53, 0.47))
        assert r.deviation == 0 and r.consistent

    def test_violation(self):
        r = internal_consistency(self.q(0.53, 0.49), 0.01)
        assert r.deviation == pytest.approx(0.02, abs=1e-12) and not r.consistent

    def test_boundary_inclusive(self):
        assert internal_consistency(self.q(0.53, 0.49), 0.02).consistent

    def test_missing_no(self):
        with pytest.raises(MissingNoPrice):
            internal_consistency(self.q(0.53, None))

    def test_scan_counts_days_with_any_violation(self):
        quotes = [self.q(0.5, 0.5, "a", 0), self.q(0.4, 0.62, "b", 0),
                  self.q(0.5, 0.5, "a", 1), self.q(0.4, 0.6, "b", 1),
                  self.q(0.7, 0.31, "a", 2)]
        scan = consistency_scan(quotes)
        assert (scan.days_total, scan.days_violating) == (3, 2)

    def test_scan_all_consistent(self):
        quotes = [self.q(0.3 + d / 100, 0.7 - d / 100, "a", d) for d in range(10)]
        assert consistency_scan(quotes).days_violating == 0

    def test_scan_skips_platform_without_no_price(self, caplog):
        quotes = [self.q(0.5, None, "a", 0), self.q(0.4, 0.6, "b", 0), self.q(0.4, None, "a", 1),
                  self.q(0.4, 0.65, "b", 1)]
        with caplog.at_level(logging.WARNING):
            scan = consistency_scan(quotes)
        assert scan.per_day == {"1970-01-01": False, "1970-01-02": True}
        assert len(scan.skipped) == 2 and "no no_price" in caplog.text

    def test_empty_scan(self):
        scan = consistency_scan([])
        assert (scan.days_total, scan.days_violating) == (0, 0)


def test_quote_csv(fixture_dir):
    quotes = parse_quotes("timestamp,platform_id,market_id,yes_price,no_price\n"
                          "2024-10-01T00:00:00Z,kalshi,m,0.55,\n1727740800000,poly,m,0.6,0.4\n")
    assert quotes[0].no_price is None and quotes[1].no_price == 0.4
    assert quotes[0].timestamp == quotes[1].timestamp
    assert len(read_quotes(fixture_dir / "consistency_65d.csv")) == 130
