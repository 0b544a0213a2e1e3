from datetime import datetime, timezone

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import random_series
from forwardsignal.backtest import (REGIME_COLUMNS, RegimeReport, backtest, format_metrics,
                                    format_regime_table, forward_shift_diagnostic, max_drawdown,
                                    realized_equity, regime_report, simple_returns)
from forwardsignal.decision import positions_from_states, run_decisions
from forwardsignal.errors import DataError

T0 = datetime(2024, 1, 1, tzinfo=timezone.utc)


def minutes(n, step=60_000):
    return int(T0.timestamp() * 1000) + step * np.arange(n, dtype=np.int64)


class TestReturns:
    def test_single(self):
        assert simple_returns([100.0, 101.0])[0] == pytest.approx(0.01, rel=1e-14)

    def test_constant(self):
        assert (simple_returns([1.2] * 5) == 0).all()

    def test_down_move(self):
        assert simple_returns([1.10, 1.089])[0] == pytest.approx(-0.01, rel=1e-12)

    def test_too_short(self):
        with pytest.raises(DataError):
            simple_returns([1.0])


class TestEquity:
    def test_flat_strategy(self):
        closes = random_series(np.random.default_rng(1), 50)
        eq = backtest(closes, positions_from_states(np.zeros(50)))
        assert (eq.v == 1.0).all()
        np.testing.assert_allclose(eq.v_bench, closes[1:] / closes[0], rtol=1e-12)

    def test_always_long_equals_benchmark(self):
        closes = random_series(np.random.default_rng(2), 50)
        eq = backtest(closes, positions_from_states(np.ones(50)))
        assert np.array_equal(eq.v, eq.v_bench)

    def test_mixed_fixture(self):
        closes = [1.00, 1.02, 0.99, 1.01, 1.05]
        p = [0, 1, 1, 0, 1]
        eq = backtest(closes, positions_from_states(np.array(p)))
        for rec, (r, R, v, bench, trades) in zip(eq, oracles.equity(closes, p)):
            assert rec.r == pytest.approx(r, rel=1e-12)
            assert rec.R == pytest.approx(R, rel=1e-12, abs=1e-15)
            assert rec.v == pytest.approx(v, rel=1e-12)
            assert rec.v_bench == pytest.approx(bench, rel=1e-12)
            assert rec.trades_cum == trades

    def test_misaligned(self):
        with pytest.raises(DataError, match="misaligned"):
            realized_equity(np.zeros(3), positions_from_states(np.zeros(3)))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 300))
    def test_recursion(self, seed, n):
        rng = np.random.default_rng(seed)
        closes = random_series(rng, n, vol=0.01)
        eq = backtest(closes, positions_from_states(rng.integers(0, 2, n)))
        v = np.concatenate(([1.0], eq.v))
        np.testing.assert_allclose(v[1:] / v[:-1] - 1, eq.R, rtol=0, atol=1e-12)
        assert (eq.v > 0).all() and (eq.v_bench > 0).all()


class TestDrawdown:
    def test_monotone(self):
        assert max_drawdown([1, 1, 1.2, 1.3]) == 0.0

    def test_fixture_one(self):
        assert max_drawdown([1, 1.1, 0.99, 1.2]) == pytest.approx(-0.1, rel=1e-12)

    def test_fixture_two(self):
        assert max_drawdown([1, 0.5, 1.5, 0.9]) == pytest.approx(-0.5, rel=1e-12)

    def test_empty(self):
        with pytest.raises(DataError):
            max_drawdown([])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0.01, 100), min_size=1, max_size=60), st.floats(0.01, 100))
    def test_matches_pairs_and_scale_free(self, v, lam):
        assert max_drawdown(v) == pytest.approx(oracles.max_drawdown(v), abs=1e-12)
        assert max_drawdown(np.array(v) * lam) == pytest.approx(max_drawdown(v), abs=1e-12)
        assert -1.0 <= max_drawdown(v) <= 0.0


def two_regime_curve(seed=3, n=4000):
    rng = np.random.default_rng(seed)
    closes = random_series(rng, n, vol=1e-3)
    p = rng.integers(0, 2, n)
    ts = minutes(n, step=15 * 60_000)
    return backtest(closes, positions_from_states(p), ts), closes, p, ts


class TestRegimes:
    def test_single_regime(self):
        eq, *_ = two_regime_curve()
        (rep,) = regime_report(eq)
        assert rep.end_v == pytest.approx(eq.end_v, rel=1e-12)
        assert rep.cum_ret_pct == pytest.approx(100 * (eq.end_v - 1), rel=1e-12)

    def test_split_forms_agree(self):
        eq, _, _, ts = two_regime_curve()
        when = datetime.fromtimestamp(int(ts[2000]) / 1000, tz=timezone.utc)
        by_ms = regime_report(eq, [int(ts[2000])])
        assert regime_report(eq, [when]) == by_ms
        assert regime_report(eq, [when.isoformat()]) == by_ms
        assert regime_report(eq, [when.replace(tzinfo=None)]) == by_ms
        with pytest.raises(DataError, match="bad split"):
            regime_report(eq, ["soon"])

    def test_split_at_first_timestamp_rejected(self):
        eq, _, _, ts = two_regime_curve()
        with pytest.raises(DataError, match="no bars"):
            regime_report(eq, [int(ts[0])])

    def test_split_outside_range(self):
        eq, _, _, ts = two_regime_curve()
        with pytest.raises(DataError, match="outside"):
            regime_report(eq, [int(ts[-1]) + 60_000])

    def test_two_regimes_against_recomputation(self):
        eq, closes, p, ts = two_regime_curve()
        split = 1500
        reports = regime_report(eq, [int(ts[split])], labels=["early", "late"])
        r = np.diff(closes) / closes[:-1]
        R = p[:-1] * r
        for rep, (lo, hi, t0, t1) in zip(reports, [(0, split - 1, ts[0], ts[split]),
                                                    (split - 1, len(R), ts[split], ts[-1])]):
            v = np.cumprod(1 + R[lo:hi])
            trades = int(np.abs(np.diff(np.concatenate(([0], p)))[lo + 1 if lo else 0: hi + 1]).sum())
            months = (t1 - t0) / 86_400_000 / 30.44
            assert rep.end_v == pytest.approx(v[-1], rel=1e-12)
            assert rep.mdd_pct == pytest.approx(100 * oracles.max_drawdown(np.concatenate(([1.0], v))), abs=1e-10)
            assert rep.trades_per_month == pytest.approx(trades / months, rel=1e-12)
        assert [r.period for r in reports] == ["early", "late"]
        assert reports[0].end_v * reports[1].end_v == pytest.approx(eq.end_v, abs=1e-12)

    def test_regime_trades_sum_to_total(self):
        eq, _, _, ts = two_regime_curve()
        bounds = [int(ts[1000]), int(ts[2500])]
        reports = regime_report(eq, bounds)
        edges = [ts[0], *bounds, ts[-1]]
        months = np.diff(edges) / 86_400_000 / 30.44
        total = sum(r.trades_per_month * m for r, m in zip(reports, months))
        assert total == pytest.approx(eq.trades_cum[-1], rel=1e-12)

    def test_report_columns(self):
        assert list(RegimeReport.__dataclass_fields__) == list(REGIME_COLUMNS)
        assert list(REGIME_COLUMNS.values())[1:] == ["End V", "Cum. ret. (%)", "MDD (%)", "Trades/mo"]

    def test_text_outputs(self):
        eq, _, _, ts = two_regime_curve()
        reports = regime_report(eq, [int(ts[2000])])
        text = format_metrics(eq, reports)
        assert text.startswith("# Gross of all trading frictions")
        assert "regime.1.trades_per_month = " in text
        assert "End V" in format_regime_table(reports).splitlines()[0]


class TestShiftDiagnostic:
    def test_shift_zero_is_standard_backtest(self):
        rng = np.random.default_rng(5)
        s = rng.normal(scale=0.1, size=300)
        closes = random_series(rng, 300)
        curves = forward_shift_diagnostic(s, closes, [0])
        ref = backtest(closes, run_decisions(s))
        assert np.array_equal(curves[0].v, ref.v)

    def test_constant_signal(self):
        closes = random_series(np.random.default_rng(6), 100)
        curves = forward_shift_diagnostic(np.full(100, 0.2), closes, [0, 1, 2, 3])
        for k, c in curves.items():
            assert np.array_equal(c.v, curves[0].v[: len(c.v)])

    def test_shift_against_brute_force(self):
        t = np.arange(600)
        closes = 1.1 * np.exp(0.002 * np.sin(2 * np.pi * t / 60))
        s = np.cos(2 * np.pi * t / 60)  # leading indicator of the price cycle
        curves = forward_shift_diagnostic(s, closes, [0, 1])
        for k in (0, 1):
            rows = oracles.equity(closes[: 600 - k], oracles.hysteresis(s[k:], 0.06))
            assert curves[k].end_v == pytest.approx(rows[-1][2], rel=1e-12)
        assert curves[1].end_v > curves[0].end_v

    @pytest.mark.parametrize("shift", [-1, 100, 99])
    def test_bad_shift(self, shift):
        with pytest.raises(DataError):
            forward_shift_diagnostic(np.zeros(100), np.ones(100), [shift])
