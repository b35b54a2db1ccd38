import math

import numpy as np
import pytest

import helpers
from lobforge.agents import SnapshotSeries
from lobforge.auxiliary import (
    AuxCoefficients,
    AuxSeries,
    acf_pacf,
    arch_lm_test,
    fit_arima011,
    fit_auxiliary,
    fit_garch11,
    transform,
)
from lobforge.errors import DegenerateDay, DegenerateSeries


def make_snapshots(best_bid, best_ask, interval_seconds=10, l_p=5, l_d=3,
                   bid_shares=None, ask_shares=None):
    n = len(best_bid)
    l_t = l_p + l_d
    bb = np.asarray(best_bid, dtype=np.int64)
    ba = np.asarray(best_ask, dtype=np.int64)
    if bid_shares is None:
        bid_shares = np.ones((n, l_t), dtype=np.int64)
    if ask_shares is None:
        ask_shares = np.ones((n, l_t), dtype=np.int64)
    return SnapshotSeries(
        interval_seconds=interval_seconds,
        l_p=l_p,
        l_d=l_d,
        best_bid=bb,
        best_ask=ba,
        ref_bid=np.where(bb >= 0, bb, 0),
        ref_ask=np.where(ba >= 0, ba, 0),
        bid_counts=np.ones((n, l_t), dtype=np.int64),
        ask_counts=np.ones((n, l_t), dtype=np.int64),
        bid_shares=np.asarray(bid_shares, dtype=np.int64),
        ask_shares=np.asarray(ask_shares, dtype=np.int64),
        bid_exterior_shares=np.zeros(n, dtype=np.int64),
        ask_exterior_shares=np.zeros(n, dtype=np.int64),
    )


class TestTransform:
    def test_constant_book_gives_zero_returns_constant_volume(self):
        n = 121  # 120 intervals = 20 minutes
        snaps = make_snapshots([1000] * n, [1002] * n)
        aux = transform(snaps)
        assert np.all(aux.returns == 0.0)
        assert np.all(aux.vol_bid == aux.vol_bid[0])
        assert len(aux.returns) == 120 // 6 - 1

    def test_mid_doubling_gives_log_two(self):
        # 12 intervals = 2 minute marks; mid doubles between them
        bb = [1000] * 7 + [2000] * 6
        ba = [1002] * 7 + [2002] * 6
        aux = transform(make_snapshots(bb, ba))
        assert len(aux.returns) == 1
        assert aux.returns[0] == pytest.approx(math.log(2001.0 / 1001.0))

    def test_full_day_mark_count(self):
        # 8.5 h at 10 s intervals: 3060 intervals, 510 marks, 509 returns
        n = 3061
        snaps = make_snapshots([1000] * n, [1002] * n)
        aux = transform(snaps)
        assert len(aux.returns) == 509
        assert len(aux.vol_bid) == 3060

    def test_one_sided_mark_raises(self):
        bb = [1000] * 13
        ba = [1002] * 6 + [-1] + [1002] * 6
        with pytest.raises(DegenerateDay):
            transform(make_snapshots(bb, ba))

    def test_volume_is_passive_window_total(self):
        n = 13
        l_t = 8
        bid_shares = np.zeros((n, l_t), dtype=np.int64)
        bid_shares[:, 3:] = 7  # levels s = 1..5 hold 7 shares each
        bid_shares[:, :3] = 99  # aggressive levels must not count
        snaps = make_snapshots([1000] * n, [1002] * n, bid_shares=bid_shares)
        aux = transform(snaps)
        assert np.all(aux.vol_bid == 35)

    def test_volume_location_free(self):
        rng = np.random.default_rng(0)
        n = 61
        shares = rng.integers(0, 9, size=(n, 8))
        snaps1 = make_snapshots([1000] * n, [1002] * n, bid_shares=shares, ask_shares=shares)
        snaps2 = make_snapshots([1100] * n, [1102] * n, bid_shares=shares, ask_shares=shares)
        a1, a2 = transform(snaps1), transform(snaps2)
        assert np.array_equal(a1.vol_bid, a2.vol_bid)
        assert np.array_equal(a1.vol_ask, a2.vol_ask)


class TestGarch11:
    def test_iid_input_yields_no_arch(self):
        rng = np.random.default_rng(11)
        good = 0
        for _ in range(20):
            r = rng.standard_normal(3000) * 0.01
            f = fit_garch11(r)
            if f.a1 < 0.05 and f.b1 < 0.05 and abs(f.a0 - 1e-4) < 0.2e-4:
                good += 1
        assert good >= 18

    def test_recovers_synthetic_garch_within_cis(self):
        rng = np.random.default_rng(5)
        true = np.array([1e-6, 0.10, 0.85])
        hits = np.zeros(3, dtype=int)
        reps = 20
        for _ in range(reps):
            r = helpers.generate_garch(3060, *true, rng)
            f = fit_garch11(r)
            for i in range(3):
                if abs(f.params[i] - true[i]) < 1.96 * f.stderr[i]:
                    hits[i] += 1
        assert np.all(hits >= 18), hits

    def test_constant_series_degenerate(self):
        with pytest.raises(DegenerateSeries):
            fit_garch11(np.zeros(200))
        with pytest.raises(DegenerateSeries):
            fit_garch11(np.ones(30))  # too short

    def test_stationarity_margin(self):
        rng = np.random.default_rng(2)
        r = helpers.generate_garch(2000, 1e-6, 0.25, 0.74, rng)
        f = fit_garch11(r)
        assert f.a1 + f.b1 < 1.0 - 1e-6

    def test_pooled_equals_single_for_copies(self):
        rng = np.random.default_rng(3)
        r = helpers.generate_garch(1200, 1e-6, 0.1, 0.8, rng)
        single = fit_garch11(r)
        pooled = fit_garch11([r, r])
        assert np.allclose(single.params, pooled.params, rtol=1e-6)

    def test_pooled_se_shrinks_like_sqrt_m(self):
        rng = np.random.default_rng(4)
        days = [helpers.generate_garch(1000, 1e-6, 0.1, 0.85, rng) for _ in range(16)]
        one = fit_garch11(days[0])
        pooled = fit_garch11(days)
        ratio = pooled.stderr[1] / one.stderr[1]
        assert abs(ratio - 1 / 4) < 0.15  # sqrt(16) = 4


class TestArima011:
    def test_iid_increment_theta_near_zero(self):
        rng = np.random.default_rng(6)
        x = np.cumsum(rng.standard_normal(2000)) + 5.0
        f = fit_arima011(x)
        assert abs(f.theta) < 1.96 * f.stderr_theta + 0.02

    def test_recovers_theta_half(self):
        rng = np.random.default_rng(7)
        hits = 0
        for _ in range(20):
            x = helpers.generate_ma1_levels(3000, 0.5, 0.3, rng)
            f = fit_arima011(x)
            if abs(f.theta - 0.5) < 0.06:
                hits += 1
        assert hits >= 18

    def test_linear_series_degenerate(self):
        with pytest.raises(DegenerateSeries):
            fit_arima011(np.arange(300, dtype=float))

    def test_invertibility_margin(self):
        rng = np.random.default_rng(8)
        x = helpers.generate_ma1_levels(1500, 0.97, 0.0, rng)
        f = fit_arima011(x)
        assert abs(f.theta) < 1.0 - 1e-6

    def test_pooled_copies_equal_single(self):
        rng = np.random.default_rng(9)
        x = helpers.generate_ma1_levels(800, 0.4, 0.1, rng)
        a = fit_arima011(x)
        b = fit_arima011([x, x])
        assert a.theta == pytest.approx(b.theta, rel=1e-8)
        assert a.log_sigma == pytest.approx(b.log_sigma, rel=1e-8)

    def test_deterministic(self):
        rng = np.random.default_rng(10)
        x = helpers.generate_ma1_levels(900, 0.3, 0.0, rng)
        assert fit_arima011(x).theta == fit_arima011(x).theta


class TestFitAuxiliary:
    def _synthetic_day(self, rng, n_intervals=1200):
        n = n_intervals + 1
        mid = 10000 * np.exp(np.cumsum(np.concatenate([[0.0], 1e-4 * rng.standard_normal(n - 1)])))
        bb = np.round(mid).astype(np.int64)
        ba = bb + 2
        shares = rng.integers(20, 40, size=(n, 8))
        return make_snapshots(bb, ba, bid_shares=shares, ask_shares=shares)

    def test_m1_equals_single(self):
        rng = np.random.default_rng(12)
        day = self._synthetic_day(rng)
        c1 = fit_auxiliary([day])
        aux = transform(day)
        c2 = AuxCoefficients(
            beta1=fit_garch11(aux.returns).params,
            beta2=np.array([
                fit_arima011(aux.vol_bid).theta,
                fit_arima011(aux.vol_bid).log_sigma,
                fit_arima011(aux.vol_ask).theta,
                fit_arima011(aux.vol_ask).log_sigma,
            ]),
        )
        assert np.allclose(c1.beta1, c2.beta1, rtol=1e-8)
        assert np.allclose(c1.beta2, c2.beta2, rtol=1e-8)

    def test_two_copies_equal_single(self):
        rng = np.random.default_rng(13)
        day = self._synthetic_day(rng)
        c1 = fit_auxiliary([day])
        c2 = fit_auxiliary([day, day])
        assert np.allclose(c1.concatenated(), c2.concatenated(), rtol=1e-6)

    def test_json_round_trip(self):
        c = AuxCoefficients(beta1=np.array([1e-6, 0.1, 0.8]), beta2=np.array([0.5, 1.0, 0.4, 0.9]))
        c2 = AuxCoefficients.from_json_dict(c.to_json_dict())
        assert np.array_equal(c.beta1, c2.beta1) and np.array_equal(c.beta2, c2.beta2)


class TestAcfPacf:
    def test_white_noise_inside_bartlett_bands(self):
        rng = np.random.default_rng(14)
        x = rng.standard_normal(3000)
        acf, pacf = acf_pacf(x, 40)
        band = 2.0 / math.sqrt(len(x))
        assert np.mean(np.abs(acf[1:]) < band) >= 0.95
        assert acf[0] == 1.0 and pacf[0] == 1.0

    def test_ar1_acf_matches_power_law(self):
        rng = np.random.default_rng(15)
        n = 3000
        x = np.empty(n)
        x[0] = 0.0
        for t in range(1, n):
            x[t] = 0.8 * x[t - 1] + rng.standard_normal()
        acf, pacf = acf_pacf(x, 10)
        band = 2.0 / math.sqrt(n)
        for k in range(1, 6):
            assert abs(acf[k] - 0.8**k) < 5 * band
        # PACF cuts off after lag 1 for an AR(1)
        assert abs(pacf[1] - 0.8) < 0.05
        assert np.all(np.abs(pacf[2:]) < 4 * band)

    def test_degenerate(self):
        with pytest.raises(DegenerateSeries):
            acf_pacf(np.ones(100), 5)
        with pytest.raises(DegenerateSeries):
            acf_pacf(np.arange(5), 10)


class TestArchLm:
    def test_size_under_null(self):
        rng = np.random.default_rng(16)
        rejections = 0
        reps = 200
        for _ in range(reps):
            r = rng.standard_normal(500)
            _, p = arch_lm_test(r, 5)
            rejections += p < 0.05
        assert 0.02 <= rejections / reps <= 0.095

    def test_power_under_garch(self):
        rng = np.random.default_rng(17)
        hits = 0
        for _ in range(20):
            r = helpers.generate_garch(2000, 1e-6, 0.3, 0.6, rng)
            _, p = arch_lm_test(r, 5)
            hits += p < 0.01
        assert hits >= 19

    def test_zero_returns_degenerate(self):
        with pytest.raises(DegenerateSeries):
            arch_lm_test(np.zeros(400), 5)
