"""Uplink rate benchmark: moving average, SINR scaling, contamination effects."""

import numpy as np
import pytest

from cellpilot import RateOptions, extended_user_costs, min_rate, moving_average
from conftest import make_world, small_config


# ----------------------------------------------------------- moving average

def test_moving_average_window_one_is_identity(rng):
    x = rng.random(20)
    # identity up to cumulative-sum round-off
    assert np.allclose(moving_average(x, 1), x, rtol=1e-12, atol=1e-13)


def test_moving_average_worked_example():
    out = moving_average(np.array([1.0, 2.0, 3.0, 4.0]), 2)
    assert np.allclose(out, [1.0, 1.5, 2.5, 3.5], atol=1e-15)


def test_moving_average_truncated_head():
    # window wider than the series: trailing mean becomes the running mean
    x = np.array([2.0, 4.0, 6.0])
    out = moving_average(x, 10)
    assert np.allclose(out, [2.0, 3.0, 4.0], atol=1e-15)


def test_moving_average_constant_series():
    out = moving_average(np.full(30, 7.5), 6)
    assert np.allclose(out, 7.5, atol=1e-15)


def test_moving_average_rejects_bad_window():
    with pytest.raises(ValueError):
        moving_average(np.arange(4.0), 0)


# --------------------------------------------------------------- rate: API

def _identity_pilots(L, K):
    return np.tile(np.arange(K), (L, 1))


def test_report_invariants():
    bundle = make_world(small_config(L=2, K=2, M=16), seed=0)
    rep = min_rate(bundle, _identity_pilots(2, 2), 2,
                   np.random.default_rng(0),
                   RateOptions(n_mc=5, paths=10), overhead_factor=2.5)
    assert rep.rates.shape == (2, 2)
    assert np.all(np.isfinite(rep.rates)) and np.all(rep.rates > 0)
    assert rep.min_rate == rep.rates.min()
    assert np.array_equal(rep.cell_min, rep.rates.min(axis=1))
    assert rep.n_mc == 5
    assert rep.overhead_factor == 2.5


def test_rate_determinism():
    bundle = make_world(small_config(L=2, K=2, M=16), seed=3)
    reports = [min_rate(bundle, _identity_pilots(2, 2), 2,
                        np.random.default_rng(42), RateOptions(n_mc=8, paths=10))
               for _ in range(2)]
    assert np.array_equal(reports[0].rates, reports[1].rates)


# ------------------------------------------------------------ rate: physics

def _mean_sinr_db(report):
    sinr = 2.0 ** report.rates - 1.0
    return 10.0 * np.log10(sinr)


def test_array_gain_doubling_antennas():
    # orthogonal pilots, single cell: doubling M doubles the post-combining
    # SNR, i.e. +3 dB on the mean SINR
    gains = []
    for seed in (0, 1, 2):
        per_m = {}
        for M in (32, 64):
            bundle = make_world(small_config(L=1, K=2, M=M), seed=seed)
            rep = min_rate(bundle, _identity_pilots(1, 2), 2,
                           np.random.default_rng(seed),
                           RateOptions(n_mc=100, paths=20, ergodic=False))
            per_m[M] = _mean_sinr_db(rep)
        gains.append(np.mean(per_m[64] - per_m[32]))
    assert abs(np.mean(gains) - 3.0) < 0.5


def test_symmetric_pair_sinr_near_unity():
    # two users statistically identical to both base stations sharing one
    # pilot: contamination as strong as the signal, so SINR sits near 1
    bundle = make_world(small_config(L=2, K=1, M=128), seed=0)
    bundle.gains = np.full_like(bundle.gains, 2.0)
    bundle.centers = np.full_like(bundle.centers, np.pi / 3)
    bundle.half_widths = np.full_like(bundle.half_widths, 0.1)
    rep = min_rate(bundle, np.zeros((2, 1), dtype=int), 1,
                   np.random.default_rng(7),
                   RateOptions(n_mc=300, paths=20, pilot_snr_db=30.0,
                               ergodic=False))
    sinr = 2.0 ** rep.rates - 1.0
    assert np.all(sinr > 0.5) and np.all(sinr < 2.0)


def test_low_cost_assignment_earns_higher_min_rate():
    # the two assignment classes of an L=2, K=2 cluster, on a drop where
    # their contamination costs differ sharply
    cfg = small_config(L=2, K=2, M=64, scatter_radius=30.0,
                       exclusion_radius=150.0)
    bundle = make_world(cfg, seed=1)
    classes = [np.array([[0, 1], [0, 1]]), np.array([[0, 1], [1, 0]])]
    costs = [extended_user_costs(bundle, u2p)[1] for u2p in classes]
    rates = [min_rate(bundle, u2p, 2, np.random.default_rng(11),
                      RateOptions(n_mc=60, paths=20)).min_rate
             for u2p in classes]
    lo, hi = int(np.argmin(costs)), int(np.argmax(costs))
    assert costs[hi] > 3.0 * costs[lo]  # the drop separates the classes
    assert rates[lo] > rates[hi]


def test_rate_increases_with_pilot_snr():
    mins = {snr: [] for snr in (0.0, 10.0, 20.0)}
    for seed in range(6):
        bundle = make_world(small_config(L=2, K=2, M=16), seed=seed)
        for snr in mins:
            rep = min_rate(bundle, _identity_pilots(2, 2), 2,
                           np.random.default_rng(seed),
                           RateOptions(n_mc=20, paths=10, pilot_snr_db=snr))
            mins[snr].append(rep.min_rate)
    med = {snr: np.median(v) for snr, v in mins.items()}
    assert med[0.0] < med[10.0] < med[20.0]


def test_moving_interferer_to_private_pilot_helps_victim():
    # identical draws (same seed, same pilot count): releasing the co-pilot
    # interferer onto an unused pilot must raise the victim's rate
    improved = 0
    for seed in range(20):
        bundle = make_world(small_config(L=2, K=2, M=32), seed=seed)
        shared = np.array([[0, 1], [0, 1]])
        private = np.array([[0, 1], [2, 1]])
        opts = RateOptions(n_mc=30, paths=15)
        r_shared = min_rate(bundle, shared, 3, np.random.default_rng(seed),
                            opts).rates[0, 0]
        r_private = min_rate(bundle, private, 3, np.random.default_rng(seed),
                             opts).rates[0, 0]
        improved += r_private > r_shared
    assert improved == 20


def test_ergodic_rate_below_mean_sinr_rate():
    # log2(1 + .) is concave: averaging inside the log can only raise the
    # figure when both are computed from the same SINR samples
    bundle = make_world(small_config(L=2, K=2, M=16), seed=4)
    u2p = np.array([[0, 1], [0, 1]])
    erg = min_rate(bundle, u2p, 2, np.random.default_rng(5),
                   RateOptions(n_mc=40, paths=10, ergodic=True))
    non = min_rate(bundle, u2p, 2, np.random.default_rng(5),
                   RateOptions(n_mc=40, paths=10, ergodic=False))
    assert np.all(erg.rates <= non.rates + 1e-12)
