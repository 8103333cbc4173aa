"""Uplink rate benchmark: pilot estimation, matched combining, min user rate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import covariance
from .config import RateOptions, SystemConfig
from .scenario import ScenarioBundle


@dataclass
class RateReport:
    """Monte-Carlo uplink rates for one assignment on one drop."""

    rates: np.ndarray       # (L, K) per-user ergodic rate, bits/s/Hz
    min_rate: float
    cell_min: np.ndarray    # (L,)
    n_mc: int
    overhead_factor: float  # pilot block length relative to the K baseline


def moving_average(x: np.ndarray, window: int) -> np.ndarray:
    """Trailing mean with truncated windows at the head.

    out[i] = mean(x[max(0, i-window+1) : i+1]); same length as x.
    """
    x = np.asarray(x, dtype=float)
    if window < 1:
        raise ValueError("window must be >= 1")
    csum = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(1, x.size + 1)
    start = np.maximum(0, idx - window)
    return (csum[idx] - csum[start]) / (idx - start)


def _draw_channels(
    bundle: ScenarioBundle,
    P: int,
    rng: np.random.Generator,
    n_mc: int,
    gains: np.ndarray,
) -> np.ndarray:
    """(n_mc, L, L, K, M) channel draws for every (BS, user) link.

    Path angles are uniform on each link's angular support, amplitudes are
    unit-modulus random phases: per-link statistics match realize_channel
    with the supplied (possibly power-controlled) link gains.
    """
    cfg = bundle.config
    L, K = bundle.drop.shape
    M = cfg.M
    lows = (bundle.centers - bundle.half_widths)[..., None]
    widths = (2.0 * bundle.half_widths)[..., None]
    omegas = lows + widths * rng.random((n_mc, L, L, K, P))
    alphas = np.exp(2j * np.pi * rng.random((n_mc, L, L, K, P)))
    phases = np.exp(
        -2j * np.pi * cfg.spacing
        * np.cos(omegas)[..., None] * np.arange(M))          # (..., P, M)
    g = np.einsum("njlkp,njlkpm->njlkm", alphas, phases)
    scale = np.sqrt(gains / P)[None, ..., None]
    return scale * g


def min_rate(
    bundle: ScenarioBundle,
    user_to_pilot: np.ndarray,
    n_pilots: int,
    rng: np.random.Generator,
    options: RateOptions | None = None,
    overhead_factor: float = 1.0,
) -> RateReport:
    """Worst ergodic uplink rate under pilot-contaminated channel estimation.

    The benchmark applies channel-inversion power control: every user's
    transmit power is scaled so its average received power at the serving
    BS equals pilot_snr times the noise floor (cross-cell links keep their
    gain ratios). Each BS de-spreads the pilot block (the received sum of
    all co-pilot channels plus noise), passes it through the spatial
    filter given by its own user's angular covariance, and combines with
    that filtered estimate. The SINR counts the co-pilot users of the
    other cells (the contamination sources; orthogonal pilots keep the
    remaining streams separated) plus noise. Rates are log2(1+SINR)
    averaged over realizations (or log of the mean SINR with
    ergodic=False); the report carries the minimum over all users.
    """
    options = options or RateOptions()
    cfg = bundle.config
    L, K = bundle.drop.shape
    pilot_snr = (10.0 ** (options.pilot_snr_db / 10.0)
                 if options.pilot_snr_db is not None else cfg.cell_edge_snr)
    P = options.paths if options.paths is not None else cfg.paths
    noise_var = 1.0 / pilot_snr

    # power control: normalize each user by its serving-BS gain
    serving = np.einsum("llu->lu", bundle.gains)             # (L, K)
    geff = bundle.gains / serving[None, :, :]                # (L, L, K)
    # spatial filter per served user: unit-gain covariance of its own link
    filt = np.empty((L, K, cfg.M, cfg.M), dtype=complex)
    for j in range(L):
        for k in range(K):
            filt[j, k] = covariance(bundle.interval(j, j, k), 1.0,
                                    cfg.M, cfg.spacing)
    pilot_of = np.asarray(user_to_pilot)
    cousers = [[[(l, int(np.flatnonzero(pilot_of[l] == pilot_of[j, k])[0]))
                 for l in range(L)
                 if l != j and np.any(pilot_of[l] == pilot_of[j, k])]
                for k in range(K)] for j in range(L)]

    rates = np.zeros((L, K))
    sinr_acc = np.zeros((L, K))
    # keep the phase tensor (n, L, L, K, P, M) under ~50M complex entries
    chunk = max(1, min(options.n_mc, int(5e7 // (L * L * K * P * cfg.M))))
    done = 0
    while done < options.n_mc:
        n = min(chunk, options.n_mc - done)
        g = _draw_channels(bundle, P, rng, n, geff)  # (n, L, L, K, M)
        noise = (rng.standard_normal((n, L, n_pilots, cfg.M))
                 + 1j * rng.standard_normal((n, L, n_pilots, cfg.M))) / np.sqrt(2.0)
        est = np.sqrt(noise_var) * noise
        for l in range(L):
            for k in range(K):
                est[:, :, pilot_of[l, k]] += g[:, :, l, k]
        for j in range(L):
            for k in range(K):
                y = est[:, j, pilot_of[j, k]]        # (n, M)
                v = y @ filt[j, k].T
                own = g[:, j, j, k]
                num = np.abs(np.einsum("nm,nm->n", v.conj(), own)) ** 2
                den = noise_var * (np.abs(v) ** 2).sum(axis=1)
                for l, u in cousers[j][k]:
                    den = den + np.abs(
                        np.einsum("nm,nm->n", v.conj(), g[:, j, l, u])) ** 2
                sinr = num / den
                if options.ergodic:
                    rates[j, k] += np.log2(1.0 + sinr).sum()
                else:
                    sinr_acc[j, k] += sinr.sum()
        done += n
    if options.ergodic:
        rates /= options.n_mc
    else:
        rates = np.log2(1.0 + sinr_acc / options.n_mc)
    return RateReport(
        rates=rates,
        min_rate=float(rates.min()),
        cell_min=rates.min(axis=1),
        n_mc=options.n_mc,
        overhead_factor=overhead_factor,
    )
