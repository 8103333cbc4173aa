"""Pilot-contamination cost model based on angular overlap at the serving BS.

The interference a co-pilot user inflicts on a target user is governed by
how much the interferer's arrival directions excite the array response
over the target's own angular support. The exact criterion is an integral
of the squared response kernel; a cheap piecewise-linear envelope of that
kernel drives the assignment search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import AoAInterval, ScenarioBundle


class NullBoundsError(ValueError):
    """No response null brackets the support; the envelope cost saturates."""


def dirichlet_magnitude(x, M: int, spacing: float = 0.5):
    """|sin(M*pi*spacing*x) / sin(pi*spacing*x)| with the removable limit M.

    This is the magnitude of sum_{m=0}^{M-1} exp(2j*pi*m*spacing*x); x is a
    difference of direction cosines.
    """
    y = spacing * np.asarray(x, dtype=float)
    den = np.sin(np.pi * y)
    num = np.sin(M * np.pi * y)
    small = np.abs(den) < 1e-12
    ratio = np.abs(num) / np.where(small, 1.0, np.abs(den))
    out = np.where(small, float(M), ratio)
    return out if out.ndim else float(out)


def response_overlap(omega, phi, gain: float, M: int, spacing: float = 0.5):
    """Coherent array-response overlap between arrival angles omega and phi.

    sqrt(gain) * |sum_m exp(2j*pi*m*spacing*(cos phi - cos omega))|; peaks at
    sqrt(gain)*M when the direction cosines coincide.
    """
    x = np.cos(np.asarray(phi, dtype=float)) - np.cos(np.asarray(omega, dtype=float))
    return np.sqrt(gain) * dirichlet_magnitude(x, M, spacing)


def interference_integral(
    phi: float,
    interval: AoAInterval,
    gain: float,
    M: int,
    spacing: float = 0.5,
    quad_points: int = 512,
) -> float:
    """Mean squared response overlap toward phi over the target's support.

    (1/M) * integral p(w) * overlap(w, phi)^2 dw with uniform p, composite
    midpoint rule. Identical in exact arithmetic to a(phi)^H R a(phi) / M
    with R the quadrature covariance on the same grid.
    """
    if interval.half_width <= 0:
        return float(gain * dirichlet_magnitude(
            np.cos(phi) - np.cos(interval.center), M, spacing) ** 2 / M)
    edges = np.linspace(interval.low, interval.high, quad_points + 1)
    nodes = 0.5 * (edges[:-1] + edges[1:])
    vals = dirichlet_magnitude(np.cos(phi) - np.cos(nodes), M, spacing) ** 2
    return float(gain * vals.sum() / (M * quad_points))


def cosine_support(interval: AoAInterval) -> tuple[float, float]:
    """Range of direction cosines covered by an angular support.

    Returns (lo, hi). The support is shorter than pi, so it contains at
    most one extremum of cos; endpoints decide otherwise.
    """
    low, high = interval.low, interval.high
    c_low, c_high = np.cos(low), np.cos(high)
    lo, hi = float(min(c_low, c_high)), float(max(c_low, c_high))
    # does the support cross a peak (cos = 1 at even multiples of pi)?
    if np.ceil(low / (2 * np.pi)) * 2 * np.pi <= high:
        hi = 1.0
    # or a trough (cos = -1 at odd multiples of pi)?
    if np.ceil((low - np.pi) / (2 * np.pi)) * 2 * np.pi + np.pi <= high:
        lo = -1.0
    return lo, hi


def kernel_zeros(omega: float, M: int, spacing: float = 0.5) -> np.ndarray:
    """All angles in [0, pi] where the overlap kernel seeded at omega vanishes.

    The kernel is zero iff cos(phi) = cos(omega) + n/(M*spacing) for integer
    n not divisible by M, with the cosine inside [-1, 1]. Returned sorted
    ascending.
    """
    step = 1.0 / (M * spacing)
    base = np.cos(omega)
    n_lo = int(np.ceil((-1.0 - base) / step - 1e-12))
    n_hi = int(np.floor((1.0 - base) / step + 1e-12))
    ns = np.array([n for n in range(n_lo, n_hi + 1) if n % M != 0], dtype=float)
    if ns.size == 0:
        return np.empty(0)
    cosines = np.clip(base + ns * step, -1.0, 1.0)
    return np.sort(np.arccos(cosines))


@dataclass
class NullBounds:
    """First response nulls bracketing a target's cosine support.

    low is the null just outside the high-cosine edge (a smaller angle than
    the support), high the null just outside the low-cosine edge. When the
    nominal null falls beyond an endfire direction the bound clamps there,
    truncating that ramp at the edge of the physical cosine range.
    """

    low: float   # radians; cos(low) = min(support_hi + 1/(M*spacing), 1)
    high: float  # radians; cos(high) = max(support_lo - 1/(M*spacing), -1)


def first_null_bounds(interval: AoAInterval, M: int, spacing: float = 0.5) -> NullBounds:
    """Nearest kernel nulls outside the support's cosine range.

    Bounds clamp to the endfire cosines when the first null would land
    outside [-1, 1]. Raises NullBoundsError only when an edge-seeded
    kernel has no zeros at all (M*spacing too small to form any null);
    callers should then fall back to the saturated wide-band cost.
    """
    if M < 2:
        raise NullBoundsError("a single-antenna kernel has no nulls")
    lo, hi = cosine_support(interval)
    for edge in (lo, hi):
        if kernel_zeros(float(np.arccos(edge)), M, spacing).size == 0:
            raise NullBoundsError(
                "an edge-seeded kernel has no zeros (M*spacing too small); "
                "envelope cost saturates to its wide-band value"
            )
    step = 1.0 / (M * spacing)
    east = min(hi + step, 1.0)
    west = max(lo - step, -1.0)
    return NullBounds(low=float(np.arccos(east)), high=float(np.arccos(west)))


def _envelope(u: np.ndarray, lo: float, hi: float, west: float, east: float) -> np.ndarray:
    """Trapezoid in cosine space: 1 on [lo, hi], linear to 0 at west/east."""
    xp = np.array([west, lo, hi, east])
    fp = np.array([0.0, 1.0, 1.0, 0.0])
    return np.interp(u, xp, fp, left=0.0, right=0.0)


def approx_gain(
    phi,
    target: AoAInterval,
    target_gain: float,
    nulls: NullBounds | None,
):
    """Piecewise-linear envelope of the normalized overlap toward angle phi.

    Value sqrt(target_gain) wherever |cos phi| falls on the target's cosine
    support (the template is symmetric in the cosine, mirroring the
    support), ramping linearly to zero at the first kernel nulls, zero in
    the dead zone between the ramps. nulls=None selects the saturated
    wide-band template, sqrt(target_gain) everywhere.
    """
    u = np.cos(np.asarray(phi, dtype=float))
    root = np.sqrt(target_gain)
    if nulls is None:
        out = np.broadcast_to(root, u.shape).copy() if u.ndim else root
        return out
    lo, hi = cosine_support(target)
    east = np.cos(nulls.low)
    west = np.cos(nulls.high)
    val = np.maximum(_envelope(u, lo, hi, west, east),
                     _envelope(-u, lo, hi, west, east))
    out = root * val
    return out if out.ndim else float(out)


def pair_cost(
    target: AoAInterval,
    interferer: AoAInterval,
    target_gain: float,
    M: int,
    spacing: float = 0.5,
) -> float:
    """Envelope cost of one co-pilot interferer: both endpoint angles scored.

    Sum of the target's gain envelope at the interferer's two support
    endpoints; in [0, 2*sqrt(target_gain)].
    """
    try:
        nulls = first_null_bounds(target, M, spacing)
    except NullBoundsError:
        nulls = None
    return float(approx_gain(interferer.low, target, target_gain, nulls)
                 + approx_gain(interferer.high, target, target_gain, nulls))


def pairwise_cost_matrix(bundle: ScenarioBundle) -> np.ndarray:
    """Envelope cost of every (target user, interfering user) pair.

    Entry [j, a, l, b]: cost user b of cell l would inflict on user a of
    cell j (at BS j) if they shared a pilot. Zero on the diagonal l == j.
    Assignment-independent, so one evaluation serves any pilot pattern on
    the same drop.
    """
    L, K = bundle.drop.shape
    cfg = bundle.config
    lows = bundle.centers - bundle.half_widths
    highs = bundle.centers + bundle.half_widths
    cos_lo, cos_hi = np.cos(lows), np.cos(highs)   # (L, L, K)
    C = np.zeros((L, K, L, K))
    for j in range(L):
        for a in range(K):
            target = bundle.interval(j, j, a)
            root = np.sqrt(bundle.gains[j, j, a])
            try:
                nulls = first_null_bounds(target, cfg.M, cfg.spacing)
            except NullBoundsError:
                C[j, a] = 2.0 * root
                C[j, a, j, :] = 0.0
                continue
            lo, hi = cosine_support(target)
            east, west = np.cos(nulls.low), np.cos(nulls.high)
            total = np.zeros((L, K))
            for u in (cos_lo[j], cos_hi[j]):
                total += np.maximum(_envelope(u, lo, hi, west, east),
                                    _envelope(-u, lo, hi, west, east))
            C[j, a] = root * total
            C[j, a, j, :] = 0.0
    return C


@dataclass
class CostTable:
    """Contamination costs of one assignment on one drop."""

    user_costs: np.ndarray  # (L, K) indexed [cell, pilot]
    pair_costs: np.ndarray  # (L, K, L): contribution of each interfering cell
    cell_max: np.ndarray    # (L,)
    global_max: float
    worst_cell: int
    worst_pilot: int


def total_costs(
    bundle: ScenarioBundle,
    pilot_to_user: np.ndarray,
    pairwise: np.ndarray | None = None,
) -> CostTable:
    """Aggregate envelope costs for a pilot assignment.

    pilot_to_user is (L, K): user index holding pilot k in cell l. The
    worst (cell, pilot) is the row-major argmax, so ties resolve to the
    lowest cell index, then the lowest pilot index.
    """
    L, K = pilot_to_user.shape
    C = pairwise if pairwise is not None else pairwise_cost_matrix(bundle)
    pair = np.zeros((L, K, L))
    ks = np.arange(K)
    for j in range(L):
        rows = C[j, pilot_to_user[j]]          # (K, L, K)
        for l in range(L):
            if l == j:
                continue
            pair[j, :, l] = rows[ks, l, pilot_to_user[l]]
    user_costs = pair.sum(axis=2)
    cell_max = user_costs.max(axis=1)
    flat = int(np.argmax(user_costs))
    worst_cell, worst_pilot = divmod(flat, K)
    return CostTable(
        user_costs=user_costs,
        pair_costs=pair,
        cell_max=cell_max,
        global_max=float(user_costs[worst_cell, worst_pilot]),
        worst_cell=worst_cell,
        worst_pilot=worst_pilot,
    )


def extended_user_costs(
    bundle: ScenarioBundle,
    user_to_pilot: np.ndarray,
    pairwise: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """Per-user envelope costs under an arbitrary (possibly enlarged) pilot map.

    user_to_pilot is (L, K): pilot id of user k in cell l, ids unrestricted.
    Returns costs indexed by user and the global maximum.
    """
    L, K = user_to_pilot.shape
    C = pairwise if pairwise is not None else pairwise_cost_matrix(bundle)
    costs = np.zeros((L, K))
    for j in range(L):
        for a in range(K):
            p = user_to_pilot[j, a]
            for l in range(L):
                if l == j:
                    continue
                mask = user_to_pilot[l] == p
                costs[j, a] += C[j, a, l, mask].sum()
    return costs, float(costs.max())
