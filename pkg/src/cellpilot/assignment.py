"""Pilot assignment representations and baseline assignment strategies."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .config import BudgetError
from .contamination import CostTable, extended_user_costs, pairwise_cost_matrix, total_costs
from .scenario import ScenarioBundle


@dataclass
class PilotAssignment:
    """Per-cell bijection pilot -> user, one row per cell."""

    pilot_to_user: np.ndarray  # (L, K) int

    def __post_init__(self):
        self.pilot_to_user = np.asarray(self.pilot_to_user, dtype=int)
        L, K = self.pilot_to_user.shape
        ref = np.arange(K)
        for l in range(L):
            if not np.array_equal(np.sort(self.pilot_to_user[l]), ref):
                raise ValueError(f"row {l} is not a permutation of 0..{K - 1}")

    @property
    def shape(self):
        return self.pilot_to_user.shape

    def user_to_pilot(self) -> np.ndarray:
        """Inverse map: pilot id of each user, same shape."""
        return np.argsort(self.pilot_to_user, axis=1)

    def copy(self) -> "PilotAssignment":
        return PilotAssignment(self.pilot_to_user.copy())

    def __eq__(self, other):
        return (isinstance(other, PilotAssignment)
                and np.array_equal(self.pilot_to_user, other.pilot_to_user))

    def to_text(self) -> str:
        """L lines with K space-separated user indices (row = cell)."""
        return "\n".join(" ".join(str(u) for u in row)
                         for row in self.pilot_to_user) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PilotAssignment":
        rows = [line.split() for line in text.strip().splitlines() if line.strip()]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("malformed assignment text: ragged or empty matrix")
        try:
            mat = np.array([[int(v) for v in row] for row in rows])
        except ValueError as exc:
            raise ValueError(f"malformed assignment text: {exc}") from exc
        return cls(mat)


@dataclass
class SwapAction:
    """Exchange the users on two pilots within one cell."""

    cell: int
    pilot_a: int
    pilot_b: int

    @property
    def no_op(self) -> bool:
        return self.pilot_a == self.pilot_b


def random_assignment(L: int, K: int, rng: np.random.Generator) -> PilotAssignment:
    """Independent uniform pilot permutation in every cell."""
    return PilotAssignment(np.stack([rng.permutation(K) for _ in range(L)]))


def apply_swap(assignment: PilotAssignment, action: SwapAction) -> PilotAssignment:
    """New assignment with the action applied; the input is left untouched."""
    out = assignment.pilot_to_user.copy()
    l, a, b = action.cell, action.pilot_a, action.pilot_b
    out[l, a], out[l, b] = out[l, b], out[l, a]
    return PilotAssignment(out)


def exhaustive_search(
    bundle: ScenarioBundle,
    pairwise: np.ndarray | None = None,
    budget: int = 10**8,
    allow_long_run: bool = False,
    block: int = 20000,
) -> tuple[PilotAssignment, CostTable]:
    """Minimize the worst-user cost over all distinct assignments.

    Relabeling every cell's pilots by one common permutation leaves co-pilot
    partnerships unchanged, so cell 0 is pinned to the identity and the
    remaining (K!)^(L-1) candidates are enumerated. Ties go to the first
    candidate in enumeration order, i.e. the lexicographically smallest
    assignment. Candidate counts above the budget raise BudgetError unless
    allow_long_run is set.
    """
    L, K = bundle.drop.shape
    n_candidates = math.factorial(K) ** (L - 1)
    if n_candidates > budget and not allow_long_run:
        raise BudgetError(
            f"exhaustive search needs {n_candidates} evaluations, over the "
            f"budget of {budget}; pass allow_long_run (CLI: --long-run) to "
            "proceed, or use the random-assignment baseline for a cheap bound"
        )
    C = pairwise if pairwise is not None else pairwise_cost_matrix(bundle)
    perms = np.array(list(itertools.permutations(range(K))), dtype=int)
    n_perms = len(perms)
    ks = np.arange(K)

    best_val = np.inf
    best_choice = None
    buf = np.empty((block, L), dtype=int)
    count = 0
    offset = 0

    def flush(n):
        nonlocal best_val, best_choice
        if n == 0:
            return
        rows = perms[buf[:n]]                      # (n, L, K) pilot -> user
        worst = np.zeros(n)
        for j in range(L):
            cost_j = np.zeros((n, K))
            uj = rows[:, j, :]                     # (n, K)
            for l in range(L):
                if l == j:
                    continue
                # C[j, uj[k], l, ul[k]] for every candidate and pilot k
                cost_j += C[j][uj, l, rows[:, l, :]]
            worst = np.maximum(worst, cost_j.max(axis=1))
        idx = int(np.argmin(worst))
        if worst[idx] < best_val:
            best_val = float(worst[idx])
            best_choice = buf[idx].copy()

    for combo in itertools.product(range(n_perms), repeat=L - 1):
        buf[count, 0] = 0
        buf[count, 1:] = combo
        count += 1
        if count == block:
            flush(count)
            offset += count
            count = 0
    flush(count)

    best = PilotAssignment(perms[best_choice])
    return best, total_costs(bundle, best.pilot_to_user, pairwise=C)


@dataclass
class ExtendedAssignment:
    """Pilot map allowed to use more than K pilot ids (for reuse splitting)."""

    user_to_pilot: np.ndarray  # (L, K) int, ids in [0, n_pilots)
    n_pilots: int
    edge_mask: np.ndarray      # (L, K) bool, True for cluster-edge users


@dataclass
class OverheadReport:
    """Pilot budget of a reuse-split scheme versus the K-pilot baseline.

    Two counting conventions are reported: extra_pct counts the additional
    pilots as a percentage of the baseline ((required-K)/K); total_pct
    expresses the whole requirement as a percentage of the baseline
    (required/K). A requirement of 10 pilots against a baseline of 4 is
    150% extra, i.e. 250% of the baseline.
    """

    base_pilots: int
    required_pilots: int
    edge_per_cell: int
    central_per_cell: int

    @property
    def extra_pct(self) -> float:
        return 100.0 * (self.required_pilots - self.base_pilots) / self.base_pilots

    @property
    def total_pct(self) -> float:
        return 100.0 * self.required_pilots / self.base_pilots

    def __str__(self):
        return (
            f"pilot overhead: {self.required_pilots} pilots required vs "
            f"{self.base_pilots} baseline ({self.central_per_cell} shared central + "
            f"{self.required_pilots - self.central_per_cell} dedicated edge); "
            f"{self.extra_pct:.0f}% extra pilots, "
            f"i.e. {self.total_pct:.0f}% of the baseline count"
        )


def spr_like_assignment(
    bundle: ScenarioBundle,
    edge_ratio: float = 1.0 / 3.0,
) -> tuple[ExtendedAssignment, OverheadReport]:
    """Reuse split: edge users get cluster-wide dedicated pilots.

    In each cell the users farthest from their BS are marked as edge users
    so that edge:central matches edge_ratio. Central users reuse one shared
    pilot block across cells; every edge user receives its own orthogonal
    pilot, eliminating its contamination at the price of a longer pilot
    block.
    """
    if edge_ratio < 0:
        raise ValueError("edge_ratio must be non-negative")
    L, K = bundle.drop.shape
    frac = edge_ratio / (1.0 + edge_ratio)
    n_edge = min(K, int(round(K * frac)))
    n_central = K - n_edge

    dist = np.zeros((L, K))
    for l in range(L):
        bs = bundle.layout.bs_positions[l]
        dist[l] = np.hypot(*(bundle.drop.positions[l] - bs).T)

    user_to_pilot = np.zeros((L, K), dtype=int)
    edge_mask = np.zeros((L, K), dtype=bool)
    next_edge_pilot = n_central
    for l in range(L):
        order = np.argsort(dist[l], kind="stable")      # near -> far
        central, edge = order[:n_central], order[n_central:]
        for p, user in enumerate(central):
            user_to_pilot[l, user] = p
        for user in edge:
            user_to_pilot[l, user] = next_edge_pilot
            edge_mask[l, user] = True
            next_edge_pilot += 1

    required = n_central + L * n_edge
    report = OverheadReport(
        base_pilots=K,
        required_pilots=required,
        edge_per_cell=n_edge,
        central_per_cell=n_central,
    )
    ext = ExtendedAssignment(user_to_pilot=user_to_pilot,
                             n_pilots=required, edge_mask=edge_mask)
    return ext, report


def assignment_cost(
    bundle: ScenarioBundle,
    ext: ExtendedAssignment,
    pairwise: np.ndarray | None = None,
) -> float:
    """Worst-user envelope cost of an extended assignment."""
    _, worst = extended_user_costs(bundle, ext.user_to_pilot, pairwise=pairwise)
    return worst
