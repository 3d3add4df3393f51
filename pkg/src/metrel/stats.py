"""Kendall's tau-b with ties, its significance, the 2x2 chi-squared test and
robust summaries."""

from __future__ import annotations

import itertools
import math
import statistics
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateRankingError, DegenerateTableError, InsufficientDataError

NORMAL_REGIME = 30  # n at and above which the normal approximation is used
EXACT_LIMIT = 8  # n at and below which every permutation is enumerated
PERMUTATIONS = 10_000
PERMUTATION_SEED = 0x6B656E64616C6C  # fixed so p-values are reproducible


@dataclass(frozen=True)
class TauResult:
    tau_b: float
    n: int
    n_c: int
    n_d: int
    tie_correction_x: int
    tie_correction_y: int
    p_value: float | None

    @property
    def concordance_probability(self) -> float:
        return concordance_probability(self.tau_b)


def concordance_probability(tau: float) -> float:
    """Chance that a random pair is ordered alike by both rankers."""
    return (1 + tau) / 2


def _dense_ranks(values: Sequence) -> np.ndarray:
    _, inverse = np.unique(np.asarray(values), return_inverse=True)
    return inverse.reshape(-1).astype(np.int64)


def _tie_pairs(ranks: np.ndarray) -> tuple[int, np.ndarray]:
    counts = np.bincount(ranks)
    counts = counts[counts > 1]
    return int((counts * (counts - 1) // 2).sum()), counts


def _count_inversions(seq: list[int], size: int) -> int:
    """Pairs i < j with seq[i] > seq[j], via a Fenwick tree."""
    tree = [0] * (size + 1)
    inversions = 0
    seen = 0
    for value in seq:
        # number of earlier elements <= value
        i = value + 1
        le = 0
        while i > 0:
            le += tree[i]
            i -= i & -i
        inversions += seen - le
        i = value + 1
        while i <= size:
            tree[i] += 1
            i += i & -i
        seen += 1
    return inversions


def _concordance_counts(rx: np.ndarray, ry: np.ndarray) -> tuple[int, int]:
    """(n_c, n_d) in O(n log n): sort by (x, y) and count inversions of y,
    discounting pairs tied in x."""
    order = np.lexsort((ry, rx))
    xs, ys = rx[order], ry[order]
    n = len(xs)
    n0 = n * (n - 1) // 2
    t_x, _ = _tie_pairs(rx)
    t_y, _ = _tie_pairs(ry)
    joint = xs * (int(ry.max()) + 1) + ys
    t_xy, _ = _tie_pairs(_dense_ranks(joint))
    n_d = _count_inversions(ys.tolist(), int(ry.max()) + 1)
    # inversions never occur inside an x tie group because those are sorted by y
    n_c = n0 - t_x - t_y + t_xy - n_d
    return n_c, n_d


def _normal_p_value(s: int, n: int, tx: np.ndarray, ty: np.ndarray) -> float:
    v0 = n * (n - 1) * (2 * n + 5)
    vt = float((tx * (tx - 1) * (2 * tx + 5)).sum())
    vu = float((ty * (ty - 1) * (2 * ty + 5)).sum())
    v1 = float((tx * (tx - 1)).sum()) * float((ty * (ty - 1)).sum()) / (2 * n * (n - 1))
    v2 = float((tx * (tx - 1) * (tx - 2)).sum()) * float((ty * (ty - 1) * (ty - 2)).sum()) / (9 * n * (n - 1) * (n - 2))
    var = (v0 - vt - vu) / 18 + v1 + v2
    z = abs(s) / math.sqrt(var)
    return math.erfc(z / math.sqrt(2))


def _sign_matrix(r: np.ndarray) -> np.ndarray:
    return np.sign(r[:, None] - r[None, :]).astype(np.int8)


def _permutation_p_value(rx: np.ndarray, ry: np.ndarray, s: int, seed: int) -> float:
    """Two-sided: share of permutations of y whose |n_c - n_d| reaches |s|."""
    n = len(rx)
    sx = np.triu(_sign_matrix(rx), 1).astype(np.int32)
    sy = _sign_matrix(ry).astype(np.int32)
    target = abs(s)
    if n <= EXACT_LIMIT:
        perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
        exact = True
    else:
        rng = np.random.default_rng(seed)
        perms = np.argsort(rng.random((PERMUTATIONS, n)), axis=1)
        exact = False
    hits = 0
    for chunk in np.array_split(perms, max(1, len(perms) // 2000)):
        permuted = sy[chunk[:, :, None], chunk[:, None, :]]
        stats_ = np.abs((permuted * sx).sum(axis=(1, 2)))
        hits += int((stats_ >= target).sum())
    if exact:
        return hits / len(perms)
    return (hits + 1) / (len(perms) + 1)


def kendall_tau_b(x: Sequence, y: Sequence, *, p_value: bool = True, seed: int = PERMUTATION_SEED) -> TauResult:
    """Kendall's tau-b of two paired rankings.

    Pairs tied in either ranking count as neither concordant nor discordant.
    With ``p_value`` the two-sided significance is attached: a normal
    approximation with tie-corrected variance for n >= 30, otherwise an exact
    (n <= 8) or seeded Monte Carlo permutation test.
    """
    n = len(x)
    if n != len(y):
        raise ValueError(f"rankings differ in length: {n} vs {len(y)}")
    if n < 2:
        raise InsufficientDataError(f"tau-b needs at least 2 paired values, got {n}")
    rx, ry = _dense_ranks(x), _dense_ranks(y)
    n0 = n * (n - 1) // 2
    t_x, groups_x = _tie_pairs(rx)
    t_y, groups_y = _tie_pairs(ry)
    if t_x == n0 or t_y == n0:
        raise DegenerateRankingError("every element is tied under one of the rankings")
    n_c, n_d = _concordance_counts(rx, ry)
    tau = (n_c - n_d) / math.sqrt((n0 - t_x) * (n0 - t_y))
    tau = max(-1.0, min(1.0, tau))
    p = None
    if p_value:
        s = n_c - n_d
        if n >= NORMAL_REGIME:
            p = _normal_p_value(s, n, groups_x, groups_y)
        else:
            p = _permutation_p_value(rx, ry, s, seed)
        p = min(1.0, p)
    return TauResult(tau, n, n_c, n_d, t_x, t_y, p)


@dataclass(frozen=True)
class ChiSquared:
    statistic: float
    p_value: float


def chi_squared_prevalence(before: tuple[int, int], added: tuple[int, int]) -> ChiSquared:
    """Pearson chi-squared (1 dof, no continuity correction) on the 2x2 table
    of marked/unmarked counts in two populations."""
    (a, n1), (b, n2) = before, added
    for hits, total in (before, added):
        if total <= 0:
            raise ValueError("population totals must be positive")
        if not 0 <= hits <= total:
            raise ValueError(f"hits {hits} outside [0, {total}]")
    total = n1 + n2
    marked = a + b
    if marked == 0 or marked == total:
        raise DegenerateTableError("a column of the contingency table is empty (zero expected count)")
    # N (ad - bc)^2 / (row and column margins), computed in integers
    num = total * (a * (n2 - b) - (n1 - a) * b) ** 2
    den = n1 * n2 * marked * (total - marked)
    stat = num / den
    return ChiSquared(stat, math.erfc(math.sqrt(stat / 2)))


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    std: float
    median: float
    mad: float
    min: float
    max: float
    count: int


def summarize(values: Sequence[float]) -> SummaryStats:
    """Mean with population standard deviation, median with median
    absolute deviation, and the range."""
    vals = [float(v) for v in values]
    if not vals:
        raise InsufficientDataError("cannot summarise an empty sample")
    med = statistics.median(vals)
    return SummaryStats(
        mean=statistics.fmean(vals),
        std=statistics.pstdev(vals),
        median=med,
        mad=statistics.median(abs(v - med) for v in vals),
        min=min(vals),
        max=max(vals),
        count=len(vals),
    )
