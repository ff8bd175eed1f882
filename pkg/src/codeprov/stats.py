"""Mann-Whitney U test with automatic exact enumeration for small groups.

The statistic reported is U for the first group, computed with midranks, so
U equals the number of (a, b) pairs with a > b plus half the tied pairs.
For pooled sizes up to the exact cutoff the two-sided p-value is obtained by
enumerating every assignment of the pooled ranks; larger samples use the
normal approximation with tie correction and continuity correction.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .records import DataError
from .validation import check_non_empty

EXACT_CUTOFF = 12  # pooled size at or below which enumeration is used


@dataclass(frozen=True)
class RankTestResult:
    u_statistic: float
    p_value: float
    alpha: float
    median_a: float
    median_b: float
    mean_a: float
    mean_b: float
    reject_null: bool
    method: str  # "exact" or "normal_approx"
    n_a: int
    n_b: int


def _doubled_midranks(values: Sequence[float]) -> list[int]:
    """Ranks times two, so midranks of tied runs stay integral."""
    n = len(values)
    order = sorted(range(n), key=lambda k: values[k])
    ranks2 = [0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        doubled = (i + 1) + (j + 1)  # first and last 1-based rank of the tie run
        for k in range(i, j + 1):
            ranks2[order[k]] = doubled
        i = j + 1
    return ranks2


def _tie_sizes(values: Sequence[float]) -> list[int]:
    sizes: list[int] = []
    for value in sorted(set(values)):
        count = sum(1 for v in values if v == value)
        if count > 1:
            sizes.append(count)
    return sizes


def exact_two_sided_p(pooled_ranks2: Sequence[int], n_a: int, u2_observed: int) -> Fraction:
    """P(|U - mu| >= |U_obs - mu|) by enumerating all rank assignments."""
    n = len(pooled_ranks2)
    n_b = n - n_a
    mu2 = n_a * n_b
    deviation = abs(u2_observed - mu2)
    offset = n_a * (n_a + 1)
    hits = 0
    total = 0
    for combo in combinations(range(n), n_a):
        u2 = sum(pooled_ranks2[i] for i in combo) - offset
        if abs(u2 - mu2) >= deviation:
            hits += 1
        total += 1
    return Fraction(hits, total)


def normal_approx_two_sided_p(
    u: float, n_a: int, n_b: int, tie_sizes: Sequence[int]
) -> float:
    """Tie-corrected normal approximation with continuity correction."""
    n = n_a + n_b
    mu = n_a * n_b / 2.0
    tie_term = sum(t**3 - t for t in tie_sizes)
    variance = n_a * n_b / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if variance <= 0:
        return 1.0  # all pooled values identical
    z = max(0.0, abs(u - mu) - 0.5) / math.sqrt(variance)
    return min(1.0, math.erfc(z / math.sqrt(2.0)))


def mann_whitney_u(
    group_a: Sequence[float],
    group_b: Sequence[float],
    alpha: float = 0.05,
    exact_cutoff: int = EXACT_CUTOFF,
) -> RankTestResult:
    """Two-sided Mann-Whitney U test comparing two value distributions."""
    a = [float(v) for v in check_non_empty("group_a", group_a)]
    b = [float(v) for v in check_non_empty("group_b", group_b)]
    if not 0 < alpha < 1:
        raise DataError(f"alpha must be in (0, 1), got {alpha}")

    pooled = a + b
    n_a, n_b = len(a), len(b)
    ranks2 = _doubled_midranks(pooled)
    rank2_sum_a = sum(ranks2[:n_a])
    u2 = rank2_sum_a - n_a * (n_a + 1)
    u = u2 / 2.0

    if n_a + n_b <= exact_cutoff:
        p_value = float(exact_two_sided_p(ranks2, n_a, u2))
        method = "exact"
    else:
        p_value = normal_approx_two_sided_p(u, n_a, n_b, _tie_sizes(pooled))
        method = "normal_approx"

    return RankTestResult(
        u_statistic=u,
        p_value=p_value,
        alpha=alpha,
        median_a=float(statistics.median(a)),
        median_b=float(statistics.median(b)),
        mean_a=float(statistics.fmean(a)),
        mean_b=float(statistics.fmean(b)),
        reject_null=p_value < alpha,
        method=method,
        n_a=n_a,
        n_b=n_b,
    )
