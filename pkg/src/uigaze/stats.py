"""Statistical tests backing the bias analyses.

Chi-square goodness of fit (with phi effect size), Bartlett's test of
homogeneity of variances, Kruskal-Wallis, and Holm-Bonferroni p-value
adjustment. Chi-square tail probabilities are evaluated from the
regularized upper incomplete gamma function (series / continued fraction)
rather than an external library, so non-integer "counts" such as per-user
averages go through the formulas untouched.
"""

from __future__ import annotations

import math

import numpy as np

from .core import StatTestResult
from .errors import GroupTooSmall, ZeroExpected, ZeroVariancePooled

_GAMMA_EPS = 1e-15
_GAMMA_ITMAX = 500
_TINY = 1e-300


def _gamma_series(a: float, x: float) -> float:
    """Lower regularized incomplete gamma P(a, x) by power series (x < a + 1)."""
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_GAMMA_ITMAX):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x) by modified Lentz continued
    fraction (x >= a + 1)."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_ITMAX + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammq(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _gamma_series(a, x)))
    return min(1.0, max(0.0, _gamma_cf(a, x)))


def chi2_sf(statistic: float, df: int) -> float:
    """Upper-tail probability of the chi-square distribution."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if statistic < 0:
        raise ValueError("statistic must be non-negative")
    return gammq(df / 2.0, statistic / 2.0)


def phi_effect_size(statistic: float, n: float) -> float:
    """Phi = sqrt(chi2 / N). N may be a non-integer aggregate count."""
    if n <= 0:
        raise ValueError("N must be positive")
    return math.sqrt(statistic / n)


def chi_square_gof(observed, expected=None) -> StatTestResult:
    """Chi-square goodness of fit over k >= 2 categories.

    With expected omitted, equal proportions are assumed. Counts may be
    non-integer (e.g. averages per user). Effect size is phi.
    """
    obs = [float(v) for v in observed]
    if len(obs) < 2:
        raise GroupTooSmall("need at least two categories")
    if any(v < 0 for v in obs):
        raise ValueError("observed counts must be non-negative")
    n = sum(obs)
    if expected is None:
        if n <= 0:
            raise ZeroExpected("all observed counts are zero")
        exp = [n / len(obs)] * len(obs)
    else:
        exp = [float(v) for v in expected]
        if len(exp) != len(obs):
            raise ValueError("observed and expected lengths differ")
        if any(v <= 0 for v in exp):
            raise ZeroExpected("expected counts must be positive")
    statistic = sum((o - e) ** 2 / e for o, e in zip(obs, exp))
    df = len(obs) - 1
    return StatTestResult(
        statistic=statistic,
        df=df,
        p_value=chi2_sf(statistic, df),
        effect_size=phi_effect_size(statistic, n) if n > 0 else None,
    )


def bartlett(groups) -> StatTestResult:
    """Bartlett's test of homogeneity of variances across k >= 2 groups.

    Any group with fewer than two samples raises GroupTooSmall; a pooled
    variance of zero raises ZeroVariancePooled. A single zero-variance
    group among others yields an infinite statistic (p = 0).
    """
    samples = [np.asarray(g, dtype=np.float64) for g in groups]
    k = len(samples)
    if k < 2:
        raise GroupTooSmall("need at least two groups")
    sizes = [len(s) for s in samples]
    if any(n < 2 for n in sizes):
        raise GroupTooSmall("each group needs at least two samples")
    n_total = sum(sizes)
    variances = [float(s.var(ddof=1)) for s in samples]
    pooled = sum((n - 1) * v for n, v in zip(sizes, variances)) / (n_total - k)
    if pooled == 0.0:
        raise ZeroVariancePooled("pooled variance is zero")
    df = k - 1
    if any(v == 0.0 for v in variances):
        return StatTestResult(statistic=math.inf, df=df, p_value=0.0)
    numer = (n_total - k) * math.log(pooled) - sum(
        (n - 1) * math.log(v) for n, v in zip(sizes, variances)
    )
    correction = 1.0 + (
        sum(1.0 / (n - 1) for n in sizes) - 1.0 / (n_total - k)
    ) / (3.0 * (k - 1))
    statistic = max(0.0, numer / correction)
    return StatTestResult(statistic=statistic, df=df, p_value=chi2_sf(statistic, df))


def _rank_with_ties(values: np.ndarray) -> tuple[np.ndarray, float]:
    """Average ranks (1-based) and the tie-correction term sum(t^3 - t)."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=np.float64)
    tie_term = 0.0
    i = 0
    sorted_vals = values[order]
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        avg_rank = (i + j) / 2.0 + 1.0
        ranks[order[i : j + 1]] = avg_rank
        t = j - i + 1
        if t > 1:
            tie_term += t**3 - t
        i = j + 1
    return ranks, tie_term


def kruskal_wallis(groups) -> StatTestResult:
    """Kruskal-Wallis rank-based H test with tie correction."""
    samples = [np.asarray(g, dtype=np.float64) for g in groups]
    k = len(samples)
    if k < 2:
        raise GroupTooSmall("need at least two groups")
    if any(len(s) == 0 for s in samples):
        raise GroupTooSmall("every group needs at least one sample")
    pooled = np.concatenate(samples)
    n = len(pooled)
    ranks, tie_term = _rank_with_ties(pooled)
    if tie_term == n**3 - n:
        raise ValueError("all values are identical; H is undefined")
    h = 0.0
    start = 0
    for s in samples:
        r_sum = float(ranks[start : start + len(s)].sum())
        h += r_sum**2 / len(s)
        start += len(s)
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    h /= 1.0 - tie_term / (n**3 - n)
    h = max(0.0, h)
    df = k - 1
    return StatTestResult(statistic=h, df=df, p_value=chi2_sf(h, df))


def holm_bonferroni(p_values) -> list[float]:
    """Holm-Bonferroni step-down adjustment, returned in the input order."""
    p = [float(v) for v in p_values]
    if any(not (0.0 <= v <= 1.0) for v in p):
        raise ValueError("p-values must lie in [0, 1]")
    m = len(p)
    order = sorted(range(m), key=lambda i: p[i])
    adjusted = [0.0] * m
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, min(1.0, (m - rank) * p[idx]))
        adjusted[idx] = running
    return adjusted
