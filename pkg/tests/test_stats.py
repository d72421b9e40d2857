import math

import numpy as np
import pytest
import scipy.integrate
import scipy.stats

from uigaze.errors import GroupTooSmall, ZeroExpected, ZeroVariancePooled
from uigaze.stats import (
    bartlett,
    chi2_sf,
    chi_square_gof,
    holm_bonferroni,
    kruskal_wallis,
    phi_effect_size,
)


def chi2_sf_quadrature(x, df):
    """Independent oracle: integrate the chi-square density directly."""

    def density(t):
        return t ** (df / 2 - 1) * math.exp(-t / 2) / (2 ** (df / 2) * math.gamma(df / 2))

    tail, _ = scipy.integrate.quad(density, x, np.inf, limit=400)
    return tail


class TestChiSquareTail:
    @pytest.mark.parametrize("df", range(1, 11))
    def test_matches_density_integration(self, df):
        for stat in [0.5, 1.0, 2.5, 5.0, 10.0, 25.0, 50.0]:
            assert chi2_sf(stat, df) == pytest.approx(
                chi2_sf_quadrature(stat, df), abs=1e-6
            )

    def test_matches_scipy(self):
        for df in (1, 3, 7, 20):
            for stat in (0.0, 0.3, 4.2, 33.0, 120.0):
                assert chi2_sf(stat, df) == pytest.approx(
                    scipy.stats.chi2.sf(stat, df), rel=1e-10, abs=1e-300
                )

    def test_boundaries(self):
        assert chi2_sf(0.0, 3) == 1.0
        assert chi2_sf(math.inf, 3) == 0.0


class TestChiSquareGof:
    def test_observed_equal_expected(self):
        result = chi_square_gof([10, 10, 10, 10])
        assert result.statistic == 0.0
        assert result.p_value == 1.0
        assert result.df == 3

    @pytest.mark.parametrize(
        "n,chi2,phi3",
        [(109.93, 90.630, 0.908), (269.03, 184.498, 0.828), (588.84, 182.134, 0.556)],
    )
    def test_phi_reference_values(self, n, chi2, phi3):
        assert round(phi_effect_size(chi2, n), 3) == phi3

    def test_scaling_property(self):
        # chi2 scales by c, phi is invariant
        observed = [12.0, 30.0, 7.0, 1.0]
        base = chi_square_gof(observed)
        for c in (0.5, 2.0, 17.0):
            scaled = chi_square_gof([c * v for v in observed])
            assert scaled.statistic == pytest.approx(c * base.statistic, rel=1e-12)
            assert scaled.effect_size == pytest.approx(base.effect_size, rel=1e-12)

    def test_non_integer_counts_accepted(self):
        result = chi_square_gof([109.93 / 2, 109.93 / 2])
        assert result.statistic == 0.0

    def test_zero_expected(self):
        with pytest.raises(ZeroExpected):
            chi_square_gof([0.0, 0.0])
        with pytest.raises(ZeroExpected):
            chi_square_gof([1.0, 2.0], expected=[0.0, 3.0])

    def test_supplied_expected(self):
        result = chi_square_gof([8, 12], expected=[10, 10])
        assert result.statistic == pytest.approx(0.4 + 0.4)


class TestBartlett:
    def test_identical_groups(self):
        g = [1.0, 2.0, 3.0, 4.0]
        result = bartlett([g, g, g])
        assert result.statistic == pytest.approx(0.0, abs=1e-12)
        assert result.p_value == pytest.approx(1.0)
        assert result.df == 2

    def test_hand_formula_three_groups(self):
        groups = [
            [9.2, 8.4, 10.1, 9.9, 11.0],
            [7.1, 7.9, 8.3, 9.0],
            [12.5, 11.1, 13.0, 12.2, 11.8, 12.9],
        ]
        # oracle: Bartlett's formula written out longhand
        sizes = [len(g) for g in groups]
        n_tot = sum(sizes)
        k = len(groups)
        variances = [np.var(g, ddof=1) for g in groups]
        pooled = sum((n - 1) * v for n, v in zip(sizes, variances)) / (n_tot - k)
        numer = (n_tot - k) * math.log(pooled) - sum(
            (n - 1) * math.log(v) for n, v in zip(sizes, variances)
        )
        corr = 1 + (sum(1 / (n - 1) for n in sizes) - 1 / (n_tot - k)) / (3 * (k - 1))
        expected = numer / corr
        result = bartlett(groups)
        assert result.statistic == pytest.approx(expected, rel=1e-12)
        scipy_stat, scipy_p = scipy.stats.bartlett(*groups)
        assert result.statistic == pytest.approx(scipy_stat, rel=1e-10)
        assert result.p_value == pytest.approx(scipy_p, rel=1e-8)

    def test_equal_variance_monte_carlo(self):
        # seeded null draws: the statistic should stay below the 1% critical
        # value (6.63 for df = 1) in at least 98% of runs
        below = 0
        runs = 200
        for seed in range(runs):
            a = np.random.RandomState(seed).normal(0.0, 1.0, size=1000)
            b = np.random.RandomState(seed + 50_000).normal(5.0, 1.0, size=1000)
            if bartlett([a, b]).statistic < 6.63:
                below += 1
        assert below >= 0.98 * runs

    def test_group_too_small(self):
        with pytest.raises(GroupTooSmall):
            bartlett([[1.0, 2.0]])
        with pytest.raises(GroupTooSmall):
            bartlett([[1.0, 2.0], [3.0]])

    def test_zero_variance_pooled(self):
        with pytest.raises(ZeroVariancePooled):
            bartlett([[1.0, 1.0], [2.0, 2.0]])

    def test_single_degenerate_group_gives_infinite_statistic(self):
        result = bartlett([[1.0, 1.0], [1.0, 2.0, 3.0]])
        assert math.isinf(result.statistic)
        assert result.p_value == 0.0


class TestKruskalWallis:
    def test_two_group_hand_ranking(self):
        # ranks 1..4, rank sums 3 and 7:
        # H = 12/(4*5) * (9/2 + 49/2) - 3*5 = 2.4
        result = kruskal_wallis([[1.0, 2.0], [3.0, 4.0]])
        assert result.statistic == pytest.approx(2.4, rel=1e-12)
        assert result.df == 1

    def test_matches_scipy_with_ties(self):
        groups = [[1.0, 2.0, 2.0, 5.0], [2.0, 3.0, 4.0], [0.5, 2.0, 6.0, 6.0]]
        result = kruskal_wallis(groups)
        scipy_stat, scipy_p = scipy.stats.kruskal(*groups)
        assert result.statistic == pytest.approx(scipy_stat, rel=1e-12)
        assert result.p_value == pytest.approx(scipy_p, rel=1e-8)

    def test_interleaved_identical_distributions(self):
        groups = [[1, 5, 9, 13, 17, 21], [2, 6, 10, 14, 18, 22], [3, 7, 11, 15, 19, 23]]
        result = kruskal_wallis(groups)
        assert result.statistic < 1.0
        assert result.p_value > 0.05

    def test_chi_square_p_close_to_permutation_p(self):
        rng = np.random.RandomState(11)
        a = list(rng.normal(size=12))
        b = list(rng.normal(size=12))
        observed = kruskal_wallis([a, b]).statistic
        pooled = np.array(a + b)
        exceed = 0
        n_perm = 2000
        for _ in range(n_perm):
            rng.shuffle(pooled)
            h = kruskal_wallis([pooled[:12], pooled[12:]]).statistic
            if h >= observed:
                exceed += 1
        perm_p = exceed / n_perm
        assert kruskal_wallis([a, b]).p_value == pytest.approx(perm_p, abs=0.05)

    def test_single_group_rejected(self):
        with pytest.raises(GroupTooSmall):
            kruskal_wallis([[1.0, 2.0]])

    def test_all_identical_rejected(self):
        with pytest.raises(ValueError):
            kruskal_wallis([[2.0, 2.0], [2.0, 2.0]])


class TestHolmBonferroni:
    def test_two_values(self):
        assert holm_bonferroni([0.01, 0.04]) == [0.02, 0.04]

    def test_single_value_unchanged(self):
        assert holm_bonferroni([0.3]) == [0.3]

    def test_all_ones(self):
        assert holm_bonferroni([1.0, 1.0, 1.0]) == [1.0, 1.0, 1.0]

    def test_original_order_preserved(self):
        raw = [0.04, 0.01]
        assert holm_bonferroni(raw) == [0.04, 0.02]

    def test_bounds_and_dominance(self):
        rng = np.random.RandomState(3)
        for _ in range(50):
            raw = list(rng.uniform(size=rng.randint(1, 12)))
            adj = holm_bonferroni(raw)
            assert all(0.0 <= a <= 1.0 for a in adj)
            assert all(a >= r for a, r in zip(adj, raw))
            # monotone non-decreasing when sorted by raw p
            order = sorted(range(len(raw)), key=lambda i: raw[i])
            sorted_adj = [adj[i] for i in order]
            assert all(x <= y for x, y in zip(sorted_adj, sorted_adj[1:]))
