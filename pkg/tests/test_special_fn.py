"""Checks for the scalar special functions against slow series oracles."""

import math

import numpy as np
from scipy import special as sp

from dqs.special_fn import bessel_i0, bessel_j0, laguerre, log_factorial


def laguerre_series(n, k, x):
    # explicit finite sum, binomial form
    total = 0.0
    for m in range(n + 1):
        total += (-1) ** m * math.comb(n + k, n - m) * x**m / math.factorial(m)
    return total


def test_laguerre_small_orders():
    xs = np.linspace(0.0, 8.0, 17)
    for n in range(6):
        for k in range(4):
            for x in xs:
                ref = laguerre_series(n, k, x)
                assert abs(laguerre(n, k, x) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_laguerre_matches_scipy():
    rng = np.random.default_rng(11)
    for _ in range(60):
        n = int(rng.integers(0, 25))
        k = int(rng.integers(0, 6))
        x = float(rng.uniform(0.0, 20.0))
        ref = sp.eval_genlaguerre(n, k, x)
        assert abs(laguerre(n, k, x) - ref) <= 1e-9 * max(1.0, abs(ref))


def test_laguerre_recurrence():
    """(n+1) L_{n+1} = (2n+k+1-x) L_n - (n+k) L_{n-1}."""
    rng = np.random.default_rng(3)
    for _ in range(40):
        n = int(rng.integers(1, 18))
        k = int(rng.integers(0, 5))
        x = float(rng.uniform(0.0, 12.0))
        lhs = (n + 1) * laguerre(n + 1, k, x)
        rhs = (2 * n + k + 1 - x) * laguerre(n, k, x) - (n + k) * laguerre(n - 1, k, x)
        assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


def test_bessel_j0_series():
    # 60-term alternating series, fine for |x| <= 12
    def series(x):
        total, term = 1.0, 1.0
        for m in range(1, 60):
            term *= -(x * x / 4.0) / (m * m)
            total += term
        return total

    for x in np.linspace(0.0, 12.0, 40):
        assert abs(bessel_j0(x) - series(x)) < 1e-12


def test_bessel_i0_series_and_large_argument():
    def series(x):
        total, term = 1.0, 1.0
        for m in range(1, 80):
            term *= (x * x / 4.0) / (m * m)
            total += term
        return total

    for x in np.linspace(0.0, 14.0, 29):
        assert abs(bessel_i0(x) - series(x)) <= 1e-13 * series(x)
    # asymptotic branch against scipy (scaled to avoid overflow comparisons)
    for x in (20.0, 50.0, 120.0, 600.0):
        ref = sp.i0e(x) * math.exp(x)
        assert abs(bessel_i0(x) - ref) <= 1e-10 * ref


def test_bessel_i0_even():
    for x in (0.3, 2.5, 9.0):
        assert bessel_i0(-x) == bessel_i0(x)


def test_log_factorial_exact_small():
    for n in range(21):
        assert log_factorial(n) == math.log(math.factorial(n)) or abs(
            log_factorial(n) - math.log(math.factorial(n))
        ) < 1e-13


def test_log_factorial_stirling_tail():
    # Stirling with the 1/(12n) correction is good to ~1e-4 relative at n>=30
    for n in (30, 100, 400, 1000):
        stirling = n * math.log(n) - n + 0.5 * math.log(2 * math.pi * n) + 1.0 / (12 * n)
        assert abs(log_factorial(n) - stirling) < 1e-6
