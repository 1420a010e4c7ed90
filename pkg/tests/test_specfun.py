import math

import numpy as np
import pytest

from stefankan.errors import DomainError
from stefankan.specfun import erf, erfc, exp_integral_e1

EULER_GAMMA = 0.5772156649015328606


def erf_series(x, terms=60):
    """Maclaurin-series oracle: erf(x) = 2/sqrt(pi) sum (-1)^n x^(2n+1)/(n!(2n+1)).

    Terms are summed with math.fsum to keep the alternating sum exact.
    """
    parts = []
    fact = 1.0
    for n in range(terms):
        if n > 0:
            fact *= n
        parts.append(((-1.0) ** n) * x ** (2 * n + 1) / (fact * (2 * n + 1)))
    return 2.0 / math.sqrt(math.pi) * math.fsum(parts)


def adaptive_simpson(f, a, b, tol):
    """Plain recursive adaptive Simpson quadrature (independent oracle)."""

    def simpson(x0, x2):
        x1 = 0.5 * (x0 + x2)
        return (x2 - x0) / 6.0 * (f(x0) + 4.0 * f(x1) + f(x2)), x1

    def recurse(x0, x2, whole, tol, depth):
        s_left, x1 = simpson(x0, 0.5 * (x0 + x2))
        s_right, _ = simpson(0.5 * (x0 + x2), x2)
        s_l, _ = simpson(x0, 0.5 * (x0 + x2))
        s2 = s_left + s_right
        if depth <= 0 or abs(s2 - whole) < 15.0 * tol:
            return s2 + (s2 - whole) / 15.0
        mid = 0.5 * (x0 + x2)
        return recurse(x0, mid, s_left, tol / 2, depth - 1) + recurse(
            mid, x2, s_right, tol / 2, depth - 1
        )

    whole, _ = simpson(a, b)
    return recurse(a, b, whole, tol, 40)


def test_erf_erfc_basics():
    assert erf(0.0) == 0.0
    assert erfc(0.0) == 1.0


def test_erf_odd_symmetry():
    rng = np.random.default_rng(0)
    for x in rng.uniform(-4, 4, size=100):
        assert abs(erf(-x) + erf(x)) < 1e-15


def test_erf_against_series_oracle():
    for x in [0.25, 0.5, 1.0, 1.5, 2.0]:
        assert erf(x) == pytest.approx(erf_series(x), abs=1e-12)


def test_erf_erfc_complement():
    rng = np.random.default_rng(1)
    for x in rng.uniform(-6, 6, size=200):
        assert abs(erf(x) + erfc(x) - 1.0) < 1e-15


def test_erf_monotone_and_vectorized():
    x = np.linspace(-3, 3, 101)
    y = erf(x)
    assert np.all(np.diff(y) > 0)
    assert np.allclose(y, [erf(v) for v in x], rtol=0, atol=0)


def test_e1_small_z_series_identity():
    # E1(z) = -gamma - ln z + z - z^2/4 + O(z^3) for small z
    z = 1e-4
    lhs = exp_integral_e1(z) + math.log(z) + EULER_GAMMA
    assert lhs == pytest.approx(z - z * z / 4.0, abs=1e-8)


def test_e1_monotone_decreasing():
    assert exp_integral_e1(1.0) > exp_integral_e1(2.0)
    z = np.linspace(1e-3, 50, 500)
    assert np.all(np.diff(exp_integral_e1(z)) < 0)


def test_e1_convex():
    z = np.linspace(0.05, 20, 200)
    v = exp_integral_e1(z)
    assert np.all(np.diff(v, 2) > 0)


def test_e1_against_quadrature_oracle():
    # E1(1) = int_1^inf exp(-t)/t dt; truncation beyond t=60 is < 3e-29
    oracle = adaptive_simpson(lambda t: math.exp(-t) / t, 1.0, 60.0, 1e-14)
    assert exp_integral_e1(1.0) == pytest.approx(oracle, abs=1e-12)


def test_e1_against_series_oracle_many_points():
    """Oracle: E1(z) = -gamma - ln z + sum_{n>=1} (-1)^(n+1) z^n / (n n!)."""
    rng = np.random.default_rng(2)
    for z in rng.uniform(1e-3, 5.0, size=1000):
        parts = []
        term = 1.0
        for n in range(1, 120):
            term *= z / n
            parts.append(((-1.0) ** (n + 1)) * term / n)
        series = -EULER_GAMMA - math.log(z) + math.fsum(parts)
        assert exp_integral_e1(z) == pytest.approx(series, rel=1e-10, abs=1e-14)


def test_e1_domain_error():
    with pytest.raises(DomainError):
        exp_integral_e1(0.0)
    with pytest.raises(DomainError):
        exp_integral_e1(-1.0)
