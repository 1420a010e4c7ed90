import numpy as np
import pytest

from stefankan.errors import EvaluationError
from stefankan.jets import Jet2
from stefankan.splines import basis_arrays, basis_jets, basis_values, make_grid


def naive_bspline(knots, m, k, x):
    """Straightforward Cox-de Boor recursion for one basis function.

    Independent oracle: term-by-term recursion, no vectorization tricks.
    """
    if k == 0:
        return 1.0 if knots[m] <= x < knots[m + 1] else 0.0
    left = 0.0
    if knots[m + k] > knots[m]:
        left = (x - knots[m]) / (knots[m + k] - knots[m]) * naive_bspline(knots, m, k - 1, x)
    right = 0.0
    if knots[m + k + 1] > knots[m + 1]:
        right = (knots[m + k + 1] - x) / (knots[m + k + 1] - knots[m + 1]) * naive_bspline(
            knots, m + 1, k - 1, x
        )
    return left + right


def test_grid_construction():
    g = make_grid(-1.0, 1.0, intervals=5, degree=3)
    assert g.n_basis == 8
    assert len(g.knots) == 5 + 2 * 3 + 1
    spacings = np.diff(g.knots)
    assert np.allclose(spacings, spacings[0], rtol=0, atol=1e-15)
    assert g.knots[g.degree] == pytest.approx(-1.0, abs=1e-15)
    assert g.knots[g.degree + g.intervals] == pytest.approx(1.0, abs=1e-15)


def test_degree0_indicator():
    g = make_grid(0.0, 1.0, intervals=4, degree=0)
    vals = basis_values(g, 0.3)
    assert vals.shape == (4,)
    # x=0.3 lies in [0.25, 0.5), the second interval
    expected = np.array([0.0, 1.0, 0.0, 0.0])
    assert np.array_equal(vals, expected)


def test_partition_of_unity():
    rng = np.random.default_rng(7)
    for intervals, degree, lo, hi in [(4, 0, 0.0, 1.0), (5, 3, -1.0, 1.0), (7, 2, -2.0, 3.0)]:
        g = make_grid(lo, hi, intervals, degree)
        x = rng.uniform(lo, hi, size=500)
        x = np.append(x, [lo, hi])
        sums = basis_values(g, x).sum(axis=1)
        assert np.max(np.abs(sums - 1.0)) < 1e-12


def test_against_naive_cox_de_boor():
    g = make_grid(-1.0, 1.0, intervals=5, degree=3)
    rng = np.random.default_rng(3)
    xs = np.append(rng.uniform(-1.0, 1.0, size=25), [0.0, -1.0])
    for x in xs:
        ours = basis_values(g, x)
        theirs = np.array(
            [naive_bspline(g.knots, m, g.degree, x) for m in range(g.n_basis)]
        )
        assert np.max(np.abs(ours - theirs)) < 1e-14


def test_local_support_and_nonnegativity():
    g = make_grid(-1.0, 1.0, intervals=5, degree=3)
    rng = np.random.default_rng(11)
    x = rng.uniform(-1.0, 1.0, size=200)
    vals = basis_values(g, x)
    assert np.all(vals >= 0.0)
    for m in range(g.n_basis):
        outside = (x < g.knots[m]) | (x > g.knots[m + g.degree + 1])
        assert np.all(vals[outside, m] == 0.0)


def test_derivatives_match_finite_differences():
    g = make_grid(-1.0, 1.0, intervals=5, degree=3)
    rng = np.random.default_rng(5)
    x = rng.uniform(-0.95, 0.95, size=100)
    b0, b1, b2 = basis_arrays(g, x, order=2)
    h1, h2 = 1e-5, 1e-4
    fd1 = (basis_values(g, x + h1) - basis_values(g, x - h1)) / (2 * h1)
    fd2 = (basis_values(g, x + h2) - 2 * basis_values(g, x) + basis_values(g, x - h2)) / h2**2
    # relative to the per-point derivative scale
    scale1 = np.maximum(np.abs(fd1).max(axis=1, keepdims=True), 1e-8)
    scale2 = np.maximum(np.abs(fd2).max(axis=1, keepdims=True), 1e-8)
    assert np.max(np.abs(b1 - fd1) / scale1) < 1e-6
    assert np.max(np.abs(b2 - fd2) / scale2) < 1e-4


def test_jets_partition_of_unity_derivative():
    g = make_grid(-1.0, 1.0, intervals=5, degree=3)
    jets = basis_jets(g, Jet2(0.37, 1.0, 0.0))
    assert abs(sum(j.v for j in jets) - 1.0) < 1e-12
    assert abs(sum(j.d1 for j in jets)) < 1e-12
    assert abs(sum(j.d2 for j in jets)) < 1e-11


def test_jet_first_derivative_vs_fd():
    g = make_grid(-1.0, 1.0, intervals=5, degree=3)
    rng = np.random.default_rng(13)
    h = 1e-5
    for x in rng.uniform(-0.95, 0.95, size=100):
        jets = basis_jets(g, Jet2(float(x), 1.0, 0.0))
        fd = (basis_values(g, x + h) - basis_values(g, x - h)) / (2 * h)
        d1 = np.array([j.d1 for j in jets])
        scale = max(np.abs(fd).max(), 1e-8)
        assert np.max(np.abs(d1 - fd)) / scale < 1e-6


def test_jet_chain_rule_seeds():
    g = make_grid(-1.0, 1.0, intervals=5, degree=3)
    x = 0.21
    base = basis_jets(g, Jet2(x, 1.0, 0.0))
    scaled = basis_jets(g, Jet2(x, 2.0, 0.5))
    for jb, js in zip(base, scaled):
        assert js.v == pytest.approx(jb.v, abs=0)
        assert js.d1 == pytest.approx(2.0 * jb.d1, rel=1e-14)
        assert js.d2 == pytest.approx(4.0 * jb.d2 + 0.5 * jb.d1, rel=1e-12, abs=1e-14)


def test_clamped_evaluation():
    g = make_grid(-1.0, 1.0, intervals=5, degree=3)
    # outside the range: values freeze at the edge, derivatives vanish
    assert np.array_equal(basis_values(g, 1.7), basis_values(g, 1.0))
    jets_out = basis_jets(g, Jet2(1.7, 1.0, 0.0))
    assert all(j.d1 == 0.0 and j.d2 == 0.0 for j in jets_out)
    # exactly on the boundary: one-sided interior limit for derivatives
    jets_lo = basis_jets(g, Jet2(-1.0, 1.0, 0.0))
    vals_lo = basis_values(g, -1.0)
    assert np.allclose([j.v for j in jets_lo], vals_lo, rtol=0, atol=0)
    eps_jets = basis_jets(g, Jet2(-1.0 + 1e-9, 1.0, 0.0))
    for ja, jb in zip(jets_lo, eps_jets):
        assert ja.d1 == pytest.approx(jb.d1, rel=1e-6, abs=1e-7)


def test_nonfinite_input_raises():
    g = make_grid(-1.0, 1.0, 5, 3)
    with pytest.raises(EvaluationError) as exc:
        basis_values(g, np.nan)
    assert exc.value.coordinate is None or np.isnan(exc.value.coordinate)
    with pytest.raises(EvaluationError):
        basis_values(g, np.array([0.1, np.inf]))
