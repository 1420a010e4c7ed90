"""B-spline bases on uniform extended knot grids.

Every network edge carries a learnable univariate function built from the
basis evaluated here.  The grid is fixed: ``intervals`` uniform spans on
``[lo, hi]`` with ``degree`` extra uniform knots extended beyond each end,
giving ``intervals + degree`` basis functions.  Evaluation clamps the input
to ``[lo, hi]``; outside that range the basis value freezes at the edge
value and the reported derivatives are zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationError
from .jets import Jet2


@dataclass(frozen=True, eq=False)
class SplineGrid:
    """Uniform clamped-by-extension knot grid on ``[lo, hi]``."""

    lo: float
    hi: float
    intervals: int
    degree: int
    knots: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.intervals < 1:
            raise ValueError(f"intervals must be >= 1, got {self.intervals}")
        if self.degree < 0:
            raise ValueError(f"degree must be >= 0, got {self.degree}")
        if not self.hi > self.lo:
            raise ValueError(f"need hi > lo, got [{self.lo}, {self.hi}]")
        if self.knots is None:
            h = (self.hi - self.lo) / self.intervals
            idx = np.arange(self.intervals + 2 * self.degree + 1)
            knots = self.lo + (idx - self.degree) * h
            object.__setattr__(self, "knots", knots)

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / self.intervals

    @property
    def n_basis(self) -> int:
        return self.intervals + self.degree


def make_grid(lo: float = -1.0, hi: float = 1.0, intervals: int = 5, degree: int = 3) -> SplineGrid:
    return SplineGrid(lo=float(lo), hi=float(hi), intervals=int(intervals), degree=int(degree))


def _check_finite(x: np.ndarray):
    if not np.all(np.isfinite(x)):
        bad = np.asarray(x, dtype=float).ravel()
        bad = bad[~np.isfinite(bad)][0]
        raise EvaluationError(f"non-finite spline input {bad!r}", coordinate=float(bad))


def basis_arrays(grid: SplineGrid, x: np.ndarray, order: int = 2):
    """Evaluate the basis and its derivatives at clamped ``x``.

    Returns ``order + 1`` arrays of shape ``x.shape + (n_basis,)``: values,
    then first, second, ... derivatives.  Derivatives are set to zero
    strictly outside ``[lo, hi]``; on the boundary the one-sided interior
    limit is used.  ``order`` may exceed the degree (higher derivatives of
    the last nonvanishing order are piecewise constant, beyond that zero).
    """
    x = np.asarray(x, dtype=float)
    _check_finite(x)
    shape = x.shape
    xf = x.ravel()
    k = grid.degree
    G = grid.intervals
    t = grid.knots
    h = grid.spacing
    n = xf.size

    xc = np.clip(xf, grid.lo, grid.hi)
    inside = (xf >= grid.lo) & (xf <= grid.hi)

    # degree-0 indicators, one column per knot interval
    idx = np.floor((xc - t[0]) / h).astype(np.intp)
    np.clip(idx, k, k + G - 1, out=idx)
    nb0 = G + 2 * k
    levels = [np.zeros((n, nb0))]
    levels[0][np.arange(n), idx] = 1.0

    # Cox-de Boor recursion; uniform spacing keeps every denominator d*h
    xcol = xc[:, None]
    for d in range(1, k + 1):
        prev = levels[-1]
        nb = G + 2 * k - d
        num_l = xcol - t[None, :nb]
        num_r = t[None, d + 1 : d + 1 + nb] - xcol
        levels.append((num_l * prev[:, :nb] + num_r * prev[:, 1:]) / (d * h))

    nb = grid.n_basis
    out = [levels[k][:, :nb]]
    # derivative ladder: d-th derivative from the degree-(k-d) level
    coeffs = {1: (1.0, -1.0), 2: (1.0, -2.0, 1.0), 3: (1.0, -3.0, 3.0, -1.0)}
    for d in range(1, order + 1):
        if d > k:
            out.append(np.zeros((n, nb)))
            continue
        if d > 3:
            raise ValueError("derivative orders above 3 are not needed or supported")
        lower = levels[k - d]
        acc = np.zeros((n, nb))
        for j, c in enumerate(coeffs[d]):
            acc += c * lower[:, j : j + nb]
        acc /= h**d
        acc *= inside[:, None]
        out.append(acc)
    return [a.reshape(shape + (nb,)) for a in out]


def basis_values(grid: SplineGrid, x) -> np.ndarray:
    """All basis values at ``x`` (scalar -> vector, array -> stacked vectors)."""
    arr = np.asarray(x, dtype=float)
    (vals,) = basis_arrays(grid, arr, order=0)
    return vals


def basis_jets(grid: SplineGrid, x: Jet2) -> list[Jet2]:
    """Propagate a scalar second-order jet through every basis function.

    Component ``m`` of the result carries ``B_m(x.v)`` together with the
    first and second directional derivatives chained through ``x``.
    """
    v = float(np.asarray(x.v, dtype=float))
    b0, b1, b2 = basis_arrays(grid, np.asarray(v), order=2)
    d1 = np.asarray(x.d1, dtype=float)
    d2 = np.asarray(x.d2, dtype=float)
    return [
        Jet2(b0[m], b1[m] * d1, b2[m] * d1 * d1 + b1[m] * d2)
        for m in range(grid.n_basis)
    ]
