"""Special functions for the closed-form reference solutions.

erf/erfc come from the C library via :mod:`math`; the exponential integral
E1 from scipy.  Both are wrapped behind a checked interface so callers get
consistent domain errors, and the test suite verifies them against
independent series/quadrature oracles.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import exp1

from .errors import DomainError, EvaluationError

_erf_vec = np.vectorize(math.erf, otypes=[float])
_erfc_vec = np.vectorize(math.erfc, otypes=[float])


def erf(x):
    """Error function; |error| < 1e-12, odd, erf + erfc = 1."""
    if np.ndim(x) == 0:
        xf = float(x)
        if not math.isfinite(xf):
            raise EvaluationError(f"non-finite erf argument {xf!r}", coordinate=xf)
        return math.erf(xf)
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise EvaluationError("non-finite erf argument")
    return _erf_vec(arr)


def erfc(x):
    """Complementary error function, 1 - erf."""
    if np.ndim(x) == 0:
        xf = float(x)
        if not math.isfinite(xf):
            raise EvaluationError(f"non-finite erfc argument {xf!r}", coordinate=xf)
        return math.erfc(xf)
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise EvaluationError("non-finite erfc argument")
    return _erfc_vec(arr)


def exp_integral_e1(z):
    """Exponential integral E1(z) = int_z^inf exp(-t)/t dt for z > 0."""
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("non-finite E1 argument")
    if np.any(arr <= 0.0):
        raise DomainError(f"E1 requires z > 0, got {np.min(arr)}")
    out = exp1(arr)
    return float(out) if np.ndim(z) == 0 else out
