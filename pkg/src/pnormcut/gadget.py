"""The 2n x n circulant gadget whose p-norm maximizers are the sign vectors.

For ``p >= 2`` the maximum of ``||A x||_p**p`` over the sphere
``||x||_p = n**(1/p)`` equals ``n * 2**p`` and is attained exactly on
``{-1, 1}**n``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from gmpy2 import mpfr, mpq

from . import _kernels
from .matrix import DenseMatrix
from .numerics import DOUBLE_BITS, as_p, pow_abs, precision, to_rational


def gadget_matrix(n: int) -> DenseMatrix:
    """Rows ``(x_i - x_{i+1}, x_i + x_{i+1})`` for i < n, then the wraparound pair
    ``(-x_1 + x_n, x_1 + x_n)``."""
    if n < 2:
        raise ValueError("gadget needs n >= 2")
    one, zero = mpq(1), mpq(0)
    rows = []
    for i in range(n - 1):
        diff = [zero] * n
        plus = [zero] * n
        diff[i], diff[i + 1] = one, -one
        plus[i], plus[i + 1] = one, one
        rows += [diff, plus]
    diff = [zero] * n
    plus = [zero] * n
    diff[0], diff[n - 1] = -one, one
    plus[0], plus[n - 1] = one, one
    rows += [diff, plus]
    return DenseMatrix(rows)


def gadget_value(x: Sequence, p, bits: int = DOUBLE_BITS) -> mpfr:
    """``sum_i |x_i - x_{i+1}|**p + |x_i + x_{i+1}|**p`` (indices mod n), no matrix."""
    p = as_p(p)
    xs = [to_rational(v) for v in x]
    n = len(xs)
    if n < 2:
        raise ValueError("gadget needs n >= 2")
    wp = bits + 8 + n.bit_length()
    terms = []
    for i in range(n):
        a, b = xs[i], xs[(i + 1) % n]
        terms.append(pow_abs(a - b, p, wp))
        terms.append(pow_abs(a + b, p, wp))
    with precision(wp):
        total = sum(terms, mpfr(0))
    return mpfr(total, bits)


def gadget_values(y: np.ndarray, p) -> np.ndarray:
    """Float64 ``gadget_value`` for every row of ``y``."""
    pf = p if isinstance(p, float) else float(as_p(p))
    return _kernels.gadget_values(np.atleast_2d(y), pf)


def pair_inequality_terms(x, y, p):
    """``(lhs, bound, error_term)`` of the two-term power inequality.

    ``lhs = |x+y|**p + |x-y|**p``, ``bound = 2**(p-1) (|x|**p + |y|**p)`` and
    the nonnegative ``error_term`` satisfies ``lhs <= bound - error_term``.
    Works elementwise on arrays; scalars in, floats out.
    """
    pf = float(p) if not isinstance(p, np.ndarray) else p
    if np.any(np.asarray(pf) < 2):
        raise ValueError("the pair inequality needs p >= 2")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    ax, ay = np.abs(x), np.abs(y)
    lhs = np.abs(x + y) ** pf + np.abs(x - y) ** pf
    bound = 2.0 ** (pf - 1.0) * (ax ** pf + ay ** pf)
    spread = ax - ay
    err = (spread ** 2 / 4.0) * (pf * (pf - 1.0) * np.abs(ax + ay) ** (pf - 2.0)
                                 - 2.0 * np.abs(spread) ** (pf - 2.0))
    if lhs.ndim == 0:
        return float(lhs), float(bound), float(err)
    return lhs, bound, err


def deficiency_bound(n: int, p, c, bits: int = DOUBLE_BITS) -> mpfr:
    """Upper bound ``n 2**p - 3 (p-2) c**2 / (2**p n**2)`` on ``||A y||_p**p`` for sphere
    points whose infinity-distance to every sign vector is at least ``c``."""
    p = as_p(p)
    if p < 2:
        raise ValueError("deficiency bound needs p >= 2")
    cq = to_rational(c)
    if not (0 < cq <= mpq(1, 2)):
        raise ValueError("c must lie in (0, 1/2]")
    wp = bits + 16
    two_p = pow_abs(2, p, wp)
    with precision(wp):
        out = n * two_p - 3 * (p.rational - 2) * cq * cq / (two_p * n * n)
    return mpfr(out, bits)


def sphere_samples(n: int, p, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Gaussian points radially rescaled onto ``||y||_p = n**(1/p)``."""
    pf = float(as_p(p))
    y = rng.standard_normal((count, n))
    norms = (np.abs(y) ** pf).sum(axis=1) ** (1.0 / pf)
    return y * (n ** (1.0 / pf) / norms)[:, None]


def distance_to_signs(y: np.ndarray) -> np.ndarray:
    """``min_{x in {-1,1}^n} ||y - x||_inf`` for each row (or a single vector)."""
    y = np.asarray(y, dtype=np.float64)
    return np.max(np.abs(np.abs(y) - 1.0), axis=-1)
