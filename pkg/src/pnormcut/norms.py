"""Norm engines.

* ``infinity_p_norm_exact``: ``max_{||x||_inf <= 1} ||Mx||_p`` by enumerating
  the hypercube vertices (the maximum of a convex function sits there).
* ``p_norm_sign_search``: ``max ||Mx||_p / ||x||_p`` restricted to sign vectors,
  a certified lower bound on ``||M||_p``.
* ``p_norm_ascent``: multistart nonlinear power iteration for ``||M||_p``.
* ``polish_hp``: the same iteration in ``bits``-bit arithmetic, used where the
  signal sits far below double precision.

All columns that are identically zero are dropped before enumerating; they
cannot change ``Mx`` and setting them to zero never lowers a ratio.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq

from . import _kernels
from .graph import DEFAULT_ENUM_LIMIT, EnumerationLimitError, best_mask, mask_to_signs
from .matrix import DenseMatrix, as_dense
from .numerics import (DOUBLE_BITS, HPScalar, PExponent, as_p, conjugate, pow_abs, precision,
                       to_rational)

log = logging.getLogger(__name__)

_CANDIDATE_WINDOW = 1e-9
_DROP_SLACK = 1e-12


class AscentMonotonicityError(RuntimeError):
    """The power iteration objective decreased beyond rounding slack."""


@dataclass(frozen=True)
class AscentConfig:
    restarts: int = 20
    max_iters: int = 10_000
    tol: float = 1e-12
    seed: int = 0
    stall: int = 3
    sign_seed_limit: int = 12

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1 or self.stall < 1:
            raise ValueError("max_iters and stall must be >= 1")


@dataclass
class NormEstimate:
    """A norm value realized by ``witness`` (so always a lower bound)."""

    value: HPScalar
    witness: np.ndarray
    method: str
    certified: bool
    meta: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)


# -- high-precision helpers -------------------------------------------------

def power_sum(values: Sequence, p, bits: int = DOUBLE_BITS) -> mpfr:
    """``sum |v|**p`` rounded to ``bits`` bits; rational inputs stay exact until the powers."""
    p = as_p(p)
    wp = bits + 8 + max(1, len(values)).bit_length()
    terms = [pow_abs(v, p, wp) for v in values if v != 0]
    with precision(wp):
        total = sum(terms, mpfr(0))
    return mpfr(total, bits)


def root_p(v, p, bits: int = DOUBLE_BITS) -> mpfr:
    """``v**(1/p)`` for ``v >= 0``."""
    p = as_p(p)
    v = mpfr(v, max(bits, getattr(v, "precision", bits))) if not isinstance(v, HPScalar) else v
    if v < 0:
        raise ValueError("root of a negative number")
    if v == 0:
        return mpfr(0, bits)
    with precision(bits + 24):
        if p.is_integer:
            out = gmpy2.root(v, p.numerator)
        else:
            out = gmpy2.exp(gmpy2.log(v) * mpq(p.denominator, p.numerator))
    return mpfr(out, bits)


def objective_power(m, x: Sequence, p, bits: int = DOUBLE_BITS) -> mpfr:
    """``||Mx||_p**p / ||x||_p**p``.  Rational ``x`` (floats included) is multiplied exactly."""
    m = as_dense(m)
    if all(not isinstance(v, HPScalar) for v in x):
        y = m.matvec(x)
        xs = [to_rational(v) for v in x]
    else:
        y = m.matvec_hp(x, bits + 32)
        xs = list(x)
    den = power_sum(xs, p, bits + 8)
    if den == 0:
        raise ValueError("zero vector has no norm ratio")
    num = power_sum(y, p, bits + 8)
    with precision(bits + 8):
        out = num / den
    return mpfr(out, bits)


def rayleigh(m, x: Sequence, p, q, bits: int = DOUBLE_BITS) -> mpfr:
    """``||Mx||_q / ||x||_p``."""
    m = as_dense(m)
    p, q = as_p(p), as_p(q)
    xs = [to_rational(v) if not isinstance(v, HPScalar) else v for v in x]
    wp = bits + 16
    den = root_p(power_sum(xs, p, wp), p, wp)
    if den == 0:
        raise ValueError("rayleigh quotient of the zero vector")
    y = m.matvec(xs) if all(not isinstance(v, HPScalar) for v in xs) else m.matvec_hp(xs, wp + 16)
    num = root_p(power_sum(y, q, wp), q, wp)
    with precision(wp):
        out = num / den
    return mpfr(out, bits)


def _canonical(x: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(x)
    if nz.size and x[nz[0]] < 0:
        return -x
    return x


# -- endpoints --------------------------------------------------------------

def norm_1(m) -> NormEstimate:
    """Largest absolute column sum."""
    m = as_dense(m)
    sums = [sum((abs(v) for v in m.exact[:, j]), mpq(0)) for j in range(m.cols)]
    j = int(max(range(m.cols), key=lambda k: (sums[k], -k)))
    w = np.zeros(m.cols)
    w[j] = 1.0
    return NormEstimate(mpfr(sums[j], 256), w, "column-sum", True)


def norm_inf(m) -> NormEstimate:
    """Largest absolute row sum."""
    m = as_dense(m)
    sums = [sum((abs(v) for v in row), mpq(0)) for row in m.exact]
    i = int(max(range(m.rows), key=lambda k: (sums[k], -k)))
    w = np.array([1.0 if v >= 0 else -1.0 for v in m.exact[i]])
    return NormEstimate(mpfr(sums[i], 256), w, "row-sum", True)


# -- enumeration ------------------------------------------------------------

def _enumerate_signs(m: DenseMatrix, p: PExponent, limit: int, bits: int):
    """Best sign pattern over the nonzero columns.

    Returns ``(power_sum, signs_full, active_count)`` where ``power_sum`` is
    ``||Mx||_p**p`` in ``bits``-bit precision and zero columns carry ``0``.
    """
    active = m.nonzero_columns()
    k = int(active.size)
    if k == 0:
        return mpfr(0, bits), np.zeros(m.cols), 0
    if k > limit:
        raise EnumerationLimitError(f"{k} active columns exceed enumeration limit {limit}")
    sub = m.take_columns(active)
    sums = _kernels.sign_power_sums(sub.f, float(p))
    top = sums.max()
    floor = top * (1.0 - _CANDIDATE_WINDOW) if top > 0 else top
    cand = np.flatnonzero(sums >= floor)
    if bits <= DOUBLE_BITS and cand.size > 64:
        cand = cand[np.argsort(-sums[cand], kind="stable")[:64]]
    exact = {}
    for c in cand:
        signs = mask_to_signs(int(c), k)
        exact[int(c)] = power_sum(sub.matvec(signs), p, bits + 16)
    best_val = max(exact.values())
    winners = np.array([c for c, v in exact.items() if v == best_val], dtype=np.int64)
    mask = best_mask(None, k, winners)
    full = np.zeros(m.cols)
    full[active] = mask_to_signs(mask, k)
    return mpfr(best_val, bits), full, k


def infinity_p_norm_exact(m, p, limit: int = DEFAULT_ENUM_LIMIT,
                          bits: int = DOUBLE_BITS) -> NormEstimate:
    """``max_{||x||_inf <= 1} ||Mx||_p`` over the hypercube vertices (certified)."""
    m = as_dense(m)
    p = as_p(p)
    total, signs, k = _enumerate_signs(m, p, limit, bits)
    signs = np.where(signs == 0, 1.0, signs)
    return NormEstimate(root_p(total, p, bits), signs, "enumeration", True,
                        {"active_columns": k})


def p_norm_sign_search(m, p, limit: int = DEFAULT_ENUM_LIMIT,
                       bits: int = DOUBLE_BITS) -> NormEstimate:
    """``max ||Mx||_p / ||x||_p`` over sign vectors on the nonzero columns."""
    m = as_dense(m)
    p = as_p(p)
    total, signs, k = _enumerate_signs(m, p, limit, bits)
    if k == 0:
        w = np.zeros(m.cols)
        w[0] = 1.0
        return NormEstimate(mpfr(0, bits), w, "sign-search", False, {"active_columns": 0})
    with precision(bits + 16):
        ratio = total / k
    return NormEstimate(root_p(ratio, p, bits), signs, "sign-search", False,
                        {"active_columns": k, "power": mpfr(ratio, bits)})


# -- ascent -----------------------------------------------------------------

def _starts(m: DenseMatrix, cfg: AscentConfig) -> np.ndarray:
    n = m.cols
    cols = [np.random.default_rng([cfg.seed, i]).standard_normal(n) for i in range(cfg.restarts)]
    active = m.nonzero_columns()
    k = int(active.size)
    if 0 < k <= cfg.sign_seed_limit:
        for mask in range(1 << (k - 1)):
            v = np.zeros(n)
            v[active] = mask_to_signs(mask, k)
            cols.append(v)
    for j in active:
        v = np.zeros(n)
        v[j] = 1.0
        cols.append(v)
    return np.column_stack(cols)


def p_norm_ascent(m, p, cfg: AscentConfig | None = None,
                  bits: int = DOUBLE_BITS) -> NormEstimate:
    """Multistart power iteration for ``||M||_p``; heuristic, never certified.

    Starts: ``cfg.restarts`` Gaussian vectors (seeded per restart from
    ``(cfg.seed, i)``), every sign vector with first active entry ``+1`` when
    at most ``cfg.sign_seed_limit`` columns are active, and every active
    coordinate vector.  The best run wins; ties go to the lexicographically
    smaller canonical witness.
    """
    cfg = cfg or AscentConfig()
    m = as_dense(m)
    p = as_p(p)
    if p <= 1:
        raise ValueError("ascent needs p > 1; use norm_1 for p = 1")
    n = m.cols
    if m.nonzero_columns().size == 0:
        w = np.zeros(n)
        w[0] = 1.0
        return NormEstimate(mpfr(0, bits), w, "ascent", False,
                            {"converged": True, "iterations": 0, "runs": 0})
    x0 = _starts(m, cfg)
    xs, vals, iters, conv, worst = _kernels.ascent_batch(
        m.f, x0, float(p), cfg.tol, cfg.max_iters, cfg.stall)
    if worst.max() > _DROP_SLACK:
        raise AscentMonotonicityError(
            f"objective fell by {worst.max():.3e} relative in run {int(worst.argmax())}")
    order = sorted(range(vals.size),
                   key=lambda r: (-vals[r], tuple(_canonical(xs[:, r]))))
    best = order[0]
    witness = _canonical(xs[:, best].copy())
    value = root_p(objective_power(m, witness, p, bits + 8), p, bits)
    meta = {
        "converged": bool(conv[best]),
        "iterations": int(iters[best]),
        "runs": int(vals.size),
        "unconverged_runs": int((~conv).sum()),
        "worst_relative_drop": float(worst.max()),
        "float_value": float(vals[best]),
        "backend": _kernels.BACKEND,
    }
    if not conv[best]:
        log.info("best ascent run hit max_iters=%d without stalling", cfg.max_iters)
    return NormEstimate(value, witness, "ascent", False, meta)


def dual_norm_pair(m, p, cfg: AscentConfig | None = None,
                   bits: int = DOUBLE_BITS) -> tuple[NormEstimate, NormEstimate]:
    """``(||M||_p, ||M^T||_p')`` by ascent; equal in exact arithmetic."""
    m = as_dense(m)
    p = as_p(p)
    return p_norm_ascent(m, p, cfg, bits), p_norm_ascent(m.T, conjugate(p), cfg, bits)


def polish_hp(m, x0: Sequence, p, bits: int, max_iters: int = 200,
              stall: int = 3) -> tuple[list, mpfr]:
    """Power iteration in ``bits``-bit arithmetic from ``x0``.

    Only improving steps are accepted, so the returned objective
    ``||Mx||_p**p / ||x||_p**p`` never falls below its value at ``x0``.
    Returns ``(x, objective_power)``.
    """
    m = as_dense(m)
    p = as_p(p)
    if p <= 1:
        raise ValueError("polish needs p > 1")
    wp = bits + 32
    with precision(wp):
        mq = [[mpfr(a) for a in row] for row in m.exact]
        mt = [list(col) for col in zip(*mq)]
        e_up = mpfr(p.rational - 1)
        e_down = mpfr(1) / e_up

        def signed_pow(v, e):
            if v == 0:
                return mpfr(0)
            r = abs(v) ** e
            return r if v > 0 else -r

        x = [mpfr(to_rational(v)) if not isinstance(v, HPScalar) else mpfr(v) for v in x0]
        best = objective_power(m, x0, p, wp)
        tiny = mpfr(2) ** (16 - wp)
        calm = 0
        for _ in range(max_iters):
            y = [sum((a * b for a, b in zip(row, x) if a != 0), mpfr(0)) for row in mq]
            z = [signed_pow(v, e_up) for v in y]
            w = [sum((a * b for a, b in zip(row, z) if a != 0), mpfr(0)) for row in mt]
            if all(v == 0 for v in w):
                break
            xn = [signed_pow(v, e_down) for v in w]
            top = max(abs(v) for v in xn)
            xn = [v / top for v in xn]
            val = objective_power(m, xn, p, wp)
            if val > best:
                gain = (val - best) / best
                x, best = xn, val
                calm = calm + 1 if gain < tiny else 0
            else:
                calm += 1
            if calm >= stall:
                break
    return x, mpfr(best, bits)


# -- mixed (p, q) check -----------------------------------------------------

@dataclass
class MixedNormReport:
    best_sampled: float
    best_sign: float
    gap: float
    samples: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.gap <= self.tol


def mixed_pq_sign_maximizer_check(m, p, q, samples: int = 10_000, seed: int = 0,
                                  tol: float = 1e-6,
                                  limit: int = DEFAULT_ENUM_LIMIT) -> MixedNormReport:
    """Compare random sampling of ``||Mx||_q / ||x||_p`` against its sign-vector maximum.

    For ``q < p`` and the gadget matrix the sign vectors should win, so the
    reported gap (sampled minus sign) is expected to be ``<= tol``.
    """
    m = as_dense(m)
    p, q = as_p(p), as_p(q)
    if not q < p:
        raise ValueError("mixed check needs q < p")
    if m.cols > limit:
        raise EnumerationLimitError(f"{m.cols} columns exceed enumeration limit {limit}")
    pf, qf = float(p), float(q)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((samples, m.cols))
    num = (np.abs(x @ m.f.T) ** qf).sum(axis=1) ** (1.0 / qf)
    den = (np.abs(x) ** pf).sum(axis=1) ** (1.0 / pf)
    best_sampled = float((num / den).max())
    sums = _kernels.sign_power_sums(m.f, qf)
    best_sign = float(sums.max() ** (1.0 / qf) / m.cols ** (1.0 / pf))
    return MixedNormReport(best_sampled, best_sign, best_sampled - best_sign, samples, tol)
