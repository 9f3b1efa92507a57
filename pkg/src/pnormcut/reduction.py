"""MAX-CUT -> matrix p-norm reduction: builders, accuracy schedules, decoding.

The central matrix is ``Z = [alpha * A ; M(G)]`` with ``A`` the gadget and
``M(G)`` the incidence matrix.  On a sign vector ``x``,
``||Zx||_p**p = alpha**p * n * 2**p + 2**p * cut(x)``, so the cut can be read
back from ``||Z||_p`` by ``(n / 2**p) f**p - n alpha**p`` once ``alpha`` is
large enough to pin the maximizer next to a sign vector.  That subtraction
cancels about ``p*log2(alpha)`` bits, hence the high-precision decode.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq, mpz

from .gadget import gadget_matrix
from .graph import DEFAULT_ENUM_LIMIT, CutResult, Graph, cut_value, incidence_matrix
from .matrix import DenseMatrix, as_dense, pad_to, vstack
from .norms import (AscentConfig, objective_power, p_norm_ascent,
                    p_norm_sign_search, polish_hp, root_p)
from .numerics import (DOUBLE_BITS, HPScalar, PExponent, as_p, decode_precision_bits,
                       format_hp, pow_abs, precision, to_rational)

DEFAULT_ROW_LIMIT = 1_000_000

CONSTRUCTIONS = ("ztilde", "z", "zstar", "zdoublestar", "padded")


class InsufficientPrecisionError(ValueError):
    """Decode requested below the precision floor where cancellation eats the answer."""


class ConstructionError(ValueError):
    """A reduction builder's preconditions are not met."""


def _require_p_above_two(p: PExponent) -> None:
    if not p > 2:
        raise ConstructionError("p must exceed 2 for this construction")


def default_alpha(n: int, p) -> mpq:
    """Gadget weight ``64 p n**8 / (p - 2)`` as an exact rational."""
    p = as_p(p)
    _require_p_above_two(p)
    return mpq(64) * p.rational * mpz(n) ** 8 / (p.rational - 2)


def ceil_rational_power(r, p) -> int:
    """Exact ``ceil(r**p)`` for rational ``r > 0`` and rational ``p = a/b``."""
    p = as_p(p)
    r = to_rational(r)
    if r <= 0:
        raise ValueError("base must be positive")
    a, b = p.numerator, p.denominator
    target = r ** a
    k = int(gmpy2.iroot(mpz(target.numerator // target.denominator), b)[0])
    while mpq(k) ** b < target:
        k += 1
    while k > 0 and mpq(k - 1) ** b >= target:
        k -= 1
    return k


@dataclass(frozen=True)
class BlockSpec:
    """Virtual row stack: block ``B`` repeated ``k`` times with scalar weight ``w``.

    ``||stack x||_p**p = sum_i k_i w_i**p ||B_i x||_p**p``, so the stack has the
    same p-norm as the single stack of ``k_i**(1/p) w_i B_i``.
    """

    blocks: tuple

    def __post_init__(self):
        norm = []
        for blk, k, w in self.blocks:
            if int(k) < 1:
                raise ValueError("repetition count must be >= 1")
            norm.append((as_dense(blk), int(k), to_rational(w)))
        if len({b.cols for b, _, _ in norm}) != 1:
            raise ValueError("blocks must share the column count")
        object.__setattr__(self, "blocks", tuple(norm))

    @property
    def cols(self) -> int:
        return self.blocks[0][0].cols

    @property
    def rows(self) -> int:
        return sum(k * b.rows for b, k, _ in self.blocks)

    @property
    def shape(self) -> tuple:
        return (self.rows, self.cols)

    def effective_weights(self, p, bits: int = DOUBLE_BITS) -> list:
        """``k**(1/p) * w`` for each block."""
        p = as_p(p)
        out = []
        for _, k, w in self.blocks:
            with precision(bits + 16):
                out.append(mpfr(root_p(mpfr(k), p, bits + 16) * w, bits))
        return out

    def collapse(self, p) -> DenseMatrix:
        """Single-copy stack with every block scaled by its effective weight (float-rounded)."""
        p = as_p(p)
        parts = [b.f * float(wt) for (b, _, _), wt in zip(self.blocks, self.effective_weights(p))]
        return DenseMatrix(np.vstack(parts))

    def power_sum(self, x: Sequence, p, bits: int = DOUBLE_BITS) -> mpfr:
        """``||stack x||_p**p`` without materializing the repetitions."""
        from .norms import power_sum

        p = as_p(p)
        wp = bits + 16
        total = mpfr(0, wp)
        for b, k, w in self.blocks:
            part = power_sum(b.matvec(x), p, wp)
            with precision(wp):
                total = total + k * pow_abs(w, p, wp) * part
        return mpfr(total, bits)

    def materialize(self, row_limit: int = DEFAULT_ROW_LIMIT) -> DenseMatrix:
        if self.rows > row_limit:
            raise ConstructionError(
                f"materializing {self.rows} rows exceeds the row limit {row_limit}")
        parts = []
        for b, k, w in self.blocks:
            parts.extend([b.scale(w)] * k)
        return vstack(parts)


@dataclass
class ReductionInstance:
    graph: Graph
    p: PExponent
    alpha: object
    matrix: object
    bits: int
    provenance: str
    incidence_weight: mpq = field(default_factory=lambda: mpq(1))
    repetitions: int | None = None

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def dense(self) -> DenseMatrix:
        if isinstance(self.matrix, BlockSpec):
            return self.matrix.materialize()
        return self.matrix

    def metadata(self) -> dict:
        alpha = self.alpha
        if isinstance(alpha, HPScalar):
            alpha_s = format_hp(alpha, 30)
        else:
            alpha_s = str(to_rational(alpha))
        shape = self.matrix.shape
        return {
            "provenance": self.provenance,
            "n": self.n,
            "edges": self.graph.m,
            "p": str(self.p),
            "alpha": alpha_s,
            "incidence_weight": str(self.incidence_weight),
            "repetitions": None if self.repetitions is None else str(self.repetitions),
            "bits": self.bits,
            "rows": shape[0],
            "cols": shape[1],
            "virtual": isinstance(self.matrix, BlockSpec),
        }


def build_ztilde(g: Graph, p) -> ReductionInstance:
    """``[A ; (p-2)/(64 p n**8) M(G)]``: same maximizer as ``Z``, unit gadget weight."""
    p = as_p(p)
    _require_p_above_two(p)
    if g.n < 3:
        raise ConstructionError("this construction needs n >= 3")
    weight = 1 / default_alpha(g.n, p)
    mat = vstack([gadget_matrix(g.n), incidence_matrix(g).scale(weight)])
    return ReductionInstance(g, p, mpq(1), mat, DOUBLE_BITS, "ztilde", weight)


def build_z(g: Graph, p, alpha=None) -> ReductionInstance:
    """``[alpha A ; M(G)]`` with ``alpha`` defaulting to ``64 p n**8 / (p-2)``."""
    p = as_p(p)
    _require_p_above_two(p)
    a = default_alpha(g.n, p) if alpha is None else to_rational(alpha)
    if a < 1:
        raise ConstructionError("alpha must be >= 1")
    mat = vstack([gadget_matrix(g.n).scale(a), incidence_matrix(g)])
    return ReductionInstance(g, p, a, mat, decode_precision_bits(g.n, p, a), "z")


def build_zstar(g: Graph, p) -> ReductionInstance:
    """``Z`` with the gadget weight rounded up to an integer."""
    p = as_p(p)
    a = default_alpha(g.n, p)
    a = mpq(-((-a.numerator) // a.denominator))
    inst = build_z(g, p, a)
    inst.provenance = "zstar"
    return inst


def build_zdoublestar(g: Graph, p, k: int | None = None,
                      row_limit: int = DEFAULT_ROW_LIMIT) -> ReductionInstance:
    """Gadget repeated ``k`` times over ``M(G)``; all entries in {-1, 0, 1}.

    ``k`` defaults to ``ceil((64 p n**8 / (p-2))**p)``, far too many rows to
    store, so the matrix stays a ``BlockSpec`` unless it fits ``row_limit``.
    """
    p = as_p(p)
    _require_p_above_two(p)
    if k is None:
        k = ceil_rational_power(default_alpha(g.n, p), p)
    k = int(k)
    if k < 1:
        raise ConstructionError("repetition count must be >= 1")
    spec = BlockSpec(((gadget_matrix(g.n), k, 1), (incidence_matrix(g), 1, 1)))
    bits_alpha = max(DOUBLE_BITS, k.bit_length() + 64)
    alpha = root_p(mpfr(k, bits_alpha), p, bits_alpha)
    bits = decode_precision_bits(g.n, p, alpha)
    matrix = spec.materialize(row_limit) if spec.rows <= row_limit else spec
    return ReductionInstance(g, p, alpha, matrix, bits, "zdoublestar", mpq(1), k)


def pad_square(m) -> DenseMatrix:
    """Zero-pad rows or columns up to a square; all norms are unchanged."""
    m = as_dense(m)
    side = max(m.rows, m.cols)
    return pad_to(m, side, side)


def required_epsilon_pnorm(n: int, p, bits: int = 128) -> mpfr:
    """Relative accuracy for ``||Z||_p`` that suffices to recover the max cut:
    ``(132**p (p/(p-2))**p n**(8p+3) p)**-1 * (132 (p/(p-2)) n**8)**-1``."""
    p = as_p(p)
    _require_p_above_two(p)
    if n < 3:
        raise ValueError("schedule needs n >= 3")
    wp = bits + 32
    ratio = p.rational / (p.rational - 2)
    big = pow_abs(132 * ratio, p, wp)
    npow = pow_abs(n, PExponent(8 * p.numerator + 3 * p.denominator, p.denominator), wp)
    with precision(wp):
        out = 1 / (big * npow * p.rational * (132 * ratio * mpz(n) ** 8))
    return mpfr(out, bits)


def required_epsilon_inftyp(p, delta, bits: int = 128) -> mpfr:
    """Relative error ``((33 + delta) p 2**(p-1))**-1`` for the infinity,p norm."""
    p = as_p(p)
    d = to_rational(delta)
    if d <= 0:
        raise ValueError("delta must be positive")
    wp = bits + 16
    two_p = pow_abs(2, p, wp)
    with precision(wp):
        out = 2 / ((33 + d) * p.rational * two_p)
    return mpfr(out, bits)


@dataclass
class DecodeResult:
    maxcut_estimate: mpfr
    maxcut_rounded: int
    additive_error_bound: mpfr
    rounding_valid: bool
    witness_cut: CutResult | None = None
    details: dict = field(default_factory=dict)


def _rounded(est: mpfr, bound: mpfr) -> tuple[int, bool]:
    r = int(gmpy2.rint(est))
    with precision(max(est.precision, bound.precision)):
        return r, bool(abs(est - r) + bound < mpq(1, 2))


def decode_maxcut(f, n: int, p, alpha, bits: int, rel_error=None,
                  alpha_power=None) -> DecodeResult:
    """Invert ``Z``'s encoding: ``(n / 2**p) f**p - n alpha**p``.

    ``rel_error`` declares a relative error of ``f`` and is propagated into
    ``additive_error_bound`` on top of the intrinsic ``1/(2**p n**2)`` gap.
    ``alpha_power`` overrides ``alpha**p`` with an exact value (repeated-gadget
    instances have ``alpha**p = k``).
    """
    p = as_p(p)
    floor_bits = decode_precision_bits(n, p, alpha)
    if bits < floor_bits:
        raise InsufficientPrecisionError(
            f"decode needs >= {floor_bits} bits for n={n}, p={p}; got {bits}")
    if isinstance(f, HPScalar) and f.precision < floor_bits:
        raise InsufficientPrecisionError(
            f"f carries {f.precision} bits, decode needs >= {floor_bits}")
    if not f > 0:
        raise ValueError("f must be positive")
    wp = bits + 16
    fp = pow_abs(f, p, wp)
    ap = pow_abs(alpha, p, wp) if alpha_power is None else mpfr(to_rational(alpha_power), wp)
    two_p = pow_abs(2, p, wp)
    with precision(wp):
        est = n * fp / two_p - n * ap
        bound = 1 / (two_p * n * n)
        if rel_error is not None:
            eps = mpfr(to_rational(rel_error))
            if not 0 <= eps < 1:
                raise ValueError("relative error must lie in [0, 1)")
            grow = pow_abs(1 / (1 - eps), p, wp) - 1
            bound += n * fp / two_p * grow
    est = mpfr(est, bits)
    bound = mpfr(bound, bits)
    r, ok = _rounded(est, bound)
    return DecodeResult(est, r, bound, ok)


def decode_maxcut_from_inftyp(f, p, rel_error=None, bits: int = DOUBLE_BITS) -> DecodeResult:
    """``(f/2)**p``; with a declared relative error ``eps`` the additive bound is
    ``c est / (1 - c)`` where ``c = 2**(p-1) p eps``."""
    p = as_p(p)
    if f < 0:
        raise ValueError("f must be nonnegative")
    wp = bits + 16
    if isinstance(f, HPScalar):
        with precision(max(wp, f.precision)):
            half = f / 2
    else:
        half = to_rational(f) / 2
    est = pow_abs(half, p, wp)
    bound = mpfr(0, wp)
    if rel_error is not None:
        eps = to_rational(rel_error)
        with precision(wp):
            c = pow_abs(2, p, wp) / 2 * p.rational * eps
            if c >= 1:
                raise ValueError("declared error too large for a finite bound")
            bound = c * est / (1 - c)
    est, bound = mpfr(est, bits), mpfr(bound, bits)
    r, ok = _rounded(est, bound)
    return DecodeResult(est, r, bound, ok)


def round_to_signs(x: Sequence) -> tuple:
    """Componentwise nearest of -1, +1; exact zeros go to +1."""
    return tuple(-1 if v < 0 else 1 for v in x)


def rounding_gap(m, x_star: Sequence, p, bits: int) -> mpfr:
    """``||Z x*||_p**p - ||Z x_r||_p**p`` with both points on ``S(0, n**(1/p))``."""
    m = as_dense(m)
    n = len(x_star)
    wp = bits + 16
    hi = objective_power(m, x_star, p, wp)
    lo = objective_power(m, round_to_signs(x_star), p, wp)
    with precision(wp):
        out = n * (hi - lo)
    return mpfr(out, bits)


def sphere_distance_hp(x: Sequence, p, bits: int) -> mpfr:
    """``min_{s in {-1,1}^n} ||x_hat - s||_inf`` where ``x_hat`` is ``x`` rescaled
    onto ``S(0, n**(1/p))``."""
    from .norms import power_sum

    p = as_p(p)
    n = len(x)
    wp = bits + 16
    xs = [v if isinstance(v, HPScalar) else mpfr(to_rational(v), wp) for v in x]
    total = power_sum(xs, p, wp)
    with precision(wp):
        scale = root_p(n / total, p, wp)
        dist = max(abs(abs(v) * scale - 1) for v in xs)
    return mpfr(dist, bits)


def solve_maxcut_via_pnorm(g: Graph, p, alpha=None, cfg: AscentConfig | None = None,
                           bits: int | None = None, limit: int = DEFAULT_ENUM_LIMIT,
                           polish_iters: int = 200) -> DecodeResult:
    """Graph -> ``Z`` -> ``||Z||_p`` -> max cut.

    ``f`` is the best of the sign-vector search and the ascent optimum, both
    refined by ``polish_hp`` in twice the decode precision (the cut signal sits
    ``p*log2(alpha)`` bits below the norm).  The rounded witness must not cut
    more edges than the decoded value.
    """
    timings = {}
    t0 = time.perf_counter()
    p = as_p(p)
    inst = build_z(g, p, alpha)
    bits = max(inst.bits, bits or 0)
    wide = 2 * bits
    z = inst.matrix
    timings["build"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sign = p_norm_sign_search(z, p, limit=limit, bits=wide)
    timings["sign_search"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    asc = p_norm_ascent(z, p, cfg)
    timings["ascent"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    starts = [round_to_signs(sign.witness)]
    asc_start = round_to_signs(asc.witness)
    if asc_start not in starts:
        starts.append(asc_start)
    runs = []
    for s in starts:
        x, obj = polish_hp(z, s, p, wide, max_iters=polish_iters)
        runs.append((obj, s, x))
    # Highest objective wins; ties go to the lexicographically smaller start.
    # (Compare mpfr values directly: negating outside a context would round.)
    best_obj, start, x_star = runs[0]
    for obj, s, x in runs[1:]:
        if obj > best_obj or (obj == best_obj and s < start):
            best_obj, start, x_star = obj, s, x
    timings["polish"] = time.perf_counter() - t0

    sign_obj = sign.meta["power"]
    method = "ascent" if best_obj > sign_obj else "sign-search"
    f = root_p(max(best_obj, sign_obj), p, wide)
    res = decode_maxcut(f, g.n, p, inst.alpha, bits, rel_error=mpq(1, 2 ** (wide - 8)))
    x_r = round_to_signs(x_star)
    res.witness_cut = CutResult(cut_value(g, x_r), x_r)
    if res.rounding_valid and res.witness_cut.value > res.maxcut_rounded:
        raise RuntimeError(
            f"witness cuts {res.witness_cut.value} edges, decoded max cut {res.maxcut_rounded}")
    res.details = {
        "instance": inst,
        "f": f,
        "witness": x_star,
        "method": method,
        "sign_search": sign,
        "ascent": asc,
        "polish_bits": wide,
        "timings": timings,
    }
    return res


def pipeline_record(g: Graph, res: DecodeResult, digits: int = 40) -> dict:
    """JSON-compatible summary of a ``solve_maxcut_via_pnorm`` run."""
    inst = res.details["instance"]
    return {
        "n": g.n,
        "p": str(inst.p),
        "alpha": str(to_rational(inst.alpha)),
        "bits": inst.bits,
        "f": format_hp(res.details["f"], digits),
        "maxcut_estimate": format_hp(res.maxcut_estimate, digits),
        "maxcut_rounded": res.maxcut_rounded,
        "additive_error_bound": format_hp(res.additive_error_bound, 6),
        "rounding_valid": res.rounding_valid,
        "witness": list(res.witness_cut.witness),
        "witness_cut": res.witness_cut.value,
        "method": res.details["method"],
        "timings": {k: round(v, 6) for k, v in res.details["timings"].items()},
    }
