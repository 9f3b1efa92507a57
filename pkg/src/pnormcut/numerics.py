"""Scalar layer: exact rational exponents and controlled-precision powers.

High-precision scalars are ``gmpy2.mpfr`` values.  Precision is always passed
explicitly (in bits) and applied through thread-local gmpy2 contexts, so the
functions here are safe to call from several threads at once.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterator, Union

import gmpy2
from gmpy2 import mpfr, mpq, mpz

__all__ = [
    "DOUBLE_BITS",
    "HPScalar",
    "PExponent",
    "as_p",
    "conjugate",
    "decode_precision_bits",
    "format_hp",
    "hp",
    "pow_abs",
    "precision",
    "to_rational",
]

DOUBLE_BITS = 53

HPScalar = type(mpfr(0))

Number = Union[int, float, Fraction, "mpq", "mpz", "mpfr"]


@contextmanager
def precision(bits: int) -> Iterator[None]:
    """Run the enclosed block with gmpy2 working precision set to ``bits``."""
    with gmpy2.context(gmpy2.get_context(), precision=int(bits)):
        yield


def to_rational(x) -> mpq:
    """Exact rational value of ``x`` (floats and mpfr values convert exactly)."""
    if isinstance(x, PExponent):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return mpq(Fraction(x.strip()))
    if isinstance(x, (Fraction, Rational)) and not isinstance(x, (int, type(mpz(0)))):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r} has no rational form")
        return mpq(x)
    return mpq(x)


def hp(x, bits: int) -> mpfr:
    """Round ``x`` to an mpfr of exactly ``bits`` bits."""
    if isinstance(x, (Fraction, PExponent)):
        x = to_rational(x)
    return mpfr(x, int(bits))


def format_hp(x, digits: int = 20) -> str:
    """Scientific-notation string of an mpfr/number with ``digits`` significant digits."""
    x = mpfr(x, max(DOUBLE_BITS, getattr(x, "precision", DOUBLE_BITS)))
    if x == 0:
        return "0"
    if not gmpy2.is_finite(x):
        return str(x)
    mant, exp, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    return f"{sign}{mant[0]}.{mant[1:]}e{exp - 1:+d}"


@dataclass(frozen=True, order=False)
class PExponent:
    """Rational exponent ``numerator/denominator >= 1`` kept in lowest terms."""

    numerator: int
    denominator: int = 1

    def __post_init__(self):
        num, den = int(self.numerator), int(self.denominator)
        if den <= 0:
            raise ValueError("exponent denominator must be positive")
        g = math.gcd(num, den)
        num, den = num // g, den // g
        if num < den:
            raise ValueError(f"exponent must be >= 1, got {num}/{den}")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @classmethod
    def parse(cls, text: str) -> "PExponent":
        """Parse ``"3"``, ``"2.5"`` or ``"5/2"`` as an exact rational."""
        try:
            frac = Fraction(str(text).strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse exponent {text!r}") from exc
        return cls(frac.numerator, frac.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def rational(self) -> mpq:
        return mpq(self.numerator, self.denominator)

    @property
    def is_integer(self) -> bool:
        return self.denominator == 1

    def __float__(self) -> float:
        return self.numerator / self.denominator

    def __str__(self) -> str:
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"

    def _cmp_value(self, other) -> Fraction:
        if isinstance(other, PExponent):
            return other.fraction
        return Fraction(other)

    def __lt__(self, other):
        return self.fraction < self._cmp_value(other)

    def __le__(self, other):
        return self.fraction <= self._cmp_value(other)

    def __gt__(self, other):
        return self.fraction > self._cmp_value(other)

    def __ge__(self, other):
        return self.fraction >= self._cmp_value(other)

    def __eq__(self, other):
        if isinstance(other, PExponent):
            return (self.numerator, self.denominator) == (other.numerator, other.denominator)
        try:
            return self.fraction == Fraction(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.fraction)

    def conjugate(self) -> "PExponent":
        return conjugate(self)


def as_p(p) -> PExponent:
    """Coerce an int, Fraction, decimal string or PExponent to a PExponent."""
    if isinstance(p, PExponent):
        return p
    if isinstance(p, str):
        return PExponent.parse(p)
    if isinstance(p, float):
        return PExponent.parse(repr(p))
    frac = Fraction(p)
    return PExponent(frac.numerator, frac.denominator)


def conjugate(p) -> PExponent:
    """Exact conjugate exponent ``p/(p-1)``; undefined (raises) at ``p = 1``."""
    p = as_p(p)
    if p.numerator == p.denominator:
        raise ValueError("p = 1 has conjugate exponent infinity")
    return PExponent(p.numerator, p.numerator - p.denominator)


def _log_magnitude(t: mpfr) -> float:
    """Cheap upper estimate of |ln t| that never overflows."""
    return (abs(gmpy2.get_exp(t)) + 1) * 0.6931471805599453


def pow_abs(t, p, bits: int = DOUBLE_BITS) -> mpfr:
    """``|t|**p`` as an mpfr of ``bits`` bits.

    Integer exponents are evaluated exactly on rational input and rounded
    once.  Other exponents go through ``exp(p*log|t|)`` with enough guard bits
    to absorb the error amplification of the exponential.
    """
    if bits < DOUBLE_BITS:
        raise ValueError(f"bits must be >= {DOUBLE_BITS}")
    p = as_p(p)
    if isinstance(t, HPScalar):
        if not gmpy2.is_finite(t):
            raise ValueError("pow_abs of a non-finite value")
        with precision(t.precision):
            t_abs = abs(t)
        if t_abs == 0:
            return mpfr(0, bits)
        if p.is_integer:
            with precision(max(bits + 8, t_abs.precision + 8)):
                out = t_abs ** p.numerator
            return mpfr(out, bits)
    else:
        q = abs(to_rational(t))
        if q == 0:
            return mpfr(0, bits)
        if p.is_integer:
            return mpfr(q ** p.numerator, bits)
        t_abs = None
    base = t_abs if t_abs is not None else mpfr(q, DOUBLE_BITS)
    guard = int(math.ceil(math.log2(float(p) * _log_magnitude(base) + 2.0)))
    with precision(bits + 24 + guard):
        if t_abs is None:
            base = mpfr(q)
        out = gmpy2.exp(p.rational * gmpy2.log(base))
    return mpfr(out, bits)


def decode_precision_bits(n: int, p, alpha) -> int:
    """Working precision that keeps ~50 good bits after the decode subtraction.

    The decode step subtracts ``n * alpha**p`` from a quantity of the same
    size, so the precision grows with ``p*log2(alpha) + p*log2(2n)``.
    """
    p = as_p(p)
    if n < 2:
        raise ValueError("n must be >= 2")
    alpha_q = to_rational(alpha) if not isinstance(alpha, HPScalar) else None
    with precision(256):
        a = mpfr(alpha_q) if alpha_q is not None else mpfr(alpha)
        if a < 1:
            raise ValueError("alpha must be >= 1")
        magnitude = mpfr(p.rational) * (gmpy2.log2(a) + gmpy2.log2(mpfr(2 * n)))
        return int(gmpy2.ceil(magnitude)) + 64
