"""Exact rational dense matrices and their text serialization.

Every matrix built by the package has rational entries (gadget weights and
incidence entries are rational by construction), so ``DenseMatrix`` keeps the
exact ``mpq`` entries and derives a float64 view on demand for the numeric
kernels.

Text format::

    rows cols
    a11 a12 ...
    ...

Tokens are decimals (``0.5``, ``-3``, ``1e-3``) or exact rationals (``1/3``);
``#`` starts a comment.  Decimal output writes integers exactly and other
entries as the shortest decimal that reads back to the same double; rational
output (``num/den``) is lossless for every entry.
"""

from __future__ import annotations

from fractions import Fraction
from typing import IO, Iterable, Sequence

import numpy as np
from gmpy2 import mpfr, mpq

from .numerics import precision, to_rational


class MatrixFormatError(ValueError):
    """Malformed matrix text."""


class DenseMatrix:
    """Immutable rectangular matrix with exact rational entries."""

    __slots__ = ("_q", "_f")

    def __init__(self, entries):
        if isinstance(entries, DenseMatrix):
            self._q = entries._q
            self._f = entries._f
            return
        if isinstance(entries, np.ndarray) and entries.dtype != object:
            src = np.asarray(entries, dtype=np.float64)
            if src.ndim != 2:
                raise ValueError("matrix must be two-dimensional")
            if not np.all(np.isfinite(src)):
                raise ValueError("matrix entries must be finite")
            q = np.empty(src.shape, dtype=object)
            for idx, v in np.ndenumerate(src):
                q[idx] = mpq(float(v))
        else:
            rows = [list(r) for r in entries]
            width = len(rows[0]) if rows else 0
            if any(len(r) != width for r in rows):
                raise ValueError("ragged matrix rows")
            q = np.empty((len(rows), width), dtype=object)
            for i, r in enumerate(rows):
                for j, v in enumerate(r):
                    q[i, j] = to_rational(v)
        q.setflags(write=False)
        self._q = q
        self._f = None

    @classmethod
    def _wrap(cls, q: np.ndarray) -> "DenseMatrix":
        out = cls.__new__(cls)
        q.setflags(write=False)
        out._q = q
        out._f = None
        return out

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "DenseMatrix":
        q = np.empty((rows, cols), dtype=object)
        q.fill(mpq(0))
        return cls._wrap(q)

    @property
    def shape(self) -> tuple:
        return self._q.shape

    @property
    def rows(self) -> int:
        return self._q.shape[0]

    @property
    def cols(self) -> int:
        return self._q.shape[1]

    @property
    def exact(self) -> np.ndarray:
        """Read-only object array of ``mpq`` entries."""
        return self._q

    @property
    def f(self) -> np.ndarray:
        """float64 view (cached, read-only)."""
        if self._f is None:
            f = np.array([[float(v) for v in row] for row in self._q], dtype=np.float64)
            f = f.reshape(self._q.shape)
            f.setflags(write=False)
            self._f = f
        return self._f

    @property
    def T(self) -> "DenseMatrix":
        return DenseMatrix._wrap(self._q.T.copy())

    def scale(self, c) -> "DenseMatrix":
        c = to_rational(c)
        return DenseMatrix._wrap(self._q * c)

    def __getitem__(self, idx):
        return self._q[idx]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.all(self._q == other._q))

    __hash__ = None

    def __repr__(self) -> str:
        return f"DenseMatrix({self.rows}x{self.cols})"

    def nnz(self) -> int:
        return int(sum(1 for v in self._q.flat if v != 0))

    def is_ternary(self) -> bool:
        """True when every entry lies in {-1, 0, 1}."""
        return all(v in (-1, 0, 1) for v in self._q.flat)

    def nonzero_columns(self) -> np.ndarray:
        return np.array([j for j in range(self.cols) if any(v != 0 for v in self._q[:, j])],
                        dtype=np.int64)

    def take_columns(self, cols: Sequence[int]) -> "DenseMatrix":
        return DenseMatrix._wrap(self._q[:, list(cols)].copy())

    def matvec(self, x: Sequence) -> list:
        """Exact product with a rational vector (list of ``mpq``)."""
        xq = [to_rational(v) for v in x]
        if len(xq) != self.cols:
            raise ValueError(f"vector length {len(xq)} != {self.cols} columns")
        return [sum((a * b for a, b in zip(row, xq) if a != 0 and b != 0), mpq(0))
                for row in self._q]

    def matvec_hp(self, x: Sequence, bits: int) -> list:
        """Product with an mpfr/float vector in ``bits``-bit arithmetic."""
        if len(x) != self.cols:
            raise ValueError(f"vector length {len(x)} != {self.cols} columns")
        with precision(bits):
            xs = [mpfr(v) if not isinstance(v, Fraction) else mpfr(to_rational(v)) for v in x]
            out = []
            for row in self._q:
                acc = mpfr(0)
                for a, b in zip(row, xs):
                    if a != 0:
                        acc += a * b
                out.append(acc)
        return out


def as_dense(m) -> DenseMatrix:
    if isinstance(m, DenseMatrix):
        return m
    return DenseMatrix(np.asarray(m) if not isinstance(m, (list, tuple)) else m)


def vstack(blocks: Iterable) -> DenseMatrix:
    mats = [as_dense(b) for b in blocks]
    if len({m.cols for m in mats}) != 1:
        raise ValueError("blocks must share the column count")
    return DenseMatrix._wrap(np.vstack([m.exact for m in mats]))


def pad_to(m: DenseMatrix, rows: int, cols: int) -> DenseMatrix:
    """Embed ``m`` in the top-left corner of a zero ``rows x cols`` matrix."""
    m = as_dense(m)
    if rows < m.rows or cols < m.cols:
        raise ValueError("padding cannot shrink a matrix")
    q = np.empty((rows, cols), dtype=object)
    q.fill(mpq(0))
    q[: m.rows, : m.cols] = m.exact
    return DenseMatrix._wrap(q)


def _format_entry(v: mpq, rational: bool) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    if rational:
        return f"{v.numerator}/{v.denominator}"
    return repr(float(v))


def write_matrix(m, stream: IO[str], rational: bool = False) -> None:
    """Serialize ``m``; ``rational=True`` keeps non-integers exact as ``num/den``."""
    m = as_dense(m)
    stream.write(f"{m.rows} {m.cols}\n")
    for row in m.exact:
        stream.write(" ".join(_format_entry(v, rational) for v in row) + "\n")


def dumps_matrix(m, rational: bool = False) -> str:
    import io

    buf = io.StringIO()
    write_matrix(m, buf, rational=rational)
    return buf.getvalue()


def parse_matrix(text) -> DenseMatrix:
    """Inverse of ``write_matrix``; decimal tokens are read as exact decimals."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((lineno, body.split()))
    if not lines:
        raise MatrixFormatError("empty matrix file")
    lineno, head = lines[0]
    try:
        rows, cols = (int(t) for t in head)
    except ValueError:
        raise MatrixFormatError(f"line {lineno}: header must be 'rows cols'") from None
    if rows < 1 or cols < 1:
        raise MatrixFormatError(f"line {lineno}: dimensions must be positive")
    body = lines[1:]
    if len(body) != rows:
        raise MatrixFormatError(f"expected {rows} rows, found {len(body)}")
    entries = []
    for lineno, toks in body:
        if len(toks) != cols:
            raise MatrixFormatError(f"line {lineno}: expected {cols} entries, found {len(toks)}")
        try:
            entries.append([Fraction(t) for t in toks])
        except (ValueError, ZeroDivisionError):
            raise MatrixFormatError(f"line {lineno}: bad numeric token") from None
    return DenseMatrix(entries)
