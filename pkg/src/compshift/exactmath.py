"""Exact rational scalars, dense polynomials and matrices.

Every quantity handled by the package is rational, so the whole pipeline
runs on :class:`fractions.Fraction` without any tolerance policy.  Square
roots of weights are never formed; callers work with squared quantities.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rational = Fraction
RationalLike = Union[int, Fraction, str]

_RATIONAL_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")


class SingularMatrixError(ValueError):
    """Raised when a linear solve is requested on a singular matrix."""


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` into a Fraction.

    Decimal and exponent notation are refused on purpose: any value that
    reaches the library must already be exact.
    """
    if not isinstance(text, str):
        raise TypeError(f"rational must be given as a string, got {type(text).__name__}")
    match = _RATIONAL_RE.match(text.strip())
    if match is None:
        raise ValueError(f"not a rational of the form p/q: {text!r}")
    num = int(match.group(1))
    den = int(match.group(2)) if match.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(x: Fraction | int) -> str:
    """Canonical ``"p/q"`` form (``"p"`` when q = 1)."""
    return str(Fraction(x))


def as_rational(x: RationalLike) -> Fraction:
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    raise TypeError(f"cannot use {type(x).__name__} as an exact rational")


def rational_arith(a: Fraction, b: Fraction, op: str) -> Fraction:
    a, b = Fraction(a), Fraction(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise ZeroDivisionError(f"division of {a} by zero")
        return a / b
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Polynomial:
    """Dense polynomial; ``coeffs[i]`` is the coefficient of ``x**i``.

    The zero polynomial has no coefficients and degree -1.
    """

    coeffs: tuple[Fraction, ...] = ()

    def __init__(self, coeffs: Iterable[RationalLike] = ()):
        cs = [as_rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def constant(cls, c: RationalLike) -> "Polynomial":
        return cls([c])

    @classmethod
    def monomial(cls, degree: int, c: RationalLike = 1) -> "Polynomial":
        return cls([0] * degree + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __call__(self, x: RationalLike) -> Fraction:
        return poly_eval(self, as_rational(x))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial(self.coeff(i) + other.coeff(i) for i in range(n))

    def __neg__(self) -> "Polynomial":
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial | RationalLike") -> "Polynomial":
        if not isinstance(other, Polynomial):
            k = as_rational(other)
            return Polynomial(c * k for c in self.coeffs)
        if self.is_zero() or other.is_zero():
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def shift(self, k: RationalLike) -> "Polynomial":
        return poly_shift(self, as_rational(k))

    def ascending(self, length: int) -> list[Fraction]:
        """Coefficients ``[c_0, ..., c_{length-1}]`` padded with zeros."""
        if length < len(self.coeffs):
            raise ValueError(f"degree {self.degree} does not fit in {length} coefficients")
        return [self.coeff(i) for i in range(length)]

    def __str__(self) -> str:
        return format_polynomial(self)


def poly_eval(p: Polynomial, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


def poly_shift(p: Polynomial, k: Fraction) -> Polynomial:
    """Return ``p(x + k)`` expanded by the binomial theorem."""
    n = len(p.coeffs)
    out = [Fraction(0)] * n
    for j, c in enumerate(p.coeffs):
        if c == 0:
            continue
        # c (x + k)^j = sum_l C(j, l) k^(j-l) x^l
        for l in range(j + 1):
            out[l] += c * math.comb(j, l) * k ** (j - l)
    return Polynomial(out)


def poly_interpolate(points: Sequence[tuple[RationalLike, RationalLike]]) -> Polynomial:
    """Unique polynomial of degree <= len(points) - 1 through ``points``.

    Built with Newton divided differences, then expanded to the monomial
    basis.
    """
    xs = [as_rational(x) for x, _ in points]
    ys = [as_rational(y) for _, y in points]
    if len(set(xs)) != len(xs):
        raise ValueError("interpolation abscissae must be pairwise distinct")
    n = len(xs)
    table = list(ys)
    newton = []
    for level in range(n):
        newton.append(table[0])
        table = [
            (table[i + 1] - table[i]) / (xs[i + level + 1] - xs[i])
            for i in range(len(table) - 1)
        ]
    result = Polynomial()
    basis = Polynomial.constant(1)
    for level, coef in enumerate(newton):
        result = result + basis * coef
        basis = basis * Polynomial([-xs[level], 1])
    return result


def format_polynomial(p: Polynomial, var: str = "x") -> str:
    """Human-readable form, highest degree first, e.g. ``"4/7 x + 1"``."""
    if p.is_zero():
        return "0"
    parts: list[str] = []
    for i in range(p.degree, -1, -1):
        c = p.coeffs[i]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if i == 0:
            body = format_rational(mag)
        else:
            mono = var if i == 1 else f"{var}^{i}"
            body = mono if mag == 1 else f"{format_rational(mag)} {mono}"
        if not parts:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalMatrix:
    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries, "
                f"got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[RationalLike]], cols: int | None = None) -> "RationalMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), cols, tuple(as_rational(x) for r in rows for x in r))

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls.from_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)], cols=n)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls(rows, cols, (Fraction(0),) * (rows * cols))

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> list[Fraction]:
        return list(self.entries[i * self.cols:(i + 1) * self.cols])

    def to_rows(self) -> list[list[Fraction]]:
        return [self.row(i) for i in range(self.rows)]

    def hstack(self, other: "RationalMatrix") -> "RationalMatrix":
        if other.rows != self.rows:
            raise ValueError("row count mismatch")
        return RationalMatrix.from_rows(
            [a + b for a, b in zip(self.to_rows(), other.to_rows())], cols=self.cols + other.cols
        )

    def vstack(self, other: "RationalMatrix") -> "RationalMatrix":
        if other.cols != self.cols:
            raise ValueError("column count mismatch")
        return RationalMatrix.from_rows(self.to_rows() + other.to_rows(), cols=self.cols)

    @classmethod
    def column(cls, values: Sequence[RationalLike]) -> "RationalMatrix":
        return cls.from_rows([[v] for v in values], cols=1)

    def matvec(self, v: Sequence[Fraction]) -> list[Fraction]:
        if len(v) != self.cols:
            raise ValueError("vector length mismatch")
        return [sum((a * b for a, b in zip(self.row(i), v)), Fraction(0)) for i in range(self.rows)]


def _integer_rows(rows: list[list[Fraction]]) -> list[list[int]]:
    # Scaling a row by a nonzero constant preserves rank and solution sets.
    out = []
    for r in rows:
        scale = math.lcm(*(x.denominator for x in r)) if r else 1
        out.append([int(x * scale) for x in r])
    return out


def _bareiss(m: list[list[int]], ncols: int, full_pivoting: bool) -> tuple[list[list[int]], list[int], int]:
    """In-place fraction-free elimination on the first ``ncols`` columns.

    Returns the reduced matrix, the column permutation and the rank.
    Intermediate entries are minors of the input, so growth stays
    polynomial and every division is exact.
    """
    nrows = len(m)
    perm = list(range(len(m[0]) if m else 0))
    prev = 1
    rank = 0
    for k in range(min(nrows, ncols)):
        pivot = None
        search_cols = range(k, ncols) if full_pivoting else range(k, k + 1)
        best = None
        for j in search_cols:
            for i in range(k, nrows):
                if m[i][j] != 0 and (best is None or abs(m[i][j]) < best):
                    best, pivot = abs(m[i][j]), (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        m[k], m[pi] = m[pi], m[k]
        if pj != k:
            for row in m:
                row[k], row[pj] = row[pj], row[k]
            perm[k], perm[pj] = perm[pj], perm[k]
        pk = m[k][k]
        for i in range(k + 1, nrows):
            mik = m[i][k]
            row_i, row_k = m[i], m[k]
            for j in range(k + 1, len(row_i)):
                row_i[j] = (row_i[j] * pk - mik * row_k[j]) // prev
            row_i[k] = 0
        prev = pk
        rank += 1
    return m, perm, rank


def matrix_rank(M: RationalMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    _, _, rank = _bareiss(_integer_rows(M.to_rows()), M.cols, full_pivoting=True)
    return rank


def matrix_det(M: RationalMatrix) -> Fraction:
    if M.rows != M.cols:
        raise ValueError("determinant of a non-square matrix")
    n = M.rows
    if n == 0:
        return Fraction(1)
    rows = M.to_rows()
    scales = [math.lcm(*(x.denominator for x in r)) for r in rows]
    m = [[int(x * s) for x in r] for r, s in zip(rows, scales)]
    sign = 1
    prev = 1
    for k in range(n):
        pivot = next((i for i in range(k, n) if m[i][k] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != k:
            m[k], m[pivot] = m[pivot], m[k]
            sign = -sign
        pk = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pk - mik * m[k][j]) // prev
            m[i][k] = 0
        prev = pk
    return Fraction(sign * m[n - 1][n - 1], math.prod(scales))


def matrix_solve(M: RationalMatrix, rhs: Sequence[RationalLike]) -> list[Fraction]:
    """Unique solution of ``M x = rhs`` for square nonsingular ``M``."""
    if M.rows != M.cols:
        raise ValueError("matrix_solve needs a square matrix")
    if len(rhs) != M.rows:
        raise ValueError("right-hand side length mismatch")
    n = M.rows
    aug = [r + [as_rational(b)] for r, b in zip(M.to_rows(), rhs)]
    m, perm, rank = _bareiss(_integer_rows(aug), n, full_pivoting=False)
    if rank < n:
        raise SingularMatrixError("matrix is singular")
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(m[i][n])
        for j in range(i + 1, n):
            acc -= m[i][j] * x[j]
        x[i] = acc / m[i][i]
    return x
