"""Exact Gaussian-rational scalars and small exact linear algebra.

The combinatorial layers (vanishing of roots on coefficients, strata of
parameter space, partial fractions) need exact equality tests, so all of
them run over Q(i) rather than floats.
"""

from __future__ import annotations

import re as _re
from fractions import Fraction

__all__ = ["QI", "as_qi", "parse_scalar", "format_scalar",
           "exact_rank", "exact_inverse", "solve_linear"]


class QI:
    """Gaussian rational re + im*i with Fraction components."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    # arithmetic ------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return QI(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return QI(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return QI(other.re - self.re, other.im - self.im)

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return QI(self.re * other.re - self.im * other.im,
                  self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return QI((self.re * other.re + self.im * other.im) / d,
                  (self.im * other.re - self.re * other.im) / d)

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, e):
        if not isinstance(e, int) or e < 0:
            return NotImplemented
        out = QI(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __pos__(self):
        return self

    # comparison / hashing --------------------------------------------
    def __eq__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __repr__(self):
        return f"QI({self.re!r}, {self.im!r})"

    def __str__(self):
        return format_scalar(self)

    def __complex__(self):
        return complex(self.re) + 1j * complex(self.im)

    def sort_key(self):
        # descending fundamental-domain order uses the negation of this
        return (self.re, self.im)


def _coerce(x):
    if isinstance(x, QI):
        return x
    if isinstance(x, (int, Fraction)):
        return QI(x)
    return None


def as_qi(x) -> QI:
    """Coerce ints, Fractions, exact strings, or QI to QI."""
    if isinstance(x, QI):
        return x
    if isinstance(x, (int, Fraction)):
        return QI(x)
    if isinstance(x, str):
        return parse_scalar(x)
    raise TypeError(f"cannot coerce {x!r} to an exact scalar")


_TERM = _re.compile(r"([+-]?[^+-]*(?:[+-]\s*$)?)")


def parse_scalar(s: str) -> QI:
    """Parse "a/b+c/d i" style exact scalar strings."""
    t = s.replace(" ", "")
    if not t:
        raise ValueError("empty scalar string")
    re_part = Fraction(0)
    im_part = Fraction(0)
    # split into signed terms
    terms = _re.findall(r"[+-]?[^+-]+", t)
    if "".join(terms) != t:
        raise ValueError(f"bad scalar string {s!r}")
    for term in terms:
        if term in ("i", "+i"):
            im_part += 1
        elif term == "-i":
            im_part -= 1
        elif term.endswith("i"):
            im_part += Fraction(term[:-1].rstrip("*"))
        else:
            re_part += Fraction(term)
    return QI(re_part, im_part)


def format_scalar(x: QI) -> str:
    if x.im == 0:
        return str(x.re)
    if x.re == 0:
        return f"{x.im} i"
    sign = "+" if x.im > 0 else "-"
    return f"{x.re}{sign}{abs(x.im)} i"


# ---------------------------------------------------------------------
# generic dense linear algebra over a field (QI or complex)

def _is_zero(x, tol):
    if isinstance(x, QI):
        return not bool(x)
    return abs(x) <= tol


def exact_rank(rows):
    """Rank of a list of equal-length QI (or Fraction/int) row vectors."""
    rows = [[as_qi(x) for x in r] for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    col = 0
    while rank < len(rows) and col < ncols:
        piv = next((r for r in range(rank, len(rows)) if bool(rows[r][col])), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pr = rows[rank]
        inv = QI(1) / pr[col]
        rows[rank] = pr = [x * inv for x in pr]
        for r in range(len(rows)):
            if r != rank and bool(rows[r][col]):
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], pr)]
        rank += 1
        col += 1
    return rank


def solve_linear(mat, rhs, tol=0.0):
    """Solve mat @ x = rhs by Gaussian elimination with scalar pivots.

    mat is a square list-of-lists of scalars; rhs entries may be scalars
    or anything supporting scalar multiplication and addition (matrices),
    which is how matrix-coefficient systems with scalar structure
    constants are solved.
    """
    n = len(mat)
    a = [list(row) for row in mat]
    b = list(rhs)
    perm = list(range(n))
    for col in range(n):
        if isinstance(a[col][col], QI) or isinstance(a[col][col], (int, Fraction)):
            piv = next((r for r in range(col, n) if not _is_zero(a[r][col], tol)), None)
        else:
            piv = max(range(col, n), key=lambda r: abs(a[r][col]))
            if _is_zero(a[piv][col], tol):
                piv = None
        if piv is None:
            raise ZeroDivisionError("singular linear system")
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        pv = a[col][col]
        for r in range(col + 1, n):
            if _is_zero(a[r][col], tol):
                continue
            f = a[r][col] / pv
            for c in range(col, n):
                a[r][c] = a[r][c] - f * a[col][c]
            b[r] = b[r] - f * b[col]
    x = [None] * n
    for r in range(n - 1, -1, -1):
        acc = b[r]
        for c in range(r + 1, n):
            acc = acc - a[r][c] * x[c]
        one = QI(1) if isinstance(a[r][r], QI) else 1.0
        x[r] = (one / a[r][r]) * acc
    return x


def exact_inverse(mat):
    """Inverse of a square QI matrix given as list of lists."""
    n = len(mat)
    cols = []
    for j in range(n):
        e = [QI(1) if i == j else QI(0) for i in range(n)]
        cols.append(solve_linear(mat, e))
    return [[cols[j][i] for j in range(n)] for i in range(n)]
