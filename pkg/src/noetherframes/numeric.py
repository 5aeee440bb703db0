"""Scalar helpers, dual numbers and small dense matrices.

Everything downstream (frames, operators, conservation laws) is written
against plain Python scalars so the same code paths run over float,
complex and Dual entries. Dual numbers carry one exact directional
derivative through arbitrary arithmetic, which is how d/dt of invariants
along a path velocity is computed without finite differencing.

Matrices here are tiny (2x2, 3x3, 5x5) and dense; they are stored as
tuples of tuples rather than numpy arrays so Dual entries work
unchanged.
"""

from __future__ import annotations

import cmath
import math

from . import config
from .errors import BranchPoint, NearZeroDivision, SingularMatrix

_NUMBER_TYPES = (int, float, complex)


def magnitude(x):
    """Absolute value of a scalar; for a Dual, of its primal part."""
    if isinstance(x, Dual):
        return magnitude(x.primal)
    return abs(x)


def imag_norm(x):
    """Largest imaginary magnitude inside a scalar (0.0 for reals)."""
    if isinstance(x, Dual):
        return max(imag_norm(x.primal), imag_norm(x.tangent))
    if isinstance(x, complex):
        return abs(x.imag)
    return 0.0


def real_part(x):
    if isinstance(x, Dual):
        return Dual(real_part(x.primal), real_part(x.tangent))
    if isinstance(x, complex):
        return x.real
    return x


def checked_div(num, den, exc=NearZeroDivision, what="denominator"):
    """Division that refuses denominators of magnitude below epsilon."""
    if magnitude(den) <= config.epsilon():
        raise exc(f"{what} has magnitude {magnitude(den):.3e}, below epsilon")
    return num / den


class Dual:
    """First-order dual number a + b*eps with eps^2 = 0.

    Arithmetic follows the usual forward-mode rules; mixing with plain
    ints, floats and complex numbers promotes them to constants. The
    primal and tangent slots may themselves be scalars of any supported
    kind, including complex.
    """

    __slots__ = ("primal", "tangent")

    def __init__(self, primal, tangent=0.0):
        self.primal = primal
        self.tangent = tangent

    def __repr__(self):
        return f"Dual({self.primal!r}, {self.tangent!r})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.primal + other.primal, self.tangent + other.tangent)
        if isinstance(other, _NUMBER_TYPES):
            return Dual(self.primal + other, self.tangent)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.primal - other.primal, self.tangent - other.tangent)
        if isinstance(other, _NUMBER_TYPES):
            return Dual(self.primal - other, self.tangent)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, _NUMBER_TYPES):
            return Dual(other - self.primal, -self.tangent)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.primal * other.primal,
                self.primal * other.tangent + self.tangent * other.primal,
            )
        if isinstance(other, _NUMBER_TYPES):
            return Dual(self.primal * other, self.tangent * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            if magnitude(other.primal) <= config.epsilon():
                raise NearZeroDivision("dual division by near-zero primal")
            p = self.primal / other.primal
            return Dual(p, (self.tangent - p * other.tangent) / other.primal)
        if isinstance(other, _NUMBER_TYPES):
            if abs(other) <= config.epsilon():
                raise NearZeroDivision("dual division by near-zero scalar")
            return Dual(self.primal / other, self.tangent / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, _NUMBER_TYPES):
            if magnitude(self.primal) <= config.epsilon():
                raise NearZeroDivision("dual division by near-zero primal")
            p = other / self.primal
            return Dual(p, -p * self.tangent / self.primal)
        return NotImplemented

    def __neg__(self):
        return Dual(-self.primal, -self.tangent)

    def __pos__(self):
        return self

    def __pow__(self, exponent):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return 1.0 / (self ** (-exponent))
        out = Dual(1.0, 0.0)
        base = self
        n = exponent
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Dual):
            return self.primal == other.primal and self.tangent == other.tangent
        return NotImplemented

    def __hash__(self):
        return hash((self.primal, self.tangent))


def lift(value, tangent=1.0):
    """Wrap a scalar as a Dual carrying the given tangent."""
    return Dual(value, tangent)


def primal_of(x):
    return x.primal if isinstance(x, Dual) else x


def tangent_of(x):
    return x.tangent if isinstance(x, Dual) else 0.0


def scalar_sqrt(x):
    """Square root over float, complex and Dual scalars.

    Negative real input raises ValueError: the caller decides whether
    to treat that as a degenerate window or to lift to complex first.
    A Dual at zero with nonzero tangent has no first-order square root
    and raises BranchPoint.
    """
    if isinstance(x, Dual):
        if magnitude(x.primal) <= config.epsilon():
            if magnitude(x.tangent) <= config.epsilon():
                return Dual(0.0, 0.0)
            raise BranchPoint("square root at zero with nonzero tangent")
        root = scalar_sqrt(x.primal)
        return Dual(root, x.tangent / (2.0 * root))
    if isinstance(x, complex):
        return cmath.sqrt(x)
    if x < 0.0:
        raise ValueError("negative radicand; lift to complex before sqrt")
    return math.sqrt(x)


def derivative_of(f, x):
    """Exact derivative of a scalar function at x via a dual lift."""
    return tangent_of(f(Dual(x, 1.0)))


_ALLOWED_DIMS = (2, 3, 5)


class SmallMatrix:
    """Dense square matrix of dimension 2, 3 or 5 with generic entries."""

    __slots__ = ("n", "rows")

    def __init__(self, rows):
        rows = tuple(tuple(r) for r in rows)
        n = len(rows)
        if n not in _ALLOWED_DIMS:
            raise ValueError(f"dimension {n} not in {_ALLOWED_DIMS}")
        for r in rows:
            if len(r) != n:
                raise ValueError("matrix rows must all have the same length")
        self.n = n
        self.rows = rows

    @classmethod
    def identity(cls, n):
        return cls(
            tuple(tuple(1.0 if i == j else 0.0 for j in range(n)) for i in range(n))
        )

    def __repr__(self):
        return f"SmallMatrix({self.rows!r})"

    def __matmul__(self, other):
        if not isinstance(other, SmallMatrix) or other.n != self.n:
            return NotImplemented
        n = self.n
        a, b = self.rows, other.rows
        return SmallMatrix(
            tuple(
                tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
                for i in range(n)
            )
        )

    def __add__(self, other):
        if not isinstance(other, SmallMatrix) or other.n != self.n:
            return NotImplemented
        return SmallMatrix(
            tuple(
                tuple(x + y for x, y in zip(ra, rb))
                for ra, rb in zip(self.rows, other.rows)
            )
        )

    def __sub__(self, other):
        if not isinstance(other, SmallMatrix) or other.n != self.n:
            return NotImplemented
        return SmallMatrix(
            tuple(
                tuple(x - y for x, y in zip(ra, rb))
                for ra, rb in zip(self.rows, other.rows)
            )
        )

    def __neg__(self):
        return self.scaled(-1.0)

    def scaled(self, s):
        return SmallMatrix(tuple(tuple(s * x for x in r) for r in self.rows))

    def transpose(self):
        n = self.n
        return SmallMatrix(
            tuple(tuple(self.rows[j][i] for j in range(n)) for i in range(n))
        )

    def mul_vec(self, v):
        """Matrix times column vector."""
        if len(v) != self.n:
            raise ValueError("vector length does not match matrix dimension")
        return tuple(sum(r[j] * v[j] for j in range(self.n)) for r in self.rows)

    def row_mul(self, v):
        """Row vector times matrix."""
        if len(v) != self.n:
            raise ValueError("vector length does not match matrix dimension")
        n = self.n
        return tuple(sum(v[i] * self.rows[i][j] for i in range(n)) for j in range(n))

    def trace(self):
        return sum(self.rows[i][i] for i in range(self.n))

    def det(self):
        r = self.rows
        if self.n == 2:
            return r[0][0] * r[1][1] - r[0][1] * r[1][0]
        if self.n == 3:
            return (
                r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
                - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
                + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
            )
        det, _ = self._eliminated()
        return det

    def inverse(self):
        eps = config.epsilon()
        r = self.rows
        if self.n == 2:
            d = self.det()
            if magnitude(d) <= eps:
                raise SingularMatrix("2x2 determinant below epsilon")
            return SmallMatrix(
                (
                    (r[1][1] / d, -r[0][1] / d),
                    (-r[1][0] / d, r[0][0] / d),
                )
            )
        if self.n == 3:
            d = self.det()
            if magnitude(d) <= eps:
                raise SingularMatrix("3x3 determinant below epsilon")
            cof = [
                [
                    r[(i + 1) % 3][(j + 1) % 3] * r[(i + 2) % 3][(j + 2) % 3]
                    - r[(i + 1) % 3][(j + 2) % 3] * r[(i + 2) % 3][(j + 1) % 3]
                    for i in range(3)
                ]
                for j in range(3)
            ]
            return SmallMatrix(tuple(tuple(c / d for c in row) for row in cof))
        _, inv = self._eliminated(build_inverse=True)
        return SmallMatrix(inv)

    def _eliminated(self, build_inverse=False):
        """Gauss-Jordan with partial pivoting; returns (det, inverse rows)."""
        n = self.n
        eps = config.epsilon()
        work = [list(r) for r in self.rows]
        aug = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
        det = 1.0
        for col in range(n):
            pivot_row = max(range(col, n), key=lambda i: magnitude(work[i][col]))
            if magnitude(work[pivot_row][col]) <= eps:
                raise SingularMatrix("elimination pivot below epsilon")
            if pivot_row != col:
                work[col], work[pivot_row] = work[pivot_row], work[col]
                aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
                det = -det
            pivot = work[col][col]
            det = det * pivot
            inv_pivot = 1.0 / pivot
            work[col] = [x * inv_pivot for x in work[col]]
            aug[col] = [x * inv_pivot for x in aug[col]]
            for row in range(n):
                if row == col:
                    continue
                factor = work[row][col]
                if magnitude(factor) == 0.0:
                    continue
                work[row] = [x - factor * y for x, y in zip(work[row], work[col])]
                aug[row] = [x - factor * y for x, y in zip(aug[row], aug[col])]
        if build_inverse:
            return det, tuple(tuple(row) for row in aug)
        return det, None

    def max_abs(self):
        return max(magnitude(x) for r in self.rows for x in r)

    def max_abs_diff(self, other):
        if not isinstance(other, SmallMatrix) or other.n != self.n:
            raise ValueError("cannot compare matrices of different dimensions")
        return max(
            magnitude(x - y)
            for ra, rb in zip(self.rows, other.rows)
            for x, y in zip(ra, rb)
        )

    def map_entries(self, f):
        return SmallMatrix(tuple(tuple(f(x) for x in r) for r in self.rows))


def mat_inverse(m: SmallMatrix) -> SmallMatrix:
    """Inverse of a small matrix; raises SingularMatrix below epsilon."""
    return m.inverse()


def row_minus(u, v):
    return tuple(x - y for x, y in zip(u, v))


def row_max_abs(u):
    return max(magnitude(x) for x in u)
