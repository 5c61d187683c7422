"""Exact Gaussian-rational scalars and dense matrices.

Every value here is exact: scalars are ``a + b*i`` with ``a`` and ``b``
held as :class:`fractions.Fraction`, and matrices are immutable row-major
tuples of such scalars.  Rank, kernel and inverse share one elimination
engine that works on Gaussian *integer* rows (each row is scaled by the lcm
of its denominators first), so elimination itself never forms a fraction.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Sequence

from .config import current_limits
from .errors import (
    DimensionError,
    GaussianDivisionByZero,
    SingularMatrixError,
    SizeCapError,
)

__all__ = [
    "GaussianRational",
    "ExactMatrix",
    "parse_rational",
    "gr_arith",
    "mat_kernel",
    "mat_kernel_with_free_columns",
    "mat_rank",
    "mat_inverse",
    "weyr_sequence",
    "block_sizes_from_weyr",
    "jordan_block",
    "direct_sum",
    "rational_sqrt_upper",
    "ZERO",
    "ONE",
]

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*([+-]?\d+))?\s*$")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p"`` or ``"p/q"`` into a reduced Fraction.

    Decimal or float notation is rejected on purpose.
    """
    if not isinstance(text, str):
        raise ValueError(f"rational must be given as a string, got {text!r}")
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ValueError(f"malformed rational {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator in rational {text!r}")
    return Fraction(num, den)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class GaussianRational:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            if im != 0:
                raise TypeError("imaginary part given twice")
            re, im = re.re, re.im
        object.__setattr__(self, "re", _as_fraction(re))
        object.__setattr__(self, "im", _as_fraction(im))

    @classmethod
    def _make(cls, re: Fraction, im: Fraction) -> "GaussianRational":
        obj = object.__new__(cls)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "im", im)
        return obj

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            raise TypeError("floating complex values are not exact; pass re/im rationals")
        return cls(x)

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    def __reduce__(self):
        return (GaussianRational, (self.re, self.im))

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_real(self) -> bool:
        return not self.im

    def __bool__(self) -> bool:
        return not self.is_zero()

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return GaussianRational._make(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return GaussianRational._make(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return other - self

    def __neg__(self):
        return GaussianRational._make(-self.re, -self.im)

    def __mul__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussianRational._make(a * c, b)
        return GaussianRational._make(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return other * self.reciprocal()

    def reciprocal(self) -> "GaussianRational":
        n = self.modulus_squared()
        if not n:
            raise GaussianDivisionByZero("division by zero Gaussian rational")
        return GaussianRational._make(self.re / n, -self.im / n)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._make(self.re, -self.im)

    def modulus_squared(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # -- comparison / hashing ----------------------------------------------

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return not self.im and self.re == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def sort_key(self):
        return (self.re, self.im)

    # -- text ----------------------------------------------------------------

    def __repr__(self):
        return f"GaussianRational({str(self.re)!r}, {str(self.im)!r})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def _coerce_or_none(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational._make(Fraction(x), Fraction(0))
    return None


ZERO = GaussianRational(0)
ONE = GaussianRational(1)


def gr_arith(a, b, op: str):
    """Binary field operation by name; ``modulus_squared`` ignores ``b``."""
    a = GaussianRational.coerce(a)
    if op == "modulus_squared":
        return a.modulus_squared()
    b = GaussianRational.coerce(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# Gaussian integer helpers (pairs of Python ints)


def _gmul(x, y):
    a, b = x
    c, d = y
    return (a * c - b * d, a * d + b * c)


def _gdiv_to_rational(x, y) -> GaussianRational:
    a, b = x
    c, d = y
    n = c * c + d * d
    if n == 0:
        raise GaussianDivisionByZero("division by zero Gaussian integer")
    return GaussianRational._make(Fraction(a * c + b * d, n), Fraction(b * c - a * d, n))


def _row_to_gints(values: Iterable[tuple[int, GaussianRational]]) -> dict:
    """Scale a sparse rational row to Gaussian integers (row-wise lcm)."""
    items = [(c, v) for c, v in values if v]
    if not items:
        return {}
    den = 1
    for _, v in items:
        den = math.lcm(den, v.re.denominator, v.im.denominator)
    return {
        c: (v.re.numerator * (den // v.re.denominator), v.im.numerator * (den // v.im.denominator))
        for c, v in items
    }


def _strip_content(row: dict) -> None:
    g = 0
    for a, b in row.values():
        g = math.gcd(g, a, b)
        if g == 1:
            return
    if g > 1:
        for c, (a, b) in row.items():
            row[c] = (a // g, b // g)


def _reduce_rows(rows: list[dict], pivot_limit: int) -> list[tuple[int, int]]:
    """Fraction-free reduction to reduced echelon form, in place.

    Pivot choice: among rows not yet used as pivots, the first (in original
    order) having a nonzero entry in a column ``< pivot_limit``; the pivot
    column is that row's first such nonzero.  The pivot column is then
    cleared from every other row by ``row := p*row - f*pivot_row``.
    Returns ``[(row_index, pivot_column), ...]`` in pivot order.
    """
    used = [False] * len(rows)
    pivots = []
    while True:
        chosen = None
        for r, row in enumerate(rows):
            if used[r] or not row:
                continue
            cand = [c for c in row if c < pivot_limit]
            if cand:
                chosen = (r, min(cand))
                break
        if chosen is None:
            return pivots
        r, c = chosen
        used[r] = True
        prow = rows[r]
        p = prow[c]
        for s, srow in enumerate(rows):
            if s == r:
                continue
            f = srow.get(c)
            if f is None:
                continue
            new = {col: _gmul(p, v) for col, v in srow.items()}
            for col, v in prow.items():
                t = _gmul(f, v)
                old = new.get(col)
                x = (-t[0], -t[1]) if old is None else (old[0] - t[0], old[1] - t[1])
                if x[0] or x[1]:
                    new[col] = x
                else:
                    new.pop(col, None)
            _strip_content(new)
            rows[s] = new
        pivots.append((r, c))


def _kernel_of_rows(rows: list[dict], ncols: int) -> list[tuple[int, dict]]:
    """Kernel basis of a sparse system as ``(free column, {col: value})`` pairs.

    The vector for free column ``f`` is 1 at ``f`` and 0 at every other free
    column.
    """
    pivots = _reduce_rows(rows, ncols)
    pivot_cols = {c for _, c in pivots}
    basis = []
    for f in range(ncols):
        if f in pivot_cols:
            continue
        vec = {f: ONE}
        for r, c in pivots:
            val = rows[r].get(f)
            if val is not None:
                vec[c] = -_gdiv_to_rational(val, rows[r][c])
        basis.append((f, vec))
    return basis


def kernel_of_sparse_system(equations: Sequence[dict], ncols: int) -> list[dict]:
    """Kernel of a linear system given as sparse rational rows.

    ``equations`` is a list of ``{column: GaussianRational}``.  Used by the
    Sylvester oracle, where the systems are large but very sparse.
    """
    rows = [_row_to_gints(eq.items()) for eq in equations]
    return [vec for _, vec in _kernel_of_rows(rows, ncols)]


def rank_of_sparse_system(equations: Sequence[dict], ncols: int) -> int:
    rows = [_row_to_gints(eq.items()) for eq in equations]
    return len(_reduce_rows(rows, ncols))


# ---------------------------------------------------------------------------


class ExactMatrix:
    """Immutable dense matrix of Gaussian rationals (0-based indices)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Iterable):
        entries = tuple(GaussianRational.coerce(e) for e in entries)
        if rows < 0 or cols < 0:
            raise DimensionError("negative dimension")
        if len(entries) != rows * cols:
            raise DimensionError(f"expected {rows * cols} entries, got {len(entries)}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def _raw(cls, rows: int, cols: int, entries: tuple) -> "ExactMatrix":
        obj = object.__new__(cls)
        object.__setattr__(obj, "rows", rows)
        object.__setattr__(obj, "cols", cols)
        object.__setattr__(obj, "entries", entries)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("ExactMatrix is immutable")

    def __reduce__(self):
        return (ExactMatrix, (self.rows, self.cols, self.entries))

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "ExactMatrix":
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise DimensionError("ragged rows")
        return cls(len(rows), ncols, [x for r in rows for x in r])

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "ExactMatrix":
        cols = rows if cols is None else cols
        return cls._raw(rows, cols, (ZERO,) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls.diagonal([ONE] * n)

    @classmethod
    def diagonal(cls, values: Sequence) -> "ExactMatrix":
        n = len(values)
        out = [ZERO] * (n * n)
        for i, v in enumerate(values):
            out[i * n + i] = GaussianRational.coerce(v)
        return cls._raw(n, n, tuple(out))

    @classmethod
    def column(cls, values: Sequence) -> "ExactMatrix":
        return cls(len(values), 1, values)

    @classmethod
    def from_sparse(cls, rows: int, cols: int, items: dict) -> "ExactMatrix":
        """Build from ``{(i, j): value}``; absent positions are zero."""
        out = [ZERO] * (rows * cols)
        for (i, j), v in items.items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise DimensionError(f"position {(i, j)} outside {rows}x{cols}")
            out[i * cols + j] = GaussianRational.coerce(v)
        return cls._raw(rows, cols, tuple(out))

    # -- access ----------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"index {ij} out of range for {self.rows}x{self.cols}")
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple:
        return self.entries[j::self.cols] if self.cols else ()

    def to_rows(self) -> list[list[GaussianRational]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def nonzero_items(self):
        c = self.cols
        for k, v in enumerate(self.entries):
            if v:
                yield (k // c, k % c), v

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "ExactMatrix":
        return ExactMatrix._raw(
            r1 - r0,
            c1 - c0,
            tuple(self.entries[i * self.cols + j] for i in range(r0, r1) for j in range(c0, c1)),
        )

    def with_block(self, r0: int, c0: int, block: "ExactMatrix") -> "ExactMatrix":
        out = list(self.entries)
        for i in range(block.rows):
            for j in range(block.cols):
                out[(r0 + i) * self.cols + c0 + j] = block.entries[i * block.cols + j]
        return ExactMatrix._raw(self.rows, self.cols, tuple(out))

    # -- predicates -----------------------------------------------------------

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return not any(self.entries)

    def is_identity(self) -> bool:
        return self.is_square() and self == ExactMatrix.identity(self.rows)

    def is_upper_triangular(self) -> bool:
        c = self.cols
        return all(not v for k, v in enumerate(self.entries) if k // c > k % c)

    def is_diagonal(self) -> bool:
        c = self.cols
        return all(not v for k, v in enumerate(self.entries) if k // c != k % c)

    def diagonal_entries(self) -> list[GaussianRational]:
        return [self[i, i] for i in range(min(self.rows, self.cols))]

    # -- algebra ---------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.rows == other.rows and self.cols == other.cols and self.entries == other.entries

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def _check_same_shape(self, other):
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        self._check_same_shape(other)
        return ExactMatrix._raw(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        self._check_same_shape(other)
        return ExactMatrix._raw(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self):
        return ExactMatrix._raw(self.rows, self.cols, tuple(-a for a in self.entries))

    def scale(self, s) -> "ExactMatrix":
        s = GaussianRational.coerce(s)
        return ExactMatrix._raw(self.rows, self.cols, tuple(s * a for a in self.entries))

    def __mul__(self, s):
        if isinstance(s, ExactMatrix):
            raise TypeError("use @ for matrix products")
        return self.scale(s)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        n, m, p = self.rows, self.cols, other.cols
        left_den, left = _dense_gints(self)
        right_den, right = _dense_gints(other)
        # right rows as sparse lists for the inner loop
        right_sparse = [[(j, v) for j, v in enumerate(right[k]) if v[0] or v[1]] for k in range(m)]
        den = left_den * right_den
        out = []
        for i in range(n):
            acc_re = [0] * p
            acc_im = [0] * p
            for k, (a, b) in enumerate(left[i]):
                if not a and not b:
                    continue
                for j, (c, d) in right_sparse[k]:
                    acc_re[j] += a * c - b * d
                    acc_im[j] += a * d + b * c
            for j in range(p):
                re_, im_ = acc_re[j], acc_im[j]
                if re_ or im_:
                    out.append(GaussianRational._make(Fraction(re_, den), Fraction(im_, den)))
                else:
                    out.append(ZERO)
        return ExactMatrix._raw(n, p, tuple(out))

    def __pow__(self, k: int):
        if not self.is_square():
            raise DimensionError("power of a non-square matrix")
        if k < 0:
            return mat_inverse(self) ** (-k)
        result = ExactMatrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            k >>= 1
            if k:
                base = base @ base
        return result

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix._raw(
            self.cols, self.rows, tuple(self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows))
        )

    def trace(self) -> GaussianRational:
        if not self.is_square():
            raise DimensionError("trace of a non-square matrix")
        total = ZERO
        for i in range(self.rows):
            total = total + self.entries[i * self.cols + i]
        return total

    def rank(self) -> int:
        return mat_rank(self)

    def kernel(self) -> list["ExactMatrix"]:
        return mat_kernel(self)

    def inverse(self) -> "ExactMatrix":
        return mat_inverse(self)

    # -- text ------------------------------------------------------------------

    def __repr__(self):
        return f"ExactMatrix.from_rows({[[str(x) for x in r] for r in self.to_rows()]!r})"

    def __str__(self):
        cells = [[str(x) for x in r] for r in self.to_rows()]
        if not cells:
            return f"[{self.rows}x{self.cols} empty]"
        width = max(len(s) for r in cells for s in r)
        return "\n".join("[" + " ".join(s.rjust(width) for s in r) + "]" for r in cells)


def _dense_gints(m: ExactMatrix):
    """Common-denominator Gaussian-integer form: ``(den, rows)``."""
    den = 1
    for v in m.entries:
        if v:
            den = math.lcm(den, v.re.denominator, v.im.denominator)
    rows = []
    c = m.cols
    for i in range(m.rows):
        row = []
        for v in m.entries[i * c:(i + 1) * c]:
            if v:
                row.append((v.re.numerator * (den // v.re.denominator), v.im.numerator * (den // v.im.denominator)))
            else:
                row.append((0, 0))
        rows.append(row)
    return den, rows


def _check_cap(n: int, what: str) -> None:
    cap = current_limits().max_dim
    if n > cap:
        raise SizeCapError(f"{what} of size {n} exceeds the configured cap {cap} (SIDECOMP_MAX_DIM)")


def _matrix_rows(m: ExactMatrix) -> list[dict]:
    c = m.cols
    return [_row_to_gints((j, m.entries[i * c + j]) for j in range(c)) for i in range(m.rows)]


def mat_rank(m: ExactMatrix) -> int:
    return len(_reduce_rows(_matrix_rows(m), m.cols))


def mat_kernel(m: ExactMatrix) -> list[ExactMatrix]:
    """Basis of ``{v : m v = 0}`` as column vectors, ordered by free column."""
    return [v for _, v in mat_kernel_with_free_columns(m)]


def mat_kernel_with_free_columns(m: ExactMatrix) -> list[tuple[int, ExactMatrix]]:
    basis = _kernel_of_rows(_matrix_rows(m), m.cols)
    return [(f, ExactMatrix.from_sparse(m.cols, 1, {(i, 0): v for i, v in vec.items()})) for f, vec in basis]


def mat_inverse(m: ExactMatrix) -> ExactMatrix:
    """Exact inverse; raises :class:`SingularMatrixError` with a kernel witness."""
    if not m.is_square():
        raise DimensionError(f"cannot invert a {m.rows}x{m.cols} matrix")
    n = m.rows
    _check_cap(n, "matrix")
    rows = []
    for i in range(n):
        items = [(j, m.entries[i * n + j]) for j in range(n)]
        items.append((n + i, ONE))
        rows.append(_row_to_gints(items))
    pivots = _reduce_rows(rows, n)
    if len(pivots) < n:
        witness = mat_kernel(m)[0]
        raise SingularMatrixError(f"matrix is singular (rank {len(pivots)} < {n})", witness=witness)
    out = [ZERO] * (n * n)
    for r, c in pivots:
        p = rows[r][c]
        for col, v in rows[r].items():
            if col >= n:
                out[c * n + (col - n)] = _gdiv_to_rational(v, p)
    return ExactMatrix._raw(n, n, tuple(out))


def weyr_sequence(m: ExactMatrix, alpha) -> list[int]:
    """``[rank((m - alpha I)^k) for k = 0..n]``."""
    if not m.is_square():
        raise DimensionError("Weyr sequence needs a square matrix")
    n = m.rows
    _check_cap(n, "matrix")
    alpha = GaussianRational.coerce(alpha)
    shifted = m - ExactMatrix.identity(n).scale(alpha)
    seq = [n]
    power = ExactMatrix.identity(n)
    for _ in range(n):
        if len(seq) >= 2 and seq[-1] == seq[-2]:
            seq.append(seq[-1])
            continue
        power = power @ shifted
        seq.append(mat_rank(power))
    return seq


def block_sizes_from_weyr(seq: Sequence[int]) -> list[int]:
    """Jordan block sizes at the eigenvalue, largest first."""
    drops = [seq[k] - seq[k + 1] for k in range(len(seq) - 1)]  # blocks of size > k
    sizes = []
    for k in range(len(drops)):
        at_least = drops[k]
        more = drops[k + 1] if k + 1 < len(drops) else 0
        sizes.extend([k + 1] * (at_least - more))
    return sorted(sizes, reverse=True)


def jordan_block(n: int, alpha=0) -> ExactMatrix:
    """Upper bidiagonal Jordan block with ones on the superdiagonal."""
    alpha = GaussianRational.coerce(alpha)
    items = {(i, i): alpha for i in range(n)}
    items.update({(i, i + 1): ONE for i in range(n - 1)})
    return ExactMatrix.from_sparse(n, n, items)


def direct_sum(*blocks: ExactMatrix) -> ExactMatrix:
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    out = [ZERO] * (rows * cols)
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                out[(r0 + i) * cols + c0 + j] = b.entries[i * b.cols + j]
        r0 += b.rows
        c0 += b.cols
    return ExactMatrix._raw(rows, cols, tuple(out))


def rational_sqrt_upper(q: Fraction, bits: int | None = None) -> Fraction:
    """Smallest ``t / 2**bits`` with ``(t / 2**bits)**2 >= q``, or the exact root.

    If ``q`` is the square of a rational that root is returned unchanged, so
    the bound is tight whenever it can be.
    """
    q = Fraction(q)
    if q < 0:
        raise ValueError("square root of a negative rational")
    p, d = q.numerator, q.denominator
    rp, rd = math.isqrt(p), math.isqrt(d)
    if rp * rp == p and rd * rd == d:
        return Fraction(rp, rd)
    if bits is None:
        bits = current_limits().sqrt_bits
    scale = 1 << bits
    target = p * scale * scale  # need t^2 * d >= target
    t = math.isqrt(target // d)
    while t * t * d < target:
        t += 1
    return Fraction(t, scale)
