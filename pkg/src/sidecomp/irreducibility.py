"""Strong irreducibility of upper-triangular fibers.

Two independent deciders are provided.  :func:`si_test_triangular` reads the
answer off the diagonal and superdiagonal.  :func:`si_oracle_weyr` instead
asks whether the matrix is similar to a single Jordan block, using only
ranks of powers of ``M - alpha I``; the two must always agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import NotTriangularError
from .field import OperatorField, cell_fiber
from .linalg import ExactMatrix, weyr_sequence


@dataclass(frozen=True)
class SIResult:
    strongly_irreducible: bool
    reason: str

    def __bool__(self):
        return self.strongly_irreducible


def _require_triangular(M: ExactMatrix) -> None:
    if not M.is_square():
        raise NotTriangularError(f"expected a square matrix, got {M.rows}x{M.cols}")
    if not M.is_upper_triangular():
        raise NotTriangularError("matrix is not upper triangular")


def si_test_triangular(M: ExactMatrix) -> SIResult:
    _require_triangular(M)
    n = M.rows
    alpha = M[0, 0] if n else None
    for i in range(1, n):
        if M[i, i] != alpha:
            return SIResult(False, f"diagonal not constant: entry ({i + 1},{i + 1}) = {M[i, i]} differs from {alpha}")
    for i in range(n - 1):
        if not M[i, i + 1]:
            return SIResult(False, f"superdiagonal entry ({i + 1},{i + 2}) is zero")
    return SIResult(True, "constant diagonal and nonvanishing superdiagonal")


def si_oracle_weyr(M: ExactMatrix) -> bool:
    """True iff ``M`` is similar to one Jordan block (triangular input)."""
    _require_triangular(M)
    n = M.rows
    diag = M.diagonal_entries()
    if any(d != diag[0] for d in diag):
        # distinct eigenvalues give a nontrivial spectral idempotent
        return False
    return weyr_sequence(M, diag[0]) == list(range(n, -1, -1))


@dataclass(frozen=True)
class CellSI:
    cell_id: str
    block_size: int
    result: SIResult
    # superdiagonal positions (1-based) whose entry is zero
    zero_superdiagonal: tuple[tuple[int, int], ...]
    # superdiagonal positions with 0 < |e|^2 < eps^2 (reporting only)
    near_singular: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class FieldSIReport:
    cells: tuple[CellSI, ...]

    @property
    def hypothesis_ii(self) -> bool:
        """Every superdiagonal multiplication operator is invertible."""
        return all(not c.zero_superdiagonal for c in self.cells)

    @property
    def failing_cells(self) -> list[str]:
        return [c.cell_id for c in self.cells if not c.result.strongly_irreducible]


def field_si_check(F: OperatorField, eps: Fraction = Fraction(0)) -> FieldSIReport:
    eps2 = Fraction(eps) ** 2
    out = []
    for cell in sorted(F.cells, key=lambda c: c.id):
        fiber = cell_fiber(cell)
        zeros = []
        near = []
        for i, e in enumerate(cell.superdiagonal(), start=1):
            m2 = e.modulus_squared()
            if not m2:
                zeros.append((i, i + 1))
            elif m2 < eps2:
                near.append((i, i + 1))
        out.append(CellSI(cell.id, cell.block_size, si_test_triangular(fiber), tuple(zeros), tuple(near)))
    return FieldSIReport(tuple(out))
