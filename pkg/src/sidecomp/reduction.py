"""Perturbation to invertible superdiagonals and similarity to Jordan form.

``perturb_superdiagonals`` lifts small superdiagonal entries to the real
constant ``1/(2kn)`` and certifies the move costs less than ``1/k`` in
norm.  ``build_similarity`` then conjugates every fiber onto the Jordan
block with the same eigenvalue, cell by cell, and checks the intertwining
identity ``X A = J X`` exactly before returning.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .config import current_limits
from .errors import HypothesisError, SidecompError
from .field import (
    NormBound,
    OperatorField,
    SpectralCell,
    cell_fiber,
    check_field,
    entry_supnorm_bound_detailed,
    multiplicity_profile,
)
from .irreducibility import field_si_check
from .linalg import ExactMatrix, GaussianRational, ONE, ZERO, mat_inverse


# ---------------------------------------------------------------------------
# perturbation


@dataclass(frozen=True)
class PerturbationCertificate:
    k: int
    original: OperatorField
    perturbed: OperatorField
    bound: Fraction
    detail: NormBound
    # (cell id, i, j) of every superdiagonal entry that was replaced
    replaced: tuple[tuple[str, int, int], ...]

    def verify(self) -> bool:
        if not self.bound < Fraction(1, self.k):
            return False
        if entry_supnorm_bound_detailed(self.original, self.perturbed).bound > self.bound:
            return False
        originals = {c.id: c for c in self.original.cells}
        for cell in self.perturbed.cells:
            n = cell.block_size
            floor2 = Fraction(1, 2 * self.k * n) ** 2
            before = originals[cell.id]
            for i in range(1, n):
                new, old = cell.entry(i, i + 1), before.entry(i, i + 1)
                if new.modulus_squared() < floor2:
                    return False
                if old.modulus_squared() >= floor2 and new != old:
                    return False
            off_diag_new = {p: v for p, v in cell.upper_entries.items() if p[1] != p[0] + 1 and v}
            off_diag_old = {p: v for p, v in before.upper_entries.items() if p[1] != p[0] + 1 and v}
            if off_diag_new != off_diag_old:
                return False
        return True


def superdiagonal_floor(k: int, n: int) -> Fraction:
    return Fraction(1, 2 * k * n)


def perturb_superdiagonals(F: OperatorField, k: int) -> PerturbationCertificate:
    """Replace every superdiagonal entry below ``1/(2kn)`` in modulus by ``1/(2kn)``."""
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    check_field(F)
    cells = []
    replaced = []
    for cell in F.cells:
        n = cell.block_size
        if n == 1:
            cells.append(cell)
            continue
        floor = superdiagonal_floor(k, n)
        floor2 = floor * floor
        entries = dict(cell.upper_entries)
        for i in range(1, n):
            e = cell.entry(i, i + 1)
            if e.modulus_squared() < floor2:
                entries[(i, i + 1)] = GaussianRational(floor)
                replaced.append((cell.id, i, i + 1))
        cells.append(cell.with_entries(entries))
    perturbed = F.replace_cells(cells)
    detail = entry_supnorm_bound_detailed(F, perturbed)
    cert = PerturbationCertificate(k, F, perturbed, detail.bound, detail, tuple(sorted(replaced)))
    if not cert.bound < Fraction(1, k):
        # cannot happen: each replaced entry moves by less than 1/(kn)
        raise SidecompError(f"perturbation bound {cert.bound} is not below 1/{k}")
    return cert


# ---------------------------------------------------------------------------
# similarity onto the canonical form


@dataclass(frozen=True)
class CellSimilarity:
    cell_id: str
    X: ExactMatrix
    X_inverse: ExactMatrix
    source: ExactMatrix
    target: ExactMatrix

    def verify(self) -> bool:
        n = self.X.rows
        ident = ExactMatrix.identity(n)
        return (
            self.X @ self.X_inverse == ident
            and self.X_inverse @ self.X == ident
            and self.X @ self.source == self.target @ self.X
        )


@dataclass(frozen=True)
class SimilarityCertificate:
    source: OperatorField
    target: OperatorField
    cells: tuple[CellSimilarity, ...]

    def verify(self) -> bool:
        return all(c.verify() for c in self.cells)

    def is_identity(self) -> bool:
        return all(c.X.is_identity() for c in self.cells)


def canonical_entries(n: int) -> dict:
    return {(i, i + 1): ONE for i in range(1, n)}


def canonical_cell(cell: SpectralCell) -> SpectralCell:
    return cell.with_entries(canonical_entries(cell.block_size))


def is_canonical(F: OperatorField) -> bool:
    for cell in F.cells:
        nonzero = {p: v for p, v in cell.upper_entries.items() if v}
        if nonzero != canonical_entries(cell.block_size):
            return False
    return True


def _intertwiner(A: ExactMatrix) -> ExactMatrix:
    """Upper-triangular ``X`` with ``X A = J X``, last diagonal entry 1.

    Writing ``A = alpha I + N`` and ``J = alpha I + S`` the identity reads
    ``X N = S X``, i.e. row ``i+1`` of ``X`` is row ``i`` of ``X N``.  So the
    first row determines ``X``; it is fixed to ``(c, 0, ..., 0)`` with
    ``c`` chosen so that ``X[n-1, n-1] = 1``.
    """
    n = A.rows
    rows = [[ZERO] * n for _ in range(n)]
    prod = ONE
    for i in range(n - 1):
        prod = prod * A[i, i + 1]
    rows[0][0] = ONE / prod
    for i in range(n - 1):
        for j in range(i + 1, n):
            acc = ZERO
            for k in range(i, j):
                x = rows[i][k]
                if x:
                    acc = acc + x * A[k, j]
            rows[i + 1][j] = acc
    return ExactMatrix.from_rows(rows)


def _require_invertible_superdiagonals(F: OperatorField) -> None:
    report = field_si_check(F)
    for c in report.cells:
        if c.zero_superdiagonal:
            i, j = c.zero_superdiagonal[0]
            raise HypothesisError(
                f"cell {c.cell_id!r}: superdiagonal entry ({i},{j}) is zero; "
                "perturb the field first (perturb --k)"
            )


def build_similarity(F: OperatorField) -> SimilarityCertificate:
    check_field(F)
    _require_invertible_superdiagonals(F)
    per_cell = []
    targets = []
    for cell in sorted(F.cells, key=lambda c: c.id):
        A = cell_fiber(cell)
        target_cell = canonical_cell(cell)
        J = cell_fiber(target_cell)
        X = _intertwiner(A)
        sim = CellSimilarity(cell.id, X, mat_inverse(X), A, J)
        if not sim.verify():
            raise SidecompError(f"cell {cell.id!r}: constructed similarity failed verification")
        per_cell.append(sim)
        targets.append(target_cell)
    order = {c.id: k for k, c in enumerate(F.cells)}
    targets.sort(key=lambda c: order[c.id])
    return SimilarityCertificate(F, F.replace_cells(targets), tuple(per_cell))


def reduce_field_to_canonical(F: OperatorField) -> tuple[SimilarityCertificate, OperatorField]:
    cert = build_similarity(F)
    return cert, cert.target


# ---------------------------------------------------------------------------
# approximating sequence


@dataclass(frozen=True)
class SequenceStep:
    k: int
    certificate: PerturbationCertificate
    simple_multiplicity: bool
    invertible_superdiagonals: bool

    @property
    def hypotheses_hold(self) -> bool:
        return self.simple_multiplicity and self.invertible_superdiagonals


def approximation_sequence(F: OperatorField, k_max: int) -> list[SequenceStep]:
    """Perturbations ``A_k`` for ``k = 1..k_max`` converging to ``F`` in norm.

    Requires bounded multiplicity: a continuous cell raises
    :class:`HypothesisError`.
    """
    check_field(F)
    cap = current_limits().k_max_cap
    if not isinstance(k_max, int) or k_max < 1:
        raise ValueError(f"k_max must be a positive integer, got {k_max!r}")
    if k_max > cap:
        raise ValueError(f"k_max {k_max} exceeds the configured cap {cap}")
    infinite = [e for e in multiplicity_profile(F).entries if e.multiplicity.is_infinite]
    if infinite:
        e = infinite[0]
        raise HypothesisError(
            "approximation needs a simple and bounded multiplicity function; "
            f"block size {e.block_size} at {e.spectral_value} has infinite multiplicity"
        )
    steps = []
    for k in range(1, k_max + 1):
        cert = perturb_superdiagonals(F, k)
        steps.append(SequenceStep(k, cert, True, field_si_check(cert.perturbed).hypothesis_ii))
    return steps
