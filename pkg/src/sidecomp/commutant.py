"""Commutants and idempotents of finite Jordan sums.

A :class:`JordanSumModel` is ``⊕_i J_{m_i}(z_i)^{(n_i)}``: summand ``i`` is
``n_i`` copies of the ``m_i x m_i`` Jordan block at ``z_i``.  Coordinates
are laid out copy by copy, summands sorted by spectral value and then by
decreasing block size, so that the "eigenvector coordinates" (position 0 of
every copy) see a block upper-triangular restriction of any commutant
element.  That restriction is what the idempotent algorithms work on.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .config import current_limits
from .errors import (
    InfiniteMultiplicityError,
    NonCanonicalError,
    NotCommutingError,
    NotIdempotentError,
    NotInCommutantError,
    NotMaximalError,
    NotSimilarError,
    SidecompError,
    SizeCapError,
)
from .field import OperatorField, multiplicity_profile
from .linalg import (
    ExactMatrix,
    GaussianRational,
    ONE,
    ZERO,
    direct_sum,
    jordan_block,
    kernel_of_sparse_system,
    mat_inverse,
    mat_kernel,
    mat_kernel_with_free_columns,
)


@dataclass(frozen=True)
class Summand:
    block_size: int
    multiplicity: int
    spectral_value: GaussianRational
    cell_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class Copy:
    """One Jordan block inside the model."""

    summand: int
    index: int
    block_size: int
    spectral_value: GaussianRational
    offset: int

    @property
    def group(self):
        return (self.spectral_value, self.block_size)


@dataclass(frozen=True)
class JordanSumModel:
    summands: tuple[Summand, ...]

    def __post_init__(self):
        object.__setattr__(self, "summands", tuple(self.summands))
        seen = set()
        for s in self.summands:
            if s.block_size < 1 or s.multiplicity < 1:
                raise ValueError(f"bad summand {s}")
            key = (s.spectral_value, s.block_size)
            if key in seen:
                raise ValueError(f"block size {s.block_size} appears twice at {s.spectral_value}")
            seen.add(key)
        cap = current_limits().max_dim
        if self.dimension > cap:
            raise SizeCapError(f"model dimension {self.dimension} exceeds the configured cap {cap}")

    @classmethod
    def from_blocks(cls, blocks: Sequence[tuple]) -> "JordanSumModel":
        """``blocks`` holds ``(block_size, multiplicity)`` or ``(block_size, multiplicity, value)``."""
        summands = []
        for b in blocks:
            m, n = b[0], b[1]
            z = GaussianRational.coerce(b[2]) if len(b) > 2 else ZERO
            summands.append(Summand(m, n, z))
        summands.sort(key=lambda s: (s.spectral_value.sort_key(), -s.block_size))
        return cls(tuple(summands))

    @classmethod
    def from_field(cls, F: OperatorField) -> "JordanSumModel":
        """Materialize a canonical field; continuous cells are rejected."""
        from .reduction import is_canonical

        if not is_canonical(F):
            raise NonCanonicalError("commutant models need a canonical field; reduce it first")
        summands = []
        for e in multiplicity_profile(F).entries:
            if e.multiplicity.is_infinite:
                raise InfiniteMultiplicityError(
                    f"block size {e.block_size} at {e.spectral_value} has infinite multiplicity "
                    "and cannot be materialized as a finite matrix"
                )
            summands.append(Summand(e.block_size, e.multiplicity.value, e.spectral_value, e.cell_ids))
        summands.sort(key=lambda s: (s.spectral_value.sort_key(), -s.block_size))
        return cls(tuple(summands))

    @cached_property
    def copies(self) -> tuple[Copy, ...]:
        out = []
        offset = 0
        for si, s in enumerate(self.summands):
            for c in range(s.multiplicity):
                out.append(Copy(si, c, s.block_size, s.spectral_value, offset))
                offset += s.block_size
        return tuple(out)

    @property
    def dimension(self) -> int:
        return sum(s.block_size * s.multiplicity for s in self.summands)

    @property
    def total_copies(self) -> int:
        return sum(s.multiplicity for s in self.summands)

    @cached_property
    def matrix(self) -> ExactMatrix:
        return direct_sum(*[jordan_block(c.block_size, c.spectral_value) for c in self.copies])

    @cached_property
    def groups(self) -> dict:
        """``(value, block size) -> [copy index, ...]`` in layout order."""
        out: dict = {}
        for k, c in enumerate(self.copies):
            out.setdefault(c.group, []).append(k)
        return out

    def spectral_values(self) -> list[GaussianRational]:
        vals = []
        for s in self.summands:
            if s.spectral_value not in vals:
                vals.append(s.spectral_value)
        return vals

    def copy_projection(self, k: int) -> ExactMatrix:
        c = self.copies[k]
        return ExactMatrix.from_sparse(
            self.dimension, self.dimension, {(c.offset + p, c.offset + p): ONE for p in range(c.block_size)}
        )

    def transfer(self, to_copy: int, from_copy: int) -> ExactMatrix:
        """Identity map from one copy onto another copy of the same size and value."""
        a, b = self.copies[to_copy], self.copies[from_copy]
        if a.group != b.group:
            raise ValueError("transfer needs copies of equal size and spectral value")
        return ExactMatrix.from_sparse(
            self.dimension, self.dimension, {(a.offset + p, b.offset + p): ONE for p in range(a.block_size)}
        )

    def describe(self) -> str:
        return " ⊕ ".join(f"J_{s.block_size}({s.spectral_value})^({s.multiplicity})" for s in self.summands)


# ---------------------------------------------------------------------------
# commutant bases


def sylvester_kernel(A: ExactMatrix, B: ExactMatrix) -> list[ExactMatrix]:
    """Basis of ``{X : A X = X B}`` by brute-force linear algebra."""
    p, q = A.rows, B.rows
    if not (A.is_square() and B.is_square()):
        raise ValueError("sylvester_kernel needs square A and B")
    a_items = list(A.nonzero_items())
    b_items = list(B.nonzero_items())
    a_by_row: dict = {}
    for (i, k), v in a_items:
        a_by_row.setdefault(i, []).append((k, v))
    b_by_col: dict = {}
    for (k, j), v in b_items:
        b_by_col.setdefault(j, []).append((k, v))
    equations = []
    for i in range(p):
        for j in range(q):
            eq: dict = {}
            for k, v in a_by_row.get(i, ()):
                col = k * q + j
                eq[col] = eq.get(col, ZERO) + v
            for k, v in b_by_col.get(j, ()):
                col = i * q + k
                eq[col] = eq.get(col, ZERO) - v
            eq = {c: v for c, v in eq.items() if v}
            if eq:
                equations.append(eq)
    basis = kernel_of_sparse_system(equations, p * q)
    return [ExactMatrix.from_sparse(p, q, {(c // q, c % q): v for c, v in vec.items()}) for vec in basis]


def intertwiner_offset(rows_size: int, cols_size: int) -> int:
    """Diagonal offset of the Toeplitz band for a block from size ``cols_size`` into ``rows_size``."""
    return max(0, cols_size - rows_size)


def toeplitz_block_items(a: Copy, b: Copy, t: int) -> dict:
    """Positions of the ``t``-th Toeplitz diagonal of the ``(a, b)`` block."""
    shift = t + intertwiner_offset(a.block_size, b.block_size)
    items = {}
    for r in range(a.block_size):
        c = r + shift
        if c < b.block_size:
            items[(a.offset + r, b.offset + c)] = ONE
    return items


@dataclass(frozen=True)
class CommutantBasis:
    model: JordanSumModel
    basis: tuple[ExactMatrix, ...]
    # (row copy, column copy, Toeplitz diagonal) per basis element
    tags: tuple[tuple[int, int, int], ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)


def commutant_dimension_formula(model: JordanSumModel) -> int:
    total = 0
    for si in model.summands:
        for sj in model.summands:
            if si.spectral_value == sj.spectral_value:
                total += si.multiplicity * sj.multiplicity * min(si.block_size, sj.block_size)
    return total


def structured_commutant_basis(model: JordanSumModel, verify: bool = True) -> CommutantBasis:
    """Toeplitz-band basis of ``{A}'``: one element per (copy, copy, diagonal).

    Copies at different spectral values contribute nothing.
    """
    d = model.dimension
    basis = []
    tags = []
    for ia, a in enumerate(model.copies):
        for ib, b in enumerate(model.copies):
            if a.spectral_value != b.spectral_value:
                continue
            for t in range(min(a.block_size, b.block_size)):
                basis.append(ExactMatrix.from_sparse(d, d, toeplitz_block_items(a, b, t)))
                tags.append((ia, ib, t))
    if verify:
        A = model.matrix
        for B, tag in zip(basis, tags):
            if A @ B != B @ A:
                raise SidecompError(f"structured basis element {tag} does not commute")
    return CommutantBasis(model, tuple(basis), tuple(tags))


def commutant_element(model: JordanSumModel, coefficients: dict) -> ExactMatrix:
    """Combine Toeplitz-band generators; keys are ``(row copy, column copy, t)``."""
    d = model.dimension
    items: dict = {}
    for (ia, ib, t), v in coefficients.items():
        v = GaussianRational.coerce(v)
        if not v:
            continue
        a, b = model.copies[ia], model.copies[ib]
        if a.spectral_value != b.spectral_value or not (0 <= t < min(a.block_size, b.block_size)):
            raise ValueError(f"no commutant generator with tag {(ia, ib, t)}")
        for pos in toeplitz_block_items(a, b, t):
            items[pos] = v
    return ExactMatrix.from_sparse(d, d, items)


def random_commutant_element(model: JordanSumModel, rng: random.Random, span: int = 3, complex_entries: bool = False):
    coeffs = {}
    for ia, a in enumerate(model.copies):
        for ib, b in enumerate(model.copies):
            if a.spectral_value != b.spectral_value:
                continue
            for t in range(min(a.block_size, b.block_size)):
                im = rng.randint(-span, span) if complex_entries else 0
                coeffs[(ia, ib, t)] = GaussianRational(rng.randint(-span, span), im)
    return commutant_element(model, coeffs)


def random_invertible_commutant_element(model: JordanSumModel, rng: random.Random, span: int = 3, complex_entries=False):
    """Return ``(Y, Y_inverse)`` for a random invertible ``Y`` in ``{A}'``."""
    from .errors import SingularMatrixError

    for _ in range(100):
        Y = random_commutant_element(model, rng, span, complex_entries)
        try:
            return Y, mat_inverse(Y)
        except SingularMatrixError:
            continue
    raise SidecompError("could not draw an invertible commutant element")


# ---------------------------------------------------------------------------
# idempotents


def check_idempotent(model: JordanSumModel, P: ExactMatrix) -> None:
    d = model.dimension
    if P.shape != (d, d):
        raise NotInCommutantError(f"expected a {d}x{d} matrix, got {P.rows}x{P.cols}")
    sq = P @ P
    if sq != P:
        raise NotIdempotentError("matrix is not idempotent (P^2 != P)", residual=sq - P)
    A = model.matrix
    comm = A @ P - P @ A
    if not comm.is_zero():
        raise NotInCommutantError("matrix does not commute with the model operator", residual=comm)


def eigen_restriction(model: JordanSumModel, B: ExactMatrix) -> dict:
    """Per size group, the square block of ``B`` on the eigenvector coordinates.

    For ``B`` in the commutant this is the t=0 Toeplitz coefficient matrix
    between copies of one size group; the map is multiplicative on ``{A}'``.
    """
    out = {}
    for g, idx in model.groups.items():
        offs = [model.copies[k].offset for k in idx]
        out[g] = ExactMatrix.from_rows([[B[r, c] for c in offs] for r in offs])
    return out


def group_traces(model: JordanSumModel, Q: ExactMatrix) -> dict:
    """``(value, m) -> (1/m) Tr(Q restricted to the carrier of that summand)``."""
    out = {}
    for g, idx in model.groups.items():
        m = g[1]
        tr = ZERO
        for k in idx:
            off = model.copies[k].offset
            for p in range(m):
                tr = tr + Q[off + p, off + p]
        if tr.im:
            raise SidecompError(f"non-real trace {tr} on group {g}")
        out[g] = tr.re / m
    return out


def rank_function_rQ(model: JordanSumModel, Q: ExactMatrix) -> Fraction:
    """Sum over summands of ``(1/m_i) Tr(Q on summand i)``; an integer for idempotents."""
    check_idempotent(model, Q)
    return sum(group_traces(model, Q).values(), Fraction(0))


def _diagonalize_small(E: ExactMatrix):
    """``(S, S_inv, ones)`` with ``S E S^-1`` diagonal 0/1, ones at ``ones``.

    Columns of ``S^-1`` are a basis of ``ran E`` (placed at the free columns of
    ``I - E``) and a basis of ``ker E`` (filling the rest in order).
    """
    n = E.rows
    ident = ExactMatrix.identity(n)
    range_part = mat_kernel_with_free_columns(ident - E)
    kernel_basis = mat_kernel(E)
    cols = [None] * n
    positions = [f for f, _ in range_part]
    for f, v in range_part:
        cols[f] = v
    rest = iter(kernel_basis)
    for i in range(n):
        if cols[i] is None:
            cols[i] = next(rest)
    S_inv = ExactMatrix.from_rows([[cols[j][i, 0] for j in range(n)] for i in range(n)])
    S = mat_inverse(S_inv)
    return S, S_inv, sorted(positions)


def _group_lift(model: JordanSumModel, blocks: dict) -> ExactMatrix:
    """Element of ``{A}'`` acting as ``blocks[g][a][b] * I_m`` between copies of group ``g``."""
    d = model.dimension
    items = {}
    for g, idx in model.groups.items():
        S = blocks.get(g)
        for ra, ka in enumerate(idx):
            for rb, kb in enumerate(idx):
                v = S[ra, rb] if S is not None else (ONE if ra == rb else ZERO)
                if not v:
                    continue
                a, b = model.copies[ka], model.copies[kb]
                for p in range(a.block_size):
                    items[(a.offset + p, b.offset + p)] = v
    return ExactMatrix.from_sparse(d, d, items)


@dataclass(frozen=True)
class IdempotentDiagonalization:
    X: ExactMatrix
    X_inverse: ExactMatrix
    D: ExactMatrix
    # copies whose carrier D fixes
    copies: tuple[int, ...]
    stages: tuple[tuple[str, ExactMatrix], ...]


def diagonalize_idempotent(model: JordanSumModel, P: ExactMatrix) -> IdempotentDiagonalization:
    """Invertible ``X`` in ``{A}'`` with ``X P X^-1`` diagonal 0/1.

    Stage 1 conjugates the eigenvector blocks of ``P`` to diagonal
    projections by a group-wise scalar lift.  What is left differs from the
    diagonal idempotent ``D`` by a radical element, and stage 2 removes it in
    one step with ``X2 = D P1 + (I - D)(I - P1)``, which satisfies
    ``X2 P1 = D X2`` and is unipotent modulo the radical.
    """
    check_idempotent(model, P)
    d = model.dimension
    ident = ExactMatrix.identity(d)
    restr = eigen_restriction(model, P)
    lift, lift_inv, chosen = {}, {}, []
    for g, idx in model.groups.items():
        S, S_inv, ones = _diagonalize_small(restr[g])
        lift[g], lift_inv[g] = S, S_inv
        chosen.extend(idx[o] for o in ones)
    X1 = _group_lift(model, lift)
    X1_inv = _group_lift(model, lift_inv)
    P1 = X1 @ P @ X1_inv
    chosen = tuple(sorted(chosen))
    D = ExactMatrix.from_sparse(
        d,
        d,
        {(model.copies[k].offset + p, model.copies[k].offset + p): ONE for k in chosen for p in range(model.copies[k].block_size)},
    )
    X2 = D @ P1 + (ident - D) @ (ident - P1)
    X2_inv = mat_inverse(X2)
    X = X2 @ X1
    X_inv = X1_inv @ X2_inv
    if X @ P @ X_inv != D:
        raise SidecompError("idempotent diagonalization failed verification")
    return IdempotentDiagonalization(X, X_inv, D, chosen, (("eigenvector-blocks", X1), ("radical", X2)))


@dataclass(frozen=True)
class IdempotentFamily:
    model: JordanSumModel
    members: tuple[ExactMatrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))

    def validate(self) -> None:
        for k, P in enumerate(self.members):
            try:
                check_idempotent(self.model, P)
            except (NotIdempotentError, NotInCommutantError) as exc:
                raise type(exc)(f"member {k}: {exc}", residual=exc.residual) from None
        for i, P in enumerate(self.members):
            for j in range(i + 1, len(self.members)):
                Q = self.members[j]
                if P @ Q != Q @ P:
                    raise NotCommutingError(f"members {i} and {j} do not commute")

    def conjugated(self, Y: ExactMatrix, Y_inverse: ExactMatrix) -> "IdempotentFamily":
        return IdempotentFamily(self.model, tuple(Y @ P @ Y_inverse for P in self.members))


def canonical_family(model: JordanSumModel) -> IdempotentFamily:
    """Copy projections: the diagonal maximal abelian family of ``{A}'``."""
    return IdempotentFamily(model, tuple(model.copy_projection(k) for k in range(len(model.copies))))


def extract_minimal_idempotents(model: JordanSumModel, fam: IdempotentFamily) -> list[ExactMatrix]:
    """Atoms of the Boolean algebra generated by the family.

    The atom lying under every complement ``I - P`` is dropped, so the atoms
    sum to the join of the members.  For a maximal abelian family every atom
    has ``r_Q = 1`` and there are as many atoms as Jordan copies.
    """
    fam.validate()
    d = model.dimension
    atoms = [(ExactMatrix.identity(d), False)]
    for P in fam.members:
        refined = []
        for a, inside in atoms:
            x = a @ P
            y = a - x
            if not x.is_zero():
                refined.append((x, True))
            if not y.is_zero():
                refined.append((y, inside))
        atoms = refined
    return [a for a, inside in atoms if inside]


@dataclass(frozen=True)
class FamilyConjugation:
    X: ExactMatrix
    X_inverse: ExactMatrix
    P_atoms: tuple[ExactMatrix, ...]
    Q_atoms: tuple[ExactMatrix, ...]
    # (Q atom index, P atom index) with X Q_atom X^-1 = P_atom
    matching: tuple[tuple[int, int], ...]


def _maximal_atoms(model: JordanSumModel, fam: IdempotentFamily, label: str):
    atoms = extract_minimal_idempotents(model, fam)
    if len(atoms) != model.total_copies:
        raise NotMaximalError(
            f"family {label} has {len(atoms)} minimal idempotents, a maximal family needs {model.total_copies}"
        )
    total = ExactMatrix.zeros(model.dimension)
    for a in atoms:
        total = total + a
    if not total.is_identity():
        raise NotMaximalError(f"minimal idempotents of family {label} do not sum to the identity")
    diags = []
    for k, a in enumerate(atoms):
        dg = diagonalize_idempotent(model, a)
        if len(dg.copies) != 1:
            raise NotMaximalError(f"atom {k} of family {label} has r = {len(dg.copies)}, not 1")
        diags.append(dg)
    return atoms, diags


def conjugate_idempotent_families(
    model: JordanSumModel, P_fam: IdempotentFamily, Q_fam: IdempotentFamily
) -> FamilyConjugation:
    """Invertible ``X`` in ``{A}'`` carrying every member of ``Q_fam`` into the lattice of ``P_fam``.

    Atoms are matched by (spectral value, block size), ties broken by atom
    order.  Each matched pair contributes ``p X_p^-1 T X_q q`` to ``X``, where
    ``X_p``, ``X_q`` diagonalize the atoms onto single copies and ``T``
    transfers one copy onto the other.
    """
    P_atoms, P_diag = _maximal_atoms(model, P_fam, "P")
    Q_atoms, Q_diag = _maximal_atoms(model, Q_fam, "Q")

    def by_group(diags):
        out: dict = {}
        for k, dg in enumerate(diags):
            out.setdefault(model.copies[dg.copies[0]].group, []).append(k)
        return out

    P_groups, Q_groups = by_group(P_diag), by_group(Q_diag)
    if {g: len(v) for g, v in P_groups.items()} != {g: len(v) for g, v in Q_groups.items()}:
        raise SidecompError("minimal idempotents cannot be matched by block size; finite-multiplicity uniqueness violated")
    d = model.dimension
    X = ExactMatrix.zeros(d)
    X_inv = ExactMatrix.zeros(d)
    matching = []
    for g in sorted(P_groups, key=lambda g: (g[0].sort_key(), -g[1])):
        for kp, kq in zip(P_groups[g], Q_groups[g]):
            p, q = P_atoms[kp], Q_atoms[kq]
            dp, dq = P_diag[kp], Q_diag[kq]
            cp, cq = dp.copies[0], dq.copies[0]
            u = p @ dp.X_inverse @ model.transfer(cp, cq) @ dq.X @ q
            v = q @ dq.X_inverse @ model.transfer(cq, cp) @ dp.X @ p
            X = X + u
            X_inv = X_inv + v
            matching.append((kq, kp))
    ident = ExactMatrix.identity(d)
    A = model.matrix
    if X @ X_inv != ident or A @ X != X @ A:
        raise SidecompError("family conjugator failed verification")
    for kq, kp in matching:
        if X @ Q_atoms[kq] @ X_inv != P_atoms[kp]:
            raise SidecompError("family conjugator does not map atoms as matched")
    return FamilyConjugation(X, X_inv, tuple(P_atoms), tuple(Q_atoms), tuple(sorted(matching)))


def in_generated_lattice(M: ExactMatrix, atoms: Sequence[ExactMatrix]) -> bool:
    """Whether ``M`` is a sum of some of the (orthogonal) atoms."""
    total = ExactMatrix.zeros(M.rows)
    for a in atoms:
        Ma = M @ a
        if Ma == a:
            total = total + a
        elif not Ma.is_zero():
            return False
    return total == M


def conjugate_idempotents(model: JordanSumModel, P: ExactMatrix, Q: ExactMatrix):
    """``(X, X_inverse)`` in ``{A}'`` with ``X Q X^-1 = P``.

    Raises :class:`NotSimilarError` carrying the per-summand normalized
    traces when the class vectors differ; no such ``X`` exists then because
    the trace of each summand block is a similarity invariant inside ``{A}'``.
    """
    check_idempotent(model, P)
    check_idempotent(model, Q)
    tp, tq = group_traces(model, P), group_traces(model, Q)
    obstruction = {g: (tp[g], tq[g]) for g in tp if tp[g] != tq[g]}
    if obstruction:
        parts = ", ".join(f"J_{g[1]}({g[0]}): {a} vs {b}" for g, (a, b) in obstruction.items())
        raise NotSimilarError(f"idempotents are not similar in the commutant; normalized traces differ at {parts}", obstruction)
    dP = diagonalize_idempotent(model, P)
    dQ = diagonalize_idempotent(model, Q)
    perm = {}
    for g, idx in model.groups.items():
        src_in = [k for k in idx if k in dQ.copies]
        src_out = [k for k in idx if k not in dQ.copies]
        dst_in = [k for k in idx if k in dP.copies]
        dst_out = [k for k in idx if k not in dP.copies]
        for s, t in zip(src_in + src_out, dst_in + dst_out):
            perm[s] = t
    d = model.dimension
    Pi = ExactMatrix.zeros(d)
    for s, t in perm.items():
        Pi = Pi + model.transfer(t, s)
    X = dP.X_inverse @ Pi @ dQ.X
    X_inv = dQ.X_inverse @ Pi.transpose() @ dP.X
    if X @ Q @ X_inv != P or X @ X_inv != ExactMatrix.identity(d):
        raise SidecompError("idempotent similarity failed verification")
    return X, X_inv
