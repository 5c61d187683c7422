"""Rank functions, V/K0 descriptors and the uniqueness verdict.

Everything here is read off the multiplicity profile of a canonical field,
one spectral value at a time.  At a spectral value ``z`` with distinct block
sizes ``m_1 > ... > m_r`` the commutant is (at finite scale) a product of
``r`` full matrix algebras modulo a radical, so ``V = N^r`` and ``K0 = Z^r``;
an idempotent's class is its vector of per-size minimal-idempotent counts.
"""

from __future__ import annotations

from dataclasses import dataclass

from .commutant import JordanSumModel, check_idempotent, group_traces
from .errors import HypothesisError, NonCanonicalError, SidecompError
from .field import Multiplicity, OperatorField, check_field, multiplicity_profile
from .irreducibility import field_si_check
from .linalg import ExactMatrix, GaussianRational
from .reduction import is_canonical


@dataclass(frozen=True)
class RankVector:
    spectral_value: GaussianRational
    # (block size, count), block sizes decreasing
    coordinates: tuple[tuple[int, int], ...]
    # block sizes whose coordinate is forced to vanish (infinite multiplicity)
    vanishing: tuple[int, ...] = ()

    def __post_init__(self):
        sizes = [m for m, _ in self.coordinates]
        if sizes != sorted(sizes, reverse=True) or len(set(sizes)) != len(sizes):
            raise ValueError(f"block sizes must be distinct and decreasing, got {sizes}")
        if any(c < 0 for _, c in self.coordinates):
            raise ValueError("rank vector coordinates must be nonnegative")

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(c for _, c in self.coordinates)

    @property
    def block_sizes(self) -> tuple[int, ...]:
        return tuple(m for m, _ in self.coordinates)

    def __add__(self, other: "RankVector") -> "RankVector":
        if self.spectral_value != other.spectral_value or self.block_sizes != other.block_sizes:
            raise ValueError("rank vectors live over different spectral data")
        coords = tuple((m, a + b) for (m, a), (_, b) in zip(self.coordinates, other.coordinates))
        return RankVector(self.spectral_value, coords, self.vanishing)


@dataclass(frozen=True)
class ClassVector:
    """Class of an idempotent: one :class:`RankVector` per spectral value."""

    components: tuple[RankVector, ...]

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(c for rv in self.components for c in rv.counts)

    def __add__(self, other: "ClassVector") -> "ClassVector":
        if len(self.components) != len(other.components):
            raise ValueError("class vectors of different models")
        return ClassVector(tuple(a + b for a, b in zip(self.components, other.components)))


@dataclass(frozen=True)
class SpectralK0:
    spectral_value: GaussianRational
    r: int
    identity_class: RankVector
    unique: bool

    @property
    def semigroup(self) -> str:
        return f"N^{self.r}"

    @property
    def group(self) -> str:
        return f"Z^{self.r}"

    @property
    def vanishing_sizes(self) -> tuple[int, ...]:
        return self.identity_class.vanishing


@dataclass(frozen=True)
class K0Descriptor:
    by_value: tuple[SpectralK0, ...]

    def at(self, z) -> SpectralK0:
        z = GaussianRational.coerce(z)
        for e in self.by_value:
            if e.spectral_value == z:
                return e
        raise KeyError(f"no spectral value {z}")

    @property
    def rank_function(self) -> dict:
        return {e.spectral_value: e.r for e in self.by_value}


def _sizes_by_value(F: OperatorField) -> dict:
    out: dict = {}
    for e in multiplicity_profile(F).entries:
        out.setdefault(e.spectral_value, {})[e.block_size] = e.multiplicity
    return {z: out[z] for z in sorted(out, key=lambda z: z.sort_key())}


def compute_rank_function_rA(F: OperatorField) -> dict:
    """``z -> number of distinct block sizes carrying a cell at z``."""
    return {z: len(sizes) for z, sizes in _sizes_by_value(F).items()}


def compute_V_K0(F: OperatorField) -> K0Descriptor:
    """Per spectral value: ``V = N^r``, ``K0 = Z^r`` and the class of ``I``.

    A block size of infinite multiplicity keeps its slot in ``N^r`` but its
    coordinate of ``[I]`` is recorded as 0 and flagged vanishing: an infinite
    amplification absorbs a copy of itself, so its class dies in ``K0``.
    """
    check_field(F)
    if not is_canonical(F):
        raise NonCanonicalError("V/K0 descriptors need a canonical field; reduce it first")
    out = []
    for z, sizes in _sizes_by_value(F).items():
        coords = []
        vanishing = []
        for m in sorted(sizes, reverse=True):
            mult: Multiplicity = sizes[m]
            if mult.is_infinite:
                vanishing.append(m)
                coords.append((m, 0))
            else:
                coords.append((m, mult.value))
        rv = RankVector(z, tuple(coords), tuple(vanishing))
        out.append(SpectralK0(z, len(coords), rv, not vanishing))
    return K0Descriptor(tuple(out))


def idempotent_class_vector(model: JordanSumModel, Q: ExactMatrix) -> ClassVector:
    """Per-size counts of minimal idempotents under ``Q``.

    The count at ``(z, m)`` is ``(1/m) Tr`` of ``Q`` on the carrier of the
    ``J_m(z)`` summand.
    """
    check_idempotent(model, Q)
    traces = group_traces(model, Q)
    comps = []
    for z in model.spectral_values():
        coords = []
        for s in model.summands:
            if s.spectral_value != z:
                continue
            t = traces[(z, s.block_size)]
            if t.denominator != 1 or t < 0:
                raise SidecompError(f"normalized trace {t} at J_{s.block_size}({z}) is not a count")
            coords.append((s.block_size, int(t)))
        coords.sort(key=lambda c: -c[0])
        comps.append(RankVector(z, tuple(coords)))
    return ClassVector(tuple(comps))


@dataclass(frozen=True)
class UniquenessVerdict:
    unique: bool
    # (spectral value, block size, multiplicity) with infinite multiplicity
    witnesses: tuple[tuple[GaussianRational, int, Multiplicity], ...] = ()
    narrative: str = ""

    def __post_init__(self):
        if self.unique != (not self.witnesses):
            raise ValueError("verdict is unique exactly when there are no witnesses")


def _witness_narrative(witnesses) -> str:
    lines = []
    for z, n, _ in witnesses:
        if n == 1:
            lines.append(
                f"At spectral value {z} the cell is a normal operator N (x) I of infinite multiplicity. "
                "Family F1: spectral projections of N tensored with a maximal family of rank-one "
                "projections on the multiplicity space; every minimal idempotent has finite fiber rank 1. "
                "Family F2: spectral projections of N (x) I refined by projections of infinite rank on "
                "the multiplicity space; every nonzero member has infinite fiber rank. "
                "A similarity inside the commutant preserves fiber rank, so F1 and F2 are not similar."
            )
        else:
            lines.append(
                f"At spectral value {z} the block J_{n} has infinite multiplicity. "
                f"Family F1: minimal idempotents of finite rank {n} in every fiber (one Jordan chain each). "
                "Family F2: idempotents built from spectral projections of the diagonal part whose "
                "nonzero members all have infinite rank in every fiber. "
                "A similarity inside the commutant preserves fiber rank, so F1 and F2 are not similar."
            )
    return "\n".join(lines)


def decide_uniqueness(F: OperatorField) -> UniquenessVerdict:
    """Unique up to similarity iff every multiplicity is finite.

    Superdiagonal entries must be invertible (size-1 cells have none); a
    violation raises :class:`HypothesisError` telling the caller to perturb.
    """
    check_field(F)
    si = field_si_check(F)
    if not si.hypothesis_ii:
        bad = next(c for c in si.cells if c.zero_superdiagonal)
        i, j = bad.zero_superdiagonal[0]
        raise HypothesisError(
            f"cell {bad.cell_id!r} has a zero superdiagonal entry ({i},{j}); "
            "perturb the field first (perturb --k) before deciding uniqueness"
        )
    witnesses = tuple(
        (e.spectral_value, e.block_size, e.multiplicity)
        for e in multiplicity_profile(F).entries
        if e.multiplicity.is_infinite
    )
    if not witnesses:
        return UniquenessVerdict(True)
    return UniquenessVerdict(False, witnesses, _witness_narrative(witnesses))
