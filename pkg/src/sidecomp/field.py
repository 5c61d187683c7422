"""Discretized direct-integral operators.

An :class:`OperatorField` is a finite list of :class:`SpectralCell` s.  Each
cell is a piece of the measure space on which the fiber is the constant
``n x n`` upper-triangular matrix with diagonal ``spectral_value`` and the
given strictly-upper entries.  Cells with ``mass_type == "continuous"``
carry infinite spectral multiplicity; atomic cells carry ``count`` atoms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Mapping

from .config import current_limits
from .errors import FieldValidationError, SkeletonMismatchError, UnknownCellError
from .linalg import ExactMatrix, GaussianRational, ZERO, parse_rational, rational_sqrt_upper

ATOMIC = "atomic"
CONTINUOUS = "continuous"


@dataclass(frozen=True)
class Multiplicity:
    """Spectral multiplicity; ``value is None`` is the infinity token."""

    value: int | None

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __add__(self, other: "Multiplicity") -> "Multiplicity":
        if self.is_infinite or other.is_infinite:
            return INFINITE
        return Multiplicity(self.value + other.value)

    def __str__(self):
        return "inf" if self.is_infinite else str(self.value)

    def to_json(self):
        return "inf" if self.is_infinite else self.value


INFINITE = Multiplicity(None)


@dataclass(frozen=True)
class SpectralCell:
    id: str
    spectral_value: GaussianRational
    weight: Fraction
    block_size: int
    mass_type: str = ATOMIC
    count: int = 1
    upper_entries: Mapping[tuple[int, int], GaussianRational] = dc_field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "spectral_value", GaussianRational.coerce(self.spectral_value))
        object.__setattr__(self, "weight", Fraction(self.weight))
        entries = {(int(i), int(j)): GaussianRational.coerce(v) for (i, j), v in dict(self.upper_entries).items()}
        object.__setattr__(self, "upper_entries", _FrozenDict(sorted(entries.items())))

    @property
    def is_continuous(self) -> bool:
        return self.mass_type == CONTINUOUS

    @property
    def multiplicity(self) -> Multiplicity:
        return INFINITE if self.is_continuous else Multiplicity(self.count)

    def entry(self, i: int, j: int) -> GaussianRational:
        return self.upper_entries.get((i, j), ZERO)

    def superdiagonal(self) -> list[GaussianRational]:
        return [self.entry(i, i + 1) for i in range(1, self.block_size)]

    def with_entries(self, entries: Mapping) -> "SpectralCell":
        return SpectralCell(
            id=self.id,
            spectral_value=self.spectral_value,
            weight=self.weight,
            block_size=self.block_size,
            mass_type=self.mass_type,
            count=self.count,
            upper_entries=entries,
        )

    def skeleton(self):
        return (self.id, self.block_size, self.weight, self.spectral_value, self.mass_type, self.count)


class _FrozenDict(dict):
    """Hashable, read-only mapping."""

    def _readonly(self, *a, **k):
        raise TypeError("cell entries are read-only")

    __setitem__ = __delitem__ = _readonly
    pop = popitem = clear = update = setdefault = _readonly

    def __hash__(self):
        return hash(tuple(sorted(self.items())))

    def __reduce__(self):
        return (_FrozenDict, (tuple(self.items()),))

    def __init__(self, items=()):
        super().__init__()
        for k, v in items:
            dict.__setitem__(self, k, v)


@dataclass(frozen=True)
class OperatorField:
    cells: tuple[SpectralCell, ...]
    name: str = "field"

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))

    def cell(self, cell_id: str) -> SpectralCell:
        for c in self.cells:
            if c.id == cell_id:
                return c
        raise UnknownCellError(cell_id)

    def block_sizes(self) -> list[int]:
        return sorted({c.block_size for c in self.cells})

    def replace_cells(self, cells) -> "OperatorField":
        return OperatorField(tuple(cells), self.name)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationReport:
    problems: tuple[str, ...]
    # block size -> whether the multiplicity function of the diagonal is simple
    simple_multiplicity: Mapping[int, bool]
    cell_count: int

    @property
    def ok(self) -> bool:
        return not self.problems

    def raise_for_problems(self) -> None:
        if self.problems:
            raise FieldValidationError(self.problems)


def validate_field(F: OperatorField) -> ValidationReport:
    problems = []
    cap = current_limits().max_dim
    if not F.cells:
        problems.append("field has no cells")
    seen = set()
    for c in F.cells:
        if c.id in seen:
            problems.append(f"duplicate cell id {c.id!r}")
        seen.add(c.id)
        if c.weight <= 0:
            problems.append(f"cell {c.id!r}: weight must be positive, got {c.weight}")
        if not isinstance(c.block_size, int) or c.block_size < 1:
            problems.append(f"cell {c.id!r}: block size must be a positive integer, got {c.block_size!r}")
            continue
        if c.block_size > cap:
            problems.append(f"cell {c.id!r}: block size {c.block_size} exceeds cap {cap}")
        if c.mass_type not in (ATOMIC, CONTINUOUS):
            problems.append(f"cell {c.id!r}: unknown mass type {c.mass_type!r}")
        elif c.mass_type == ATOMIC and (not isinstance(c.count, int) or c.count < 1):
            problems.append(f"cell {c.id!r}: atomic count must be >= 1, got {c.count!r}")
        for i, j in c.upper_entries:
            if not (1 <= i < j <= c.block_size):
                problems.append(
                    f"cell {c.id!r}: entry index ({i},{j}) is not a strictly-upper position of a {c.block_size}x{c.block_size} fiber"
                )
    # finitely many cells: every multiplicity function is a simple function
    simple = {n: True for n in sorted({c.block_size for c in F.cells if isinstance(c.block_size, int)})}
    return ValidationReport(tuple(problems), simple, len(F.cells))


def check_field(F: OperatorField) -> OperatorField:
    validate_field(F).raise_for_problems()
    return F


def fiber_matrix(F: OperatorField, cell_id: str) -> ExactMatrix:
    return cell_fiber(F.cell(cell_id))


def cell_fiber(cell: SpectralCell) -> ExactMatrix:
    n = cell.block_size
    items = {(i, i): cell.spectral_value for i in range(n)}
    for (i, j), v in cell.upper_entries.items():
        items[(i - 1, j - 1)] = v
    return ExactMatrix.from_sparse(n, n, items)


# ---------------------------------------------------------------------------
# multiplicity


@dataclass(frozen=True)
class ProfileEntry:
    block_size: int
    spectral_value: GaussianRational
    multiplicity: Multiplicity
    total_weight: Fraction
    cell_ids: tuple[str, ...]


@dataclass(frozen=True)
class MultiplicityProfile:
    entries: tuple[ProfileEntry, ...]

    def has_infinite(self) -> bool:
        return any(e.multiplicity.is_infinite for e in self.entries)

    def key(self):
        """Cell-id-free form, used to compare profiles of different fields."""
        return tuple((e.block_size, e.spectral_value, e.multiplicity, e.total_weight) for e in self.entries)


def multiplicity_profile(F: OperatorField) -> MultiplicityProfile:
    """Group cells by ``(block size, spectral value)``.

    Atomic counts add up; a single continuous cell makes the group's
    multiplicity infinite.  Entries are sorted by block size, then value.
    """
    groups: dict = {}
    for c in F.cells:
        key = (c.block_size, c.spectral_value)
        mult, weight, ids = groups.get(key, (Multiplicity(0), Fraction(0), ()))
        groups[key] = (mult + c.multiplicity, weight + c.weight, ids + (c.id,))
    entries = [
        ProfileEntry(n, z, m, w, tuple(sorted(ids)))
        for (n, z), (m, w, ids) in groups.items()
    ]
    entries.sort(key=lambda e: (e.block_size, e.spectral_value.sort_key()))
    return MultiplicityProfile(tuple(entries))


# ---------------------------------------------------------------------------
# norm certificates


@dataclass(frozen=True)
class NormBound:
    """Certified upper bound on the operator norm of a difference of fields.

    ``per_position[n][(i, j)]`` is a rational ``u`` with ``u**2`` at least the
    squared modulus of the entry difference on every cell of block size ``n``;
    ``per_block[n]`` sums those; ``bound`` is the max over block sizes, since
    the fields are direct sums over block sizes.
    """

    bound: Fraction
    per_block: Mapping[int, Fraction]
    per_position: Mapping[int, Mapping[tuple[int, int], Fraction]]


def _check_skeletons(F: OperatorField, G: OperatorField) -> None:
    a = sorted(c.skeleton()[:3] for c in F.cells)
    b = sorted(c.skeleton()[:3] for c in G.cells)
    if a != b:
        raise SkeletonMismatchError("fields differ in cell ids, block sizes or weights")


def entry_supnorm_bound_detailed(F: OperatorField, G: OperatorField) -> NormBound:
    _check_skeletons(F, G)
    other = {c.id: c for c in G.cells}
    per_position: dict[int, dict] = {}
    for c in F.cells:
        d = other[c.id]
        sq = per_position.setdefault(c.block_size, {})
        n = c.block_size
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                m2 = (c.entry(i, j) - d.entry(i, j)).modulus_squared()
                if m2 and m2 > sq.get((i, j), 0):
                    sq[(i, j)] = m2
    per_pos_bounds = {
        n: {pos: rational_sqrt_upper(m2) for pos, m2 in sorted(sq.items())} for n, sq in sorted(per_position.items())
    }
    per_block = {n: sum(b.values(), Fraction(0)) for n, b in per_pos_bounds.items()}
    bound = max(per_block.values(), default=Fraction(0))
    return NormBound(bound, per_block, per_pos_bounds)


def entry_supnorm_bound(F: OperatorField, G: OperatorField) -> Fraction:
    """Rational ``u`` with ``||F - G|| <= u``."""
    return entry_supnorm_bound_detailed(F, G).bound


# ---------------------------------------------------------------------------
# JSON format


def scalar_to_json(z: GaussianRational) -> dict:
    return {"re": str(z.re), "im": str(z.im)}


def scalar_from_json(obj, path: str = "value") -> GaussianRational:
    if isinstance(obj, str):
        return GaussianRational(parse_rational(obj))
    if isinstance(obj, int) and not isinstance(obj, bool):
        return GaussianRational(obj)
    if not isinstance(obj, dict) or "re" not in obj:
        raise ValueError(f"{path}: expected {{'re': 'p/q', 'im': 'p/q'}}, got {obj!r}")
    unknown = set(obj) - {"re", "im"}
    if unknown:
        raise ValueError(f"{path}: unexpected keys {sorted(unknown)}")
    try:
        re_ = parse_rational(obj["re"])
    except ValueError as exc:
        raise ValueError(f"{path}.re: {exc}") from None
    try:
        im_ = parse_rational(obj.get("im", "0"))
    except ValueError as exc:
        raise ValueError(f"{path}.im: {exc}") from None
    return GaussianRational(re_, im_)


def matrix_to_json(m: ExactMatrix) -> list:
    return [[scalar_to_json(x) for x in row] for row in m.to_rows()]


def matrix_from_json(obj, path: str = "matrix") -> ExactMatrix:
    if not isinstance(obj, list) or not all(isinstance(r, list) for r in obj):
        raise ValueError(f"{path}: expected a list of rows")
    return ExactMatrix.from_rows(
        [[scalar_from_json(x, f"{path}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(obj)]
    )


def cell_to_json(c: SpectralCell) -> dict:
    mass = {"type": c.mass_type}
    if c.mass_type == ATOMIC:
        mass["count"] = c.count
    return {
        "id": c.id,
        "value": scalar_to_json(c.spectral_value),
        "weight": str(c.weight),
        "mass": mass,
        "n": c.block_size,
        "entries": {f"{i},{j}": scalar_to_json(v) for (i, j), v in sorted(c.upper_entries.items())},
    }


def field_to_json(F: OperatorField) -> dict:
    return {"name": F.name, "cells": [cell_to_json(c) for c in sorted(F.cells, key=lambda c: c.id)]}


def dumps_field(F: OperatorField) -> str:
    return json.dumps(field_to_json(F), indent=2) + "\n"


def cell_from_json(obj, path: str) -> SpectralCell:
    if not isinstance(obj, dict):
        raise ValueError(f"{path}: expected an object")
    for key in ("id", "value", "weight", "mass", "n"):
        if key not in obj:
            raise ValueError(f"{path}: missing field {key!r}")
    cid = obj["id"]
    if not isinstance(cid, str):
        raise ValueError(f"{path}.id: expected a string")
    value = scalar_from_json(obj["value"], f"{path}.value")
    try:
        weight = parse_rational(obj["weight"])
    except ValueError as exc:
        raise ValueError(f"{path}.weight: {exc}") from None
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ValueError(f"{path}.n: expected an integer")
    mass = obj["mass"]
    if not isinstance(mass, dict) or mass.get("type") not in (ATOMIC, CONTINUOUS):
        raise ValueError(f"{path}.mass: expected {{'type': 'atomic'|'continuous', ...}}")
    count = 1
    if mass["type"] == ATOMIC:
        count = mass.get("count", 1)
        if not isinstance(count, int) or isinstance(count, bool):
            raise ValueError(f"{path}.mass.count: expected an integer")
    entries = {}
    raw_entries = obj.get("entries", {})
    if not isinstance(raw_entries, dict):
        raise ValueError(f"{path}.entries: expected an object keyed by 'i,j'")
    for key, v in raw_entries.items():
        parts = key.split(",")
        if len(parts) != 2 or not all(p.strip().lstrip("-").isdigit() for p in parts):
            raise ValueError(f"{path}.entries: malformed index {key!r}")
        entries[(int(parts[0]), int(parts[1]))] = scalar_from_json(v, f"{path}.entries[{key!r}]")
    return SpectralCell(
        id=cid, spectral_value=value, weight=weight, block_size=n, mass_type=mass["type"], count=count, upper_entries=entries
    )


def field_from_json(obj) -> OperatorField:
    if not isinstance(obj, dict) or "cells" not in obj:
        raise ValueError("field: expected an object with a 'cells' list")
    cells = obj["cells"]
    if not isinstance(cells, list):
        raise ValueError("field.cells: expected a list")
    return OperatorField(tuple(cell_from_json(c, f"cells[{k}]") for k, c in enumerate(cells)), obj.get("name", "field"))
