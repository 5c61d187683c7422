"""Acceptance suite: one test per criterion, summarized as PASS/FAIL lines by conftest."""

import itertools
import json
import random
import time
from fractions import Fraction
from pathlib import Path

from sidecomp.cli import main, parse_field_file
from sidecomp.commutant import (
    JordanSumModel,
    canonical_family,
    conjugate_idempotent_families,
    conjugate_idempotents,
    diagonalize_idempotent,
    extract_minimal_idempotents,
    in_generated_lattice,
    random_invertible_commutant_element,
    rank_function_rQ,
    structured_commutant_basis,
    sylvester_kernel,
)
from sidecomp.errors import NotSimilarError
from sidecomp.field import CONTINUOUS, OperatorField, SpectralCell, cell_fiber
from sidecomp.invariants import compute_rank_function_rA, compute_V_K0, decide_uniqueness, idempotent_class_vector
from sidecomp.irreducibility import field_si_check, si_oracle_weyr, si_test_triangular
from sidecomp.linalg import ExactMatrix, GaussianRational as G, jordan_block
from sidecomp.reduction import approximation_sequence, canonical_entries, perturb_superdiagonals, reduce_field_to_canonical
from sidecomp.verify import verify_document

from gen_fields import models_up_to, random_field, random_idempotent, random_upper_triangular, span_rank

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "tests" / "fixtures"
GOLDEN = ROOT / "tests" / "golden"
THREE_SIZES = JordanSumModel.from_blocks([(3, 2), (2, 3), (1, 2)])


def test_criterion_01_triangular_si_test_matches_weyr_oracle():
    start = time.perf_counter()
    pairs = list(itertools.combinations(range(4), 2))
    checked = 0
    for alpha in (0, 1):
        for bits in itertools.product((0, 1), repeat=len(pairs)):
            rows = [[alpha if i == j else 0 for j in range(4)] for i in range(4)]
            for (i, j), b in zip(pairs, bits):
                rows[i][j] = b
            A = ExactMatrix.from_rows(rows)
            assert bool(si_test_triangular(A)) == si_oracle_weyr(A)
            checked += 1
    assert checked == 128
    rng = random.Random(101)
    for _ in range(1200):
        A = random_upper_triangular(rng, rng.randint(1, 6), density=rng.random())
        assert bool(si_test_triangular(A)) == si_oracle_weyr(A)
    assert time.perf_counter() - start < 60


def test_criterion_02_perturbation_certificates():
    rng = random.Random(102)
    for _ in range(200):
        F = random_field(rng, max_n=5, max_cells=10)
        for k in range(1, 51):
            cert = perturb_superdiagonals(F, k)
            assert cert.bound < Fraction(1, k)
            worst = Fraction(0)
            for before, after in zip(F.cells, cert.perturbed.cells):
                n = before.block_size
                floor2 = Fraction(1, 2 * k * n) ** 2
                for i in range(1, n):
                    old, new = before.entry(i, i + 1), after.entry(i, i + 1)
                    assert new.modulus_squared() >= floor2
                    if old.modulus_squared() >= floor2:
                        assert new == old
                    worst = max(worst, (new - old).modulus_squared())
                assert {p: v for p, v in after.upper_entries.items() if v and p[1] > p[0] + 1} == {
                    p: v for p, v in before.upper_entries.items() if v and p[1] > p[0] + 1
                }
            # the difference lives on the superdiagonal, so its norm is the largest modulus
            assert cert.bound**2 >= worst


def test_criterion_03_reduction_certificates():
    rng = random.Random(103)
    for _ in range(200):
        F = random_field(rng, max_n=5, invertible=True, small=False)
        cert, canon = reduce_field_to_canonical(F)
        for c in cert.cells:
            n = c.X.rows
            A = cell_fiber(F.cell(c.cell_id))
            J = jordan_block(n, F.cell(c.cell_id).spectral_value)
            assert c.X @ c.X_inverse == ExactMatrix.identity(n)
            assert c.X @ A == J @ c.X
        again, canon2 = reduce_field_to_canonical(canon)
        assert canon2 == canon and all(c.X.is_identity() for c in again.cells)


def test_criterion_04_commutant_matches_sylvester_oracle():
    for model in models_up_to(14):
        A = model.matrix
        structured = list(structured_commutant_basis(model).basis)
        oracle = sylvester_kernel(A, A)
        assert len(structured) == len(oracle) == span_rank(structured) == span_rank(structured + oracle)
    for m in range(1, 9):
        J = jordan_block(m)
        assert len(sylvester_kernel(J, J)) == m
    for m1 in range(1, 7):
        for m2 in range(1, 7):
            basis = sylvester_kernel(jordan_block(m1), jordan_block(m2))
            assert len(basis) == min(m1, m2)
            for X in basis:
                if m1 > m2:
                    assert X.submatrix(m2, m1, 0, m2).is_zero()
                elif m2 > m1:
                    assert X.submatrix(0, m1, 0, m2 - m1).is_zero()


def test_criterion_05_idempotent_diagonalization():
    model = JordanSumModel.from_blocks([(1, 4)])
    P = ExactMatrix.from_rows([[1, 0, 0, 5], [0, 0, 3, 0], [0, 0, 1, 0], [0, 0, 0, 0]])
    dg = diagonalize_idempotent(model, P)
    assert dg.X == ExactMatrix.from_rows([[1, 0, 0, 5], [0, 1, -3, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert dg.X_inverse == ExactMatrix.from_rows([[1, 0, 0, -5], [0, 1, 3, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert dg.X @ P @ dg.X_inverse == ExactMatrix.diagonal([1, 0, 1, 0])
    rng = random.Random(105)
    models = [m for m in models_up_to(7) if m.total_copies > 1]
    for _ in range(100):
        model = rng.choice(models)
        Q, _ = random_idempotent(model, rng)
        dg = diagonalize_idempotent(model, Q)
        A = model.matrix
        assert dg.X @ Q @ dg.X_inverse == dg.D and dg.D.is_diagonal()
        assert set(dg.D.diagonal_entries()) <= {G(0), G(1)}
        assert dg.X @ A == A @ dg.X
        assert dg.D.trace() == Q.trace()


def test_criterion_06_three_size_anchor():
    start = time.perf_counter()
    F = parse_field_file(FIX / "three_sizes.json")
    assert compute_rank_function_rA(F) == {G(0): 3}
    e = compute_V_K0(F).at(0)
    assert (e.semigroup, e.group, e.identity_class.counts) == ("N^3", "Z^3", (2, 3, 2))
    model = JordanSumModel.from_field(F)
    assert model.matrix == THREE_SIZES.matrix
    P_fam = canonical_family(model)
    atoms = extract_minimal_idempotents(model, P_fam)
    assert len(atoms) == 7 and all(rank_function_rQ(model, a) == 1 for a in atoms)
    Y, Yi = random_invertible_commutant_element(model, random.Random(106), span=2)
    Q_fam = P_fam.conjugated(Y, Yi)
    res = conjugate_idempotent_families(model, P_fam, Q_fam)
    A = model.matrix
    assert res.X @ res.X_inverse == ExactMatrix.identity(model.dimension) and res.X @ A == A @ res.X
    for Q in Q_fam.members:
        assert in_generated_lattice(res.X @ Q @ res.X_inverse, P_fam.members)
    assert time.perf_counter() - start < 60


def _canon(cid, n, z=0, count=1, continuous=False):
    kw = {"mass_type": CONTINUOUS} if continuous else {"count": count}
    return SpectralCell(cid, z, 1, n, upper_entries=canonical_entries(n), **kw)


def test_criterion_07_uniqueness_verdicts():
    rng = random.Random(107)
    for _ in range(30):
        F = random_field(rng, invertible=True)
        _, C = reduce_field_to_canonical(F)
        assert decide_uniqueness(C).unique
        cont = C.replace_cells(list(C.cells) + [_canon("inf", rng.randint(1, 4), continuous=True)])
        v = decide_uniqueness(cont)
        assert not v.unique and v.witnesses and "F1" in v.narrative and "F2" in v.narrative
    normal = OperatorField(tuple(_canon(f"p{k}", 1, z=k, count=k + 1) for k in range(3)))
    assert decide_uniqueness(normal).unique
    v = decide_uniqueness(OperatorField((_canon("n", 1, continuous=True),)))
    assert not v.unique and "N (x) I" in v.narrative


def test_criterion_08_approximation_sequence():
    rng = random.Random(108)
    for _ in range(50):
        F = random_field(rng)
        steps = approximation_sequence(F, 100)
        assert [s.k for s in steps] == list(range(1, 101))
        for s in steps:
            assert s.certificate.bound < Fraction(1, s.k)
            assert field_si_check(s.certificate.perturbed).hypothesis_ii and s.hypotheses_hold


def test_criterion_09_similarity_invariance():
    rng = random.Random(109)
    models = [
        THREE_SIZES,
        JordanSumModel.from_blocks([(2, 2), (1, 1)]),
        JordanSumModel.from_blocks([(3, 1), (1, 2)]),
        JordanSumModel.from_blocks([(2, 1, 0), (1, 2, 0), (2, 2, G(0, 1))]),
    ]
    for model in models:
        ident = ExactMatrix.identity(model.dimension)
        copies = [k for k in range(model.total_copies) if k % 2 == 0]
        P, _ = random_idempotent(model, rng, copies)
        r, v = rank_function_rQ(model, P), idempotent_class_vector(model, P)
        for _ in range(100):
            Y, Yi = random_invertible_commutant_element(model, rng, span=2)
            Q = Y @ P @ Yi
            assert rank_function_rQ(model, Q) == r and idempotent_class_vector(model, Q) == v
        assert v + idempotent_class_vector(model, ident - P) == idempotent_class_vector(model, ident)
        for _ in range(10):
            a = [k for k in range(model.total_copies) if rng.random() < 0.5]
            b = [k for k in range(model.total_copies) if rng.random() < 0.5]
            Pa, _ = random_idempotent(model, rng, a)
            Qb, _ = random_idempotent(model, rng, b)
            if idempotent_class_vector(model, Pa) == idempotent_class_vector(model, Qb):
                X, Xi = conjugate_idempotents(model, Pa, Qb)
                assert X @ Qb @ Xi == Pa and X @ model.matrix == model.matrix @ X
            else:
                try:
                    conjugate_idempotents(model, Pa, Qb)
                except NotSimilarError as exc:
                    assert exc.obstruction and all(x != y for x, y in exc.obstruction.values())
                else:
                    raise AssertionError("unequal class vectors were conjugated")


def test_criterion_10_goldens_stable_and_verified(tmp_path):
    manifest = json.loads((GOLDEN / "manifest.json").read_text())
    reports = [e for e in manifest if e["golden"].endswith(".report.json")]
    assert len(reports) == 5
    for entry in manifest:
        out = tmp_path / entry["golden"]
        args = [str(ROOT / a) if a.startswith("tests/") else a for a in entry["args"]]
        assert main(args + ["-o", str(out)]) == entry["exit"]
        assert out.read_bytes() == (GOLDEN / entry["golden"]).read_bytes()
        res = verify_document(json.loads(out.read_text()))
        assert res.ok, res.summary()
