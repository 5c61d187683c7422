import random
from collections import Counter
from fractions import Fraction

import pytest

from sidecomp.commutant import (
    IdempotentFamily,
    JordanSumModel,
    canonical_family,
    check_idempotent,
    commutant_dimension_formula,
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
from sidecomp.errors import (
    NotCommutingError,
    NotIdempotentError,
    NotInCommutantError,
    NotMaximalError,
    NotSimilarError,
    SizeCapError,
)
from sidecomp.linalg import ExactMatrix, GaussianRational as G, jordan_block

from gen_fields import models_up_to, random_idempotent, random_model, span_rank

THREE_SIZES = JordanSumModel.from_blocks([(3, 2), (2, 3), (1, 2)])


def test_sylvester_examples():
    J2 = jordan_block(2, 0)
    basis = sylvester_kernel(J2, J2)
    assert len(basis) == 2 and span_rank(basis + [ExactMatrix.identity(2), J2]) == 2
    basis = sylvester_kernel(jordan_block(3, 0), J2)
    assert len(basis) == 2 and all(X[2, 0] == X[2, 1] == 0 for X in basis)
    assert sylvester_kernel(J2, jordan_block(2, 1)) == []


@pytest.mark.parametrize("blocks,dim", [([(3, 1)], 3), ([(3, 1), (2, 1)], 9), ([(3, 2), (2, 3), (1, 2)], 78)])
def test_structured_dimension_examples(blocks, dim):
    model = JordanSumModel.from_blocks(blocks)
    assert structured_commutant_basis(model).dimension == dim == commutant_dimension_formula(model)


def test_structured_matches_sylvester_small_models():
    for model in models_up_to(8):
        A = model.matrix
        structured = list(structured_commutant_basis(model).basis)
        oracle = sylvester_kernel(A, A)
        assert len(structured) == len(oracle) == span_rank(structured) == span_rank(structured + oracle)


def test_two_values_do_not_interact():
    model = JordanSumModel.from_blocks([(2, 1, 0), (2, 1, 1), (1, 2, 1)])
    A = model.matrix
    assert structured_commutant_basis(model).dimension == len(sylvester_kernel(A, A)) == 2 + 2 + 2 * 1 * 2 + 4


@pytest.mark.parametrize("m", range(1, 9))
def test_single_block_commutant_dimension(m):
    J = jordan_block(m, G(1, 1))
    assert len(sylvester_kernel(J, J)) == m
    assert structured_commutant_basis(JordanSumModel.from_blocks([(m, 1)])).dimension == m


def test_intertwiner_shapes():
    for m1 in range(1, 7):
        for m2 in range(1, 7):
            basis = sylvester_kernel(jordan_block(m1), jordan_block(m2))
            assert len(basis) == min(m1, m2)
            for X in basis:
                if m1 > m2:
                    assert X.submatrix(m2, m1, 0, m2).is_zero()
                if m2 > m1:
                    assert X.submatrix(0, m1, 0, m2 - m1).is_zero()


def test_diagonal_idempotent_needs_no_work():
    model = JordanSumModel.from_blocks([(2, 2), (1, 1)])
    D = model.copy_projection(1) + model.copy_projection(2)
    dg = diagonalize_idempotent(model, D)
    assert dg.X.is_identity() and dg.D == D and dg.copies == (1, 2)


def test_printed_4x4_example():
    # P = [[I, 0, 0, R12], [0, 0, R21, 0], [0, 0, I, 0], [0, 0, 0, 0]] with 1x1 blocks
    model = JordanSumModel.from_blocks([(1, 4)])
    P = ExactMatrix.from_rows([[1, 0, 0, 5], [0, 0, 3, 0], [0, 0, 1, 0], [0, 0, 0, 0]])
    dg = diagonalize_idempotent(model, P)
    assert dg.X == ExactMatrix.from_rows([[1, 0, 0, 5], [0, 1, -3, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert dg.X_inverse == ExactMatrix.from_rows([[1, 0, 0, -5], [0, 1, 3, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert dg.X @ P @ dg.X_inverse == ExactMatrix.diagonal([1, 0, 1, 0]) == dg.D


def test_random_idempotents_round_trip():
    rng = random.Random(40)
    for _ in range(40):
        model = random_model(rng, max_dim=9, values=2)
        Q, copies = random_idempotent(model, rng)
        dg = diagonalize_idempotent(model, Q)
        A = model.matrix
        assert dg.D.is_diagonal() and dg.D @ dg.D == dg.D
        assert set(dg.D.diagonal_entries()) <= {G(0), G(1)}
        assert dg.X @ A == A @ dg.X and dg.X @ dg.X_inverse == ExactMatrix.identity(model.dimension)
        assert dg.D.trace() == Q.trace()
        assert Counter(model.copies[k].group for k in dg.copies) == Counter(model.copies[k].group for k in copies)


def test_idempotent_errors_carry_residual():
    model = JordanSumModel.from_blocks([(2, 1)])
    with pytest.raises(NotIdempotentError) as info:
        check_idempotent(model, ExactMatrix.identity(2) * 2)
    assert info.value.residual == ExactMatrix.identity(2) * 2
    E11 = ExactMatrix.from_rows([[1, 0], [0, 0]])
    with pytest.raises(NotInCommutantError) as info:
        diagonalize_idempotent(model, E11)
    assert not info.value.residual.is_zero()
    with pytest.raises(NotInCommutantError):
        check_idempotent(model, ExactMatrix.identity(3))


def test_rank_function_examples():
    d = THREE_SIZES.dimension
    assert rank_function_rQ(THREE_SIZES, ExactMatrix.identity(d)) == 7
    assert rank_function_rQ(THREE_SIZES, ExactMatrix.zeros(d)) == 0
    assert rank_function_rQ(THREE_SIZES, THREE_SIZES.copy_projection(0)) == 1


def test_rank_function_invariant_and_additive():
    rng = random.Random(41)
    for _ in range(20):
        model = random_model(rng, max_dim=8, values=2)
        copies = [k for k in range(model.total_copies) if rng.random() < 0.5]
        rest = [k for k in range(model.total_copies) if k not in copies]
        Y, Yi = random_invertible_commutant_element(model, rng, span=2)
        P, _ = random_idempotent(model, rng, copies)
        Q = ExactMatrix.identity(model.dimension) - P
        assert rank_function_rQ(model, P) == len(copies)
        assert rank_function_rQ(model, Y @ P @ Yi) == rank_function_rQ(model, P)
        assert rank_function_rQ(model, Q) == len(rest)
        assert rank_function_rQ(model, P + Q) == rank_function_rQ(model, P) + rank_function_rQ(model, Q)


def test_minimal_idempotents_examples():
    atoms = extract_minimal_idempotents(THREE_SIZES, canonical_family(THREE_SIZES))
    assert len(atoms) == 7 and all(rank_function_rQ(THREE_SIZES, a) == 1 for a in atoms)
    model = JordanSumModel.from_blocks([(2, 1)])
    fam = IdempotentFamily(model, (ExactMatrix.zeros(2), ExactMatrix.identity(2)))
    (a,) = extract_minimal_idempotents(model, fam)
    assert a.is_identity() and rank_function_rQ(model, a) == 1


def test_minimal_idempotents_of_conjugated_family():
    rng = random.Random(42)
    Y, Yi = random_invertible_commutant_element(THREE_SIZES, rng, span=2)
    atoms = extract_minimal_idempotents(THREE_SIZES, canonical_family(THREE_SIZES).conjugated(Y, Yi))
    assert len(atoms) == 7
    total = ExactMatrix.zeros(THREE_SIZES.dimension)
    for i, a in enumerate(atoms):
        total = total + a
        for b in atoms[i + 1:]:
            assert (a @ b).is_zero()
        assert rank_function_rQ(THREE_SIZES, a) == 1
    assert total.is_identity()


def test_non_commuting_family_rejected():
    model = JordanSumModel.from_blocks([(1, 2)])
    P = ExactMatrix.from_rows([[1, 0], [0, 0]])
    Q = ExactMatrix.from_rows([[1, 1], [0, 0]])
    with pytest.raises(NotCommutingError):
        extract_minimal_idempotents(model, IdempotentFamily(model, (P, Q)))


def test_family_conjugation_identity_case():
    fam = canonical_family(THREE_SIZES)
    res = conjugate_idempotent_families(THREE_SIZES, fam, fam)
    assert res.X.is_identity() and res.X_inverse.is_identity()


def test_family_conjugation_random():
    rng = random.Random(43)
    for _ in range(10):
        model = random_model(rng, max_dim=8, values=2)
        P_fam = canonical_family(model)
        Y, Yi = random_invertible_commutant_element(model, rng, span=2)
        Q_fam = P_fam.conjugated(Y, Yi)
        res = conjugate_idempotent_families(model, P_fam, Q_fam)
        A = model.matrix
        assert res.X @ A == A @ res.X
        for Q in Q_fam.members:
            assert in_generated_lattice(res.X @ Q @ res.X_inverse, res.P_atoms)
        assert sorted(q for q, _ in res.matching) == list(range(model.total_copies))
        assert sorted(p for _, p in res.matching) == list(range(model.total_copies))


def test_permuted_basis_variant():
    # same lattice as the canonical family, listed as partial sums in reverse order
    n = THREE_SIZES.total_copies
    sums = []
    acc = ExactMatrix.zeros(THREE_SIZES.dimension)
    for k in reversed(range(n)):
        acc = acc + THREE_SIZES.copy_projection(k)
        sums.append(acc)
    Q_fam = IdempotentFamily(THREE_SIZES, tuple(sums))
    res = conjugate_idempotent_families(THREE_SIZES, canonical_family(THREE_SIZES), Q_fam)
    for Q in Q_fam.members:
        assert in_generated_lattice(res.X @ Q @ res.X_inverse, res.P_atoms)


def test_non_maximal_family_rejected():
    fam = IdempotentFamily(THREE_SIZES, (THREE_SIZES.copy_projection(0),))
    with pytest.raises(NotMaximalError):
        conjugate_idempotent_families(THREE_SIZES, canonical_family(THREE_SIZES), fam)
    # enough atoms by count but one of them spans two copies
    model = JordanSumModel.from_blocks([(1, 2), (2, 1)])
    merged = IdempotentFamily(model, (model.copy_projection(0) + model.copy_projection(1), ExactMatrix.zeros(4)))
    with pytest.raises(NotMaximalError):
        conjugate_idempotent_families(model, canonical_family(model), merged)


def test_idempotent_similarity_and_obstruction():
    model = JordanSumModel.from_blocks([(2, 2), (1, 1)])
    rng = random.Random(44)
    P, _ = random_idempotent(model, rng, [0])
    Q, _ = random_idempotent(model, rng, [1])
    X, Xi = conjugate_idempotents(model, P, Q)
    assert X @ Q @ Xi == P and X @ model.matrix == model.matrix @ X
    R, _ = random_idempotent(model, rng, [2])
    with pytest.raises(NotSimilarError) as info:
        conjugate_idempotents(model, P, R)
    assert info.value.obstruction == {(G(0), 2): (Fraction(1), Fraction(0)), (G(0), 1): (Fraction(0), Fraction(1))}


def test_model_validation(monkeypatch):
    with pytest.raises(ValueError):
        JordanSumModel.from_blocks([(2, 1), (2, 3)])
    monkeypatch.setenv("SIDECOMP_MAX_DIM", "5")
    with pytest.raises(SizeCapError):
        JordanSumModel.from_blocks([(3, 2)])
