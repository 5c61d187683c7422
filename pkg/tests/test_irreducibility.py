import itertools
import random

import pytest

from sidecomp.errors import NotTriangularError
from sidecomp.field import OperatorField, SpectralCell
from sidecomp.irreducibility import field_si_check, si_oracle_weyr, si_test_triangular
from sidecomp.linalg import ExactMatrix, GaussianRational as G, direct_sum, jordan_block, mat_inverse, mat_rank

from gen_fields import rand_scalar, random_field, random_upper_triangular


def M(rows):
    return ExactMatrix.from_rows(rows)


@pytest.mark.parametrize(
    "rows,expected,reason",
    [
        ([[0, 1], [0, 0]], True, "constant diagonal"),
        ([[1, 0], [0, 1]], False, "superdiagonal entry (1,2) is zero"),
        ([[1, 5], [0, 2]], False, "diagonal not constant"),
        ([[7]], True, ""),
    ],
)
def test_direct_examples(rows, expected, reason):
    res = si_test_triangular(M(rows))
    assert bool(res) is expected
    assert reason in res.reason


def test_oracle_examples():
    a = G(1, -1)
    assert si_oracle_weyr(jordan_block(4, a))
    assert not si_oracle_weyr(direct_sum(jordan_block(2, a), jordan_block(2, a)))
    # computed by the oracle: rank(N) = 1 and N^2 = 0, so blocks {2, 1}
    assert not si_oracle_weyr(M([[a, 0, 1], [0, a, 1], [0, 0, a]]))


def test_non_triangular_rejected():
    with pytest.raises(NotTriangularError):
        si_test_triangular(M([[1, 0], [1, 1]]))
    with pytest.raises(NotTriangularError):
        si_oracle_weyr(M([[1, 0, 0], [0, 1, 0]]))


def test_exhaustive_01_patterns_agree():
    for alpha in (0, 1):
        for bits in itertools.product((0, 1), repeat=6):
            rows = [[0] * 4 for _ in range(4)]
            for i in range(4):
                rows[i][i] = alpha
            for (i, j), b in zip(itertools.combinations(range(4), 2), bits):
                rows[i][j] = b
            A = M(rows)
            assert bool(si_test_triangular(A)) == si_oracle_weyr(A)


def test_random_agreement_including_nonconstant_diagonals():
    rng = random.Random(20)
    for _ in range(300):
        A = random_upper_triangular(rng, rng.randint(1, 6), constant_diag=rng.random() < 0.8, density=rng.random())
        assert bool(si_test_triangular(A)) == si_oracle_weyr(A)


def test_oracle_invariant_under_triangular_similarity():
    rng = random.Random(21)
    for _ in range(100):
        n = rng.randint(1, 5)
        A = random_upper_triangular(rng, n, density=rng.random())
        while True:
            X = ExactMatrix.from_rows([[rand_scalar(rng, 2, 2) if j >= i else 0 for j in range(n)] for i in range(n)])
            if mat_rank(X) == n:
                break
        assert si_oracle_weyr(X @ A @ mat_inverse(X)) == si_oracle_weyr(A)


def test_field_check_examples():
    canon = OperatorField(
        (SpectralCell("a", 0, 1, 3, upper_entries={(1, 2): 1, (2, 3): 1}), SpectralCell("b", 2, 1, 2, upper_entries={(1, 2): 1}))
    )
    rep = field_si_check(canon)
    assert rep.hypothesis_ii and rep.failing_cells == []
    broken = OperatorField((SpectralCell("a", 0, 1, 3, upper_entries={(1, 2): 1}),))
    rep = field_si_check(broken)
    assert not rep.hypothesis_ii and rep.failing_cells == ["a"]
    assert rep.cells[0].zero_superdiagonal == ((2, 3),)
    ones = OperatorField(tuple(SpectralCell(f"p{k}", k, 1, 1) for k in range(3)))
    rep = field_si_check(ones)
    assert rep.hypothesis_ii and not rep.failing_cells


def test_field_check_near_singular_reporting():
    F = OperatorField((SpectralCell("a", 0, 1, 3, upper_entries={(1, 2): G("1/1000"), (2, 3): 1}),))
    rep = field_si_check(F, eps=G("1/100").re)
    assert rep.hypothesis_ii and rep.cells[0].near_singular == ((1, 2),)


def test_field_check_stable_under_reordering_and_splitting():
    rng = random.Random(22)
    for _ in range(50):
        F = random_field(rng)
        cells = list(F.cells)
        rng.shuffle(cells)
        assert field_si_check(F).hypothesis_ii == field_si_check(F.replace_cells(cells)).hypothesis_ii
        split = [c for c in F.cells] + [
            SpectralCell(c.id + "'", c.spectral_value, c.weight, c.block_size, upper_entries=c.upper_entries) for c in F.cells
        ]
        a, b = field_si_check(F), field_si_check(F.replace_cells(split))
        assert a.hypothesis_ii == b.hypothesis_ii
        assert set(a.failing_cells) == {x for x in b.failing_cells if not x.endswith("'")}
