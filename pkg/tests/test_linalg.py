import pickle
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from sidecomp.errors import GaussianDivisionByZero, SingularMatrixError, SizeCapError
from sidecomp.linalg import (
    ExactMatrix,
    GaussianRational as G,
    block_sizes_from_weyr,
    direct_sum,
    gr_arith,
    jordan_block,
    mat_inverse,
    mat_kernel,
    mat_rank,
    parse_rational,
    rational_sqrt_upper,
    weyr_sequence,
)

from gen_fields import partitions, rand_scalar

small_q = st.fractions(min_value=-5, max_value=5, max_denominator=6)
scalars = st.builds(G, small_q, small_q)


def test_gr_examples():
    assert gr_arith(G(1, 1), G(1, -1), "mul") == G(2)
    assert gr_arith(G(Fraction(3, 5), Fraction(4, 5)), None, "modulus_squared") == 1
    q = gr_arith(G(Fraction(1, 2)), G(0, 2), "div")
    assert q == G(0, Fraction(-1, 4))
    assert G(0, 2) * q == G(Fraction(1, 2))


def test_division_by_zero_is_distinct():
    with pytest.raises(GaussianDivisionByZero):
        G(1) / G(0)
    with pytest.raises(ZeroDivisionError):
        gr_arith(1, 0, "div")


def test_float_complex_rejected():
    with pytest.raises(TypeError):
        G.coerce(1 + 2j)
    with pytest.raises(TypeError):
        G(0.5)


@pytest.mark.parametrize("text,value", [("3", Fraction(3)), ("-2/4", Fraction(-1, 2)), (" 7 / -14 ", Fraction(-1, 2))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("text", ["1/0", "0.5", "1e3", "", "1//2", "abc"])
def test_parse_rational_rejects(text):
    with pytest.raises(ValueError):
        parse_rational(text)


def test_canonical_storage():
    z = G("6/-4", "10/20")
    assert (z.re.numerator, z.re.denominator) == (-3, 2)
    assert (z.im.numerator, z.im.denominator) == (1, 2)
    assert str(z) == "-3/2+1/2i"


@given(scalars, scalars, scalars)
def test_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    if b:
        assert (a / b) * b == a
    assert a.modulus_squared() == (a * a.conjugate()).re


def test_scalar_pickle_and_hash():
    z = G(Fraction(1, 3), -2)
    assert pickle.loads(pickle.dumps(z)) == z
    assert hash(G(2)) == hash(Fraction(2))
    with pytest.raises(AttributeError):
        z.re = 1


def test_kernel_examples():
    assert mat_kernel(ExactMatrix.identity(3)) == []
    (v,) = mat_kernel(ExactMatrix.from_rows([[1, 1], [1, 1]]))
    # proportional to (1, -1)
    assert v[0, 0] == -v[1, 0] and v[0, 0]


def test_kernel_rank_2_example():
    M = ExactMatrix.from_rows([[1, 2, 3, 4], [2, 4, 6, 8], [0, 1, G(0, 1), 2]])
    ker = mat_kernel(M)
    assert mat_rank(M) == 2 and len(ker) == 2
    assert all((M @ v).is_zero() for v in ker)


def _sympy(M: ExactMatrix):
    return sympy.Matrix(
        M.rows, M.cols, [sympy.Rational(x.re.numerator, x.re.denominator) + sympy.I * sympy.Rational(x.im.numerator, x.im.denominator) for x in M.entries]
    )


def _random_matrix(rng, r, c, rank=None):
    if rank is None:
        return ExactMatrix.from_rows([[rand_scalar(rng, 3, 3) if rng.random() < 0.7 else 0 for _ in range(c)] for _ in range(r)])
    if rank == 0:
        return ExactMatrix.zeros(r, c)
    A = ExactMatrix.from_rows([[rand_scalar(rng, 2, 2) for _ in range(rank)] for _ in range(r)])
    B = ExactMatrix.from_rows([[rand_scalar(rng, 2, 2) for _ in range(c)] for _ in range(rank)])
    return A @ B


def test_rank_nullity_500_random():
    rng = random.Random(1)
    for _ in range(500):
        r, c = rng.randint(1, 8), rng.randint(1, 8)
        M = _random_matrix(rng, r, c, rank=rng.randint(0, min(r, c)) if rng.random() < 0.5 else None)
        ker = mat_kernel(M)
        assert mat_rank(M) + len(ker) == c
        assert all((M @ v).is_zero() for v in ker)
        if ker:
            K = ExactMatrix.from_rows([[v[i, 0] for v in ker] for i in range(c)])
            assert mat_rank(K) == len(ker)


def test_rank_against_sympy():
    rng = random.Random(2)
    for _ in range(60):
        r, c = rng.randint(1, 5), rng.randint(1, 5)
        M = _random_matrix(rng, r, c, rank=rng.randint(0, min(r, c)))
        assert mat_rank(M) == _sympy(M).rank()


def test_inverse_examples():
    I = ExactMatrix.identity(4)
    assert mat_inverse(I) == I
    X = ExactMatrix.from_rows([[1, 0, 0, 5], [0, 1, -3, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert mat_inverse(X) == ExactMatrix.from_rows([[1, 0, 0, -5], [0, 1, 3, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    T = ExactMatrix.from_rows([[1, 2, 3], [0, 0, 4], [0, 0, 5]])
    with pytest.raises(SingularMatrixError) as info:
        mat_inverse(T)
    w = info.value.witness
    assert w is not None and not w.is_zero() and (T @ w).is_zero()


def test_inverse_random():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randint(1, 7)
        M = _random_matrix(rng, n, n)
        if mat_rank(M) < n:
            with pytest.raises(SingularMatrixError):
                mat_inverse(M)
            continue
        Mi = mat_inverse(M)
        assert M @ Mi == ExactMatrix.identity(n) == Mi @ M


def test_weyr_examples():
    a = G(2, -1)
    assert weyr_sequence(jordan_block(4, a), a) == [4, 3, 2, 1, 0]
    assert weyr_sequence(ExactMatrix.diagonal([a, a]), a) == [2, 0, 0]
    assert weyr_sequence(direct_sum(jordan_block(2, a), jordan_block(1, a)), a) == [3, 1, 0, 0]


def test_weyr_reconstructs_all_partitions():
    rng = random.Random(4)
    for n in range(1, 8):
        for p in partitions(n):
            J = direct_sum(*[jordan_block(m, 1) for m in p])
            # hide the structure behind a random similarity
            while True:
                S = _random_matrix(rng, n, n)
                if mat_rank(S) == n:
                    break
            M = S @ J @ mat_inverse(S)
            assert block_sizes_from_weyr(weyr_sequence(M, 1)) == p


def test_matmul_against_naive():
    rng = random.Random(5)
    for _ in range(50):
        a, b, c = (rng.randint(1, 5) for _ in range(3))
        A, B = _random_matrix(rng, a, b), _random_matrix(rng, b, c)
        naive = [[sum((A[i, k] * B[k, j] for k in range(b)), G(0)) for j in range(c)] for i in range(a)]
        assert A @ B == ExactMatrix.from_rows(naive)


@settings(max_examples=200)
@given(st.fractions(min_value=0, max_value=1000, max_denominator=10**6))
def test_sqrt_upper_bound(q):
    u = rational_sqrt_upper(q)
    assert u >= 0 and u * u >= q
    assert u - Fraction(1, 10**6) < 0 or (u - Fraction(1, 10**6)) ** 2 < q


def test_sqrt_exact_on_squares():
    assert rational_sqrt_upper(Fraction(9, 16)) == Fraction(3, 4)
    assert rational_sqrt_upper(Fraction(0)) == 0


def test_size_cap(monkeypatch):
    monkeypatch.setenv("SIDECOMP_MAX_DIM", "3")
    with pytest.raises(SizeCapError):
        mat_inverse(ExactMatrix.identity(4))
    with pytest.raises(SizeCapError):
        weyr_sequence(ExactMatrix.identity(4), 1)


def test_matrix_immutable_and_picklable():
    M = ExactMatrix.from_rows([[1, G(0, 1)], [0, 2]])
    assert pickle.loads(pickle.dumps(M)) == M
    with pytest.raises(AttributeError):
        M.rows = 3
