"""Exact prime-field arithmetic and Gaussian elimination."""

import random

import pytest
import sympy

from securepair.errors import FieldTooSmallError, SingularMatrixError
from securepair.fields import FieldMatrix, PrimeField, random_invertible, vandermonde


def test_field_validation():
    for bad in (0, 1, 4, 9, 15, -7):
        with pytest.raises(ValueError):
            PrimeField(bad)
    for good in (2, 3, 5, 7, 65537):
        assert PrimeField(good).p == good


def test_field_arithmetic():
    f = PrimeField(7)
    assert f.add(5, 4) == 2
    assert f.sub(2, 5) == 4
    assert f.mul(3, 5) == 1
    assert f.neg(3) == 4
    assert f.inv(3) == 5
    assert f.div(1, 3) == 5
    assert f.pow(3, 6) == 1
    with pytest.raises(ZeroDivisionError):
        f.inv(0)


def test_inverse_matches_fermat():
    for p in (2, 3, 5, 11, 101):
        f = PrimeField(p)
        for a in range(1, p):
            assert f.mul(a, f.inv(a)) == 1


def test_rank_against_sympy():
    rng = random.Random(42)
    for p in (2, 3, 7):
        f = PrimeField(p)
        for _ in range(30):
            r = rng.randint(1, 5)
            c = rng.randint(1, 5)
            m = FieldMatrix.random(f, r, c, rng)
            expected = sympy.Matrix(m.to_lists()).rank(
                iszerofunc=lambda x, p=p: x % p == 0
            )
            assert m.rank() == expected


def test_inverse_and_solve():
    rng = random.Random(7)
    for p in (3, 5, 13):
        f = PrimeField(p)
        for _ in range(20):
            size = rng.randint(1, 4)
            m = random_invertible(f, size, rng)
            inv = m.inverse()
            assert (m @ inv).entries == FieldMatrix.identity(f, size).entries
            x = f.rand_vector(size, rng)
            b = m.mul_vector(x)
            assert m.solve(b) == tuple(x)


def test_singular_matrix_rejected():
    f = PrimeField(5)
    m = FieldMatrix.from_rows(f, [[1, 2], [2, 4]])
    assert not m.is_invertible()
    with pytest.raises(SingularMatrixError):
        m.inverse()
    with pytest.raises(SingularMatrixError):
        m.solve([1, 0])


def test_rowspace_membership():
    f = PrimeField(3)
    m = FieldMatrix.from_rows(f, [[1, 0, 1, 0], [2, 1, 2, 1]])
    assert m.rowspace_contains([0, 1, 0, 1])  # second minus twice the first
    assert not m.rowspace_contains([1, 0, 0, 0])


def test_vandermonde():
    f = PrimeField(7)
    v = vandermonde(3, f)
    assert v.to_lists() == [[1, 1, 1], [1, 2, 4], [1, 3, 2]]
    assert v.is_invertible()
    with pytest.raises(FieldTooSmallError):
        vandermonde(3, PrimeField(3))


def test_matmul_and_stacking():
    f = PrimeField(5)
    a = FieldMatrix.from_rows(f, [[1, 2], [3, 4]])
    b = FieldMatrix.from_rows(f, [[0, 1], [1, 0]])
    assert (a @ b).to_lists() == [[2, 1], [4, 3]]
    assert a.vstack(b).nrows == 4
    assert a.transpose().to_lists() == [[1, 3], [2, 4]]
    assert a.take_columns([1]).to_lists() == [[2], [4]]
