"""Exact arithmetic and dense linear algebra over prime fields GF(p).

Matrices are immutable (tuples of tuples of ints in [0, p)).  Row
reduction always picks the first nonzero entry in column order as the
pivot, so reduced forms are reproducible across platforms.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import sympy

from .errors import FieldTooSmallError, SingularMatrixError

MAX_PRIME = 2**31


@dataclass(frozen=True)
class PrimeField:
    """Prime field GF(p), 2 <= p < 2**31."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not 2 <= self.p < MAX_PRIME:
            raise ValueError(f"field modulus must be an integer in [2, 2^31): got {self.p!r}")
        if not sympy.isprime(self.p):
            raise ValueError(f"field modulus must be prime: got {self.p}")

    def element(self, a: int) -> int:
        return a % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError(f"0 has no multiplicative inverse in GF({self.p})")
        return pow(a, -1, self.p)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return pow(self.inv(a), -e, self.p)
        return pow(a % self.p, e, self.p)

    def rand(self, rng: random.Random) -> int:
        return rng.randrange(self.p)

    def rand_vector(self, n: int, rng: random.Random) -> tuple:
        return tuple(rng.randrange(self.p) for _ in range(n))


@dataclass(frozen=True)
class FieldMatrix:
    """Dense matrix over a prime field; entries reduced mod p."""

    field: PrimeField
    entries: tuple  # tuple of row tuples

    @classmethod
    def from_rows(cls, field: PrimeField, rows: Iterable[Sequence[int]]) -> "FieldMatrix":
        reduced = tuple(tuple(x % field.p for x in row) for row in rows)
        widths = {len(r) for r in reduced}
        if len(widths) > 1:
            raise ValueError("rows have inconsistent lengths")
        return cls(field, reduced)

    @classmethod
    def identity(cls, field: PrimeField, n: int) -> "FieldMatrix":
        return cls(field, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, field: PrimeField, nrows: int, ncols: int) -> "FieldMatrix":
        return cls(field, tuple((0,) * ncols for _ in range(nrows)))

    @classmethod
    def random(cls, field: PrimeField, nrows: int, ncols: int, rng: random.Random) -> "FieldMatrix":
        return cls(field, tuple(field.rand_vector(ncols, rng) for _ in range(nrows)))

    @property
    def nrows(self) -> int:
        return len(self.entries)

    @property
    def ncols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def row(self, i: int) -> tuple:
        return self.entries[i]

    def rows(self) -> tuple:
        return self.entries

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.entries)

    def take_rows(self, indices: Sequence[int]) -> "FieldMatrix":
        return FieldMatrix(self.field, tuple(self.entries[i] for i in indices))

    def take_columns(self, indices: Sequence[int]) -> "FieldMatrix":
        return FieldMatrix(self.field, tuple(tuple(r[j] for j in indices) for r in self.entries))

    def vstack(self, other: "FieldMatrix") -> "FieldMatrix":
        if other.entries and self.entries and other.ncols != self.ncols:
            raise ValueError("column count mismatch in vstack")
        return FieldMatrix(self.field, self.entries + other.entries)

    def stack_row(self, row: Sequence[int]) -> "FieldMatrix":
        if self.entries and len(row) != self.ncols:
            raise ValueError("row length mismatch")
        return FieldMatrix(self.field, self.entries + (tuple(x % self.field.p for x in row),))

    def transpose(self) -> "FieldMatrix":
        return FieldMatrix(self.field, tuple(zip(*self.entries)) if self.entries else ())

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch: {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        p = self.field.p
        cols = other.transpose().entries
        return FieldMatrix(
            self.field,
            tuple(tuple(sum(a * b for a, b in zip(row, col)) % p for col in cols) for row in self.entries),
        )

    def mul_vector(self, v: Sequence[int]) -> tuple:
        if len(v) != self.ncols:
            raise ValueError("vector length mismatch")
        p = self.field.p
        return tuple(sum(a * b for a, b in zip(row, v)) % p for row in self.entries)

    def _reduce(self):
        """Gauss-Jordan elimination; returns (reduced rows, pivot columns)."""
        p = self.field.p
        m = [list(r) for r in self.entries]
        pivots = []
        r = 0
        for c in range(self.ncols):
            if r == len(m):
                break
            piv = next((i for i in range(r, len(m)) if m[i][c]), None)
            if piv is None:
                continue
            m[r], m[piv] = m[piv], m[r]
            inv = pow(m[r][c], -1, p)
            m[r] = [(x * inv) % p for x in m[r]]
            for i in range(len(m)):
                if i != r and m[i][c]:
                    f = m[i][c]
                    m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
        return m, pivots

    def rref(self) -> "FieldMatrix":
        m, _ = self._reduce()
        return FieldMatrix(self.field, tuple(tuple(row) for row in m))

    def rank(self) -> int:
        _, pivots = self._reduce()
        return len(pivots)

    def is_invertible(self) -> bool:
        return self.nrows == self.ncols and self.rank() == self.nrows

    def inverse(self) -> "FieldMatrix":
        if self.nrows != self.ncols:
            raise SingularMatrixError("only square matrices can be inverted")
        n = self.nrows
        aug = FieldMatrix(
            self.field,
            tuple(self.entries[i] + FieldMatrix.identity(self.field, n).entries[i] for i in range(n)),
        )
        reduced, pivots = aug._reduce()
        if pivots[:n] != list(range(n)) or len(pivots) < n:
            raise SingularMatrixError(f"matrix of rank {self.rank()} < {n} has no inverse")
        return FieldMatrix(self.field, tuple(tuple(row[n:]) for row in reduced))

    def solve(self, rhs: Sequence[int]) -> tuple:
        """Unique solution x of self @ x = rhs; raises if none or many."""
        if len(rhs) != self.nrows:
            raise ValueError("right-hand side length mismatch")
        aug = FieldMatrix(
            self.field,
            tuple(row + (rhs[i] % self.field.p,) for i, row in enumerate(self.entries)),
        )
        reduced, pivots = aug._reduce()
        n = self.ncols
        if n in pivots:
            raise SingularMatrixError("inconsistent linear system")
        if len(pivots) < n:
            raise SingularMatrixError(f"underdetermined system: rank {len(pivots)} < {n} unknowns")
        x = [0] * n
        for r, c in enumerate(pivots):
            x[c] = reduced[r][n]
        return tuple(x)

    def solve_any(self, rhs: Sequence[int]) -> Optional[tuple]:
        """One solution of self @ x = rhs with free variables set to 0,
        or None if the system is inconsistent."""
        if len(rhs) != self.nrows:
            raise ValueError("right-hand side length mismatch")
        aug = FieldMatrix(
            self.field,
            tuple(row + (rhs[i] % self.field.p,) for i, row in enumerate(self.entries)),
        )
        reduced, pivots = aug._reduce()
        n = self.ncols
        if n in pivots:
            return None
        x = [0] * n
        for r, c in enumerate(pivots):
            x[c] = reduced[r][n]
        return tuple(x)

    def rowspace_contains(self, v: Sequence[int]) -> bool:
        """True iff v is a linear combination of the rows."""
        if self.entries and len(v) != self.ncols:
            raise ValueError("vector length mismatch")
        if not self.entries:
            return all(x % self.field.p == 0 for x in v)
        return self.rank() == self.stack_row(v).rank()

    def to_lists(self) -> list:
        return [list(r) for r in self.entries]


def vandermonde(k: int, field: PrimeField) -> FieldMatrix:
    """k x k Vandermonde matrix on evaluation points 1..k.

    Row i is (1, x_i, x_i^2, ..., x_i^(k-1)) for x_i = i + 1.  Requires
    p > k so the points are distinct and nonzero.
    """
    if field.p <= k:
        raise FieldTooSmallError(f"need p > k for {k} distinct nonzero points, got p={field.p}")
    return FieldMatrix(
        field,
        tuple(tuple(pow(x, j, field.p) for j in range(k)) for x in range(1, k + 1)),
    )


def random_invertible(field: PrimeField, n: int, rng: random.Random, max_tries: int = 256) -> FieldMatrix:
    for _ in range(max_tries):
        m = FieldMatrix.random(field, n, n, rng)
        if m.is_invertible():
            return m
    raise SingularMatrixError(f"no invertible {n}x{n} matrix found in {max_tries} samples over GF({field.p})")
