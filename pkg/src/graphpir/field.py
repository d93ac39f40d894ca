"""Exact arithmetic in prime fields F_q and small dense linear algebra.

Everything downstream (shares, queries, decode systems, rank checks)
runs on these types. Values are machine integers reduced mod q; q is
verified prime at construction and capped well below 2**31 so products
never overflow C longs on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FieldMismatch, Singular, ZeroInverse

_MAX_Q = 1 << 31


def is_prime(n: int) -> bool:
    """Deterministic trial division; fields used here are tiny."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    candidate = n + 1
    while not is_prime(candidate):
        candidate += 1
    return candidate


@dataclass(frozen=True)
class PrimeField:
    """The prime field F_q. Immutable; instances compare by modulus."""

    q: int

    def __post_init__(self):
        if not (2 <= self.q < _MAX_Q):
            raise ValueError(f"field order must be in [2, 2**31): {self.q}")
        if not is_prime(self.q):
            raise ValueError(f"field order must be prime: {self.q}")

    def element(self, value: int) -> FieldElement:
        return FieldElement(value % self.q, self)

    def zero(self) -> FieldElement:
        return FieldElement(0, self)

    def one(self) -> FieldElement:
        return FieldElement(1, self)

    def elements(self):
        """All field elements in ascending value order."""
        for v in range(self.q):
            yield FieldElement(v, self)

    def __repr__(self):
        return f"PrimeField({self.q})"


class FieldElement:
    """An element of a specific PrimeField.

    Immutable. Mixing elements of different fields raises FieldMismatch
    rather than silently coercing.
    """

    __slots__ = ("value", "field")

    def __init__(self, value: int, field: PrimeField):
        object.__setattr__(self, "value", value % field.q)
        object.__setattr__(self, "field", field)

    def __setattr__(self, name, val):
        raise AttributeError("FieldElement is immutable")

    def _check(self, other: FieldElement) -> None:
        if self.field.q != other.field.q:
            raise FieldMismatch(
                f"F_{self.field.q} vs F_{other.field.q}"
            )

    def __add__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.value + other.value, self.field)

    def __sub__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.value - other.value, self.field)

    def __mul__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.value * other.value, self.field)

    def __neg__(self) -> FieldElement:
        return FieldElement(-self.value, self.field)

    def __pow__(self, k: int) -> FieldElement:
        if k < 0:
            raise ValueError("negative exponent; use inv() explicitly")
        # pow(0, 0, q) == 1, matching the empty-product convention.
        return FieldElement(pow(self.value, k, self.field.q), self.field)

    def inv(self) -> FieldElement:
        """Multiplicative inverse via Fermat's little theorem."""
        if self.value == 0:
            raise ZeroInverse(f"0 has no inverse in F_{self.field.q}")
        return FieldElement(
            pow(self.value, self.field.q - 2, self.field.q), self.field
        )

    def is_zero(self) -> bool:
        return self.value == 0

    def __eq__(self, other):
        return (
            isinstance(other, FieldElement)
            and self.value == other.value
            and self.field.q == other.field.q
        )

    def __hash__(self):
        return hash((self.value, self.field.q))

    def __repr__(self):
        return f"F{self.field.q}({self.value})"


class FieldMatrix:
    """Dense row-major matrix over one PrimeField."""

    __slots__ = ("field", "rows", "cols", "entries")

    def __init__(self, field: PrimeField, rows_of_elements):
        rows = [list(r) for r in rows_of_elements]
        if not rows or not rows[0]:
            raise ValueError("matrix must have at least one row and column")
        width = len(rows[0])
        for r in rows:
            if len(r) != width:
                raise ValueError("ragged rows")
            for e in r:
                if e.field.q != field.q:
                    raise FieldMismatch("matrix entries from a different field")
        self.field = field
        self.rows = len(rows)
        self.cols = width
        self.entries = rows

    @classmethod
    def from_ints(cls, field: PrimeField, rows_of_ints) -> FieldMatrix:
        return cls(field, [[field.element(v) for v in r] for r in rows_of_ints])

    @classmethod
    def identity(cls, field: PrimeField, n: int) -> FieldMatrix:
        return cls.from_ints(
            field, [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        )

    def to_ints(self) -> list[list[int]]:
        return [[e.value for e in row] for row in self.entries]

    def __getitem__(self, rc):
        r, c = rc
        return self.entries[r][c]

    def __eq__(self, other):
        return (
            isinstance(other, FieldMatrix)
            and self.field.q == other.field.q
            and self.to_ints() == other.to_ints()
        )

    def __repr__(self):
        return f"FieldMatrix(F_{self.field.q}, {self.to_ints()})"

    def mul(self, other: FieldMatrix) -> FieldMatrix:
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        q = self.field.q
        a, b = self.to_ints(), other.to_ints()
        out = [
            [
                sum(a[i][k] * b[k][j] for k in range(self.cols)) % q
                for j in range(other.cols)
            ]
            for i in range(self.rows)
        ]
        return FieldMatrix.from_ints(self.field, out)

    def mul_vector(self, vec) -> list[FieldElement]:
        if len(vec) != self.cols:
            raise ValueError("dimension mismatch")
        q = self.field.q
        vals = [v.value for v in vec]
        return [
            self.field.element(
                sum(row[k].value * vals[k] for k in range(self.cols)) % q
            )
            for row in self.entries
        ]


def mat_invert(m: FieldMatrix) -> FieldMatrix:
    """Invert a square matrix by Gauss-Jordan elimination.

    Pivoting takes the first nonzero entry in each column (deterministic,
    so fixtures are reproducible). Raises Singular if rank < dimension.
    """
    if m.rows != m.cols:
        raise ValueError("only square matrices can be inverted")
    n = m.rows
    q = m.field.q
    a = [row[:] for row in m.to_ints()]
    inv = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if a[r][col] % q != 0:
                pivot = r
                break
        if pivot is None:
            raise Singular(f"rank < {n}")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            inv[col], inv[pivot] = inv[pivot], inv[col]
        p = pow(a[col][col], q - 2, q)
        a[col] = [(x * p) % q for x in a[col]]
        inv[col] = [(x * p) % q for x in inv[col]]
        for r in range(n):
            if r != col and a[r][col] % q != 0:
                f = a[r][col] % q
                a[r] = [(x - f * y) % q for x, y in zip(a[r], a[col])]
                inv[r] = [(x - f * y) % q for x, y in zip(inv[r], inv[col])]
    return FieldMatrix.from_ints(m.field, inv)


def mat_rank(m: FieldMatrix) -> int:
    """Row rank over F_q by forward elimination."""
    q = m.field.q
    a = [row[:] for row in m.to_ints()]
    rank = 0
    for col in range(m.cols):
        pivot = None
        for r in range(rank, m.rows):
            if a[r][col] % q != 0:
                pivot = r
                break
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        p = pow(a[rank][col], q - 2, q)
        a[rank] = [(x * p) % q for x in a[rank]]
        for r in range(m.rows):
            if r != rank and a[r][col] % q != 0:
                f = a[r][col] % q
                a[r] = [(x - f * y) % q for x, y in zip(a[r], a[rank])]
        rank += 1
        if rank == m.rows:
            break
    return rank


def vandermonde(field: PrimeField, points, n_rows: int) -> FieldMatrix:
    """n_rows x len(points) matrix with entries points[j] ** i."""
    return FieldMatrix(
        field, [[p ** i for p in points] for i in range(n_rows)]
    )
