"""Bit-packed linear algebra over GF(2).

Vectors are Python integers: bit ``i`` of the integer is coordinate ``i`` of
the vector, so coordinate 0 sits in the least significant bit.  String forms
read left to right starting at coordinate 0 ("110" has coordinates 1, 1, 0).
Matrices hold one integer per row.  Arbitrary-precision integers make word
management unnecessary and keep XOR, AND and popcount single operations.

All functions are pure: inputs are never mutated.  Row reduction uses a fixed
pivot rule (leftmost available column, rows scanned top-down) so every result
is deterministic.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence


def parity(x: int) -> int:
    """Return the parity (0 or 1) of the number of set bits of ``x``."""
    return x.bit_count() & 1


def dot(a: int, b: int) -> int:
    """GF(2) inner product of two bit-packed vectors."""
    return (a & b).bit_count() & 1


class BitVector:
    """Immutable GF(2) vector of fixed length, packed into one integer.

    Attributes:
        length: Number of coordinates.
        bits: Integer whose bit ``i`` is coordinate ``i``.  Bits at
            positions >= ``length`` are always zero.
    """

    __slots__ = ("length", "bits")

    def __init__(self, length: int, bits: int = 0):
        if length < 0:
            raise ValueError(f"negative length {length}")
        if bits < 0 or bits >> length:
            raise ValueError(f"bits 0x{bits:x} do not fit in length {length}")
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "bits", bits)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("BitVector is immutable")

    @classmethod
    def from_string(cls, s: str) -> "BitVector":
        """Parse "0101..." with coordinate 0 first."""
        bits = 0
        for i, ch in enumerate(s):
            if ch == "1":
                bits |= 1 << i
            elif ch != "0":
                raise ValueError(f"invalid character {ch!r} in bit string")
        return cls(len(s), bits)

    def to_string(self) -> str:
        return "".join("1" if (self.bits >> i) & 1 else "0" for i in range(self.length))

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.length != other.length:
            raise ValueError("length mismatch")
        return BitVector(self.length, self.bits ^ other.bits)

    def __and__(self, other: "BitVector") -> "BitVector":
        if self.length != other.length:
            raise ValueError("length mismatch")
        return BitVector(self.length, self.bits & other.bits)

    def weight(self) -> int:
        """Hamming weight."""
        return self.bits.bit_count()

    def dot(self, other: "BitVector") -> int:
        if self.length != other.length:
            raise ValueError("length mismatch")
        return dot(self.bits, other.bits)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BitVector)
            and self.length == other.length
            and self.bits == other.bits
        )

    def __hash__(self) -> int:
        return hash((self.length, self.bits))

    def __len__(self) -> int:
        return self.length

    def __repr__(self) -> str:
        return f"BitVector('{self.to_string()}')"


class BitMatrix:
    """GF(2) matrix stored as one bit-packed integer per row.

    Attributes:
        rows: Number of rows.
        cols: Number of columns.
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, cols: int, row_ints: Sequence[int]):
        if cols < 0:
            raise ValueError(f"negative cols {cols}")
        data = []
        for r in row_ints:
            if r < 0 or r >> cols:
                raise ValueError(f"row 0x{r:x} does not fit in {cols} columns")
            data.append(r)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "rows", len(data))
        object.__setattr__(self, "_data", tuple(data))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("BitMatrix is immutable")

    @classmethod
    def from_vectors(cls, vectors: Sequence[BitVector]) -> "BitMatrix":
        if not vectors:
            raise ValueError("need at least one vector to infer column count")
        cols = vectors[0].length
        for v in vectors:
            if v.length != cols:
                raise ValueError("length mismatch among rows")
        return cls(cols, [v.bits for v in vectors])

    @classmethod
    def from_strings(cls, strings: Sequence[str]) -> "BitMatrix":
        return cls.from_vectors([BitVector.from_string(s) for s in strings])

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, [1 << i for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(cols, [0] * rows)

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self._data[i])

    def row_ints(self) -> tuple:
        return self._data

    def to_strings(self) -> list:
        return [self.row(i).to_string() for i in range(self.rows)]

    def transpose(self) -> "BitMatrix":
        out = [0] * self.cols
        for i, r in enumerate(self._data):
            while r:
                low = r & -r
                out[low.bit_length() - 1] |= 1 << i
                r ^= low
        return BitMatrix(self.rows, out)

    def stack(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.cols:
            raise ValueError("column count mismatch")
        return BitMatrix(self.cols, list(self._data) + list(other._data))

    def matvec(self, x: BitVector) -> BitVector:
        """Matrix-vector product over GF(2); ``x`` has one entry per column."""
        if x.length != self.cols:
            raise ValueError("dimension mismatch")
        bits = 0
        for i, r in enumerate(self._data):
            bits |= dot(r, x.bits) << i
        return BitVector(self.rows, bits)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BitMatrix)
            and self.cols == other.cols
            and self._data == other._data
        )

    def __hash__(self) -> int:
        return hash((self.cols, self._data))

    def __repr__(self) -> str:
        return f"BitMatrix({self.to_strings()!r})"


# ----- integer-row core -----------------------------------------------------
#
# The typed API below wraps these.  Hot paths elsewhere in the package call
# them directly with plain lists of ints.


def rank_ints(rows: Iterable[int]) -> int:
    """Rank of the span of bit-packed rows, by incremental elimination."""
    basis: dict = {}  # pivot bit position -> reduced row
    for r in rows:
        while r:
            p = r.bit_length() - 1
            if p in basis:
                r ^= basis[p]
            else:
                basis[p] = r
                break
    return len(basis)


def rref_ints(cols: int, rows: Sequence[int]) -> tuple:
    """Reduced row echelon form with deterministic pivoting.

    Pivots are chosen in the leftmost available column (lowest bit index),
    scanning candidate rows top-down.  Returns ``(new_rows, pivot_cols)``
    where ``new_rows`` has pivot rows first (in pivot-column order) followed
    by all-zero rows.

    Args:
        cols: Number of columns.
        rows: Bit-packed rows; not modified.

    Returns:
        Tuple of the reduced row list and the sorted list of pivot columns.
    """
    work = list(rows)
    pivots = []
    pivot_row = 0
    for c in range(cols):
        mask = 1 << c
        src = None
        for i in range(pivot_row, len(work)):
            if work[i] & mask:
                src = i
                break
        if src is None:
            continue
        work[pivot_row], work[src] = work[src], work[pivot_row]
        pv = work[pivot_row]
        for i in range(len(work)):
            if i != pivot_row and work[i] & mask:
                work[i] ^= pv
        pivots.append(c)
        pivot_row += 1
        if pivot_row == len(work):
            break
    return work, pivots


def kernel_ints(cols: int, rows: Sequence[int]) -> list:
    """Basis of the right null space {x : row . x = 0 for every row}.

    One basis vector per free column, in ascending free-column order.
    """
    reduced, pivots = rref_ints(cols, rows)
    pivot_set = set(pivots)
    basis = []
    for f in range(cols):
        if f in pivot_set:
            continue
        v = 1 << f
        for i, p in enumerate(pivots):
            if (reduced[i] >> f) & 1:
                v |= 1 << p
        basis.append(v)
    return basis


def solve_ints(cols: int, rows: Sequence[int], rhs: Sequence[int]) -> Optional[int]:
    """One solution of ``m @ x = b`` over GF(2), or None if inconsistent.

    Args:
        cols: Number of columns of the matrix.
        rows: Bit-packed matrix rows.
        rhs: One bit (0/1) per row.

    Returns:
        A bit-packed solution with all free coordinates set to zero, or
        None when the system has no solution.
    """
    if len(rows) != len(rhs):
        raise ValueError("rhs length must equal row count")
    aug = [r | (int(b) << cols) for r, b in zip(rows, rhs)]
    reduced, pivots = rref_ints(cols + 1, aug)
    if cols in pivots:
        return None  # a row reduced to 0 = 1
    x = 0
    for i, p in enumerate(pivots):
        if (reduced[i] >> cols) & 1:
            x |= 1 << p
    return x


def intersection_dim_ints(rows_a: Sequence[int], rows_b: Sequence[int]) -> int:
    """dim(span(A) intersect span(B)) via rank(A) + rank(B) - rank(A|B)."""
    return (
        rank_ints(rows_a)
        + rank_ints(rows_b)
        - rank_ints(list(rows_a) + list(rows_b))
    )


# ----- typed API ------------------------------------------------------------


def rank(m: BitMatrix) -> int:
    """Rank of ``m`` over GF(2)."""
    return rank_ints(m.row_ints())


def rref(m: BitMatrix) -> tuple:
    """Reduced row echelon form of ``m``.

    Returns:
        ``(reduced, pivot_cols)`` where ``reduced`` is a BitMatrix of the
        same shape and ``pivot_cols`` is a tuple of pivot column indices in
        increasing order.
    """
    reduced, pivots = rref_ints(m.cols, m.row_ints())
    return BitMatrix(m.cols, reduced), tuple(pivots)


def kernel_basis(m: BitMatrix) -> list:
    """Basis vectors of the right null space of ``m``, as BitVectors.

    The list has exactly ``m.cols - rank(m)`` entries.
    """
    return [BitVector(m.cols, v) for v in kernel_ints(m.cols, m.row_ints())]


def solve_affine(m: BitMatrix, b: BitVector) -> Optional[BitVector]:
    """Solve ``m @ x = b`` over GF(2).

    Args:
        m: Coefficient matrix.
        b: Right-hand side; must have one entry per matrix row.

    Returns:
        A solution BitVector, or None when the system is inconsistent.

    Raises:
        ValueError: If ``b.length != m.rows``.
    """
    if b.length != m.rows:
        raise ValueError(f"rhs length {b.length} != row count {m.rows}")
    rhs = [(b.bits >> i) & 1 for i in range(m.rows)]
    x = solve_ints(m.cols, m.row_ints(), rhs)
    return None if x is None else BitVector(m.cols, x)


def subspace_intersection_dim(a: BitMatrix, b: BitMatrix) -> int:
    """Dimension of span(rows of a) intersect span(rows of b).

    Raises:
        ValueError: If the two matrices have different column counts.
    """
    if a.cols != b.cols:
        raise ValueError(f"column count mismatch: {a.cols} != {b.cols}")
    return intersection_dim_ints(a.row_ints(), b.row_ints())
