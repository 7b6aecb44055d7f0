"""Replica-space commutant combinatorics in exact arithmetic.

The commutant of the k-fold tensor action is spanned by operators labeled
by subspaces T of Z_2^(2k) that are half-dimensional, self-orthogonal under
the ordinary dot product, and contain the all-ones vector.  The "complex"
flavor adds the mod-4 constraint |x| - |y| = 0 on every element (x, y),
selecting the sub-basis that also commutes with the phase gate action.

An element u of Z_2^(2k) packs x into the low k bits and y into the high k
bits.  Subspaces are canonicalized by reduced row echelon form of their
basis matrices, making enumeration duplicate-free.

Everything here is exact: big integers, Fractions, and a minimal polynomial
type for the Gram identities; floats appear only for purities of resource
states with non-dyadic amplitudes.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .gf2 import intersection_dim_ints, kernel_ints, rank_ints, rref_ints

FLAVORS = ("real", "complex")
ENUM_GUARD = {"real": 5, "complex": 6}


def qpochhammer(a, q, n: int) -> Fraction:
    """(a; q)_n = prod_{j=0}^{n-1} (1 - a q^j), exactly."""
    if n < 0:
        raise ValueError("n must be >= 0")
    a, q = Fraction(a), Fraction(q)
    out = Fraction(1)
    for j in range(n):
        out *= 1 - a * q**j
    return out


def gaussian_binomial(n: int, k: int, q: int = 2) -> int:
    """Number of k-dimensional subspaces of an n-dimensional space over F_q."""
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    assert num % den == 0
    return num // den


def double_factorial_odd(k: int) -> int:
    """(2k-1)!! = 1*3*5*...*(2k-1); the pairing count on 2k points."""
    out = 1
    for j in range(1, 2 * k, 2):
        out *= j
    return out


@dataclass(frozen=True)
class Poly:
    """Polynomial in one indeterminate with Fraction coefficients.

    coeffs[i] is the degree-i coefficient; trailing zeros are stripped so
    equality is structural.
    """

    coeffs: tuple

    @classmethod
    def make(cls, coeffs) -> "Poly":
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        return cls(tuple(cs))

    @classmethod
    def monomial(cls, degree: int, coeff=1) -> "Poly":
        return cls.make([0] * degree + [coeff])

    @classmethod
    def const(cls, value) -> "Poly":
        return cls.make([value])

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly.make(out)

    def __mul__(self, other: "Poly") -> "Poly":
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs))
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly.make(out)

    def evaluate(self, x) -> Fraction:
        x = Fraction(x)
        out = Fraction(0)
        for c in reversed(self.coeffs):
            out = out * x + c
        return out


@dataclass(frozen=True)
class LagrangianSubspace:
    """Half-dimensional self-orthogonal subspace of Z_2^(2k) containing 1.

    Attributes:
        k: Replica count; elements live in 2k bits (x low, y high).
        basis: RREF-canonical tuple of k packed basis vectors.
        flavor: "real" or "complex".
    """

    k: int
    basis: tuple
    flavor: str

    def elements(self) -> list:
        """All 2^k packed elements, in XOR-combination order."""
        out = [0]
        for b in self.basis:
            out += [e ^ b for e in out]
        return out

    def xy_pairs(self) -> list:
        mask = (1 << self.k) - 1
        return [(e & mask, e >> self.k) for e in self.elements()]


def _is_self_orthogonal_with(v: int, basis: Sequence[int]) -> bool:
    if (v.bit_count() & 1) != 0:  # v . v = parity of total weight
        return False
    return all(((v & b).bit_count() & 1) == 0 for b in basis)


def _mod4_charge(u: int, k: int) -> int:
    """|x| - |y| mod 4 of a packed element."""
    mask = (1 << k) - 1
    return ((u & mask).bit_count() - (u >> k).bit_count()) % 4


def enumerate_lagrangians(k: int, flavor: str = "real") -> list:
    """Complete duplicate-free list of subspaces, canonical basis order.

    Grows self-orthogonal subspaces from span{1} one dimension at a time,
    deduplicating on the RREF of the basis.  Since every subspace of a
    self-orthogonal subspace is self-orthogonal, every target is reached.

    Raises:
        ValueError: Unknown flavor or k above the size guard.
    """
    return list(_enumerate_cached(k, flavor))


@functools.lru_cache(maxsize=None)
def _enumerate_cached(k: int, flavor: str) -> tuple:
    if flavor not in FLAVORS:
        raise ValueError(f"flavor must be one of {FLAVORS}")
    if not 1 <= k <= ENUM_GUARD[flavor]:
        raise ValueError(f"{flavor} enumeration is guarded to k <= {ENUM_GUARD[flavor]}")
    nbits = 2 * k
    ones = (1 << nbits) - 1
    complex_flavor = flavor == "complex"

    # Bases are kept in reduced echelon form with the pivot of each row at
    # its highest set bit and no pivot bit shared between rows; the sorted
    # row tuple is then a unique key for the row space.
    def reduce_mod(v, rows):
        for s in rows:
            if (v >> (s.bit_length() - 1)) & 1:
                v ^= s
        return v

    level = {(ones,)}
    for _ in range(1, k):
        nxt = set()
        for basis in level:
            # Candidate extensions live in the dot-product kernel of the
            # basis; quotienting by the subspace itself (parity and the
            # mod-4 charge are constant on its cosets) removes most of
            # the duplication.
            comp = []
            for v in kernel_ints(nbits, list(basis)):
                v = reduce_mod(reduce_mod(v, basis), comp)
                if v:
                    comp.append(v)
            combos = [0]
            for b in comp:
                combos += [c ^ b for c in combos]
            for v in combos:
                if not v or (v.bit_count() & 1):
                    continue
                if complex_flavor and _mod4_charge(v, k) != 0:
                    continue
                h = v.bit_length() - 1
                rows = tuple(
                    sorted((s ^ v if (s >> h) & 1 else s) for s in basis) + [v]
                )
                nxt.add(tuple(sorted(rows)))
        level = nxt
    out = []
    for rows in sorted(level):
        reduced, _ = rref_ints(nbits, list(rows))
        out.append(LagrangianSubspace(k, tuple(reduced[: len(rows)]), flavor))
    out.sort(key=lambda T: T.basis)
    return tuple(out)


def expected_count(k: int, flavor: str) -> int:
    """Closed-form cardinality of the enumeration."""
    out = 1
    for m in range(k - 1):
        out *= (2 ** (m + 1) + 1) if flavor == "real" else (2**m + 1)
    return out


def r_operator(T: LagrangianSubspace) -> np.ndarray:
    """Single-site operator sum |x><y| over the subspace elements (0/1)."""
    dim = 1 << T.k
    out = np.zeros((dim, dim), dtype=np.int64)
    for x, y in T.xy_pairs():
        out[x, y] += 1
    assert out.sum() == dim
    return out


def gram_matrix(k: int, flavor: str = "real"):
    """Pairwise overlap polynomials G[i][j] = d^dim(T_i intersect T_j).

    Returns:
        (subspaces, G) with G a nested list of Poly entries in d.
    """
    subs = enumerate_lagrangians(k, flavor)
    n = len(subs)
    G = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            dim = intersection_dim_ints(subs[i].basis, subs[j].basis)
            G[i][j] = G[j][i] = Poly.monomial(dim)
    return subs, G


def gram_row_sum_poly(k: int, flavor: str = "real") -> Poly:
    """Closed form every Gram row sums to: d * prod(2^(m+1) + d) for the
    real flavor, d * prod(2^m + d) for the complex one."""
    d = Poly.monomial(1)
    out = d
    for m in range(k - 1):
        base = 2 ** (m + 1) if flavor == "real" else 2**m
        out = out * (Poly.const(base) + d)
    return out


def _invert_integer_matrix(mat):
    """Fraction-free Gauss-Jordan (Montante-Bareiss) inverse of an integer
    matrix.  Intermediate entries stay integers, avoiding the gcd churn of
    Fraction elimination; divisions by the previous pivot are exact.

    Raises:
        ValueError: If the matrix is singular.
    """
    n = len(mat)
    a = [[int(v) for v in row] + [int(i == j) for j in range(n)]
         for i, row in enumerate(mat)]
    prev = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        pv = a[col][col]
        prow = a[col]
        for r in range(n):
            if r == col:
                continue
            f = a[r][col]
            a[r] = [(pv * v - f * w) // prev for v, w in zip(a[r], prow)]
        prev = pv
    out = []
    for i in range(n):
        scale = a[i][i]
        assert all(a[i][j] == 0 for j in range(n) if j != i)
        out.append([Fraction(a[i][n + j], scale) for j in range(n)])
    return out


def _invert_fraction_matrix(mat):
    """Gauss-Jordan inverse of a square Fraction matrix.

    Raises:
        ValueError: If the matrix is singular.
    """
    n = len(mat)
    if all(v.denominator == 1 for row in mat for v in row):
        return _invert_integer_matrix(mat)
    a = [row[:] + [Fraction(1) if i == j else Fraction(0) for j in range(n)]
         for i, row in enumerate(mat)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        pv = a[col][col]
        a[col] = [v / pv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [row[n:] for row in a]


def weingarten_matrix(k: int, flavor: str, d_value) -> list:
    """Exact inverse of the Gram matrix at numeric d.

    Raises:
        ValueError: If the Gram matrix is singular at this d (the basis is
        linearly dependent below the independence threshold).
    """
    d = Fraction(d_value)
    _, G = gram_matrix(k, flavor)
    numeric = [[entry.evaluate(d) for entry in row] for row in G]
    try:
        return _invert_fraction_matrix(numeric)
    except ValueError:
        raise ValueError(
            f"Gram matrix for k={k} ({flavor}) is singular at d={d_value}"
        ) from None


# ---- generalized Pauli monomials (single site) -----------------------------

_P1Q = (
    np.eye(2, dtype=complex),  # (x,z) = (0,0)
    np.array([[0, 1], [1, 0]], dtype=complex),  # (1,0) X
    np.array([[1, 0], [0, -1]], dtype=complex),  # (0,1) Z
    np.array([[0, -1j], [1j, 0]], dtype=complex),  # (1,1) Y
)


def _chi(p: int, q: int) -> int:
    """+1 if the two single-qubit Paulis commute, -1 otherwise."""
    xp, zp = p & 1, p >> 1
    xq, zq = q & 1, q >> 1
    return -1 if (xp & zq) ^ (zp & xq) else 1


def _xi(p: int) -> int:
    """+1 for transpose-symmetric Paulis, -1 for the antisymmetric one (Y)."""
    return -1 if p == 3 else 1


@dataclass(frozen=True)
class PauliMonomialLabel:
    """Label (V, M, Gamma) of a generalized Pauli monomial.

    Attributes:
        k: Replica count.
        v_columns: m independent nonzero even-weight k-bit column vectors.
        m_upper: Packed strict-upper-triangle bits of the symmetric M, row
            by row: bit index of (a, b) with a < b is a*m - a*(a+1)//2 + (b-a-1).
        gamma: m-bit transpose-character selector.
    """

    k: int
    v_columns: tuple
    m_upper: int = 0
    gamma: int = 0

    def __post_init__(self):
        m = len(self.v_columns)
        for v in self.v_columns:
            if v <= 0 or v >> self.k or (v.bit_count() & 1):
                raise ValueError("V columns must be nonzero even-weight k-bit")
        if rank_ints(self.v_columns) != m:
            raise ValueError("V columns must be linearly independent")
        if self.m_upper >> (m * (m - 1) // 2) or self.m_upper < 0:
            raise ValueError("M bits exceed the strict upper triangle")
        if self.gamma >> m or self.gamma < 0:
            raise ValueError("gamma must have one bit per column")

    @property
    def m(self) -> int:
        return len(self.v_columns)

    def m_bit(self, a: int, b: int) -> int:
        if a == b:
            return 0
        if a > b:
            a, b = b, a
        idx = a * self.m - a * (a + 1) // 2 + (b - a - 1)
        return (self.m_upper >> idx) & 1


def pauli_monomial(label: PauliMonomialLabel) -> np.ndarray:
    """Single-site matrix of the monomial: (1/2)^m times the weighted sum
    over all m-tuples of Paulis, replica i receiving the ordered product of
    the Paulis selected by row i of V.

    Entries are dyadic rationals times powers of i, exact in double
    precision for the guarded k.
    """
    k, m = label.k, label.m
    if k > 5:
        raise ValueError("monomials are guarded to k <= 5")
    dim = 1 << k
    out = np.zeros((dim, dim), dtype=complex)
    for tup in itertools.product(range(4), repeat=m):
        weight = 1
        for a in range(m):
            if (label.gamma >> a) & 1:
                weight *= _xi(tup[a])
            for b in range(a + 1, m):
                if label.m_bit(a, b):
                    weight *= _chi(tup[a], tup[b])
        term = np.array([[1.0]], dtype=complex)
        for i in range(k):
            factor = np.eye(2, dtype=complex)
            for a in range(m):
                if (label.v_columns[a] >> i) & 1:
                    factor = factor @ _P1Q[tup[a]]
            term = np.kron(term, factor)
        out += weight * term
    return out / 2**m


def enumerate_monomial_labels(k: int) -> list:
    """All labels up to column reordering (which permutes the same family)."""
    if k > 5:
        raise ValueError("monomials are guarded to k <= 5")
    evens = [v for v in range(1, 1 << k) if v.bit_count() % 2 == 0]
    labels = []
    for m in range(0, k):
        for cols in itertools.combinations(evens, m):
            if m and rank_ints(cols) != m:
                continue
            for m_upper in range(1 << (m * (m - 1) // 2)):
                for gamma in range(1 << m):
                    labels.append(PauliMonomialLabel(k, cols, m_upper, gamma))
    return labels


def _gram_rank(stack: np.ndarray) -> int:
    """Rank of a set of matrices given as flattened rows, via their
    Hermitian Gram matrix (avoids materializing huge stacked SVDs)."""
    g = stack @ stack.conj().T
    evals = np.linalg.eigvalsh(g)
    tol = max(g.shape) * np.max(np.abs(evals)) * 1e-12
    return int(np.sum(evals > tol))


@dataclass(frozen=True)
class SpanReport:
    k: int
    dim_subspace_basis: int
    dim_monomial_basis: int
    dim_joint: int

    @property
    def equal(self) -> bool:
        return self.dim_subspace_basis == self.dim_monomial_basis == self.dim_joint


def span_equivalence(k: int) -> SpanReport:
    """Verify both single-site bases span the same operator space.

    Compares span{r(T)} with span{monomials} by ranks of Gram matrices of
    the two families and of their union.
    """
    if k > 4:
        raise ValueError("span check is guarded to k <= 4")
    r_stack = np.stack(
        [r_operator(T).astype(complex).reshape(-1) for T in enumerate_lagrangians(k)]
    )
    o_stack = np.stack(
        [pauli_monomial(lbl).reshape(-1) for lbl in enumerate_monomial_labels(k)]
    )
    joint = np.concatenate([r_stack, o_stack], axis=0)
    return SpanReport(k, _gram_rank(r_stack), _gram_rank(o_stack), _gram_rank(joint))


# ---- stabilizer purities ---------------------------------------------------


def subspace_purity(T: LagrangianSubspace, psi) -> complex:
    """zeta_T(psi) = <psi^k| r(T) |psi^k> for a single-qubit state psi.

    The replica product collapses to a function of the Hamming weights of
    (x, y), so the sum runs over the 2^k subspace elements directly.
    """
    a0, a1 = complex(psi[0]), complex(psi[1])
    k = T.k
    pow0c = [a0.conjugate() ** (k - w) for w in range(k + 1)]
    pow1c = [a1.conjugate() ** w for w in range(k + 1)]
    pow0 = [a0 ** (k - w) for w in range(k + 1)]
    pow1 = [a1**w for w in range(k + 1)]
    total = 0j
    for x, y in T.xy_pairs():
        wx, wy = x.bit_count(), y.bit_count()
        total += pow0c[wx] * pow1c[wx] * pow0[wy] * pow1[wy]
    return total


def subspace_purity_plus_i_exact(T: LagrangianSubspace, sign: int = 1) -> Fraction:
    """Exact zeta_T for (|0> + sign*i|1>)/sqrt(2): always 0 or 1.

    Each element contributes i^(sign*(|y|-|x|)) / 2^k; the charge |x|-|y|
    mod 4 is a homomorphism on a self-orthogonal subspace, so the sum is
    2^k (charge identically 0) or 0 (charge surjects onto {0,2}).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    re = im = 0
    for x, y in T.xy_pairs():
        q = (sign * (y.bit_count() - x.bit_count())) % 4
        if q == 0:
            re += 1
        elif q == 1:
            im += 1
        elif q == 2:
            re -= 1
        else:
            im -= 1
    assert im == 0
    return Fraction(re, 1 << T.k)


def monomial_purity(label: PauliMonomialLabel, psi) -> complex:
    """zeta of a monomial on a single-qubit state, via the dense matrix."""
    mat = pauli_monomial(label)
    v = np.array([1.0], dtype=complex)
    for _ in range(label.k):
        v = np.kron(v, np.asarray(psi, dtype=complex))
    return complex(np.vdot(v, mat @ v))


def purity_sum(psi, k: int, r: int, flavor: str = "real") -> float:
    """Sum over the enumerated basis of zeta^r for a resource state psi."""
    if r < 0:
        raise ValueError("r must be >= 0")
    total = 0.0
    for T in enumerate_lagrangians(k, flavor):
        z = subspace_purity(T, psi)
        assert abs(z.imag) < 1e-12
        total += z.real**r if r else 1.0
    return total


def theta_subset(k: int) -> list:
    """The pairing sub-basis: real subspaces whose purity on the real magic
    state cos(pi/8)|0> + sin(pi/8)|1> equals 1 (within 1e-12)."""
    import math

    psi = (math.cos(math.pi / 8), math.sin(math.pi / 8))
    out = []
    for T in enumerate_lagrangians(k, "real"):
        z = subspace_purity(T, psi)
        if abs(z - 1) < 1e-12:
            out.append(T)
    return out


def fixtures_json(k: int, flavor: str = "real") -> dict:
    """JSON-ready snapshot of the enumeration and Gram data."""
    subs, G = gram_matrix(k, flavor)
    return {
        "k": k,
        "flavor": flavor,
        "count": len(subs),
        "bases": [[format(b, "x") for b in T.basis] for T in subs],
        "gram_degrees": [
            [len(entry.coeffs) - 1 for entry in row] for row in G
        ],
    }
