"""Stabilizer tableau engine for the H/X/Z/S/CNOT/CZ/SWAP gate alphabet.

Three representations:

- ``StabilizerTableau``: the full 2N-row tableau (stabilizer and
  destabilizer rows with sign bits), stored row-wise as bit-packed ints.
  Supports sign-exact observables and round-trip synthesis.
- ``XZColumns``: phaseless stabilizer bits stored column-wise, one integer
  per qubit column.  Every gate is a constant number of big-int operations
  regardless of qubit count, which is what makes the large Monte Carlo runs
  affordable.  Signs are dropped; only sign-free observables (the
  participation rank g) may be read from it.
- ``SignedColumns``: column-wise like XZColumns but keeps a packed sign
  column, giving O(1) big-int work per gate while staying sign-exact.
  Stabilizer rows only (no destabilizers), enough for basis overlaps.

Qubit q lives at bit q.  Stabilizer row i of the initial all-zeros state is
+Z_i and destabilizer row i is +X_i, so a tableau built from the identity
word doubles as the image table of a Clifford element (row i of the
stabilizer block is the image of Z_i, destabilizer row i the image of X_i).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional

from .gf2 import dot, parity, rank_ints
from .pauli import Gate, PauliString, mult_xzr, symplectic_form


class StabilizerTableau:
    """Mutable signed 2N-row tableau.

    Attributes:
        n: Qubit count.
        xs, zs, rs: Stabilizer rows (bit-packed X parts, Z parts, sign bits).
        dxs, dzs, drs: Destabilizer rows, same layout.
    """

    __slots__ = ("n", "xs", "zs", "rs", "dxs", "dzs", "drs")

    def __init__(self, n, xs, zs, rs, dxs, dzs, drs):
        self.n = n
        self.xs = list(xs)
        self.zs = list(zs)
        self.rs = list(rs)
        self.dxs = list(dxs)
        self.dzs = list(dzs)
        self.drs = list(drs)

    @classmethod
    def zero_state(cls, n: int) -> "StabilizerTableau":
        """Tableau of |0...0>: stabilizers +Z_i, destabilizers +X_i."""
        if n < 1:
            raise ValueError("need at least one qubit")
        bits = [1 << i for i in range(n)]
        zero = [0] * n
        return cls(n, zero[:], bits[:], zero[:], bits[:], zero[:], zero[:])

    @classmethod
    def all_plus_i(cls, n: int) -> "StabilizerTableau":
        """Tableau of |+i>^n: stabilizers +Y_i, destabilizers +Z_i.

        Identical, row for row, to applying H then S on every qubit of the
        zero-state tableau.
        """
        if n < 1:
            raise ValueError("need at least one qubit")
        bits = [1 << i for i in range(n)]
        zero = [0] * n
        return cls(n, bits[:], bits[:], zero[:], zero[:], bits[:], zero[:])

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(
            self.n, self.xs, self.zs, self.rs, self.dxs, self.dzs, self.drs
        )

    def stab_row(self, i: int) -> PauliString:
        return PauliString(self.n, self.xs[i], self.zs[i], -1 if self.rs[i] else 1)

    def destab_row(self, i: int) -> PauliString:
        return PauliString(self.n, self.dxs[i], self.dzs[i], -1 if self.drs[i] else 1)

    # -- gate application (in place) ----------------------------------------

    def apply(self, gate: Gate) -> None:
        """Conjugate every row by the gate, updating bits and signs."""
        if max(gate.targets) >= self.n:
            raise ValueError(f"gate target out of range for n={self.n}")
        kind = gate.kind
        for xs, zs, rs in ((self.xs, self.zs, self.rs), (self.dxs, self.dzs, self.drs)):
            if kind == "H":
                m = 1 << gate.targets[0]
                for i in range(self.n):
                    xb = xs[i] & m
                    zb = zs[i] & m
                    if xb:
                        if zb:
                            rs[i] ^= 1
                        else:
                            xs[i] ^= m
                            zs[i] ^= m
                    elif zb:
                        xs[i] ^= m
                        zs[i] ^= m
            elif kind == "X":
                m = 1 << gate.targets[0]
                for i in range(self.n):
                    if zs[i] & m:
                        rs[i] ^= 1
            elif kind == "Z":
                m = 1 << gate.targets[0]
                for i in range(self.n):
                    if xs[i] & m:
                        rs[i] ^= 1
            elif kind == "S":
                m = 1 << gate.targets[0]
                for i in range(self.n):
                    xb = xs[i] & m
                    if xb:
                        if zs[i] & m:
                            rs[i] ^= 1
                        zs[i] ^= m
            elif kind == "CNOT":
                c, t = gate.targets
                mc, mt = 1 << c, 1 << t
                for i in range(self.n):
                    xc = xs[i] & mc
                    zt = zs[i] & mt
                    if xc and zt and (((xs[i] & mt) != 0) == ((zs[i] & mc) != 0)):
                        rs[i] ^= 1
                    if xc:
                        xs[i] ^= mt
                    if zt:
                        zs[i] ^= mc
            elif kind == "CZ":
                a, b = gate.targets
                ma, mb = 1 << a, 1 << b
                for i in range(self.n):
                    xa = xs[i] & ma
                    xb = xs[i] & mb
                    if xa and xb and (((zs[i] & ma) != 0) != ((zs[i] & mb) != 0)):
                        rs[i] ^= 1
                    if xb:
                        zs[i] ^= ma
                    if xa:
                        zs[i] ^= mb
            elif kind == "SWAP":
                a, b = gate.targets
                ma, mb = 1 << a, 1 << b
                for i in range(self.n):
                    xa = (xs[i] >> a) & 1
                    xb = (xs[i] >> b) & 1
                    if xa != xb:
                        xs[i] ^= ma | mb
                    za = (zs[i] >> a) & 1
                    zb = (zs[i] >> b) & 1
                    if za != zb:
                        zs[i] ^= ma | mb
            else:  # pragma: no cover - Gate validation forbids this
                raise ValueError(kind)

    def apply_word(self, gates: Iterable[Gate]) -> None:
        for g in gates:
            self.apply(g)

    # -- observables --------------------------------------------------------

    def participation_g(self) -> int:
        """Rank of the stabilizer X block; support size is 2**g."""
        return rank_ints(self.xs)

    def basis_overlap_probability(self, y) -> Fraction:
        """|<y|psi>|^2 as an exact rational.

        The stabilizer X block is eliminated by sign-tracked row products.
        Rows reduced to pure Z type become parity constraints z.y = r on the
        outcome y; membership gives 2**-g, otherwise 0.

        Args:
            y: Outcome bits, as a packed int or an object with ``bits``.
        """
        y_bits = y if isinstance(y, int) else y.bits
        if y_bits >> self.n:
            raise ValueError("outcome has more bits than qubits")
        return _overlap_from_stab_rows(self.n, self.xs, self.zs, self.rs, y_bits)

    def is_real_state(self) -> bool:
        """True iff the stabilized state is real up to a global phase.

        Y-parity is additive over products of commuting Pauli strings, so it
        vanishes on the whole stabilizer group exactly when it vanishes on
        any generating set.
        """
        return all(parity(x & z) == 0 for x, z in zip(self.xs, self.zs))

    # -- diagnostics ---------------------------------------------------------

    def validate(self) -> None:
        """Assert the symplectic tableau invariants; raises on violation."""
        n = self.n
        for i in range(n):
            for j in range(i + 1, n):
                if symplectic_form(self.xs[i], self.zs[i], self.xs[j], self.zs[j]):
                    raise AssertionError(f"stabilizer rows {i},{j} anticommute")
                if symplectic_form(self.dxs[i], self.dzs[i], self.dxs[j], self.dzs[j]):
                    raise AssertionError(f"destabilizer rows {i},{j} anticommute")
        for i in range(n):
            for j in range(n):
                want = 1 if i == j else 0
                got = symplectic_form(self.xs[i], self.zs[i], self.dxs[j], self.dzs[j])
                if got != want:
                    raise AssertionError(f"pairing broken at stab {i}, destab {j}")
        stacked = [x | (z << n) for x, z in zip(self.xs, self.zs)]
        stacked += [x | (z << n) for x, z in zip(self.dxs, self.dzs)]
        if rank_ints(stacked) != 2 * n:
            raise AssertionError("tableau rows are GF(2)-dependent")

    def state_key(self):
        """Canonical key of the stabilized state.

        Sign-tracked reduced row echelon form of the stabilizer rows over
        the stacked (x|z) bits.  The reduced basis of a GF(2) row space is
        unique and the sign of each basis element is fixed by the group, so
        two tableaus share a key exactly when they stabilize the same state.
        """
        n = self.n
        basis = {}  # pivot bit of (x << n) | z -> [x, z, r]
        for i in range(n):
            x, z, r = self.xs[i], self.zs[i], self.rs[i]
            while x | z:
                p = ((x << n) | z).bit_length() - 1
                row = basis.get(p)
                if row is None:
                    basis[p] = [x, z, r]
                    break
                x, z, flip = mult_xzr(x, z, row[0], row[1])
                r ^= row[2] ^ flip
        for p in sorted(basis, reverse=True):
            x, z, r = basis[p]
            for q, row in basis.items():
                if q != p and (((row[0] << n) | row[1]) >> p) & 1:
                    nx, nz, flip = mult_xzr(row[0], row[1], x, z)
                    row[0], row[1] = nx, nz
                    row[2] ^= r ^ flip
        return tuple(sorted((x << n) | z | (r << (2 * n)) for x, z, r in basis.values()))

    def dump(self) -> str:
        """Readable fixture form: stabilizer rows, a separator, destabilizers."""
        lines = [self.stab_row(i).to_label() for i in range(self.n)]
        lines.append("--")
        lines += [self.destab_row(i).to_label() for i in range(self.n)]
        return "\n".join(lines)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StabilizerTableau):
            return NotImplemented
        return (
            self.n == other.n
            and self.xs == other.xs
            and self.zs == other.zs
            and self.rs == other.rs
            and self.dxs == other.dxs
            and self.dzs == other.dzs
            and self.drs == other.drs
        )


def apply_gate(t: StabilizerTableau, gate: Gate) -> StabilizerTableau:
    """Pure-function form of StabilizerTableau.apply."""
    out = t.copy()
    out.apply(gate)
    return out


def participation_g(t: StabilizerTableau) -> int:
    return t.participation_g()


def basis_overlap_probability(t: StabilizerTableau, y) -> Fraction:
    return t.basis_overlap_probability(y)


def is_real_state(t: StabilizerTableau) -> bool:
    return t.is_real_state()


def _overlap_from_stab_rows(n, xs, zs, rs, y_bits) -> Fraction:
    """|<y|psi>|^2 from stabilizer rows; see basis_overlap_probability."""
    xs = xs[:]
    zs = zs[:]
    rs = rs[:]
    pivot_of = {}
    for i in range(n):
        while xs[i]:
            p = xs[i].bit_length() - 1
            j = pivot_of.get(p)
            if j is None:
                pivot_of[p] = i
                break
            x3, z3, flip = mult_xzr(xs[i], zs[i], xs[j], zs[j])
            rs[i] ^= rs[j] ^ flip
            xs[i], zs[i] = x3, z3
        else:
            if dot(zs[i], y_bits) != rs[i]:
                return Fraction(0)
    return Fraction(1, 1 << len(pivot_of))


class XZColumns:
    """Phaseless stabilizer bits, one packed column per qubit.

    Bit i of ``cx[q]`` (resp. ``cz[q]``) is the X (resp. Z) bit of stabilizer
    row i at qubit q.  Gates touch only their target columns, so each gate
    costs O(1) big-int operations; signs are not tracked.
    """

    __slots__ = ("n", "cx", "cz")

    def __init__(self, n: int, cx, cz):
        self.n = n
        self.cx = list(cx)
        self.cz = list(cz)

    @classmethod
    def zero_state(cls, n: int) -> "XZColumns":
        return cls(n, [0] * n, [1 << i for i in range(n)])

    @classmethod
    def all_plus_i(cls, n: int) -> "XZColumns":
        return cls(n, [1 << i for i in range(n)], [1 << i for i in range(n)])

    @classmethod
    def from_tableau(cls, t: StabilizerTableau) -> "XZColumns":
        cx = [0] * t.n
        cz = [0] * t.n
        for i in range(t.n):
            x, z = t.xs[i], t.zs[i]
            for q in range(t.n):
                cx[q] |= ((x >> q) & 1) << i
                cz[q] |= ((z >> q) & 1) << i
        return cls(t.n, cx, cz)

    def apply(self, gate: Gate) -> None:
        kind = gate.kind
        cx, cz = self.cx, self.cz
        if kind == "H":
            q = gate.targets[0]
            cx[q], cz[q] = cz[q], cx[q]
        elif kind == "S":
            q = gate.targets[0]
            cz[q] ^= cx[q]
        elif kind == "CNOT":
            c, t = gate.targets
            cx[t] ^= cx[c]
            cz[c] ^= cz[t]
        elif kind == "CZ":
            a, b = gate.targets
            cz[a] ^= cx[b]
            cz[b] ^= cx[a]
        elif kind == "SWAP":
            a, b = gate.targets
            cx[a], cx[b] = cx[b], cx[a]
            cz[a], cz[b] = cz[b], cz[a]
        # X and Z only touch signs, which are not tracked here.

    def apply_word(self, gates: Iterable[Gate]) -> None:
        for g in gates:
            self.apply(g)

    def apply_coded(self, word) -> None:
        """Replay a coded gate word (triples from pauli.GATE_CODES).

        Hot path: branches ordered by frequency in synthesized words, no
        Gate object construction.
        """
        cx, cz = self.cx, self.cz
        for code, a, b in word:
            if code == 5:  # CZ
                cz[a] ^= cx[b]
                cz[b] ^= cx[a]
            elif code == 4:  # CNOT
                cx[b] ^= cx[a]
                cz[a] ^= cz[b]
            elif code == 0:  # H
                cx[a], cz[a] = cz[a], cx[a]
            elif code == 6:  # SWAP
                cx[a], cx[b] = cx[b], cx[a]
                cz[a], cz[b] = cz[b], cz[a]
            elif code == 3:  # S
                cz[a] ^= cx[a]
            # X and Z (codes 1, 2) only touch signs, not tracked here

    def participation_g(self) -> int:
        # rank of the X block equals the rank of its column list
        return rank_ints(self.cx)


class SignedColumns:
    """Column-major stabilizer bits with a packed sign column.

    Same layout as XZColumns plus ``cr``: bit i of ``cr`` is the sign bit of
    stabilizer row i.  Sign updates act on whole columns at once, keeping
    every gate O(1) big-int operations while staying sign-exact, which is
    what pair-overlap sampling needs at large qubit counts.  Destabilizers
    are not tracked; only stabilizer-row observables are available.
    """

    __slots__ = ("n", "cx", "cz", "cr")

    def __init__(self, n: int, cx, cz, cr: int):
        self.n = n
        self.cx = list(cx)
        self.cz = list(cz)
        self.cr = cr

    @classmethod
    def zero_state(cls, n: int) -> "SignedColumns":
        return cls(n, [0] * n, [1 << i for i in range(n)], 0)

    def apply_coded(self, word) -> None:
        """Replay a coded gate word, updating signs bit-parallel over rows."""
        cx, cz = self.cx, self.cz
        cr = self.cr
        for code, a, b in word:
            if code == 5:  # CZ
                xa, xb = cx[a], cx[b]
                cr ^= xa & xb & (cz[a] ^ cz[b])
                cz[a] ^= xb
                cz[b] ^= xa
            elif code == 4:  # CNOT
                xa, zb = cx[a], cz[b]
                cr ^= xa & zb & ~(cx[b] ^ cz[a])
                cx[b] ^= xa
                cz[a] ^= zb
            elif code == 0:  # H
                xa, za = cx[a], cz[a]
                cr ^= xa & za
                cx[a], cz[a] = za, xa
            elif code == 6:  # SWAP
                cx[a], cx[b] = cx[b], cx[a]
                cz[a], cz[b] = cz[b], cz[a]
            elif code == 3:  # S
                cr ^= cx[a] & cz[a]
                cz[a] ^= cx[a]
            elif code == 1:  # X
                cr ^= cz[a]
            elif code == 2:  # Z
                cr ^= cx[a]
            else:  # pragma: no cover - coded words never carry other codes
                raise ValueError(code)
        self.cr = cr

    def stab_rows(self):
        """Transpose back to row-major (xs, zs, rs) lists."""
        n = self.n
        xs = [0] * n
        zs = [0] * n
        cx, cz = self.cx, self.cz
        for q in range(n):
            colx, colz = cx[q], cz[q]
            bit = 1 << q
            for i in range(n):
                if (colx >> i) & 1:
                    xs[i] |= bit
                if (colz >> i) & 1:
                    zs[i] |= bit
        rs = [(self.cr >> i) & 1 for i in range(n)]
        return xs, zs, rs

    def basis_overlap_probability(self, y) -> Fraction:
        """|<y|psi>|^2, exact; same elimination as the row-major engine."""
        y_bits = y if isinstance(y, int) else y.bits
        if y_bits >> self.n:
            raise ValueError("outcome has more bits than qubits")
        xs, zs, rs = self.stab_rows()
        return _overlap_from_stab_rows(self.n, xs, zs, rs, y_bits)
