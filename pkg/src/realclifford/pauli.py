"""Pauli strings, gates, and their conjugation rules.

A Pauli string on N qubits is stored as two bit-packed integers (X part and
Z part, bit q for qubit q) plus a sign in {+1, -1}.  The stored operator is
the Hermitian representative: qubit q carries I, X, Z or Y = iXZ according
to the bit pair (x_q, z_q), so the i factors of the XZ ordering are folded
into the sign bookkeeping of the multiplication routine.

The gate alphabet is H, X, Z, S, CNOT, CZ, SWAP.  Every kind except S maps
real operators to real operators; S is the only gate here with complex
matrix elements and is flagged accordingly.  All kinds except S are also
involutions, which the circuit synthesis code relies on (a word is inverted
by reversing it).
"""

from __future__ import annotations

from dataclasses import dataclass

from .gf2 import parity

GATE_ARITY = {"H": 1, "X": 1, "Z": 1, "S": 1, "CNOT": 2, "CZ": 2, "SWAP": 2}
REAL_KINDS = frozenset(("H", "X", "Z", "CNOT", "CZ", "SWAP"))

# integer codes for the allocation-free hot paths; single-qubit gates carry
# a dummy -1 second target
GATE_CODES = {"H": 0, "X": 1, "Z": 2, "S": 3, "CNOT": 4, "CZ": 5, "SWAP": 6}
CODE_KINDS = {v: k for k, v in GATE_CODES.items()}


@dataclass(frozen=True)
class Gate:
    """One gate application: a kind and its target qubit indices."""

    kind: str
    targets: tuple

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != GATE_ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {GATE_ARITY[self.kind]} targets")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"{self.kind} targets must be distinct")
        if any(t < 0 for t in self.targets):
            raise ValueError("negative target index")

    @property
    def is_real(self) -> bool:
        return self.kind in REAL_KINDS


def H(q: int) -> Gate:
    return Gate("H", (q,))


def X(q: int) -> Gate:
    return Gate("X", (q,))


def Z(q: int) -> Gate:
    return Gate("Z", (q,))


def S(q: int) -> Gate:
    return Gate("S", (q,))


def CNOT(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def CZ(a: int, b: int) -> Gate:
    return Gate("CZ", (a, b))


def SWAP(a: int, b: int) -> Gate:
    return Gate("SWAP", (a, b))


@dataclass(frozen=True)
class PauliString:
    """Hermitian Pauli string: sign * (tensor of I/X/Y/Z per qubit).

    Attributes:
        n: Qubit count.
        x: Bit-packed X part (bit q set iff qubit q carries X or Y).
        z: Bit-packed Z part (bit q set iff qubit q carries Z or Y).
        sign: +1 or -1.
    """

    n: int
    x: int
    z: int
    sign: int = 1

    def __post_init__(self):
        if self.x >> self.n or self.z >> self.n or self.x < 0 or self.z < 0:
            raise ValueError("x/z bits exceed qubit count")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse "+XIZY" style labels; qubit 0 is the first letter."""
        sign = 1
        if label and label[0] in "+-":
            sign = -1 if label[0] == "-" else 1
            label = label[1:]
        x = z = 0
        for q, ch in enumerate(label):
            if ch in "XY":
                x |= 1 << q
            if ch in "ZY":
                z |= 1 << q
            if ch not in "IXYZ":
                raise ValueError(f"invalid Pauli letter {ch!r}")
        return cls(len(label), x, z, sign)

    def to_label(self) -> str:
        letters = []
        for q in range(self.n):
            xb, zb = (self.x >> q) & 1, (self.z >> q) & 1
            letters.append("IXZY"[xb + 2 * zb] if not (xb and zb) else "Y")
        return ("-" if self.sign < 0 else "+") + "".join(letters)

    def y_parity(self) -> int:
        """1 iff the string contains an odd number of Y factors."""
        return parity(self.x & self.z)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0


def commutes(p: PauliString, q: PauliString) -> int:
    """0 if p and q commute, 1 if they anticommute.

    Raises:
        ValueError: If the strings act on different qubit counts.
    """
    if p.n != q.n:
        raise ValueError("qubit count mismatch")
    return symplectic_form(p.x, p.z, q.x, q.z)


def symplectic_form(x1: int, z1: int, x2: int, z2: int) -> int:
    """Symplectic inner product x1.z2 + z1.x2 mod 2 on packed bit pairs."""
    return ((x1 & z2).bit_count() + (z1 & x2).bit_count()) & 1


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Product of two commuting Hermitian Pauli strings.

    The product of anticommuting Hermitian Paulis is anti-Hermitian and has
    no representation here, so commutation is asserted.
    """
    if p.n != q.n:
        raise ValueError("qubit count mismatch")
    x3, z3, flip = mult_xzr(p.x, p.z, q.x, q.z)
    sign = p.sign * q.sign * (-1 if flip else 1)
    return PauliString(p.n, x3, z3, sign)


def mult_xzr(x1: int, z1: int, x2: int, z2: int) -> tuple:
    """Sign-tracked product of Hermitian Paulis on packed bits.

    Returns:
        (x3, z3, flip) with flip in {0,1}; the product is
        (-1)^flip * W(x3, z3) times the two input signs.

    Raises:
        AssertionError: If the inputs anticommute (product not Hermitian).
    """
    x3 = x1 ^ x2
    z3 = z1 ^ z2
    phase = (
        (x1 & z1).bit_count()
        + (x2 & z2).bit_count()
        - (x3 & z3).bit_count()
        + 2 * (z1 & x2).bit_count()
    ) % 4
    assert phase % 2 == 0, "product of anticommuting Paulis is not Hermitian"
    return x3, z3, (phase >> 1) & 1


def conjugate_xzr(x: int, z: int, r: int, gate: Gate) -> tuple:
    """Conjugate one Hermitian Pauli (packed bits, phase bit r) by a gate.

    Returns the new (x, z, r) triple for gate * P * gate^dagger.  The same
    per-qubit rules drive the tableau engine, which inlines them row-wise.
    """
    kind = gate.kind
    if kind == "H":
        q = 1 << gate.targets[0]
        xq, zq = x & q, z & q
        r ^= 1 if (xq and zq) else 0
        x = (x & ~q) | (q if zq else 0)
        z = (z & ~q) | (q if xq else 0)
    elif kind == "X":
        r ^= 1 if (z & (1 << gate.targets[0])) else 0
    elif kind == "Z":
        r ^= 1 if (x & (1 << gate.targets[0])) else 0
    elif kind == "S":
        q = 1 << gate.targets[0]
        r ^= 1 if (x & q and z & q) else 0
        z ^= x & q
    elif kind == "CNOT":
        c, t = gate.targets
        xc, zc = (x >> c) & 1, (z >> c) & 1
        xt, zt = (x >> t) & 1, (z >> t) & 1
        r ^= xc & zt & (xt ^ zc ^ 1)
        x ^= xc << t
        z ^= zt << c
    elif kind == "CZ":
        a, b = gate.targets
        xa, za = (x >> a) & 1, (z >> a) & 1
        xb, zb = (x >> b) & 1, (z >> b) & 1
        r ^= xa & xb & (za ^ zb)
        z ^= (xb << a) | (xa << b)
    elif kind == "SWAP":
        a, b = gate.targets
        xa, xb = (x >> a) & 1, (x >> b) & 1
        za, zb = (z >> a) & 1, (z >> b) & 1
        x ^= ((xa ^ xb) << a) | ((xa ^ xb) << b)
        z ^= ((za ^ zb) << a) | ((za ^ zb) << b)
    else:  # pragma: no cover - Gate validation forbids this
        raise ValueError(kind)
    return x, z, r


def conjugate(p: PauliString, gate: Gate) -> PauliString:
    """PauliString version of conjugate_xzr."""
    if max(gate.targets) >= p.n:
        raise ValueError("gate target out of range")
    x, z, r = conjugate_xzr(p.x, p.z, 0 if p.sign > 0 else 1, gate)
    return PauliString(p.n, x, z, 1 if r == 0 else -1)


def gate_to_coded(g: Gate) -> tuple:
    t = g.targets
    return (GATE_CODES[g.kind], t[0], t[1] if len(t) == 2 else -1)


def gates_from_coded(word) -> list:
    out = []
    for code, a, b in word:
        kind = CODE_KINDS[code]
        out.append(Gate(kind, (a,) if GATE_ARITY[kind] == 1 else (a, b)))
    return out


def retarget_coded(word, mapping) -> list:
    """Relabel the qubit indices of a coded word through a dict."""
    return [
        (code, mapping[a], mapping[b] if b >= 0 else -1) for code, a, b in word
    ]
