"""Exact dense statevector engine for small systems.

Serves as the brute-force oracle for the tableau engine and the moment
formulas, and hosts the Haar baselines.  Amplitude arrays are numpy
complex128; qubit q addresses bit q of the flat index, so axis n-1-q of the
[2]*n tensor view is qubit q.

Double precision is adequate here: every verified quantity is an O(1) ratio
evaluated at 24 qubits or fewer, and all gates are exactly unitary matrices,
so norm drift stays near machine epsilon even for long words.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .pauli import Gate

_SQ2 = 1.0 / math.sqrt(2.0)

GATE_1Q = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
}

# two-qubit basis ordering: index = 2*(first target bit) + (second target bit)
GATE_2Q = {
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


class StateVector:
    """Normalized pure state on n qubits with exact unitary gate action."""

    __slots__ = ("n", "amp")

    def __init__(self, n: int, amp: np.ndarray):
        if amp.shape != (1 << n,):
            raise ValueError(f"amplitude array must have length {1 << n}")
        self.n = n
        self.amp = np.asarray(amp, dtype=complex)

    @classmethod
    def zero_state(cls, n: int) -> "StateVector":
        amp = np.zeros(1 << n, dtype=complex)
        amp[0] = 1.0
        return cls(n, amp)

    @classmethod
    def basis_state(cls, n: int, y: int) -> "StateVector":
        amp = np.zeros(1 << n, dtype=complex)
        amp[y] = 1.0
        return cls(n, amp)

    @classmethod
    def product_state(cls, factors: Sequence[np.ndarray]) -> "StateVector":
        """Tensor product of single-qubit states; factor 0 is qubit 0."""
        amp = np.array([1.0], dtype=complex)
        # qubit 0 is the least significant bit, so it is the last kron factor
        for f in reversed(list(factors)):
            amp = np.kron(amp, np.asarray(f, dtype=complex))
        return cls(len(factors), amp)

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amp.copy())

    def apply(self, gate: Gate) -> None:
        if max(gate.targets) >= self.n:
            raise ValueError("gate target out of range")
        if gate.kind in GATE_1Q:
            q = gate.targets[0]
            u = GATE_1Q[gate.kind]
            t = self.amp.reshape(-1, 2, 1 << q)
            self.amp = np.einsum("ab,hbl->hal", u, t).reshape(-1)
        else:
            a, b = gate.targets
            u = GATE_2Q[gate.kind].reshape(2, 2, 2, 2)
            psi = self.amp.reshape([2] * self.n)
            ax_a, ax_b = self.n - 1 - a, self.n - 1 - b
            out = np.tensordot(u, psi, axes=([2, 3], [ax_a, ax_b]))
            out = np.moveaxis(out, [0, 1], [ax_a, ax_b])
            self.amp = np.ascontiguousarray(out).reshape(-1)
        assert abs(np.vdot(self.amp, self.amp).real - 1.0) < 1e-12

    def apply_word(self, gates: Iterable[Gate]) -> None:
        for g in gates:
            self.apply(g)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amp) ** 2


def apply_gate_dense(s: StateVector, g: Gate) -> StateVector:
    """Pure-function form of StateVector.apply."""
    out = s.copy()
    out.apply(g)
    return out


def ipr(s: StateVector, k: int) -> float:
    """Sum over outcomes y of |<y|psi>|^(2k) for a single state."""
    if k < 1:
        raise ValueError("k must be >= 1")
    p = np.abs(s.amp) ** 2
    return float(np.sum(p**k))


def overlap_sq(s1: StateVector, s2: StateVector) -> float:
    """|<s1|s2>|^2."""
    if s1.n != s2.n:
        raise ValueError("qubit count mismatch")
    return float(abs(np.vdot(s1.amp, s2.amp)) ** 2)


def states_equal_up_to_phase(s1: StateVector, s2: StateVector, tol=1e-10) -> bool:
    return abs(overlap_sq(s1, s2) - 1.0) < tol


def haar_orthogonal_state(n: int, rng: np.random.Generator) -> StateVector:
    """Real Haar-random state: uniform on the unit sphere of R^(2^n).

    A standard-Gaussian real vector, normalized.  This equals the first
    column of the QR factorization of a Gaussian matrix after the customary
    positive-diagonal sign correction, so it is exactly the first column of
    a Haar orthogonal matrix.
    """
    v = rng.standard_normal(1 << n)
    return StateVector(n, (v / np.linalg.norm(v)).astype(complex))


def haar_unitary_state(n: int, rng: np.random.Generator) -> StateVector:
    """Complex Haar-random state: uniform on the unit sphere of C^(2^n)."""
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return StateVector(n, v / np.linalg.norm(v))


def tensor_power_expectation(op: np.ndarray, psi: StateVector) -> complex:
    """tr[op * (|psi><psi|)^(tensor k)] with k inferred from op's dimension.

    Args:
        op: Square matrix acting on k replicas of psi's Hilbert space.
        psi: The single-copy state.

    Raises:
        ValueError: If op's dimension is not a power of psi's dimension.
    """
    d = 1 << psi.n
    dim = op.shape[0]
    if op.shape != (dim, dim):
        raise ValueError("op must be square")
    k = round(math.log(dim, d))
    if d**k != dim:
        raise ValueError(f"op dimension {dim} is not a power of {d}")
    v = np.array([1.0], dtype=complex)
    for _ in range(k):
        v = np.kron(v, psi.amp)
    return complex(np.vdot(v, op @ v))


# single-qubit resource states used for doping
def h_state() -> np.ndarray:
    """cos(pi/8)|0> + sin(pi/8)|1>: real non-stabilizer resource."""
    return np.array([math.cos(math.pi / 8), math.sin(math.pi / 8)], dtype=complex)


def t_state() -> np.ndarray:
    """cos(pi/8)|0> + i sin(pi/8)|1>: complex non-stabilizer resource."""
    return np.array([math.cos(math.pi / 8), 1j * math.sin(math.pi / 8)], dtype=complex)


def plus_i_state() -> np.ndarray:
    """(|0> + i|1>)/sqrt(2): imaginary but stabilizer resource."""
    return np.array([_SQ2, 1j * _SQ2], dtype=complex)


def minus_i_state() -> np.ndarray:
    """(|0> - i|1>)/sqrt(2)."""
    return np.array([_SQ2, -1j * _SQ2], dtype=complex)


def zero_1q() -> np.ndarray:
    return np.array([1.0, 0.0], dtype=complex)


RESOURCE_STATES = {
    "H_state": h_state,
    "T_state": t_state,
    "PlusI": plus_i_state,
    "MinusI": minus_i_state,
}
