"""Shared oracle utilities for the test suite: dense matrices for Pauli
strings, gates, words, and stabilizer projectors."""

import random

import numpy as np

from realclifford.dense import StateVector
from realclifford.pauli import CNOT, CZ, H, S, SWAP, X, Z, Gate, PauliString

I2 = np.eye(2, dtype=complex)
XM = np.array([[0, 1], [1, 0]], dtype=complex)
ZM = np.array([[1, 0], [0, -1]], dtype=complex)
YM = np.array([[0, -1j], [1j, 0]], dtype=complex)


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense matrix of a signed Hermitian Pauli string (qubit 0 = LSB)."""
    out = np.array([[1.0]], dtype=complex)
    for q in reversed(range(p.n)):
        xb, zb = (p.x >> q) & 1, (p.z >> q) & 1
        out = np.kron(out, (I2, XM, ZM, YM)[xb + 2 * zb])
    return p.sign * out


def word_unitary(n: int, gates) -> np.ndarray:
    """Dense unitary of a gate word by acting on every basis state."""
    d = 1 << n
    u = np.zeros((d, d), dtype=complex)
    for y in range(d):
        s = StateVector.basis_state(n, y)
        s.apply_word(gates)
        u[:, y] = s.amp
    return u


def stabilizer_projector(t) -> np.ndarray:
    """Dense projector of the tableau's stabilizer group."""
    d = 1 << t.n
    proj = np.eye(d, dtype=complex)
    for i in range(t.n):
        proj = proj @ (np.eye(d, dtype=complex) + pauli_matrix(t.stab_row(i))) / 2
    return proj


def random_gate(n: int, rng: random.Random, allow_s=False) -> Gate:
    kinds = [H, X, Z] + ([CNOT, CZ, SWAP] if n >= 2 else []) + ([S] if allow_s else [])
    make = rng.choice(kinds)
    if make in (CNOT, CZ, SWAP):
        a, b = rng.sample(range(n), 2)
        return make(a, b)
    return make(rng.randrange(n))


def random_word(n: int, length: int, rng: random.Random, allow_s=False):
    return [random_gate(n, rng, allow_s) for _ in range(length)]


def random_pauli(n: int, rng: random.Random) -> PauliString:
    return PauliString(
        n, rng.randrange(1 << n), rng.randrange(1 << n), rng.choice((1, -1))
    )
