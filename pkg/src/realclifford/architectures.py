"""Circuit families built from local random real Clifford gates.

Four layouts over n qubits with open boundaries:

- global: one gate on all qubits.
- staircase: windows {s, ..., s+r} swept in ascending s (n - r gates); the
  output ensemble is a random matrix product state of bond dimension 2^r.
- glued: contiguous patches of r qubits; a first layer couples patch pairs
  (0,1), (2,3), ..., a second layer couples (1,2), (3,4), ...; n/r - 1
  gates in total, each on 2r qubits.
- brickwork: t layers of nearest-neighbor 2-qubit gates, staggered by one
  position on alternating layers.

Initial states are |0...0> optionally doped on the leading qubits with one
of the single-qubit resources; the two imaginary stabilizer resources keep
the tableau fast path, the two magic resources force the dense engine.

A "realization" is the list of (support, coded gate word) pairs with all
randomness already drawn, so the same realization can be replayed through
the tableau, column, and dense engines for cross-validation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .dense import RESOURCE_STATES, StateVector, zero_1q
from .pauli import gate_to_coded, gates_from_coded, retarget_coded
from .sampler import (
    CODE_H,
    CODE_S,
    CODE_Z,
    CliffordElement,
    R2Words,
    _as_random,
    sample_word_coded,
    synthesize_gate_word,
)
from .tableau import StabilizerTableau, XZColumns

KINDS = ("global", "staircase", "glued", "brickwork")
RESOURCES = ("none", "H_state", "T_state", "PlusI", "MinusI")
STABILIZER_RESOURCES = ("none", "PlusI", "MinusI")


@dataclass(frozen=True)
class ArchitectureSpec:
    """Validated circuit family parameters.

    Attributes:
        kind: One of "global", "staircase", "glued", "brickwork".
        n: Qubit count.
        r: Window exponent for staircase (window size r+1, bond 2^r) and
            patch size for glued; unused otherwise.
        t: Layer count, brickwork only.
    """

    kind: str
    n: int
    r: int = 0
    t: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown architecture kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if self.kind == "staircase":
            if not 1 <= self.r or self.r + 1 > self.n:
                raise ValueError("staircase requires 1 <= r and r + 1 <= n")
        if self.kind == "glued":
            if self.r < 1 or self.n % (2 * self.r) != 0:
                raise ValueError("glued requires n divisible by 2r")
        if self.kind == "brickwork":
            if self.t < 1:
                raise ValueError("brickwork requires t >= 1")
            if self.n < 2:
                raise ValueError("brickwork requires n >= 2")


@dataclass(frozen=True)
class DopingSpec:
    """Initial-state doping: leading r_doped qubits carry the resource."""

    resource: str = "none"
    r_doped: int = 0

    def __post_init__(self):
        if self.resource not in RESOURCES:
            raise ValueError(f"unknown resource {self.resource!r}")
        if self.r_doped < 0:
            raise ValueError("r_doped must be >= 0")
        if self.resource == "none" and self.r_doped:
            raise ValueError("r_doped > 0 needs a resource")
        if self.resource != "none" and self.r_doped == 0:
            raise ValueError("resource without doped qubits")

    @property
    def stabilizer_compatible(self) -> bool:
        return self.resource in STABILIZER_RESOURCES


NO_DOPING = DopingSpec()


@dataclass(frozen=True)
class GatePlacement:
    """A gate slot: contiguous support, with either a fixed element or a
    deferred uniform draw (element None)."""

    support: tuple
    element: Optional[CliffordElement] = None

    def __post_init__(self):
        s = self.support
        if len(s) < 1 or any(b - a != 1 for a, b in zip(s, s[1:])):
            raise ValueError("support must be contiguous ascending indices")
        if self.element is not None and self.element.n != len(s):
            raise ValueError("element size does not match support")


def build_layout(spec: ArchitectureSpec) -> list:
    """Placements of the architecture in application order."""
    n = spec.n
    if spec.kind == "global":
        return [GatePlacement(tuple(range(n)))]
    if spec.kind == "staircase":
        return [
            GatePlacement(tuple(range(s, s + spec.r + 1)))
            for s in range(n - spec.r)
        ]
    if spec.kind == "glued":
        r = spec.r
        patches = n // r
        out = []
        for j in range(0, patches - 1, 2):
            out.append(GatePlacement(tuple(range(j * r, (j + 2) * r))))
        for j in range(1, patches - 1, 2):
            out.append(GatePlacement(tuple(range(j * r, (j + 2) * r))))
        return out
    # brickwork
    out = []
    for layer in range(spec.t):
        start = layer % 2
        for a in range(start, n - 1, 2):
            out.append(GatePlacement((a, a + 1)))
    return out


def _placement_word(placement: GatePlacement, rng: random.Random, real: bool) -> list:
    sup = placement.support
    m = len(sup)
    if placement.element is not None:
        coded = [gate_to_coded(g) for g in synthesize_gate_word(placement.element)]
    elif real and m == 2:
        return R2Words.instance().sample_coded(rng, sup[0], sup[1])
    else:
        coded = sample_word_coded(m, rng, real)
    if sup[0] == 0:
        return coded
    mapping = {i: sup[i] for i in range(m)}
    mapping[-1] = -1
    return retarget_coded(coded, mapping)


def words_for_placements(placements, rng, real: bool = True) -> list:
    """Draw all random gates: list of (support, coded word) pairs."""
    r = _as_random(rng)
    return [(p.support, _placement_word(p, r, real)) for p in placements]


def sample_realization(spec: ArchitectureSpec, rng, real: bool = True) -> list:
    return words_for_placements(build_layout(spec), rng, real)


def doping_prep_coded(doping: DopingSpec) -> list:
    """Coded preparation word for the stabilizer-compatible resources."""
    if doping.resource == "none":
        return []
    if not doping.stabilizer_compatible:
        raise ValueError(f"{doping.resource} state is not a stabilizer resource")
    out = []
    for q in range(doping.r_doped):
        out.append((CODE_H, q, -1))
        out.append((CODE_S, q, -1))
        if doping.resource == "MinusI":
            out.append((CODE_Z, q, -1))
    return out


def replay_tableau(
    spec: ArchitectureSpec, doping: DopingSpec, realization
) -> StabilizerTableau:
    if doping.r_doped > spec.n:
        raise ValueError("more doped qubits than qubits")
    t = StabilizerTableau.zero_state(spec.n)
    t.apply_word(gates_from_coded(doping_prep_coded(doping)))
    for _sup, word in realization:
        t.apply_word(gates_from_coded(word))
    return t


def replay_columns(spec: ArchitectureSpec, doping: DopingSpec, realization) -> XZColumns:
    if doping.r_doped > spec.n:
        raise ValueError("more doped qubits than qubits")
    cols = XZColumns.zero_state(spec.n)
    cols.apply_coded(doping_prep_coded(doping))
    for _sup, word in realization:
        cols.apply_coded(word)
    return cols


def replay_dense(spec: ArchitectureSpec, doping: DopingSpec, realization) -> StateVector:
    if doping.r_doped > spec.n:
        raise ValueError("more doped qubits than qubits")
    factors = []
    for q in range(spec.n):
        if q < doping.r_doped:
            factors.append(RESOURCE_STATES[doping.resource]())
        else:
            factors.append(zero_1q())
    s = StateVector.product_state(factors)
    for _sup, word in realization:
        s.apply_word(gates_from_coded(word))
    return s


def run_tableau(spec: ArchitectureSpec, doping: DopingSpec, rng) -> StabilizerTableau:
    """One tableau-engine realization (stabilizer-compatible doping only)."""
    if not doping.stabilizer_compatible:
        raise ValueError(f"{doping.resource} doping requires the dense engine")
    return replay_tableau(spec, doping, sample_realization(spec, rng))


def run_dense(
    spec: ArchitectureSpec, doping: DopingSpec, rng, max_n: int = 20
) -> StateVector:
    """One dense-engine realization; guarded to small systems."""
    if spec.n > max_n:
        raise ValueError(f"dense engine guarded to n <= {max_n}")
    return replay_dense(spec, doping, sample_realization(spec, rng))


def run_participation_g(
    spec: ArchitectureSpec, doping: DopingSpec, rng, real: bool = True
) -> int:
    """Fast path: participation rank g of one realization via the phaseless
    column engine."""
    if not doping.stabilizer_compatible:
        raise ValueError(f"{doping.resource} doping requires the dense engine")
    cols = replay_columns(spec, doping, sample_realization(spec, rng, real))
    return cols.participation_g()
