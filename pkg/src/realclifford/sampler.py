"""Uniform samplers for the real (orthogonal) and full Clifford groups.

Construction: pick the image pair of (X_j, Z_j) uniformly at random among
valid pairs (anticommuting; even Y-parity in the real case; uniform signs),
synthesize a gate word mapping that pair back to (+X_j, +Z_j), and recurse
on the remaining qubits.  The subgroup fixing both +X_j and +Z_j is exactly
the group on the remaining qubits, so by orbit-stabilizer counting the
composed element is uniform.  Uniformity is additionally verified against
brute-force group enumeration at one and two qubits (see tests).

The same pair-reduction routine, driven by an element's image rows instead
of random draws, performs synthesis: decomposing an arbitrary element into
a gate word that replays to it exactly, signs included.

All real-alphabet gates are involutions, so inverting a word is reversing
it; the sampled element's word is the reversal of the concatenated
per-qubit reduction words.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .pauli import (
    CNOT,
    CZ,
    Gate,
    H,
    SWAP,
    X,
    Z,
    gate_to_coded,
    gates_from_coded,
    retarget_coded,
)
from .tableau import StabilizerTableau

CODE_H, CODE_X, CODE_Z, CODE_S, CODE_CNOT, CODE_CZ, CODE_SWAP = range(7)


@dataclass(frozen=True)
class RngState:
    """Deterministic stream id: (seed, stream) pins every draw.

    Distinct (seed, stream) pairs map to distinct generator states, so
    per-sample streams derived as (master_seed, sample_index) make parallel
    runs schedule-independent.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in 64 bits")
        if not 0 <= self.stream < 1 << 64:
            raise ValueError("stream must fit in 64 bits")

    def to_random(self) -> random.Random:
        return random.Random((self.seed << 64) | self.stream)


def _as_random(rng) -> random.Random:
    if isinstance(rng, RngState):
        return rng.to_random()
    if isinstance(rng, random.Random):
        return rng
    raise TypeError(f"expected RngState or random.Random, got {type(rng)!r}")


@dataclass(frozen=True)
class CliffordElement:
    """Clifford group element as its image tableau.

    Stabilizer row j holds the image of Z_j, destabilizer row j the image
    of X_j, signs included.  Global phase is quotiented by construction.
    """

    tableau: StabilizerTableau
    real_flag: bool

    @property
    def n(self) -> int:
        return self.tableau.n

    def images_are_real(self) -> bool:
        """True iff every image row has even Y-parity."""
        t = self.tableau
        return all(
            ((x & z).bit_count() & 1) == 0
            for x, z in zip(t.xs + t.dxs, t.zs + t.dzs)
        )

    def validate(self) -> None:
        self.tableau.validate()
        if self.real_flag and not self.images_are_real():
            raise AssertionError("real-flagged element with odd-Y image row")

    def key(self) -> tuple:
        return _element_key(self.tableau)


def _element_key(t: StabilizerTableau) -> tuple:
    return (
        tuple(t.xs),
        tuple(t.zs),
        tuple(t.rs),
        tuple(t.dxs),
        tuple(t.dzs),
        tuple(t.drs),
    )


def _reduce_pair(alpha, beta, j: int, allow_s: bool) -> list:
    """Coded word conjugating alpha to +X_j and beta to +Z_j.

    Preconditions: alpha is non-identity, beta anticommutes with alpha,
    both are supported on qubits >= j, and (unless allow_s) both have even
    Y-parity.  Emitted gates touch only qubits >= j.

    Hot path: gate effects on the tracked pair are applied inline.  The
    driven row's updates use facts the construction guarantees (pivot
    carries X, cleared positions are pure Z, etc.); the passenger row gets
    the generic conjugation.  The closing assert checks both rows exactly.
    """
    ax, az, ar = alpha
    bx, bz, br = beta
    word = []
    emit = word.append

    def drive(x, z, r, ox, oz, orr, target, exclude, track):
        """Drive (x, z, r) to a single +X outside `exclude`, conjugating the
        passenger row (ox, oz, orr) along when `track`; returns the updated
        rows and the pivot position (moved to `target` unless target < 0)."""
        yy = (x & z) & ~exclude
        while yy:
            la = yy & -yy
            yy ^= la
            if yy:
                lb = yy & -yy
                yy ^= lb
                a = la.bit_length() - 1
                b = lb.bit_length() - 1
                z ^= la | lb  # CZ: Y,Y -> X,X
                if track:
                    oxa = (ox >> a) & 1
                    oxb = (ox >> b) & 1
                    orr ^= oxa & oxb & (((oz >> a) ^ (oz >> b)) & 1)
                    oz ^= (oxb << a) | (oxa << b)
                emit((CODE_CZ, a, b))
            else:
                assert allow_s, "odd Y-parity requires the S gate"
                r ^= 1
                z ^= la  # S: Y -> -X
                if track and ox & la:
                    if oz & la:
                        orr ^= 1
                    oz ^= la
                emit((CODE_S, la.bit_length() - 1, -1))
        xm = x & ~exclude
        if not xm:
            zm = z & ~exclude
            lm = zm & -zm
            x ^= lm  # H on a pure-Z position
            z ^= lm
            if track:
                om = ox & lm
                if om:
                    if oz & lm:
                        orr ^= 1
                    else:
                        ox ^= lm
                        oz ^= lm
                elif oz & lm:
                    ox ^= lm
                    oz ^= lm
            emit((CODE_H, lm.bit_length() - 1, -1))
            xm = x & ~exclude
        lp = xm & -xm
        p = lp.bit_length() - 1
        zz = z & ~exclude
        while zz:
            lq = zz & -zz
            zz ^= lq
            z ^= lq  # CZ(p, q): X_p Z_q -> X_p
            q = lq.bit_length() - 1
            if track:
                oxa = (ox >> p) & 1
                oxb = (ox >> q) & 1
                orr ^= oxa & oxb & (((oz >> p) ^ (oz >> q)) & 1)
                oz ^= (oxb << p) | (oxa << q)
            emit((CODE_CZ, p, q))
        xx = xm ^ lp
        while xx:
            lq = xx & -xx
            xx ^= lq
            x ^= lq  # CNOT(p, q): X_p X_q -> X_p
            q = lq.bit_length() - 1
            if track:
                oxa = (ox >> p) & 1
                ozb = (oz >> q) & 1
                orr ^= oxa & ozb & (((ox >> q) ^ (oz >> p) ^ 1) & 1)
                ox ^= oxa << q
                oz ^= ozb << p
            emit((CODE_CNOT, p, q))
        if target >= 0 and p != target:
            x ^= lp | (1 << target)
            if track:
                mpair = lp | (1 << target)
                if ((ox >> p) ^ (ox >> target)) & 1:
                    ox ^= mpair
                if ((oz >> p) ^ (oz >> target)) & 1:
                    oz ^= mpair
            emit((CODE_SWAP, p, target))
            p = target
        return x, z, r, ox, oz, orr, p

    # phase A: alpha -> +X_j
    ax, az, ar, bx, bz, br, _ = drive(ax, az, ar, bx, bz, br, j, 0, True)
    if ar:
        ar = 0
        br ^= (bx >> j) & 1
        emit((CODE_Z, j, -1))

    # phase B: beta -> +Z_j.  Row a is exactly +X_j here and every gate
    # below fixes X_j, so only row b needs tracking.
    jmask = 1 << j
    assert bz & jmask, "beta must anticommute with X_j"
    if bx & jmask:  # Y at the target qubit
        yo = (bx & bz) & ~jmask
        if yo:
            lo = yo & -yo
            br ^= 1  # CNOT(o, j): Y_o Y_j -> -X_o Z_j
            bx ^= jmask
            bz ^= lo
            emit((CODE_CNOT, lo.bit_length() - 1, j))
        else:
            assert allow_s, "lone Y at target requires the S gate"
            bx ^= jmask  # HSH: Y_j -> Z_j, X_j fixed
            emit((CODE_H, j, -1))
            emit((CODE_S, j, -1))
            emit((CODE_H, j, -1))
    if (bx | bz) & ~jmask:
        bx, bz, br, _, _, _, p = drive(bx, bz, br, 0, 0, 0, -1, jmask, False)
        bx ^= 1 << p  # H then CNOT(p, j): X_p, Z_j -> Z_j
        emit((CODE_H, p, -1))
        emit((CODE_CNOT, p, j))
    if br:
        br = 0
        emit((CODE_X, j, -1))

    assert (ax, az, ar) == (jmask, 0, 0) and (bx, bz, br) == (0, jmask, 0)
    return word


def invert_coded(word) -> list:
    """Inverse of a coded word.

    Every gate in the alphabet is its own inverse except S, whose inverse
    is realized as S followed by Z.
    """
    out = []
    for code, a, b in reversed(word):
        out.append((code, a, b))
        if code == CODE_S:
            out.append((CODE_Z, a, -1))
    return out


def _draw_pauli(m, shift, rng, even_y, nonidentity) -> tuple:
    """Uniform bit-packed Pauli pattern on m qubits, shifted up, by rejection."""
    while True:
        x = rng.getrandbits(m)
        z = rng.getrandbits(m)
        if nonidentity and not (x | z):
            continue
        if even_y and ((x & z).bit_count() & 1):
            continue
        return x << shift, z << shift


# Reduction words for narrow tails (every involved qubit within 4 of the
# current target) recur constantly across samples, and _reduce_pair is a
# pure function of the bit patterns, so their words are memoized.  Words
# never depend on the flavor flag, only on the patterns themselves, so one
# shared table serves both groups.  Entries are stored at their absolute
# qubit positions (the target index is part of the key) so a hit extends
# the word without any retargeting pass.  The size cap bounds memory; on
# overflow new entries are simply recomputed.
_REDUCE_CACHE: dict = {}
_REDUCE_CACHE_LIMIT = 1 << 18


def sample_word_coded(n: int, rng: random.Random, real: bool = True) -> list:
    """Coded gate word of one uniform group element."""
    if n < 1:
        raise ValueError("need at least one qubit")
    coded = []
    cache = _REDUCE_CACHE
    for j in range(n):
        m = n - j
        ax, az = _draw_pauli(m, j, rng, real, True)
        while True:
            bx, bz = _draw_pauli(m, j, rng, real, False)
            if ((ax & bz).bit_count() + (az & bx).bit_count()) & 1:
                break
        ar = rng.getrandbits(1)
        br = rng.getrandbits(1)
        if m <= 4:
            key = ((ax >> j) | ((az >> j) << 4) | (ar << 8) | ((bx >> j) << 9)
                   | ((bz >> j) << 13) | (br << 17) | (j << 18))
            word = cache.get(key)
            if word is None:
                word = tuple(_reduce_pair((ax, az, ar), (bx, bz, br), j, not real))
                if len(cache) < _REDUCE_CACHE_LIMIT:
                    cache[key] = word
            coded.extend(word)
        else:
            coded.extend(_reduce_pair((ax, az, ar), (bx, bz, br), j, not real))
    if real:
        # every gate in the real alphabet is an involution
        coded.reverse()
        return coded
    return invert_coded(coded)


def sample_clifford_word(n: int, rng, real: bool = True) -> list:
    """Gate-object word of one uniform element of the chosen group."""
    return gates_from_coded(sample_word_coded(n, _as_random(rng), real))


def _element_from_coded(n: int, coded, real_flag: bool) -> CliffordElement:
    t = StabilizerTableau.zero_state(n)
    t.apply_word(gates_from_coded(coded))
    return CliffordElement(t, real_flag)


def sample_real_clifford(n: int, rng) -> CliffordElement:
    """Uniform element of the real Clifford group on n qubits."""
    return _element_from_coded(n, sample_word_coded(n, _as_random(rng), True), True)


def sample_clifford(n: int, rng) -> CliffordElement:
    """Uniform element of the full Clifford group on n qubits (mod phase)."""
    return _element_from_coded(n, sample_word_coded(n, _as_random(rng), False), False)


def element_from_word(n: int, gates) -> CliffordElement:
    """Element realized by a gate word; flags real when no S appears."""
    t = StabilizerTableau.zero_state(n)
    t.apply_word(gates)
    return CliffordElement(t, all(g.is_real for g in gates))


def synthesize_gate_word(c: CliffordElement) -> list:
    """Decompose an element into gates whose replay reproduces it exactly.

    Runs the pair reduction on the element's own image rows, qubit by
    qubit, then reverses the concatenated words.  Internal asserts fire if
    the element's tableau is inconsistent (or flagged real but not real).
    """
    t = c.tableau.copy()
    allow_s = not c.real_flag
    coded = []
    for j in range(t.n):
        alpha = (t.dxs[j], t.dzs[j], t.drs[j])
        beta = (t.xs[j], t.zs[j], t.rs[j])
        w = _reduce_pair(alpha, beta, j, allow_s)
        t.apply_word(gates_from_coded(w))
        coded.extend(w)
    assert t == StabilizerTableau.zero_state(t.n), "reduction left a nontrivial element"
    return gates_from_coded(invert_coded(coded))


# ---- brute-force enumeration (test oracle, small n only) -------------------


def enumerate_group(n: int, generators, phase_quotient: bool = True, max_size=300000):
    """BFS closure of the generated group, one canonical tableau per element.

    The tableau form represents elements modulo global phase, which is the
    equivalence relevant for state statistics.

    Raises:
        ValueError: n > 2, phase-distinguishing form requested, or guard hit.
    """
    if n > 2:
        raise ValueError("group enumeration is guarded to n <= 2")
    if not phase_quotient:
        raise ValueError("tableaus cannot distinguish global phase")
    start = StabilizerTableau.zero_state(n)
    seen = {_element_key(start)}
    out = [start]
    frontier = [start]
    while frontier:
        nxt = []
        for t in frontier:
            for g in generators:
                u = t.copy()
                u.apply(g)
                k = _element_key(u)
                if k not in seen:
                    if len(seen) >= max_size:
                        raise ValueError("enumeration size guard exceeded")
                    seen.add(k)
                    out.append(u)
                    nxt.append(u)
        frontier = nxt
    return out


def enumerate_state_orbit(start: StabilizerTableau, generators, max_size=300000):
    """Canonical keys of the orbit of a stabilizer state under a gate set."""
    seen = {start.state_key()}
    frontier = [start]
    while frontier:
        nxt = []
        for t in frontier:
            for g in generators:
                u = t.copy()
                u.apply(g)
                k = u.state_key()
                if k not in seen:
                    if len(seen) >= max_size:
                        raise ValueError("orbit size guard exceeded")
                    seen.add(k)
                    nxt.append(u)
        frontier = nxt
    return sorted(seen)


REAL_GENERATORS_2Q = (
    H(0), H(1), X(0), X(1), Z(0), Z(1),
    CNOT(0, 1), CNOT(1, 0), CZ(0, 1), SWAP(0, 1),
)


class R2Words:
    """Precomputed coset words for fast 2-qubit real Clifford placements.

    The 1152-element group splits into 72 equal cosets under right
    multiplication by the 16 two-qubit Paulis (mod phase), which only
    dress image signs.  A uniform element is therefore a uniform coset
    representative word prefixed by 4 uniform sign-dressing gates:
    right-multiplying by Z_a / X_a / Z_b / X_b flips the sign of the
    X_a / Z_a / X_b / Z_b image respectively, and a right factor comes
    first in gate order.
    """

    _cached = None

    def __init__(self):
        gens = REAL_GENERATORS_2Q
        gens_coded = [gate_to_coded(g) for g in gens]
        start = StabilizerTableau.zero_state(2)
        words = {_element_key(start): ()}
        frontier = [(start, ())]
        while frontier:
            nxt = []
            for t, w in frontier:
                for g, gc in zip(gens, gens_coded):
                    u = t.copy()
                    u.apply(g)
                    k = _element_key(u)
                    if k not in words:
                        w2 = w + (gc,)
                        words[k] = w2
                        nxt.append((u, w2))
            frontier = nxt
        assert len(words) == 1152, f"expected 1152 elements, got {len(words)}"
        classes = {}
        for k, w in words.items():
            sign_free = (k[0], k[1], k[3], k[4])
            if sign_free not in classes:
                classes[sign_free] = w
        assert len(classes) == 72, f"expected 72 sign-free classes, got {len(classes)}"
        self.class_words = tuple(classes.values())

    @classmethod
    def instance(cls) -> "R2Words":
        if cls._cached is None:
            cls._cached = cls()
        return cls._cached

    def sample_coded(self, rng: random.Random, a: int, b: int) -> list:
        """Coded word of a uniform real 2-qubit element on qubits (a, b)."""
        bits = rng.getrandbits(4)
        out = []
        if bits & 1:
            out.append((CODE_Z, a, -1))
        if bits & 2:
            out.append((CODE_X, a, -1))
        if bits & 4:
            out.append((CODE_Z, b, -1))
        if bits & 8:
            out.append((CODE_X, b, -1))
        word = self.class_words[rng.randrange(72)]
        out.extend(retarget_coded(word, {0: a, 1: b, -1: -1}))
        return out
