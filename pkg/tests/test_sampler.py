"""Sampler correctness: enumeration oracles, uniformity, synthesis round trip."""

import random
from collections import Counter

import pytest
from scipy import stats

import helpers
from realclifford.pauli import CNOT, CZ, H, S, SWAP, X, Z, gates_from_coded
from realclifford.sampler import (
    REAL_GENERATORS_2Q,
    CliffordElement,
    R2Words,
    RngState,
    element_from_word,
    enumerate_group,
    enumerate_state_orbit,
    sample_clifford,
    sample_clifford_word,
    sample_real_clifford,
    sample_word_coded,
    synthesize_gate_word,
)
from realclifford.tableau import StabilizerTableau, XZColumns

REAL_GENERATORS_1Q = (H(0), X(0), Z(0))


def test_enumerate_r1():
    group = enumerate_group(1, REAL_GENERATORS_1Q)
    assert len(group) == 8
    orbit = enumerate_state_orbit(StabilizerTableau.zero_state(1), REAL_GENERATORS_1Q)
    assert len(orbit) == 4


def test_enumerate_c1():
    group = enumerate_group(1, (H(0), S(0)))
    assert len(group) == 24


def test_enumerate_r2_and_state_orbit():
    group = enumerate_group(2, REAL_GENERATORS_2Q)
    assert len(group) == 1152
    orbit = enumerate_state_orbit(StabilizerTableau.zero_state(2), REAL_GENERATORS_2Q)
    assert len(orbit) == 24


def test_enumeration_guards():
    with pytest.raises(ValueError):
        enumerate_group(3, REAL_GENERATORS_1Q)
    with pytest.raises(ValueError):
        enumerate_group(1, REAL_GENERATORS_1Q, phase_quotient=False)


def test_real_characterization_inside_complex_group():
    """Exactly the elements with all-even-Y images form the real subgroup."""
    group = enumerate_group(2, REAL_GENERATORS_2Q + (S(0), S(1)))
    assert len(group) == 11520
    real_count = sum(
        1 for t in group if CliffordElement(t, False).images_are_real()
    )
    assert real_count == 1152


def test_uniformity_real_n1():
    keys = {t.dump(): i for i, t in enumerate(enumerate_group(1, REAL_GENERATORS_1Q))}
    rng = random.Random(101)
    counts = Counter()
    for _ in range(100_000):
        c = sample_real_clifford(1, rng)
        counts[keys[c.tableau.dump()]] += 1
    assert len(counts) == 8
    p = stats.chisquare([counts[i] for i in range(8)]).pvalue
    assert p > 1e-3


def test_uniformity_complex_n1():
    keys = {t.dump(): i for i, t in enumerate(enumerate_group(1, (H(0), S(0))))}
    rng = random.Random(103)
    counts = Counter()
    for _ in range(100_000):
        c = sample_clifford(1, rng)
        counts[keys[c.tableau.dump()]] += 1
    assert len(counts) == 24
    p = stats.chisquare([counts[i] for i in range(24)]).pvalue
    assert p > 1e-3


def test_uniformity_real_n2():
    keys = {t.dump(): i for i, t in enumerate(enumerate_group(2, REAL_GENERATORS_2Q))}
    rng = random.Random(107)
    counts = Counter()
    for _ in range(100_000):
        c = sample_real_clifford(2, rng)
        counts[keys[c.tableau.dump()]] += 1
    assert len(counts) == 1152
    p = stats.chisquare([counts[i] for i in range(1152)]).pvalue
    assert p > 1e-3


def test_uniformity_complex_n2():
    keys = {
        t.dump(): i
        for i, t in enumerate(enumerate_group(2, REAL_GENERATORS_2Q + (S(0), S(1))))
    }
    rng = random.Random(109)
    counts = Counter()
    for _ in range(100_000):
        c = sample_clifford(2, rng)
        counts[keys[c.tableau.dump()]] += 1
    # ~2 of the 11520 cells are expected to stay empty at this sample size,
    # so coverage is asserted loosely; the chi-square does the real work
    assert len(counts) > 11400
    p = stats.chisquare([counts.get(i, 0) for i in range(11520)]).pvalue
    assert p > 1e-3


def test_uniformity_r2_word_table():
    keys = {t.dump(): i for i, t in enumerate(enumerate_group(2, REAL_GENERATORS_2Q))}
    table = R2Words.instance()
    rng = random.Random(113)
    counts = Counter()
    for _ in range(100_000):
        word = table.sample_coded(rng, 0, 1)
        c = element_from_word(2, gates_from_coded(word))
        counts[keys[c.tableau.dump()]] += 1
    assert len(counts) == 1152
    p = stats.chisquare([counts[i] for i in range(1152)]).pvalue
    assert p > 1e-3


def test_real_fraction_of_complex_draws_n1():
    rng = random.Random(127)
    draws = 100_000
    real = sum(1 for _ in range(draws) if sample_clifford(1, rng).images_are_real())
    # binomial around 1/3 (8 of the 24 one-qubit Cliffords are real)
    sigma = (draws * (1 / 3) * (2 / 3)) ** 0.5
    assert abs(real - draws / 3) < 4 * sigma


def test_sampled_invariants_n8():
    rng = random.Random(131)
    for _ in range(1000):
        c = sample_real_clifford(8, rng)
        c.validate()
        assert c.real_flag and c.images_are_real()


def test_real_words_contain_no_s():
    rng = random.Random(137)
    for _ in range(50):
        word = sample_clifford_word(5, rng, real=True)
        assert all(g.is_real for g in word)


def test_orbit_g_distribution_n2():
    """Participation rank histogram of sampled two-qubit states.

    The 24 real stabilizer states split 4/12/8 by support size 1/2/4,
    giving probabilities 1/6, 1/2, 1/3 for g = 0, 1, 2.
    """
    rng = random.Random(139)
    draws = 30_000
    counts = Counter()
    for _ in range(draws):
        word = sample_word_coded(2, rng, real=True)
        cols = XZColumns.zero_state(2)
        cols.apply_coded(word)
        counts[cols.participation_g()] += 1
    expected = [draws / 6, draws / 2, draws / 3]
    p = stats.chisquare([counts[g] for g in (0, 1, 2)], expected).pvalue
    assert p > 1e-3


def test_synthesis_round_trip():
    rng = random.Random(149)
    for _ in range(500):
        n = rng.randint(1, 6)
        c = sample_real_clifford(n, rng)
        replay = element_from_word(n, synthesize_gate_word(c))
        assert replay.tableau == c.tableau
    for _ in range(500):
        n = rng.randint(1, 6)
        c = sample_clifford(n, rng)
        replay = element_from_word(n, synthesize_gate_word(c))
        assert replay.tableau == c.tableau


def test_synthesis_identity_and_single_gate():
    ident = element_from_word(2, [])
    assert synthesize_gate_word(ident) == []
    h = element_from_word(2, [H(0)])
    replay = element_from_word(2, synthesize_gate_word(h))
    assert replay.tableau == h.tableau


def test_rng_state_determinism():
    a = sample_real_clifford(6, RngState(42, 7))
    b = sample_real_clifford(6, RngState(42, 7))
    c = sample_real_clifford(6, RngState(42, 8))
    assert a.tableau == b.tableau
    assert a.tableau != c.tableau


def test_rng_state_validation():
    with pytest.raises(ValueError):
        RngState(-1, 0)
    with pytest.raises(ValueError):
        RngState(0, 1 << 64)
    with pytest.raises(TypeError):
        sample_real_clifford(2, "not an rng")
