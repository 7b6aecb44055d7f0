"""Closed-form ensemble statistics: participation-rank laws, overlap
moments, the deficit scaling limit, and the chi-square fit for the scaling
parameter.  Cross-checks run three ways: exact identities between
independent formulas, an exact transfer-matrix contraction, and small
Monte Carlo runs through the circuit engines."""

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from realclifford import theory
from realclifford.architectures import (
    ArchitectureSpec,
    DopingSpec,
    NO_DOPING,
    run_dense,
    run_participation_g,
)
from realclifford.commutant import expected_count, qpochhammer
from realclifford.dense import ipr as dense_ipr
from realclifford.theory import (
    COMPLEX_CLIFFORD,
    GLUED_REAL,
    HAAR_ORTHOGONAL,
    HAAR_UNITARY,
    REAL_CLIFFORD,
    STAIRCASE_REAL,
    EnsembleTag,
    PmfTable,
    deficit_pmf_limit,
    deficit_pmf_staircase,
    deficit_table,
    doped_staircase,
    effective_x_glued,
    effective_x_staircase,
    fit_scaling_x,
    frame_potential,
    ipr_complex_clifford,
    ipr_doped_staircase,
    ipr_glued,
    ipr_haar_orthogonal,
    ipr_haar_unitary,
    ipr_real_clifford,
    ipr_scaling_ratio,
    ipr_staircase,
    ipr_staircase_contraction,
    moment_ratio_from_deficit_pmf,
    participation_pmf,
    participation_probability_complex,
    participation_probability_real,
    reference_moments,
)


def mean_se(values):
    arr = np.asarray(values, dtype=float)
    return arr.mean(), arr.std(ddof=1) / math.sqrt(len(arr))


# ---- tags and tables -------------------------------------------------------


def test_ensemble_tag_validation():
    with pytest.raises(ValueError, match="unknown ensemble kind"):
        EnsembleTag("Banana")
    with pytest.raises(ValueError, match="unknown resource"):
        EnsembleTag("DopedStaircase", "Banana")
    with pytest.raises(ValueError, match="carries a resource"):
        EnsembleTag("RealClifford", "H_state")
    assert doped_staircase("H_state").resource == "H_state"


def test_pmf_table_validation():
    with pytest.raises(ValueError, match="align"):
        PmfTable((0, 1), (1.0,))
    with pytest.raises(ValueError, match="nonnegative"):
        PmfTable((0, 1), (1.5, -0.5))
    with pytest.raises(ValueError, match="sum to"):
        PmfTable((0, 1), (0.7, 0.7))
    t = PmfTable((0, 1), (0.25, 0.75))
    assert t.probability(1) == 0.75
    assert t.probability(5) == 0.0
    assert t.rows() == [(0, 0.25), (1, 0.75)]


# ---- participation-rank distributions --------------------------------------


def test_participation_pinned_values():
    assert participation_probability_real(1, 0) == Fraction(1, 2)
    assert participation_probability_real(1, 1) == Fraction(1, 2)
    assert [participation_probability_real(2, g) for g in range(3)] == [
        Fraction(1, 6),
        Fraction(1, 2),
        Fraction(1, 3),
    ]
    assert participation_probability_complex(1, 0) == Fraction(1, 3)
    assert participation_probability_complex(1, 1) == Fraction(2, 3)


@pytest.mark.parametrize("n", range(1, 13))
@pytest.mark.parametrize("ensemble", ["real", "complex"])
def test_participation_pmf_normalized(n, ensemble):
    table = participation_pmf(n, ensemble)
    assert sum(table.probabilities) == 1
    assert all(p >= 0 for p in table.probabilities)


def test_participation_range_errors():
    with pytest.raises(ValueError):
        participation_probability_real(0, 0)
    with pytest.raises(ValueError):
        participation_probability_real(3, 4)
    with pytest.raises(ValueError):
        participation_probability_complex(3, -1)


def test_deficit_limit_matches_large_register():
    # the finite-register law converges to the limit law qubit count -> inf
    row = [deficit_pmf_limit(n) for n in range(41)]
    assert abs(sum(row) - 1) < 1e-10
    for n in range(11):
        finite = float(participation_probability_real(40, 40 - n))
        assert abs(finite - row[n]) < 1e-6


def test_deficit_staircase_reduces_to_limit_at_zero():
    for n in range(12):
        assert deficit_pmf_staircase(n, 0.0) == deficit_pmf_limit(n)
    with pytest.raises(ValueError):
        deficit_pmf_staircase(3, -0.5)
    with pytest.raises(ValueError):
        deficit_pmf_limit(-1)


def test_deficit_table_normalization():
    for x in (0.0, 0.7, 3.84375, 12.0):
        table = deficit_table(x)
        assert abs(sum(table.probabilities) - 1) < 1e-9
        assert table.params == (("x", x),)


# ---- closed-form moments ---------------------------------------------------


def test_ipr_unit_at_k_one():
    for n in (1, 3, 7):
        assert ipr_real_clifford(1, n) == 1
        assert ipr_complex_clifford(1, n) == 1
        assert ipr_haar_unitary(1, n) == 1
        assert ipr_haar_orthogonal(1, n) == 1
        assert ipr_staircase(1, n + 1, 1) == 1


def test_ipr_pinned_values():
    assert ipr_real_clifford(2, 1) == Fraction(3, 4)
    assert ipr_complex_clifford(2, 1) == Fraction(2, 3)
    assert ipr_haar_unitary(2, 1) == Fraction(2, 3)
    assert ipr_haar_orthogonal(2, 1) == Fraction(3, 4)


def test_real_clifford_matches_haar_orthogonal_up_to_k3():
    # the group is a 3-design for these moments but not a 4-design
    for n in (1, 2, 4, 6):
        for k in (2, 3):
            assert ipr_real_clifford(k, n) == ipr_haar_orthogonal(k, n)
        assert ipr_real_clifford(4, n) > ipr_haar_orthogonal(4, n)


def test_complex_clifford_matches_haar_unitary_up_to_k3():
    for n in (1, 2, 4, 6):
        for k in (2, 3):
            assert ipr_complex_clifford(k, n) == ipr_haar_unitary(k, n)
        assert ipr_complex_clifford(4, n) > ipr_haar_unitary(4, n)


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("n", range(1, 9))
def test_pmf_moment_identity_real(k, n):
    # summing 2^((1-k) g) against the rank law reproduces the moment formula
    total = sum(
        participation_probability_real(n, g) * Fraction(2) ** ((1 - k) * g)
        for g in range(n + 1)
    )
    assert total == ipr_real_clifford(k, n)


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("n", range(1, 9))
def test_pmf_moment_identity_complex(k, n):
    total = sum(
        participation_probability_complex(n, g) * Fraction(2) ** ((1 - k) * g)
        for g in range(n + 1)
    )
    assert total == ipr_complex_clifford(k, n)


def test_staircase_boundary_reduces_to_group():
    for k in (2, 3, 4):
        for n in (2, 3, 5, 8):
            assert ipr_staircase(k, n, n - 1) == ipr_real_clifford(k, n)


def test_glued_single_pair_reduces_to_group():
    for k in (2, 3):
        for r in (1, 2, 3):
            assert ipr_glued(k, 2 * r, r) == ipr_real_clifford(k, 2 * r)


def test_doped_none_reduces_to_staircase():
    for k in (2, 3):
        for n, r in ((4, 1), (6, 2), (8, 3)):
            assert ipr_doped_staircase(k, n, r, "none") == ipr_staircase(k, n, r)


def test_staircase_monotone_in_window():
    # wider windows push the moment down toward the group floor
    for k in (2, 3):
        vals = [ipr_staircase(k, 10, r) for r in range(1, 10)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] == ipr_real_clifford(k, 10)


def test_moment_validation_errors():
    with pytest.raises(ValueError):
        ipr_real_clifford(0, 3)
    with pytest.raises(ValueError):
        ipr_staircase(2, 4, 0)
    with pytest.raises(ValueError):
        ipr_staircase(2, 4, 4)
    with pytest.raises(ValueError):
        ipr_glued(2, 6, 2)  # 6 not divisible by 4
    with pytest.raises(ValueError):
        ipr_doped_staircase(2, 4, 1, "Banana")


# ---- transfer-matrix contraction oracle ------------------------------------


@pytest.mark.parametrize("k", [2, 3])
def test_contraction_matches_closed_form(k):
    for n, r in ((3, 1), (4, 1), (4, 2), (5, 2), (6, 3)):
        assert ipr_staircase_contraction(k, n, r) == ipr_staircase(k, n, r)


def test_contraction_matches_closed_form_k4():
    # r = 1 would put the window dimension below the Weingarten threshold
    assert ipr_staircase_contraction(4, 4, 2) == ipr_staircase(4, 4, 2)


@pytest.mark.parametrize("resource", ["PlusI", "MinusI"])
def test_contraction_doped_imaginary_exact(resource):
    for k in (2, 3):
        for n, r in ((3, 1), (4, 2), (5, 2)):
            assert ipr_staircase_contraction(k, n, r, resource) == ipr_doped_staircase(
                k, n, r, resource
            )


def test_contraction_doped_magic_close():
    for n, r in ((3, 1), (4, 2)):
        a = float(ipr_staircase_contraction(2, n, r, "H_state"))
        b = float(ipr_doped_staircase(2, n, r, "H_state"))
        assert abs(a - b) < 1e-12 * abs(b)


# ---- scaling limit ---------------------------------------------------------


def test_effective_x_values():
    assert effective_x_staircase(128, 5) == pytest.approx(3.84375)
    assert effective_x_staircase(64, 4) == pytest.approx(3.75)
    x0 = 8.0
    assert effective_x_staircase(8 * 2**10, 10) < x0
    assert effective_x_glued(8, 2) == pytest.approx(2 * 8 / (4 * 2))


def test_anchored_x_matches_independent_reduction():
    # same exact k=2 ratio, reduced algebraically by hand to two logs
    for n, r in ((128, 5), (64, 4), (32, 3)):
        chi = 2**r
        direct = (n - r - 1) * math.log1p(2 / chi) - (n - r) * math.log1p(1 / chi)
        assert theory.anchored_x_staircase(n, r) == pytest.approx(direct, abs=1e-9)


def test_anchored_x_boundary_and_limits():
    # full-width window is a single group element: zero excess
    assert theory.anchored_x_staircase(6, 5) == pytest.approx(0.0, abs=1e-12)
    assert theory.anchored_x_glued(4, 2) == pytest.approx(0.0, abs=1e-12)
    # the leading-log expansion overshoots at moderate size
    assert theory.anchored_x_staircase(128, 5) < effective_x_staircase(128, 5)
    # wider windows relax the excess monotonically
    xs = [theory.anchored_x_staircase(64, r) for r in (2, 3, 4, 5)]
    assert xs == sorted(xs, reverse=True)
    # expansion and anchor agree as n grows at fixed n / bond dimension
    assert abs(
        theory.anchored_x_staircase(4096, 10) - effective_x_staircase(4096, 10)
    ) < 0.01


@pytest.mark.parametrize("k", [2, 3, 4])
def test_moment_ratio_matches_exponential(k):
    for x in (0.5, 1.0, 3.84375):
        a = moment_ratio_from_deficit_pmf(k, x)
        b = ipr_scaling_ratio(k, x)
        assert abs(a / b - 1) < 1e-7


@pytest.mark.parametrize("k,x0", [(2, 1), (2, 4), (3, 1), (3, 4)])
def test_finite_size_ratio_converges_to_limit(k, x0):
    # along n = x0 * 2^r the ratio to the group moment approaches the
    # exponential law, with monotonically shrinking relative error
    errs = []
    for r in range(3, 13):
        n = x0 * 2**r
        ratio = ipr_staircase(k, n, r) / ipr_real_clifford(k, n)
        errs.append(abs(float(ratio) / ipr_scaling_ratio(k, x0) - 1))
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 0.02


# ---- reference moments and frame potentials --------------------------------


def test_reference_moment_dispatch():
    assert reference_moments(REAL_CLIFFORD, 2, 1) == Fraction(3, 4)
    assert reference_moments(COMPLEX_CLIFFORD, 2, 1) == Fraction(2, 3)
    with pytest.raises(ValueError, match="no closed-form"):
        reference_moments(STAIRCASE_REAL, 2, 4)
    with pytest.raises(ValueError, match="no closed-form"):
        reference_moments(GLUED_REAL, 2, 4)


def test_frame_potential_group_values():
    assert frame_potential(HAAR_ORTHOGONAL, 2, 3) == Fraction(3, 80)
    assert frame_potential(HAAR_UNITARY, 2, 3) == Fraction(1, 36)
    assert frame_potential(REAL_CLIFFORD, 2, 3) == ipr_real_clifford(2, 3) / 8


def test_frame_potential_doped_targets():
    n, k = 4, 2
    assert frame_potential(doped_staircase("none"), k, n) == frame_potential(
        REAL_CLIFFORD, k, n
    )
    assert frame_potential(doped_staircase("H_state"), k, n) == frame_potential(
        HAAR_ORTHOGONAL, k, n
    )
    assert frame_potential(doped_staircase("T_state"), k, n) == frame_potential(
        HAAR_UNITARY, k, n
    )
    for res in ("PlusI", "MinusI"):
        assert frame_potential(doped_staircase(res), k, n) == frame_potential(
            COMPLEX_CLIFFORD, k, n
        )


# ---- scaling-parameter fit -------------------------------------------------


def _multinomial_counts(table: PmfTable, size: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(size, np.asarray(table.probabilities, dtype=float))
    return {n: int(c) for n, c in zip(table.support, draws) if c}


def test_fit_recovers_known_x():
    counts = _multinomial_counts(deficit_table(1.5), 1_000_000, 7)
    fit = fit_scaling_x(counts)
    assert 1.4 < fit.x < 1.6
    assert fit.chi_square_per_dof < 3


def test_fit_recovers_zero_x():
    counts = _multinomial_counts(deficit_table(0.0), 1_000_000, 7)
    fit = fit_scaling_x(counts)
    assert fit.x < 0.05


def test_fit_rejects_degenerate_input():
    with pytest.raises(ValueError, match="at least 1000"):
        fit_scaling_x({0: 10, 1: 5})
    with pytest.raises(ValueError, match="degenerate"):
        fit_scaling_x({0: 5000})


# ---- Monte Carlo agreement through the circuit engines ---------------------


def test_mc_staircase_moment_within_3_sigma():
    spec = ArchitectureSpec("staircase", 4, r=1)
    rng = random.Random(11)
    k = 2
    vals = [
        2.0 ** ((1 - k) * run_participation_g(spec, NO_DOPING, rng))
        for _ in range(100_000)
    ]
    mean, se = mean_se(vals)
    z = (mean - float(ipr_staircase(k, 4, 1))) / se
    assert abs(z) < 3, f"z={z:.2f}"


def test_mc_glued_moment_within_3_sigma():
    spec = ArchitectureSpec("glued", 8, r=2)
    rng = random.Random(12)
    k = 2
    vals = [
        2.0 ** ((1 - k) * run_participation_g(spec, NO_DOPING, rng))
        for _ in range(30_000)
    ]
    mean, se = mean_se(vals)
    z = (mean - float(ipr_glued(k, 8, 2))) / se
    assert abs(z) < 3, f"z={z:.2f}"


def test_mc_doped_magic_moment_within_3_sigma():
    # magic doping needs the dense engine; moments come from state overlaps
    spec = ArchitectureSpec("staircase", 6, r=2)
    doping = DopingSpec("H_state", 2)
    rng = random.Random(13)
    k = 2
    vals = [dense_ipr(run_dense(spec, doping, rng), k) for _ in range(4000)]
    mean, se = mean_se(vals)
    z = (mean - ipr_doped_staircase(k, 6, 2, "H_state")) / se
    assert abs(z) < 3, f"z={z:.2f}"


def test_mc_staircase_deficit_fit_recovers_anchored_x():
    # reduced-scale version of the large-register histogram comparison
    spec = ArchitectureSpec("staircase", 64, r=4)
    rng = random.Random(14)
    counts = {}
    for _ in range(3000):
        n_def = 64 - run_participation_g(spec, NO_DOPING, rng)
        counts[n_def] = counts.get(n_def, 0) + 1
    fit = fit_scaling_x(counts)
    assert abs(fit.x - theory.anchored_x_staircase(64, 4)) < 0.25, fit
    assert fit.chi_square_per_dof < 3


def test_mc_global_deficit_matches_limit_law():
    # at 48 qubits the finite-register law is already close to the limit law
    spec = ArchitectureSpec("global", 48)
    rng = random.Random(15)
    counts = {}
    draws = 2000
    for _ in range(draws):
        n_def = 48 - run_participation_g(spec, NO_DOPING, rng)
        counts[n_def] = counts.get(n_def, 0) + 1
    tv = 0.5 * sum(
        abs(counts.get(n, 0) / draws - deficit_pmf_limit(n)) for n in range(12)
    )
    assert tv < 0.05, f"tv={tv:.3f}"
