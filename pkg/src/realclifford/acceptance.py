"""One-shot acceptance battery.

Runs the full claim checklist with fixed seeds and prints a claim -> status
matrix.  Failures are reported in the result rows, never raised, so a
partial environment still produces a complete report.

Two knobs support testing the battery itself:

- ``scale`` multiplies every Monte Carlo sample count (floor-protected), so
  a smoke run finishes in seconds.  Statistical margins assume scale 1.0;
  reduced runs may flag spurious failures.
- ``overrides`` swaps a named reference formula for another callable, so a
  deliberately perturbed formula must flip its criterion (mutation check).
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Optional

from . import commutant, experiments, theory
from .architectures import ArchitectureSpec, DopingSpec
from .experiments import (
    ExperimentConfig,
    frame_potential_observable,
    g_histogram,
    ipr_observable,
    run,
    tv_distance_hist_pmf,
)
from .pauli import H, X, Z
from .sampler import REAL_GENERATORS_2Q
from .tableau import StabilizerTableau
from .theory import REAL_CLIFFORD, STAIRCASE_REAL

# fixed per-criterion seeds so reruns are byte-identical
SEEDS = {
    "finite_n": 1603,
    "ipr_mc": 1604,
    "staircase_mc": 1605,
    "convolution": 1606,
    "brickwork": 1700,  # + depth
    "imag_doped": 1608,
    "magic_doped": 16080,  # + resource index * 10 + k
    "frame_global": 1609,
    "frame_scaling": 16090,  # + window exponent
}

FORMULAS: Mapping[str, Callable] = {
    "commutant_count": commutant.expected_count,
    "gram_row_sum_target": commutant.gram_row_sum_poly,
    "participation_pmf": theory.participation_pmf,
    "group_moment": theory.reference_moments,
    "staircase_moment": theory.ipr_staircase,
    "staircase_g_pmf": experiments.reference_g_pmf,
    "doped_moment": theory.ipr_doped_staircase,
    "frame_potential": theory.frame_potential,
}


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    detail: str
    seconds: float


@dataclass(frozen=True)
class SuiteResult:
    results: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


class AcceptanceContext:
    """Sample-count scaling plus the formula override hook."""

    def __init__(self, scale: float = 1.0, overrides: Optional[Mapping] = None):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = scale
        self.overrides = dict(overrides or {})
        unknown = set(self.overrides) - set(FORMULAS)
        if unknown:
            raise ValueError(f"unknown formula overrides: {sorted(unknown)}")

    def formula(self, name: str) -> Callable:
        return self.overrides.get(name, FORMULAS[name])

    def samples(self, base: int, floor: int = 100) -> int:
        return max(floor, int(round(base * self.scale)))


# ---- criterion bodies ------------------------------------------------------


def _check_commutant_counts(ctx: AcceptanceContext):
    expected = {
        ("real", 1): 1, ("real", 2): 3, ("real", 3): 15,
        ("real", 4): 135, ("real", 5): 2295,
        ("complex", 1): 1, ("complex", 2): 2, ("complex", 3): 6,
        ("complex", 4): 30,
    }
    count_formula = ctx.formula("commutant_count")
    lines = []
    ok = True
    for (flavor, k), want in expected.items():
        got = len(commutant.enumerate_lagrangians(k, flavor))
        formula_val = count_formula(k, flavor)
        good = got == want == formula_val
        ok = ok and good
        lines.append(f"{flavor} k={k}: {got}")
        if not good:
            lines[-1] += f" (expected {want}, formula {formula_val})"
    return ok, "; ".join(lines)


def _wg_times_gram_is_identity(wg, gram_int, row_sum_value):
    """Exact check of inverse and row-sum reciprocity, in integer arithmetic
    (each inverse row shares one denominator, so clearing it once keeps the
    n^3 product check off the Fraction slow path)."""
    n = len(wg)
    for i in range(n):
        scale = math.lcm(*(f.denominator for f in wg[i]))
        nums = [int(f * scale) for f in wg[i]]
        for j in range(n):
            acc = 0
            for t in range(n):
                acc += nums[t] * gram_int[t][j]
            if acc != (scale if i == j else 0):
                return False, f"inverse defect at row {i}, col {j}"
        if Fraction(sum(nums), scale) != Fraction(1) / row_sum_value:
            return False, f"row-sum reciprocal defect at row {i}"
    return True, ""


def _check_gram_weingarten(ctx: AcceptanceContext):
    target_formula = ctx.formula("gram_row_sum_target")
    lines = []
    ok = True
    for k in range(1, 5):
        subs, gram = commutant.gram_matrix(k, "real")
        target = target_formula(k, "real")
        rows_ok = all(
            sum(row[1:], row[0]) == target for row in gram
        )
        ok = ok and rows_ok
        lines.append(f"k={k} row-sum poly {'ok' if rows_ok else 'MISMATCH'}")
        for d in (4, 8, 16):
            if d < 2 ** (k - 1):
                # the basis is linearly dependent below this dimension, so
                # the Gram must be singular and the inverse undefined
                try:
                    commutant.weingarten_matrix(k, "real", d)
                except ValueError:
                    lines.append(f"k={k} d={d}: singular as required")
                else:
                    ok = False
                    lines.append(f"k={k} d={d}: unexpectedly invertible")
                continue
            wg = commutant.weingarten_matrix(k, "real", d)
            gram_int = [
                [int(entry.evaluate(Fraction(d))) for entry in row]
                for row in gram
            ]
            row_sum = target.evaluate(Fraction(d))
            good, why = _wg_times_gram_is_identity(wg, gram_int, row_sum)
            ok = ok and good
            lines.append(f"k={k} d={d}: {'ok' if good else why}")
    return ok, "; ".join(lines)


def _histogram_report(spec, samples, seed, doping=None):
    cfg = ExperimentConfig(
        architecture=spec,
        observable=g_histogram(),
        samples=samples,
        seed=seed,
        doping=doping or DopingSpec(),
    )
    return run(cfg)


def _check_finite_n_distribution(ctx: AcceptanceContext):
    samples = ctx.samples(100_000, floor=2000)
    rep = _histogram_report(ArchitectureSpec("global", 16), samples,
                            SEEDS["finite_n"])
    table = ctx.formula("participation_pmf")(16, "real")
    hist = rep.histogram()
    tv = tv_distance_hist_pmf(hist, table)
    chi, dof = experiments._pooled_chi_square_vs_pmf(hist, table)
    from scipy.stats import chi2 as chi2_dist

    pval = float(chi2_dist.sf(chi, dof))
    ok = tv < 0.01 and pval > 1e-3
    return ok, (
        f"n=16, {samples} samples: tv={tv:.5f} (<0.01), "
        f"chi2/dof={chi / dof:.2f}, p={pval:.4f} (>0.001)"
    )


def _orbit_average_ipr(n, generators, k) -> Fraction:
    """Exact mean IPR over the orbit of the all-zeros state; the action is
    transitive so the uniform group measure induces the uniform orbit
    measure."""
    start = StabilizerTableau.zero_state(n)
    seen = {start.state_key(): start.participation_g()}
    frontier = [start]
    while frontier:
        nxt = []
        for t in frontier:
            for gate in generators:
                u = t.copy()
                u.apply(gate)
                key = u.state_key()
                if key not in seen:
                    seen[key] = u.participation_g()
                    nxt.append(u)
        frontier = nxt
    total = sum(Fraction(1, 1 << (k - 1) * g) for g in seen.values())
    return total / len(seen)


def _check_ipr_closed_forms(ctx: AcceptanceContext):
    group_moment = ctx.formula("group_moment")
    lines = []
    ok = True
    # exact orbit averages at one and two qubits
    gens1 = (H(0), X(0), Z(0))
    for n, gens in ((1, gens1), (2, REAL_GENERATORS_2Q)):
        for k in (2, 3):
            orbit = _orbit_average_ipr(n, gens, k)
            closed = group_moment(REAL_CLIFFORD, k, n)
            good = orbit == closed
            ok = ok and good
            lines.append(f"orbit n={n} k={k}: {orbit}"
                         + ("" if good else f" != {closed}"))
    # Monte Carlo at n=12
    samples = ctx.samples(20_000, floor=400)
    cfg = ExperimentConfig(
        architecture=ArchitectureSpec("global", 12),
        observable=ipr_observable(2, 3),
        samples=samples,
        seed=SEEDS["ipr_mc"],
    )
    for m in run(cfg).moments():
        ref = float(group_moment(REAL_CLIFFORD, m.k, 12))
        z = (m.mean - ref) / m.se if m.se else math.inf
        good = abs(z) < 3
        ok = ok and good
        lines.append(f"n=12 k={m.k}: z={z:+.2f}")
    return ok, "; ".join(lines)


def _check_staircase_exact(ctx: AcceptanceContext):
    staircase_moment = ctx.formula("staircase_moment")
    lines = []
    ok = True
    # boundary reduction: a full-width window is one global element
    for k in (2, 3, 4):
        lhs = staircase_moment(k, 6, 5)
        rhs = theory.ipr_real_clifford(k, 6)
        good = lhs == rhs
        ok = ok and good
        lines.append(f"boundary k={k}: {'exact' if good else 'MISMATCH'}")
    samples = ctx.samples(20_000, floor=400)
    cfg = ExperimentConfig(
        architecture=ArchitectureSpec("staircase", 64, r=4),
        observable=ipr_observable(2),
        samples=samples,
        seed=SEEDS["staircase_mc"],
    )
    m = run(cfg).moments()[0]
    ref = float(staircase_moment(2, 64, 4))
    z = (m.mean - ref) / m.se if m.se else math.inf
    good = abs(z) < 3
    ok = ok and good
    lines.append(f"n=64 r=4 k=2, {samples} samples: z={z:+.2f}")
    return ok, "; ".join(lines)


def _check_convolution_pmf(ctx: AcceptanceContext):
    samples = ctx.samples(100_000, floor=2000)
    spec = ArchitectureSpec("staircase", 128, r=5)
    rep = _histogram_report(spec, samples, SEEDS["convolution"])
    table = ctx.formula("staircase_g_pmf")(STAIRCASE_REAL, spec)
    tv = tv_distance_hist_pmf(rep.histogram(), table)
    ok = tv < 0.02
    x = theory.anchored_x_staircase(spec.n, spec.r)
    return ok, (
        f"n=128 r=5, {samples} samples, moment-anchored x={x:.4f}: "
        f"tv={tv:.5f} (<0.02)"
    )


def _check_brickwork_fit(ctx: AcceptanceContext):
    samples = ctx.samples(10_000, floor=1000)
    results = []
    for t in (4, 8, 16):
        spec = ArchitectureSpec("brickwork", 128, t=t)
        rep = _histogram_report(spec, samples, SEEDS["brickwork"] + t)
        deficits = {128 - g: c for g, c in rep.histogram().as_dict().items()}
        fit = theory.fit_scaling_x(deficits)
        results.append((t, fit))
    xs = [f.x for _, f in results]
    monotone = all(a > b for a, b in zip(xs, xs[1:]))
    gof = all(f.chi_square_per_dof < 2 for _, f in results)
    detail = "; ".join(
        f"t={t}: x={f.x:.3f} chi2/dof={f.chi_square_per_dof:.2f}"
        for t, f in results
    )
    detail += f"; x decreasing: {monotone}"
    if not gof:
        detail += (
            "; shallow depths have sub-Poissonian deficit spread, which the "
            "one-parameter convolution family cannot reproduce, so the "
            "goodness-of-fit bound fails at informative sample sizes"
        )
    return monotone and gof, detail


def _check_doping_hierarchy(ctx: AcceptanceContext):
    lines = []
    ok = True
    # (a) one imaginary unit flips the participation law family
    samples = ctx.samples(100_000, floor=2000)
    rep = _histogram_report(
        ArchitectureSpec("global", 16), samples, SEEDS["imag_doped"],
        doping=DopingSpec("PlusI", 1),
    )
    table = ctx.formula("participation_pmf")(16, "complex")
    tv = tv_distance_hist_pmf(rep.histogram(), table)
    good = tv < 0.01
    ok = ok and good
    lines.append(f"one imaginary unit, n=16: tv={tv:.5f} (<0.01)")
    # (b) magic-doped staircase against the exact boundary contraction
    doped_moment = ctx.formula("doped_moment")
    samples = ctx.samples(3000, floor=200)
    for idx, resource in enumerate(("H_state", "T_state")):
        for k in (2, 3):
            cfg = ExperimentConfig(
                architecture=ArchitectureSpec("staircase", 8, r=3),
                observable=ipr_observable(k),
                samples=samples,
                seed=SEEDS["magic_doped"] + idx * 10 + k,
                doping=DopingSpec(resource, 3),
            )
            m = run(cfg).moments()[0]
            ref = float(doped_moment(k, 8, 3, resource))
            z = (m.mean - ref) / m.se if m.se else math.inf
            good = abs(z) < 3
            ok = ok and good
            lines.append(f"{resource} n=8 k={k}: z={z:+.2f}")
    # (c) purity identities, 1e-12 tolerance
    tol = 1e-12
    for k in (2, 3, 4):
        theta = commutant.theta_subset(k)
        psi = (math.cos(math.pi / 8), math.sin(math.pi / 8))
        h_ok = all(
            abs(commutant.subspace_purity(T, psi) - 1) < tol for T in theta
        )
        imag_ok = True
        for sign, amp in ((1, 1j), (-1, -1j)):
            for T in commutant.enumerate_lagrangians(k, "complex"):
                exact = commutant.subspace_purity_plus_i_exact(T, sign)
                dense = commutant.subspace_purity(
                    T, (1 / math.sqrt(2), amp / math.sqrt(2))
                )
                if exact != 1 or abs(dense - 1) > tol:
                    imag_ok = False
        gamma_ok = True
        if k <= 3:
            for lbl in commutant.enumerate_monomial_labels(k):
                if lbl.gamma:
                    for amp in (1j, -1j):
                        val = commutant.monomial_purity(
                            lbl, (1 / math.sqrt(2), amp / math.sqrt(2))
                        )
                        if abs(val) > tol:
                            gamma_ok = False
        good = h_ok and imag_ok and gamma_ok
        ok = ok and good
        lines.append(
            f"purities k={k}: real-magic {'ok' if h_ok else 'BAD'}, "
            f"imaginary {'ok' if imag_ok else 'BAD'}"
            + ("" if k > 3 else f", transpose-sector {'ok' if gamma_ok else 'BAD'}")
        )
    return ok, "; ".join(lines)


def _frame_x(n, r, samples, seed, frame_formula):
    cfg = ExperimentConfig(
        architecture=ArchitectureSpec("staircase", n, r=r),
        observable=frame_potential_observable(2),
        samples=samples,
        seed=seed,
    )
    m = run(cfg).moments()[0]
    ref = float(frame_formula(REAL_CLIFFORD, 2, n))
    if m.mean <= 0:
        return None
    return math.log(m.mean / ref), m.se / m.mean


def _weighted_log_slope(points):
    """Weighted least squares of ln(excess) on ln(bond dimension); points
    below 3 sigma of zero are dropped as unresolved."""
    use = [
        (math.log(chi), math.log(x), (x / se) ** 2)
        for chi, x, se in points
        if x is not None and x > 3 * se
    ]
    if len(use) < 2:
        return None
    wsum = sum(w for _, _, w in use)
    ub = sum(w * u for u, _, w in use) / wsum
    vb = sum(w * v for _, v, w in use) / wsum
    den = sum(w * (u - ub) ** 2 for u, _, w in use)
    num = sum(w * (u - ub) * (v - vb) for u, v, w in use)
    return num / den, math.sqrt(1.0 / den)


def _check_frame_potential(ctx: AcceptanceContext):
    frame_formula = ctx.formula("frame_potential")
    lines = []
    ok = True
    # (a) paired global circuits against the group value
    samples = ctx.samples(4000, floor=200)
    cfg = ExperimentConfig(
        architecture=ArchitectureSpec("global", 8),
        observable=frame_potential_observable(2),
        samples=samples,
        seed=SEEDS["frame_global"],
    )
    m = run(cfg).moments()[0]
    ref = float(frame_formula(REAL_CLIFFORD, 2, 8))
    z = (m.mean - ref) / m.se if m.se else math.inf
    good = abs(z) < 3
    ok = ok and good
    lines.append(f"global n=8 k=2: z={z:+.2f}")
    # (b) bond-dimension scaling of the staircase excess
    base_counts = {2: 20_000, 3: 40_000, 4: 80_000}
    points = []
    for r, base in base_counts.items():
        s = ctx.samples(base, floor=2000)
        got = _frame_x(32, r, s, SEEDS["frame_scaling"] + r, frame_formula)
        if got is None:
            points.append((2**r, None, 0.0))
            lines.append(f"r={r}: unresolved")
        else:
            x, se = got
            points.append((2**r, x, se))
            lines.append(f"r={r}: ln-excess={x:+.4f}+-{se:.4f}")
    slope = _weighted_log_slope(points)
    if slope is None:
        ok = False
        lines.append("scaling fit: too few resolved points")
    else:
        b, se_b = slope
        good = -2.3 < b < -1.7
        ok = ok and good
        lines.append(f"scaling exponent: {b:+.3f}+-{se_b:.3f} (target (-2.3,-1.7))")
    return ok, "; ".join(lines)


def _check_excluded_scale(ctx: AcceptanceContext):
    detail = (
        "256-qubit histogram panels at publication statistics are out of "
        "desk reach; the same pipeline runs at 128 qubits (convolution and "
        "brickwork checks above) with identical analysis, and the staircase "
        "frame-potential prefactor is checked only through the scaling "
        "exponent, never as a numeric constant"
    )
    return True, detail


CRITERIA = (
    ("commutant_counts", _check_commutant_counts),
    ("gram_weingarten_identities", _check_gram_weingarten),
    ("finite_n_distribution", _check_finite_n_distribution),
    ("ipr_closed_forms", _check_ipr_closed_forms),
    ("staircase_exact_formula", _check_staircase_exact),
    ("convolution_pmf", _check_convolution_pmf),
    ("brickwork_fit", _check_brickwork_fit),
    ("doping_hierarchy", _check_doping_hierarchy),
    ("frame_potential", _check_frame_potential),
    ("excluded_scale_documented", _check_excluded_scale),
)


def run_criterion(name: str, ctx: Optional[AcceptanceContext] = None) -> CriterionResult:
    ctx = ctx or AcceptanceContext()
    fn = dict(CRITERIA)[name]
    t0 = time.perf_counter()
    try:
        passed, detail = fn(ctx)
    except Exception as exc:  # reported, not thrown
        passed, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CriterionResult(name, passed, detail, time.perf_counter() - t0)


def validate_all(
    scale: float = 1.0,
    overrides: Optional[Mapping] = None,
    stream=None,
) -> SuiteResult:
    """Run every criterion and print the claim -> status matrix."""
    stream = stream or sys.stdout
    ctx = AcceptanceContext(scale=scale, overrides=overrides)
    results = []
    for name, _ in CRITERIA:
        res = run_criterion(name, ctx)
        results.append(res)
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {name} ({res.seconds:.1f}s)", file=stream)
        print(f"       {res.detail}", file=stream)
    suite = SuiteResult(tuple(results))
    n_pass = sum(r.passed for r in suite.results)
    print(f"{n_pass}/{len(suite.results)} criteria passed", file=stream)
    return suite
