"""Seeded experiment runner over the circuit ensembles.

Samples are indexed 0..samples-1 and each index derives its own RNG stream
from (seed, index), so results never depend on scheduling.  Parallel runs
fork over contiguous index chunks and reduce them back in index order;
float accumulation order is therefore fixed and reports are byte-identical
for any worker count.  Worker count and wall time are provenance, not
content: they stay outside the hashed payload.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

from scipy.stats import chi2 as _chi2_dist

from . import theory
from .architectures import (
    ArchitectureSpec,
    DopingSpec,
    NO_DOPING,
    doping_prep_coded,
    run_dense,
    run_participation_g,
    sample_realization,
)
from .dense import ipr as dense_ipr
from .dense import overlap_sq
from .sampler import RngState, invert_coded
from .tableau import SignedColumns
from .theory import EnsembleTag, PmfTable

OBSERVABLE_KINDS = ("g_histogram", "ipr", "frame_potential")
ENGINES = ("auto", "tableau", "dense")
DENSE_GUARD_N = 20
JACKKNIFE_BLOCKS = 20


@dataclass(frozen=True)
class Observable:
    """What a run measures: the participation-rank histogram, or per-k
    moment estimates (state moments or pair-overlap moments)."""

    kind: str
    ks: tuple = ()

    def __post_init__(self):
        if self.kind not in OBSERVABLE_KINDS:
            raise ValueError(f"unknown observable kind {self.kind!r}")
        if self.kind == "g_histogram":
            if self.ks:
                raise ValueError("g_histogram takes no k list")
            return
        if not self.ks:
            raise ValueError(f"{self.kind} needs at least one k")
        if list(self.ks) != sorted(set(self.ks)) or min(self.ks) < 1:
            raise ValueError("ks must be strictly increasing and >= 1")


def g_histogram() -> Observable:
    return Observable("g_histogram")


def ipr_observable(*ks: int) -> Observable:
    return Observable("ipr", tuple(ks))


def frame_potential_observable(*ks: int) -> Observable:
    return Observable("frame_potential", tuple(ks))


@dataclass(frozen=True)
class ExperimentConfig:
    architecture: ArchitectureSpec
    observable: Observable
    samples: int
    seed: int
    doping: DopingSpec = NO_DOPING
    workers: int = 1
    engine: str = "auto"

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in 64 bits")
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.engine == "tableau" and not self.doping.stabilizer_compatible:
            raise ValueError(
                f"tableau engine cannot prepare {self.doping.resource} doping"
            )
        resolved = self.resolved_engine
        if resolved == "dense" and self.architecture.n > DENSE_GUARD_N:
            raise ValueError(f"dense engine guarded to n <= {DENSE_GUARD_N}")
        if self.observable.kind == "g_histogram" and resolved == "dense":
            raise ValueError("g_histogram requires the tableau engine")
        if self.observable.kind != "g_histogram" and self.samples < JACKKNIFE_BLOCKS:
            raise ValueError(
                f"moment estimates need >= {JACKKNIFE_BLOCKS} samples"
            )

    @property
    def resolved_engine(self) -> str:
        if self.engine != "auto":
            return self.engine
        return "tableau" if self.doping.stabilizer_compatible else "dense"


# ---- aggregates ------------------------------------------------------------


def _normalize_ranges(ranges) -> tuple:
    """Sort, validate disjointness, and coalesce adjacent index ranges."""
    rs = sorted((int(a), int(b)) for a, b in ranges)
    out = []
    for a, b in rs:
        if a >= b:
            raise ValueError(f"empty index range ({a}, {b})")
        if out and a < out[-1][1]:
            raise ValueError(f"overlapping index ranges at {a}")
        if out and a == out[-1][1]:
            out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return tuple(out)


@dataclass(frozen=True)
class Histogram:
    """Integer-valued counts plus the sample-index ranges they came from.

    Ranges are kept normalized, which makes merge both associative and
    commutative; merging overlapping ranges is rejected as double counting.
    """

    counts: tuple  # ((value, count), ...) ascending
    total: int
    index_ranges: tuple

    def __post_init__(self):
        vals = [v for v, _ in self.counts]
        if vals != sorted(set(vals)):
            raise ValueError("histogram values must be ascending and unique")
        if any(c < 1 for _, c in self.counts):
            raise ValueError("histogram counts must be positive")
        if self.total != sum(c for _, c in self.counts):
            raise ValueError("total must equal the sum of counts")
        object.__setattr__(
            self, "index_ranges", _normalize_ranges(self.index_ranges)
        )
        covered = sum(b - a for a, b in self.index_ranges)
        if covered != self.total:
            raise ValueError("index ranges must cover exactly `total` samples")

    @classmethod
    def from_counts(cls, counts: Mapping[int, int], index_range) -> "Histogram":
        items = tuple(sorted((int(v), int(c)) for v, c in counts.items() if c))
        total = sum(c for _, c in items)
        return cls(items, total, (tuple(index_range),))

    def as_dict(self) -> dict:
        return dict(self.counts)

    def probability(self, value: int) -> float:
        return self.as_dict().get(value, 0) / self.total

    def merge(self, other: "Histogram") -> "Histogram":
        merged = self.as_dict()
        for v, c in other.counts:
            merged[v] = merged.get(v, 0) + c
        items = tuple(sorted(merged.items()))
        return Histogram(
            items, self.total + other.total, self.index_ranges + other.index_ranges
        )


@dataclass(frozen=True)
class MomentEstimate:
    k: int
    mean: float
    se: float
    samples: int
    blocks: int

    def __post_init__(self):
        if self.se < 0:
            raise ValueError("standard error must be >= 0")
        if self.blocks < JACKKNIFE_BLOCKS:
            raise ValueError(f"jackknife needs >= {JACKKNIFE_BLOCKS} blocks")


def jackknife_moment(k: int, values: Sequence[float]) -> MomentEstimate:
    """Mean with a leave-one-block-out jackknife standard error over
    contiguous blocks; deterministic for a fixed value order."""
    s = len(values)
    blocks = JACKKNIFE_BLOCKS
    if s < blocks:
        raise ValueError(f"need >= {blocks} values, got {s}")
    total = math.fsum(values)
    base, extra = divmod(s, blocks)
    loo = []
    start = 0
    for b in range(blocks):
        size = base + (1 if b < extra else 0)
        bsum = math.fsum(values[start : start + size])
        loo.append((total - bsum) / (s - size))
        start += size
    center = math.fsum(loo) / blocks
    var = (blocks - 1) / blocks * math.fsum((m - center) ** 2 for m in loo)
    return MomentEstimate(k, total / s, math.sqrt(var), s, blocks)


# ---- per-sample evaluation -------------------------------------------------


def _paired_overlap_probability(
    spec: ArchitectureSpec, doping: DopingSpec, rng
) -> Fraction:
    """|<psi'|psi>|^2 for two independent draws sharing the initial state,
    evaluated exactly by replaying prep + circuit + inverse-circuit +
    inverse-prep on the zero state."""
    prep = doping_prep_coded(doping)
    coded = list(prep)
    for _, word in sample_realization(spec, rng):
        coded.extend(word)
    second = []
    for _, word in sample_realization(spec, rng):
        second.extend(word)
    coded.extend(invert_coded(second))
    coded.extend(invert_coded(prep))
    t = SignedColumns.zero_state(spec.n)
    t.apply_coded(coded)
    return t.basis_overlap_probability(0)


def _sample_values(config: ExperimentConfig, index: int) -> tuple:
    rng = RngState(config.seed, index).to_random()
    spec, doping, obs = config.architecture, config.doping, config.observable
    if obs.kind == "g_histogram":
        return (run_participation_g(spec, doping, rng),)
    if obs.kind == "ipr":
        if config.resolved_engine == "tableau":
            g = run_participation_g(spec, doping, rng)
            return tuple(2.0 ** ((1 - k) * g) for k in obs.ks)
        state = run_dense(spec, doping, rng)
        return tuple(dense_ipr(state, k) for k in obs.ks)
    # frame_potential: two draws from the same per-index stream
    if config.resolved_engine == "tableau":
        p = float(_paired_overlap_probability(spec, doping, rng))
    else:
        s1 = run_dense(spec, doping, rng)
        s2 = run_dense(spec, doping, rng)
        p = overlap_sq(s1, s2)
    return tuple(p**k for k in obs.ks)


def _run_chunk(args) -> list:
    config, start, stop = args
    return [_sample_values(config, i) for i in range(start, stop)]


# ---- reports ---------------------------------------------------------------


@dataclass(frozen=True)
class Report:
    """Resolved config plus results (the hashed payload) and provenance."""

    payload: dict
    content_hash: str
    wall_time_s: float
    workers: int

    def canonical_bytes(self) -> bytes:
        return _canonical_json(self.payload)

    def to_dict(self) -> dict:
        return {
            "payload": self.payload,
            "content_hash": self.content_hash,
            "wall_time_s": self.wall_time_s,
            "workers": self.workers,
        }

    @property
    def observable_kind(self) -> str:
        return self.payload["config"]["observable"]["kind"]

    @property
    def architecture(self) -> ArchitectureSpec:
        a = self.payload["config"]["architecture"]
        return ArchitectureSpec(a["kind"], a["n"], a["r"], a["t"])

    @property
    def doping(self) -> DopingSpec:
        d = self.payload["config"]["doping"]
        return DopingSpec(d["resource"], d["r_doped"])

    def histogram(self) -> Histogram:
        h = self.payload["results"]["histogram"]
        return Histogram(
            tuple((v, c) for v, c in h["counts"]),
            h["total"],
            tuple((a, b) for a, b in h["index_ranges"]),
        )

    def moments(self) -> list:
        return [
            MomentEstimate(m["k"], m["mean"], m["se"], m["samples"], m["blocks"])
            for m in self.payload["results"]["moments"]
        ]


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def _config_payload(config: ExperimentConfig) -> dict:
    a, d, o = config.architecture, config.doping, config.observable
    return {
        "architecture": {"kind": a.kind, "n": a.n, "r": a.r, "t": a.t},
        "doping": {"resource": d.resource, "r_doped": d.r_doped},
        "observable": {"kind": o.kind, "ks": list(o.ks)},
        "samples": config.samples,
        "seed": config.seed,
        "engine": config.resolved_engine,
    }


def run(config: ExperimentConfig) -> Report:
    """Execute the configured experiment; deterministic for a fixed seed
    regardless of worker count."""
    t0 = time.perf_counter()
    s = config.samples
    if config.workers == 1 or s < 2 * config.workers:
        values = _run_chunk((config, 0, s))
    else:
        bounds = [s * w // config.workers for w in range(config.workers + 1)]
        jobs = [
            (config, a, b) for a, b in zip(bounds, bounds[1:]) if b > a
        ]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
        values = [v for part in parts for v in part]
    results: dict
    if config.observable.kind == "g_histogram":
        counts: dict = {}
        for (g,) in values:
            counts[g] = counts.get(g, 0) + 1
        hist = Histogram.from_counts(counts, (0, s))
        results = {
            "histogram": {
                "counts": [[v, c] for v, c in hist.counts],
                "total": hist.total,
                "index_ranges": [[a, b] for a, b in hist.index_ranges],
            }
        }
    else:
        moments = [
            jackknife_moment(k, [row[i] for row in values])
            for i, k in enumerate(config.observable.ks)
        ]
        results = {
            "moments": [
                {
                    "k": m.k,
                    "mean": m.mean,
                    "se": m.se,
                    "samples": m.samples,
                    "blocks": m.blocks,
                }
                for m in moments
            ]
        }
    payload = {"config": _config_payload(config), "results": results}
    digest = hashlib.sha256(_canonical_json(payload)).hexdigest()
    return Report(
        payload=payload,
        content_hash=digest,
        wall_time_s=time.perf_counter() - t0,
        workers=config.workers,
    )


# ---- theory references and comparison --------------------------------------


def reference_g_pmf(tag: EnsembleTag, spec: ArchitectureSpec) -> PmfTable:
    """Participation-rank law the tagged ensemble predicts for this layout."""
    if tag.kind == "RealClifford":
        return theory.participation_pmf(spec.n, "real")
    if tag.kind == "ComplexClifford":
        return theory.participation_pmf(spec.n, "complex")
    if tag.kind == "StaircaseReal":
        x = theory.anchored_x_staircase(spec.n, spec.r)
    elif tag.kind == "GluedReal":
        x = theory.anchored_x_glued(spec.n, spec.r)
    else:
        raise ValueError(f"no participation law for {tag.kind}")
    table = theory.deficit_table(x)
    support, probs = [], []
    for deficit, p in zip(table.support, table.probabilities):
        g = spec.n - deficit
        if g >= 0:
            support.append(g)
            probs.append(p)
    scale = sum(probs)
    return PmfTable(
        tuple(reversed(support)),
        tuple(p / scale for p in reversed(probs)),
        ensemble=table.ensemble,
        params=table.params + (("n", spec.n),),
    )


def reference_moment(tag: EnsembleTag, k: int, spec: ArchitectureSpec,
                     doping: DopingSpec = NO_DOPING) -> float:
    if tag.kind == "StaircaseReal":
        return float(theory.ipr_staircase(k, spec.n, spec.r))
    if tag.kind == "GluedReal":
        return float(theory.ipr_glued(k, spec.n, spec.r))
    if tag.kind == "DopedStaircase":
        if doping.r_doped != spec.r:
            raise ValueError("doped moments assume r_doped equal to the window r")
        return float(theory.ipr_doped_staircase(k, spec.n, spec.r, tag.resource))
    return float(theory.reference_moments(tag, k, spec.n))


@dataclass(frozen=True)
class Verdict:
    metric: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


def _pooled_chi_square_vs_pmf(hist: Histogram, table: PmfTable):
    """Pearson chi-square against an exact pmf, pooling expected counts
    below 5 into their successor bin; returns (statistic, dof)."""
    support = sorted(set(table.support) | set(hist.as_dict()))
    counts = hist.as_dict()
    pooled = []
    acc_obs = acc_exp = 0.0
    for v in support:
        acc_obs += counts.get(v, 0)
        acc_exp += table.probability(v) * hist.total
        if acc_exp >= 5.0:
            pooled.append((acc_obs, acc_exp))
            acc_obs = acc_exp = 0.0
    if acc_exp > 0 or acc_obs > 0:
        if pooled:
            obs0, exp0 = pooled.pop()
            pooled.append((obs0 + acc_obs, exp0 + acc_exp))
        else:
            pooled.append((acc_obs, acc_exp))
    chi = sum((o - e) ** 2 / e for o, e in pooled if e > 0)
    return chi, max(len(pooled) - 1, 1)


def tv_distance_hist_pmf(hist: Histogram, table: PmfTable) -> float:
    support = set(table.support) | set(hist.as_dict())
    counts = hist.as_dict()
    return 0.5 * sum(
        abs(counts.get(v, 0) / hist.total - table.probability(v)) for v in support
    )


def tv_distance_hists(a: Histogram, b: Histogram) -> float:
    support = set(a.as_dict()) | set(b.as_dict())
    return 0.5 * sum(abs(a.probability(v) - b.probability(v)) for v in support)


def _compare_hist_to_pmf(hist, table, tv_threshold, p_threshold):
    tv = tv_distance_hist_pmf(hist, table)
    chi, dof = _pooled_chi_square_vs_pmf(hist, table)
    pval = float(_chi2_dist.sf(chi, dof))
    return [
        Verdict("tv_distance", tv, tv_threshold, tv < tv_threshold),
        Verdict(
            "chi_square_p",
            pval,
            p_threshold,
            pval > p_threshold,
            detail=f"chi2={chi:.2f} dof={dof}",
        ),
    ]


def _compare_hist_to_hist(a, b, tv_threshold, z_threshold):
    tv = tv_distance_hists(a, b)
    max_z = 0.0
    for v in set(a.as_dict()) | set(b.as_dict()):
        p1, p2 = a.probability(v), b.probability(v)
        var = p1 * (1 - p1) / a.total + p2 * (1 - p2) / b.total
        if var > 0:
            max_z = max(max_z, abs(p1 - p2) / math.sqrt(var))
    return [
        Verdict("tv_distance", tv, tv_threshold, tv < tv_threshold),
        Verdict("max_bin_z", max_z, z_threshold, max_z < z_threshold),
    ]


def compare(
    report: Report,
    reference: Union[EnsembleTag, Report],
    *,
    tv_threshold: float = 0.01,
    z_threshold: float = 3.0,
    p_threshold: float = 1e-3,
) -> list:
    """Verdict rows for a report against a theory ensemble or a second
    report; mismatched observables raise instead of comparing."""
    kind = report.observable_kind
    if isinstance(reference, Report):
        if reference.observable_kind != kind:
            raise ValueError("reports measure different observables")
        if kind == "g_histogram":
            return _compare_hist_to_hist(
                report.histogram(), reference.histogram(), tv_threshold, z_threshold
            )
        ours, theirs = report.moments(), reference.moments()
        if [m.k for m in ours] != [m.k for m in theirs]:
            raise ValueError("reports measure different k lists")
        out = []
        for m1, m2 in zip(ours, theirs):
            se = math.sqrt(m1.se**2 + m2.se**2)
            z = (m1.mean - m2.mean) / se if se > 0 else 0.0
            out.append(Verdict(f"z_k{m1.k}", z, z_threshold, abs(z) < z_threshold))
        return out
    tag = reference
    spec = report.architecture
    if kind == "g_histogram":
        return _compare_hist_to_pmf(
            report.histogram(),
            reference_g_pmf(tag, spec),
            tv_threshold,
            p_threshold,
        )
    out = []
    for m in report.moments():
        if kind == "frame_potential":
            ref = float(theory.frame_potential(tag, m.k, spec.n))
        else:
            ref = reference_moment(tag, m.k, spec, report.doping)
        if m.se > 0:
            z = (m.mean - ref) / m.se
        else:
            z = 0.0 if m.mean == ref else math.copysign(math.inf, m.mean - ref)
        out.append(
            Verdict(
                f"z_k{m.k}",
                z,
                z_threshold,
                abs(z) < z_threshold,
                detail=f"mean={m.mean:.6g} ref={ref:.6g} se={m.se:.2g}",
            )
        )
    return out


# ---- serialization ---------------------------------------------------------


def write_report_json(report: Report, path) -> None:
    with open(path, "w") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


def write_histogram_csv(report: Report, table: PmfTable, path) -> None:
    """Histogram rows next to the reference pmf.  Columns: the observed
    value, count, empirical probability, reference probability, reference
    ensemble label, then one column per reference parameter."""
    hist = report.histogram()
    counts = hist.as_dict()
    support = sorted(set(table.support) | set(counts))
    param_names = [f"param_{name}" for name, _ in table.params]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(
            ["n", "count", "probability", "theory_pmf", "ensemble"] + param_names
        )
        pvals = [value for _, value in table.params]
        for v in support:
            c = counts.get(v, 0)
            w.writerow(
                [v, c, c / hist.total, table.probability(v), table.ensemble] + pvals
            )


def read_histogram_csv(path) -> dict:
    """Counts column of a histogram CSV, keyed by the value column.
    Zero-count rows (theory support never observed) are dropped."""
    out: dict = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            c = int(row["count"])
            if c:
                out[int(row["n"])] = out.get(int(row["n"]), 0) + c
    return out
