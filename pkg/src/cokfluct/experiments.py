"""Monte Carlo harness.

Runs ensemble trials, extracts cokernel types at the working p-adic
precision (escalating on saturation), and aggregates empirical rescaled
Hom-moments, moments of the centered rank vector, and the centered-vector
histogram, with bootstrap percentile confidence intervals and theory targets
attached.  Everything is a pure function of the spec and its master seed:
identical reports regardless of worker count or trial order.
"""

from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exact_linalg import (
    cokernel_partition,
    padic_valuations,
    rational_rank,
    streaming_block_eliminate,
)
from .ensembles import (
    GENERATOR_ID,
    PRECISION_CAP,
    EnsembleSpec,
    build_bidiagonal_embedding,
    build_bidiagonal_embedding_int,
    factor_determinants,
    product_factors,
    product_factors_int,
    sample_block_matrix,
    sample_block_matrix_int,
    sample_product,
    sample_product_int,
)
from .pgroups import AbelianPGroup, as_partition, conjugate, hom_count, ell
from .theory import FluctuationParams, L_moment, centering, limit_rescaled_hom_moment

__all__ = [
    "TrialRecord",
    "MomentEstimate",
    "ExperimentReport",
    "ComparisonSummary",
    "EXACT_FALLBACK_MAX",
    "WORKERS_ENV_VAR",
    "run_trial",
    "run_experiment",
    "hom_moment_of_trial",
    "compare_ensembles",
    "total_variation",
]

EXACT_FALLBACK_MAX = 64   # exact-integer resolution feasible below this size
EXACT_IMMEDIATE_MAX = 8   # tiny matrices skip the precision ladder entirely
WORKERS_ENV_VAR = "COKFLUCT_WORKERS"
BOOTSTRAP_TAG = 0xB007


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one trial; a saturated record carries no partition claim
    beyond `some valuation >= precision_used`."""

    trial: int
    partition: tuple[int, ...] | None
    free_rank: int
    saturated: bool
    precision_used: int


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    ci_low: float
    ci_high: float
    target: float
    count: int


@dataclass(frozen=True)
class ExperimentReport:
    spec: EnsembleSpec
    trials: int
    d: int
    zeta: float
    center: int
    included_count: int        # free rank 0, not saturated
    free_rank_count: int       # resolved with positive free rank
    saturated_count: int       # unresolved at the precision cap
    hom_moments: dict[str, MomentEstimate] = field(default_factory=dict)
    l_moments: dict[str, MomentEstimate] = field(default_factory=dict)
    centered_counts: dict[tuple[int, ...], int] = field(default_factory=dict)
    generator: str = GENERATOR_ID

    def centered_histogram(self) -> dict[tuple[int, ...], Fraction]:
        """Probability masses; they sum to exactly 1 over recorded trials."""
        total = sum(self.centered_counts.values())
        if total == 0:
            return {}
        return {v: Fraction(c, total) for v, c in self.centered_counts.items()}

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "spec": self.spec.to_dict(),
            "trials": self.trials,
            "d": self.d,
            "zeta": self.zeta,
            "center": self.center,
            "counts": {
                "included": self.included_count,
                "free_rank": self.free_rank_count,
                "saturated": self.saturated_count,
            },
            "generator": self.generator,
            "hom_moments": {k: asdict(v) for k, v in sorted(self.hom_moments.items())},
            "l_moments": {k: asdict(v) for k, v in sorted(self.l_moments.items())},
            "centered_histogram": {
                _vector_label(v): {"count": c, "prob": c / max(1, self.included_count)}
                for v, c in sorted(self.centered_counts.items())
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        counts = d["counts"]
        return cls(
            spec=EnsembleSpec.from_dict(d["spec"]),
            trials=int(d["trials"]),
            d=int(d["d"]),
            zeta=float(d["zeta"]),
            center=int(d["center"]),
            included_count=int(counts["included"]),
            free_rank_count=int(counts["free_rank"]),
            saturated_count=int(counts["saturated"]),
            hom_moments={k: MomentEstimate(**v) for k, v in d["hom_moments"].items()},
            l_moments={k: MomentEstimate(**v) for k, v in d["l_moments"].items()},
            centered_counts={
                _parse_vector_label(k): int(v["count"])
                for k, v in d["centered_histogram"].items()
            },
            generator=d["generator"],
        )


def _vector_label(v: tuple[int, ...]) -> str:
    return "(" + ",".join(map(str, v)) + ")"


def _parse_vector_label(s: str) -> tuple[int, ...]:
    body = s.strip("()")
    return tuple(int(x) for x in body.split(",")) if body else ()


def partition_label(lam: Sequence[int]) -> str:
    return _vector_label(tuple(lam))


# ---------------------------------------------------------------------------
# Single trials
# ---------------------------------------------------------------------------

def _eliminate_once(spec: EnsembleSpec, trial: int, precision: int):
    if spec.kind == "block_triangular":
        m = sample_block_matrix(spec, trial, precision)
        return streaming_block_eliminate(m, spec.block_sizes)
    if spec.kind == "matrix_product":
        return padic_valuations(sample_product(spec, trial, precision))
    m = build_bidiagonal_embedding(product_factors(spec, trial, precision))
    return streaming_block_eliminate(m, (spec.n,) * spec.k)


def _exact_int_matrix(spec: EnsembleSpec, trial: int):
    if spec.kind == "block_triangular":
        return sample_block_matrix_int(spec, trial)
    if spec.kind == "matrix_product":
        return sample_product_int(spec, trial)
    return build_bidiagonal_embedding_int(product_factors_int(spec, trial))


def _value_of(det: int, p: int) -> int:
    v = 0
    while det % p == 0:
        det //= p
        v += 1
    return v


def _resolve_product_at_cap(spec: EnsembleSpec, trial: int, dv, precision: int) -> TrialRecord:
    """Resolve a product trial that stayed saturated at the precision cap,
    using the factor structure.

    When every factor determinant is nonzero, the total divisor valuation is
    the (exact, cheap) sum of the factor det valuations, so one elimination
    just above it cannot saturate.  When some factor is singular, the trial
    has free rank; if the rank certified from the residue data (matrix rank
    is at least the number of resolved pivots) meets the exact upper bound
    min_j rank(A_j), the saturated positions are exactly the free rank and
    the resolved valuations are the full torsion type."""
    dets = factor_determinants(spec, trial)
    n = spec.n
    if all(dets):
        target = sum(_value_of(d, spec.p) for d in dets) + 1
        if target > precision:
            dv = _eliminate_once(spec, trial, target)
            precision = target
        if dv.saturated_count == 0:
            return TrialRecord(trial, dv.partition(), 0, False, precision)
        raise AssertionError("nonsingular product saturated above its det valuation")
    rank_upper = min(rational_rank(f) for f in product_factors_int(spec, trial))
    # embedding divisors are the product's plus n(k-1) units, so the product
    # rank certified by the residue data is n - saturated for both kinds
    rank_lower = n - dv.saturated_count
    if rank_lower == rank_upper:
        return TrialRecord(trial, dv.partition(), n - rank_upper, False, precision)
    if spec.size <= EXACT_FALLBACK_MAX:
        part, free = cokernel_partition(_exact_int_matrix(spec, trial), spec.p)
        return TrialRecord(trial, part, free, False, precision)
    return TrialRecord(trial, None, 0, True, precision)


def run_trial(spec: EnsembleSpec, trial: int) -> TrialRecord:
    """Sample, eliminate, and on saturation regenerate the trial from its
    seed at doubled precision up to the cap.

    Product-kind trials still saturated at the cap are resolved through
    their factor determinants (see _resolve_product_at_cap).  Other matrices
    at exact desk scale (assembled size <= EXACT_FALLBACK_MAX) fall back to
    exact integer SNF, which is the only way to tell a genuinely singular
    matrix (positive free rank) from one with merely huge divisor
    valuations; tiny ones skip the ladder outright, where exact SNF is
    cheaper than a single recompute.  A trial that exhausts every route is
    recorded as saturated, never dropped."""
    exact_ok = spec.size <= EXACT_FALLBACK_MAX
    skip_ladder = spec.size <= EXACT_IMMEDIATE_MAX
    precision = spec.working_precision()
    while True:
        dv = _eliminate_once(spec, trial, precision)
        if dv.saturated_count == 0:
            return TrialRecord(trial, dv.partition(), 0, False, precision)
        at_cap = 2 * precision > PRECISION_CAP
        if exact_ok and skip_ladder:
            part, free = cokernel_partition(_exact_int_matrix(spec, trial), spec.p)
            return TrialRecord(trial, part, free, False, precision)
        if at_cap:
            if spec.kind in ("matrix_product", "bidiagonal_embedding"):
                return _resolve_product_at_cap(spec, trial, dv, precision)
            if exact_ok:
                part, free = cokernel_partition(_exact_int_matrix(spec, trial), spec.p)
                return TrialRecord(trial, part, free, False, precision)
            return TrialRecord(trial, None, 0, True, precision)
        precision *= 2


def _trial_batch(args) -> list[TrialRecord]:
    spec, trials = args
    return [run_trial(spec, t) for t in trials]


def _collect_records(spec: EnsembleSpec, trials: int, workers: int) -> list[TrialRecord]:
    env_cap = os.environ.get(WORKERS_ENV_VAR)
    if env_cap:
        workers = min(workers, max(1, int(env_cap)))
    indices = list(range(trials))
    if workers <= 1 or trials < 2:
        records = [run_trial(spec, t) for t in indices]
    else:
        chunk = max(1, trials // (workers * 8))
        batches = [(spec, indices[i:i + chunk]) for i in range(0, trials, chunk)]
        records = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for out in pool.map(_trial_batch, batches):
                records.extend(out)
    records.sort(key=lambda r: r.trial)
    return records


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------

def hom_moment_of_trial(partition: Sequence[int], free_rank: int, G: AbelianPGroup) -> int:
    """|Hom(Gamma (+) Z**free_rank, G)| for a trial of type `partition`."""
    return hom_count(as_partition(partition), G.lam, G.p) * G.order ** free_rank


def _bootstrap_ci(values: np.ndarray, rng: np.random.Generator, resamples: int) -> tuple[float, float]:
    n = len(values)
    if n == 0:
        return (float("nan"), float("nan"))
    means = np.empty(resamples)
    chunk = max(1, 10 ** 7 // n)  # bound the index-matrix footprint
    done = 0
    while done < resamples:
        m = min(chunk, resamples - done)
        idx = rng.integers(0, n, size=(m, n))
        means[done:done + m] = values[idx].mean(axis=1)
        done += m
    lo, hi = np.percentile(means, [2.5, 97.5])
    return float(lo), float(hi)


def run_experiment(
    spec: EnsembleSpec,
    trials: int,
    G_list: Sequence[AbelianPGroup] = (),
    lam_list: Sequence[Sequence[int]] = (),
    d: int = 3,
    *,
    zeta: float = 0.0,
    workers: int = 1,
    bootstrap_resamples: int = 1000,
) -> ExperimentReport:
    """Run `trials` trials of the ensemble and aggregate.

    Per group G: the mean of |Hom(cok, G)| / k**ell(G) over resolved trials
    (free-rank trials enter through |G|**free_rank).  Per lambda: the mean of
    p**<centered rank vector, lambda> over finite-cokernel trials.  Bootstrap
    percentile CIs (values resampled in trial order, seeded from the master
    seed) keep the report a pure function of the configuration.
    """
    params = FluctuationParams(spec.p, zeta, d)
    for G in G_list:
        if G.p != spec.p:
            raise ValueError(f"group {G.label()} is not a {spec.p}-group")
    lam_list = [as_partition(lam) for lam in lam_list]
    for lam in lam_list:
        if len(lam) > d:
            raise ValueError(f"lambda {lam} has more than d={d} parts")

    records = _collect_records(spec, trials, workers)
    resolved = [r for r in records if not r.saturated]
    finite = [r for r in resolved if r.free_rank == 0]
    saturated_count = len(records) - len(resolved)
    free_rank_count = len(resolved) - len(finite)
    center = centering(spec.k, params)

    rng = np.random.default_rng(np.random.SeedSequence([spec.master_seed, BOOTSTRAP_TAG]))

    hom_moments: dict[str, MomentEstimate] = {}
    for G in G_list:
        scale = spec.k ** ell(G)
        raw = [hom_moment_of_trial(r.partition, r.free_rank, G) for r in resolved]
        target = limit_rescaled_hom_moment(G)
        if raw:
            mean = float(Fraction(sum(raw), len(raw) * scale))
            vals = np.array([v / scale for v in raw], dtype=float)
            lo, hi = _bootstrap_ci(vals, rng, bootstrap_resamples)
        else:
            mean, (lo, hi) = float("nan"), (float("nan"), float("nan"))
        hom_moments[G.label()] = MomentEstimate(mean, lo, hi, float(target), len(raw))

    vectors = []
    for r in finite:
        conj = conjugate(r.partition)
        vectors.append(tuple((conj[i] if i < len(conj) else 0) - center for i in range(d)))

    l_moments: dict[str, MomentEstimate] = {}
    for lam in lam_list:
        target = L_moment(lam, params)
        exact = [
            Fraction(spec.p) ** sum(c * l for c, l in zip(vec, lam))
            for vec in vectors
        ]
        if exact:
            mean = float(sum(exact) / len(exact))
            vals = np.array([float(x) for x in exact], dtype=float)
            lo, hi = _bootstrap_ci(vals, rng, bootstrap_resamples)
        else:
            mean, (lo, hi) = float("nan"), (float("nan"), float("nan"))
        l_moments[partition_label(lam)] = MomentEstimate(mean, lo, hi, target.value, len(exact))

    return ExperimentReport(
        spec=spec,
        trials=trials,
        d=d,
        zeta=zeta,
        center=center,
        included_count=len(finite),
        free_rank_count=free_rank_count,
        saturated_count=saturated_count,
        hom_moments=hom_moments,
        l_moments=l_moments,
        centered_counts=dict(Counter(vectors)),
    )


# ---------------------------------------------------------------------------
# Cross-ensemble comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonSummary:
    tv_distance: float
    moment_gaps: dict[str, float]
    support_size: int

    def to_dict(self) -> dict:
        return {
            "tv_distance": self.tv_distance,
            "moment_gaps": dict(sorted(self.moment_gaps.items())),
            "support_size": self.support_size,
        }


def total_variation(counts_a: dict, counts_b: dict) -> Fraction:
    """TV distance between two empirical pmfs given as count dicts."""
    ta, tb = sum(counts_a.values()), sum(counts_b.values())
    support = set(counts_a) | set(counts_b)
    if ta == 0 or tb == 0:
        return Fraction(1) if support else Fraction(0)
    acc = Fraction(0)
    for v in support:
        acc += abs(Fraction(counts_a.get(v, 0), ta) - Fraction(counts_b.get(v, 0), tb))
    return acc / 2


def compare_ensembles(report_a: ExperimentReport, report_b: ExperimentReport) -> ComparisonSummary:
    """TV distance between centered-vector pmfs plus per-lambda moment gaps;
    no pass/fail judgment here."""
    if report_a.spec.p != report_b.spec.p:
        raise ValueError("reports disagree on p")
    if report_a.d != report_b.d:
        raise ValueError("reports disagree on d")
    if report_a.zeta != report_b.zeta:
        raise ValueError("reports disagree on zeta")
    tv = total_variation(report_a.centered_counts, report_b.centered_counts)
    gaps = {
        key: abs(report_a.l_moments[key].mean - report_b.l_moments[key].mean)
        for key in report_a.l_moments
        if key in report_b.l_moments
    }
    support = set(report_a.centered_counts) | set(report_b.centered_counts)
    return ComparisonSummary(float(tv), gaps, len(support))
