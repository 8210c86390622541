"""Random matrix samplers.

Entry distributions with exact residue bookkeeping, the block lower
triangular A+B ensemble, iid matrix products, the block bidiagonal embedding
of a product, and a counter-style deterministic seeding contract:

    rng(trial) = numpy PCG64 seeded with SeedSequence([master_seed, trial])

Every sampler draws plain integers first and reduces mod p**N afterwards, so
re-invoking a trial at a higher precision reproduces the same integer matrix
reduced at the new precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exact_linalg import IntMatrix, PadicMatrix, residue_dtype

__all__ = [
    "ConfigError",
    "EntryDistribution",
    "EnsembleSpec",
    "KSchedule",
    "GENERATOR_ID",
    "default_precision",
    "PRECISION_CAP",
    "trial_rng",
    "sample_block_matrix",
    "sample_block_matrix_int",
    "sample_product",
    "sample_product_int",
    "product_factors",
    "product_factors_int",
    "build_bidiagonal_embedding",
    "build_bidiagonal_embedding_int",
]

GENERATOR_ID = "numpy-PCG64(SeedSequence([master_seed, trial]))"
PRECISION_CAP = 256


class ConfigError(ValueError):
    """Invalid ensemble or experiment configuration."""


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(trial)]))


def default_precision(p: int, k: int) -> int:
    """max(16, ceil(log_p k) + 8); divisor valuations concentrate near
    log_p k, so this is exceeded only with vanishing probability."""
    e = 0
    while p ** e < k:
        e += 1
    return max(16, e + 8)


# ---------------------------------------------------------------------------
# Entry distributions
# ---------------------------------------------------------------------------

def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class EntryDistribution:
    """Z-valued entry law: one of uniform_mod, bernoulli, uniform_range,
    finite_support, constant."""

    kind: str
    modulus: int | None = None
    q: Fraction | None = None
    low: int | None = None
    high: int | None = None
    support: tuple[tuple[int, Fraction], ...] | None = None
    value: int | None = None

    @classmethod
    def uniform_mod(cls, m: int) -> "EntryDistribution":
        if m < 1:
            raise ConfigError("uniform_mod needs modulus >= 1")
        return cls(kind="uniform_mod", modulus=int(m))

    @classmethod
    def bernoulli(cls, q) -> "EntryDistribution":
        q = _as_fraction(q)
        if not 0 <= q <= 1:
            raise ConfigError("bernoulli needs q in [0, 1]")
        return cls(kind="bernoulli", q=q)

    @classmethod
    def uniform_range(cls, low: int, high: int) -> "EntryDistribution":
        if high < low:
            raise ConfigError("uniform_range needs low <= high")
        return cls(kind="uniform_range", low=int(low), high=int(high))

    @classmethod
    def finite_support(cls, pairs) -> "EntryDistribution":
        cleaned = [(int(v), _as_fraction(w)) for v, w in pairs]
        if not cleaned:
            raise ConfigError("finite_support needs at least one atom")
        if any(w <= 0 for _, w in cleaned):
            raise ConfigError("finite_support weights must be positive")
        if len({v for v, _ in cleaned}) != len(cleaned):
            raise ConfigError("finite_support values must be distinct")
        total = sum(w for _, w in cleaned)
        norm = tuple((v, w / total) for v, w in cleaned)
        return cls(kind="finite_support", support=norm)

    @classmethod
    def constant(cls, value: int) -> "EntryDistribution":
        return cls(kind="constant", value=int(value))

    # -- exact probability structure --------------------------------------

    def support_pairs(self) -> tuple[tuple[int, Fraction], ...]:
        """(value, probability) atoms; every kind here has finite support."""
        if self.kind == "uniform_mod":
            w = Fraction(1, self.modulus)
            return tuple((v, w) for v in range(self.modulus))
        if self.kind == "bernoulli":
            return ((0, 1 - self.q), (1, self.q))
        if self.kind == "uniform_range":
            span = self.high - self.low + 1
            w = Fraction(1, span)
            return tuple((v, w) for v in range(self.low, self.high + 1))
        if self.kind == "finite_support":
            return self.support
        if self.kind == "constant":
            return ((self.value, Fraction(1)),)
        raise ConfigError(f"unknown distribution kind {self.kind!r}")

    def residue_probs(self, p: int) -> list[Fraction]:
        """Exact distribution of X mod p."""
        probs = [Fraction(0)] * p
        if self.kind == "uniform_range":
            # counted arithmetically: residue classes of [low, high]
            span = self.high - self.low + 1
            for r in range(p):
                count = (self.high - r) // p - (self.low - 1 - r) // p
                probs[r] = Fraction(count, span)
            return probs
        for v, w in self.support_pairs():
            probs[v % p] += w
        return probs

    def best_epsilon(self, p: int) -> Fraction:
        """Largest eps with P(X = r mod p) <= 1 - eps for every residue r."""
        return 1 - max(self.residue_probs(p))

    def is_balanced(self, p: int) -> bool:
        return self.best_epsilon(p) > 0

    # -- sampling ----------------------------------------------------------

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.kind == "uniform_mod":
            return rng.integers(0, self.modulus, size=shape, dtype=np.int64)
        if self.kind == "bernoulli":
            return (rng.random(shape) < float(self.q)).astype(np.int64)
        if self.kind == "uniform_range":
            return rng.integers(self.low, self.high + 1, size=shape, dtype=np.int64)
        if self.kind == "finite_support":
            values = np.array([v for v, _ in self.support], dtype=np.int64)
            weights = np.array([float(w) for _, w in self.support])
            weights = weights / weights.sum()
            idx = rng.choice(len(values), size=shape, p=weights)
            return values[idx]
        if self.kind == "constant":
            return np.full(shape, self.value, dtype=np.int64)
        raise ConfigError(f"unknown distribution kind {self.kind!r}")

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "uniform_mod":
            d["m"] = self.modulus
        elif self.kind == "bernoulli":
            d["q"] = str(self.q)
        elif self.kind == "uniform_range":
            d["low"], d["high"] = self.low, self.high
        elif self.kind == "finite_support":
            d["support"] = [[v, str(w)] for v, w in self.support]
        elif self.kind == "constant":
            d["value"] = self.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EntryDistribution":
        kind = d.get("kind")
        try:
            if kind == "uniform_mod":
                return cls.uniform_mod(d["m"])
            if kind == "bernoulli":
                return cls.bernoulli(Fraction(d["q"]))
            if kind == "uniform_range":
                return cls.uniform_range(d["low"], d["high"])
            if kind == "finite_support":
                return cls.finite_support([(v, Fraction(w)) for v, w in d["support"]])
            if kind == "constant":
                return cls.constant(d["value"])
        except KeyError as exc:
            raise ConfigError(f"distribution {kind!r} missing field {exc}") from exc
        raise ConfigError(f"unknown distribution kind {kind!r}")


# ---------------------------------------------------------------------------
# Ensemble specifications
# ---------------------------------------------------------------------------

ENSEMBLE_KINDS = ("block_triangular", "matrix_product", "bidiagonal_embedding")


@dataclass(frozen=True)
class EnsembleSpec:
    """Full description of a random matrix ensemble.

    block_triangular: C = A + B with A supported on block (i, i) and
    (i, i-1), B supported strictly below the subdiagonal, blocks of sizes
    block_sizes, A entries balanced at p. matrix_product /
    bidiagonal_embedding: k iid n x n factor matrices with A_dist entries.
    """

    p: int
    kind: str
    k: int
    A_dist: EntryDistribution
    master_seed: int
    block_sizes: tuple[int, ...] | None = None
    n: int | None = None
    B_dist: EntryDistribution | None = None
    precision: int | None = None

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise ConfigError(f"unknown ensemble kind {self.kind!r}")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.kind == "block_triangular":
            if self.block_sizes is None:
                raise ConfigError("block_triangular needs block_sizes")
            sizes = tuple(int(s) for s in self.block_sizes)
            if len(sizes) != self.k or any(s < 1 for s in sizes):
                raise ConfigError("block_sizes must be k positive ints")
            object.__setattr__(self, "block_sizes", sizes)
            if self.B_dist is None:
                raise ConfigError("block_triangular needs B_dist")
        else:
            if self.n is None or self.n < 1:
                raise ConfigError(f"{self.kind} needs n >= 1")
        if not self.A_dist.is_balanced(self.p):
            raise ConfigError(
                f"entry distribution for the A blocks is constant mod p={self.p}; "
                "balanced entries (no residue with probability 1) are required"
            )
        if self.precision is not None and self.precision < 1:
            raise ConfigError("precision must be >= 1")

    @property
    def size(self) -> int:
        """Side length of the assembled square matrix."""
        if self.kind == "block_triangular":
            return sum(self.block_sizes)
        if self.kind == "matrix_product":
            return self.n
        return self.n * self.k

    def working_precision(self) -> int:
        return self.precision if self.precision is not None else default_precision(self.p, self.k)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "kind": self.kind,
            "k": self.k,
            "block_sizes": list(self.block_sizes) if self.block_sizes else None,
            "n": self.n,
            "A_dist": self.A_dist.to_dict(),
            "B_dist": self.B_dist.to_dict() if self.B_dist else None,
            "master_seed": self.master_seed,
            "precision": self.precision,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleSpec":
        try:
            return cls(
                p=int(d["p"]),
                kind=d["kind"],
                k=int(d["k"]),
                A_dist=EntryDistribution.from_dict(d["A_dist"]),
                master_seed=int(d["master_seed"]),
                block_sizes=tuple(d["block_sizes"]) if d.get("block_sizes") else None,
                n=int(d["n"]) if d.get("n") is not None else None,
                B_dist=EntryDistribution.from_dict(d["B_dist"]) if d.get("B_dist") else None,
                precision=int(d["precision"]) if d.get("precision") is not None else None,
            )
        except KeyError as exc:
            raise ConfigError(f"ensemble spec missing field {exc}") from exc


# ---------------------------------------------------------------------------
# Block lower triangular ensemble
# ---------------------------------------------------------------------------

def _draw_block_entries(spec: EnsembleSpec, trial: int) -> np.ndarray:
    """Integer matrix of the A+B ensemble, before any reduction.

    Draw order is fixed (all A blocks, then all B blocks) so the matrix is a
    pure function of (master_seed, trial) independent of the precision.
    """
    rng = trial_rng(spec.master_seed, trial)
    sizes = spec.block_sizes
    k = spec.k
    offs = [0]
    for s in sizes:
        offs.append(offs[-1] + s)
    n = offs[-1]
    full = np.zeros((n, n), dtype=np.int64)
    for i in range(k):
        full[offs[i]:offs[i + 1], offs[i]:offs[i + 1]] = spec.A_dist.sample(rng, (sizes[i], sizes[i]))
    for i in range(1, k):
        full[offs[i]:offs[i + 1], offs[i - 1]:offs[i]] = spec.A_dist.sample(rng, (sizes[i], sizes[i - 1]))
    for i in range(2, k):
        for j in range(i - 1):
            full[offs[i]:offs[i + 1], offs[j]:offs[j + 1]] = spec.B_dist.sample(rng, (sizes[i], sizes[j]))
    return full


def sample_block_matrix(spec: EnsembleSpec, trial: int, precision: int | None = None) -> PadicMatrix:
    """One trial of the A+B block ensemble, assembled and reduced mod p**N."""
    if spec.kind != "block_triangular":
        raise ConfigError("sample_block_matrix needs a block_triangular spec")
    if trial < 0:
        raise ValueError("trial must be >= 0")
    N = precision if precision is not None else spec.working_precision()
    full = _draw_block_entries(spec, trial)
    return _reduce_int64(full, spec.p, N)


def sample_block_matrix_int(spec: EnsembleSpec, trial: int) -> IntMatrix:
    """The same trial as sample_block_matrix, kept as exact integers."""
    if spec.kind != "block_triangular":
        raise ConfigError("sample_block_matrix_int needs a block_triangular spec")
    return IntMatrix.from_rows(_draw_block_entries(spec, trial).tolist())


def _reduce_entries(full: np.ndarray, p: int, precision: int) -> np.ndarray:
    q = p ** precision
    if q <= 2 ** 62:
        red = full % q
    else:
        red = full.astype(object) % q
    dtype = residue_dtype(p, precision, max(full.shape))
    return red.astype(dtype) if red.dtype != dtype else red


def _reduce_int64(full: np.ndarray, p: int, precision: int) -> PadicMatrix:
    return PadicMatrix(_reduce_entries(full, p, precision), p, precision)


# ---------------------------------------------------------------------------
# Matrix products and the bidiagonal embedding
# ---------------------------------------------------------------------------

def _draw_factor_entries(spec: EnsembleSpec, trial: int) -> list[np.ndarray]:
    rng = trial_rng(spec.master_seed, trial)
    return [spec.A_dist.sample(rng, (spec.n, spec.n)) for _ in range(spec.k)]


def _require_factor_kind(spec: EnsembleSpec, op: str):
    if spec.kind not in ("matrix_product", "bidiagonal_embedding"):
        raise ConfigError(f"{op} needs a matrix_product or bidiagonal_embedding spec")


def product_factors(spec: EnsembleSpec, trial: int, precision: int | None = None) -> list[PadicMatrix]:
    """The k iid factor matrices of a product trial, reduced mod p**N."""
    _require_factor_kind(spec, "product_factors")
    N = precision if precision is not None else spec.working_precision()
    return [_reduce_int64(f, spec.p, N) for f in _draw_factor_entries(spec, trial)]


def product_factors_int(spec: EnsembleSpec, trial: int) -> list[IntMatrix]:
    _require_factor_kind(spec, "product_factors_int")
    return [IntMatrix.from_rows(f.tolist()) for f in _draw_factor_entries(spec, trial)]


def factor_determinants(spec: EnsembleSpec, trial: int) -> list[int]:
    """Exact determinants of the factor matrices of a product trial.

    det(A_1 ... A_k) is their product, so these certify the total divisor
    valuation (or the singularity) of the product without ever forming it."""
    from .exact_linalg import det_bareiss

    return [det_bareiss(f) for f in product_factors_int(spec, trial)]


def _max_abs_entry(dist: EntryDistribution) -> int:
    return max(1, max(abs(v) for v, _ in dist.support_pairs()))


def sample_product(spec: EnsembleSpec, trial: int, precision: int | None = None) -> PadicMatrix:
    """A_1 A_2 ... A_k reduced mod p**N, left to right.

    Runs of consecutive factors whose exact product provably fits int64 are
    multiplied exactly first; the group products are then folded together
    with ordinary modular dots.  The result equals the fully reduced
    left-to-right product, at a fraction of the wide-precision work.
    """
    _require_factor_kind(spec, "sample_product")
    if trial < 0:
        raise ValueError("trial must be >= 0")
    N = precision if precision is not None else spec.working_precision()
    p = spec.p
    q = p ** N
    n = spec.n
    factors = _draw_factor_entries(spec, trial)
    entry_cap = _max_abs_entry(spec.A_dist)

    groups = []
    acc = factors[0]
    bound = entry_cap  # |entries of acc| <= bound, exactly over Z
    for f in factors[1:]:
        if bound * entry_cap * n < 2 ** 62:
            acc = np.dot(acc, f)
            bound = bound * entry_cap * n
        else:
            groups.append(acc)
            acc = f
            bound = entry_cap
    groups.append(acc)

    out = _reduce_entries(groups[0], p, N)
    for g in groups[1:]:
        out = _mod_dot(out, _reduce_entries(g, p, N), q)
    return PadicMatrix(out, p, N)


def _mod_dot(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    # int64 operands are dot-safe by the residue_dtype contract; uint64
    # wraps mod 2**64, which reduction mod q = 2**N then corrects
    if a.dtype == np.uint64:
        return np.dot(a, b) % np.uint64(q)
    return np.dot(a, b) % q


def sample_product_int(spec: EnsembleSpec, trial: int) -> IntMatrix:
    """Exact integer product of the same factor stream (oracle-scale only)."""
    factors = product_factors_int(spec, trial)
    acc = np.array(factors[0].to_rows(), dtype=object)
    for f in factors[1:]:
        acc = np.dot(acc, np.array(f.to_rows(), dtype=object))
    return IntMatrix.from_rows(acc.tolist())


def build_bidiagonal_embedding(factors: Sequence[PadicMatrix]) -> PadicMatrix:
    """The nk x nk block bidiagonal matrix with the factors on the diagonal
    and identity blocks on the subdiagonal; its cokernel matches the one of
    the factor product."""
    if not factors:
        raise ValueError("need at least one factor")
    n = factors[0].rows
    p, N = factors[0].p, factors[0].precision
    for f in factors:
        if f.rows != n or f.cols != n or f.p != p or f.precision != N:
            raise ValueError("factors must be square, equal size, same p and precision")
    k = len(factors)
    full = np.zeros((n * k, n * k), dtype=object)
    for i, f in enumerate(factors):
        full[i * n:(i + 1) * n, i * n:(i + 1) * n] = np.asarray(f.data, dtype=object)
        if i:
            full[i * n:(i + 1) * n, (i - 1) * n:i * n] = np.identity(n, dtype=object)
    return PadicMatrix(full, p, N)


def build_bidiagonal_embedding_int(factors: Sequence[IntMatrix]) -> IntMatrix:
    if not factors:
        raise ValueError("need at least one factor")
    n = factors[0].rows
    for f in factors:
        if f.rows != n or f.cols != n:
            raise ValueError("factors must be square and of equal size")
    k = len(factors)
    rows = [[0] * (n * k) for _ in range(n * k)]
    for i, f in enumerate(factors):
        block = f.to_rows()
        for r in range(n):
            for c in range(n):
                rows[i * n + r][i * n + c] = block[r][c]
            if i:
                rows[i * n + r][(i - 1) * n + r] = 1
    return IntMatrix.from_rows(rows)


# ---------------------------------------------------------------------------
# k schedules targeting a fractional part zeta
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KSchedule:
    """k(m) = round(p**(m - zeta)) clamped to >= 2, so the fractional part of
    -log_p k(m) tends to zeta_target along the schedule."""

    p: int
    zeta_target: float
    m_range: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.zeta_target < 1:
            raise ConfigError("zeta_target must lie in [0, 1)")
        object.__setattr__(self, "m_range", tuple(int(m) for m in self.m_range))

    def k_for(self, m: int) -> int:
        x = self.p ** float(m - self.zeta_target)
        return max(2, math.floor(x + 0.5))

    def k_values(self) -> list[int]:
        return [self.k_for(m) for m in self.m_range]

    def fractional_parts(self) -> list[float]:
        out = []
        for k in self.k_values():
            x = -math.log(k, self.p)
            out.append(x - math.floor(x))
        return out
