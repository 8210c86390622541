"""Exact brute-force verifiers at tiny scale.

Everything here is computed in exact rational arithmetic: the moment
identity E|Hom(cok(M), G)| = sum_g P(Mg = 0), the generated-vector sums with
their min/max over targets, the residual coset bound (1-eps)**m, the
embedding/product cokernel identity, the w/t statistics of block-split
vectors, the chain-growth inequality t <= ell(G)(1 + w), and the multichain
count |{H : w=0, t=i}| = c(G, i) * C(k, i) with the matching probability sum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .exact_linalg import IntMatrix, snf_diagonal
from .ensembles import build_bidiagonal_embedding_int
from .experiments import hom_moment_of_trial
from .exact_linalg import cokernel_partition
from .pgroups import (
    AbelianPGroup,
    chain_count,
    ell,
    enumerate_subgroups,
    subgroup_closure,
)

__all__ = [
    "FiniteSupportMatrixLaw",
    "EnumerationGuardError",
    "MomentIdentityResult",
    "BalancedSumsResult",
    "ResidualBoundResult",
    "WTStatistics",
    "verify_moment_identity",
    "verify_balanced_sums",
    "verify_residual_bound",
    "verify_cok_identity",
    "wt_statistics",
    "verify_chain_claim",
    "w0_chain_counts",
    "verify_w0_decomposition",
]

MOMENT_ENUM_GUARD = 10 ** 6
BALANCED_ENUM_GUARD = 10 ** 7
COK_SIZE_GUARD = 24
W0_ENUM_GUARD = 2 * 10 ** 5


class EnumerationGuardError(ValueError):
    """Requested enumeration exceeds the feasibility guard."""


@dataclass(frozen=True)
class FiniteSupportMatrixLaw:
    """Random integer matrix with iid entries drawn from a finite support of
    (value, exact probability) atoms summing to 1."""

    rows: int
    cols: int
    support: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("law dimensions must be positive")
        support = tuple((int(v), Fraction(w)) for v, w in self.support)
        if sum(w for _, w in support) != 1:
            raise ValueError("support probabilities must sum to exactly 1")
        if any(w <= 0 for _, w in support):
            raise ValueError("support probabilities must be positive")
        object.__setattr__(self, "support", support)

    def entry_epsilon(self, p: int) -> Fraction:
        """Largest eps with P(X = r mod p) <= 1 - eps for all residues r."""
        probs = [Fraction(0)] * p
        for v, w in self.support:
            probs[v % p] += w
        return 1 - max(probs)


def _dot_distribution(G: AbelianPGroup, g: Sequence, support) -> dict:
    """Exact law of sum_j X_j * g_j in G for iid X_j with the given support."""
    dist = {G.zero(): Fraction(1)}
    for gj in g:
        moved = {}
        for v, w in support:
            moved[v] = G.scale(v, gj)
        nxt: dict = {}
        for acc, pacc in dist.items():
            for v, w in support:
                key = G.add(acc, moved[v])
                nxt[key] = nxt.get(key, Fraction(0)) + pacc * w
        dist = nxt
    return dist


# ---------------------------------------------------------------------------
# Moment identity
# ---------------------------------------------------------------------------

class MomentIdentityResult(NamedTuple):
    lhs: Fraction
    rhs: Fraction
    equal: bool


def verify_moment_identity(law: FiniteSupportMatrixLaw, G: AbelianPGroup) -> MomentIdentityResult:
    """E|Hom(cok(M), G)| versus sum over g in G**n of P(Mg = 0), both exact.

    The left side enumerates every matrix in the support (exact SNF each),
    the right side enumerates vectors; the two must agree identically.
    """
    if law.rows != law.cols:
        raise ValueError("moment identity needs a square law")
    n = law.rows
    if len(law.support) ** (n * n) > MOMENT_ENUM_GUARD:
        raise EnumerationGuardError("matrix enumeration too large")

    lhs = Fraction(0)
    for cells in itertools.product(law.support, repeat=n * n):
        prob = math.prod((w for _, w in cells), start=Fraction(1))
        m = IntMatrix(n, n, tuple(v for v, _ in cells))
        part, free = cokernel_partition(m, G.p)
        lhs += prob * hom_moment_of_trial(part, free, G)

    rhs = Fraction(0)
    for g in itertools.product(G.elements(), repeat=n):
        row_prob = _dot_distribution(G, g, law.support).get(G.zero(), Fraction(0))
        rhs += row_prob ** n
    return MomentIdentityResult(lhs, rhs, lhs == rhs)


# ---------------------------------------------------------------------------
# Generated-vector sums
# ---------------------------------------------------------------------------

class BalancedSumsResult(NamedTuple):
    s_min: Fraction
    s_max: Fraction


def verify_balanced_sums(law: FiniteSupportMatrixLaw, G0: AbelianPGroup) -> BalancedSumsResult:
    """S_min = sum over generating g in G0**n of min_f P(Mg = f), and S_max
    with the max; both approach 1 for balanced entries as n grows."""
    if law.rows != law.cols:
        raise ValueError("balanced sums need a square law")
    n = law.rows
    if G0.order ** n > BALANCED_ENUM_GUARD:
        raise EnumerationGuardError("vector enumeration too large")
    elems = G0.elements()
    full = frozenset(elems)
    s_min = Fraction(0)
    s_max = Fraction(0)
    closure_cache: dict = {}
    for g in itertools.product(elems, repeat=n):
        key = frozenset(g)
        gen = closure_cache.get(key)
        if gen is None:
            gen = subgroup_closure(G0, key) == full
            closure_cache[key] = gen
        if not gen:
            continue
        marg = _dot_distribution(G0, g, law.support)
        # rows iid and f ranges over G0**n, so min/max factor across rows
        lo = min((marg.get(c, Fraction(0)) for c in elems))
        hi = max(marg.values())
        s_min += lo ** n
        s_max += hi ** n
    return BalancedSumsResult(s_min, s_max)


# ---------------------------------------------------------------------------
# Residual coset bound
# ---------------------------------------------------------------------------

class ResidualBoundResult(NamedTuple):
    probability: Fraction
    bound: Fraction
    holds: bool


def verify_residual_bound(
    law: FiniteSupportMatrixLaw,
    G: AbelianPGroup,
    G0: frozenset,
    g: Sequence,
    m: int,
    f: Sequence | None = None,
) -> ResidualBoundResult:
    """P(f + Mg in G0**m) <= (1 - eps)**m for an m x len(g) matrix with the
    law's iid entries, eps the law's certified balancedness constant at p."""
    if not (subgroup_closure(G, g) - G0):
        raise ValueError("precondition violated: <g> is contained in G0")
    if m < 0:
        raise ValueError("m must be >= 0")
    if f is None:
        f = [G.zero()] * m
    if len(f) != m:
        raise ValueError("f must have m coordinates")
    marg = _dot_distribution(G, g, law.support)
    prob = Fraction(1)
    for fr in f:
        prob *= sum(
            (w for c, w in marg.items() if G.add(fr, c) in G0),
            start=Fraction(0),
        )
    eps = law.entry_epsilon(G.p)
    bound = (1 - eps) ** m
    return ResidualBoundResult(prob, bound, prob <= bound)


# ---------------------------------------------------------------------------
# Embedding / product cokernel identity
# ---------------------------------------------------------------------------

def verify_cok_identity(factors: Sequence[IntMatrix]) -> bool:
    """True iff the bidiagonal embedding of the factors and their product
    have isomorphic cokernels: equal nontrivial divisor multisets (zeros
    included, so free ranks match)."""
    if not factors:
        raise ValueError("need at least one factor")
    n = factors[0].rows
    k = len(factors)
    if n * k > COK_SIZE_GUARD:
        raise EnumerationGuardError(f"n*k = {n * k} exceeds {COK_SIZE_GUARD}")
    embedded = snf_diagonal(build_bidiagonal_embedding_int(factors))
    prod = factors[0].to_rows()
    for f in factors[1:]:
        rows = f.to_rows()
        prod = [
            [sum(prod[i][t] * rows[t][j] for t in range(n)) for j in range(n)]
            for i in range(n)
        ]
    direct = snf_diagonal(IntMatrix.from_rows(prod))
    return sorted(d for d in embedded if d != 1) == sorted(d for d in direct if d != 1)


# ---------------------------------------------------------------------------
# w/t statistics and chain machinery
# ---------------------------------------------------------------------------

class WTStatistics(NamedTuple):
    w: int
    t: int
    tyg: tuple[frozenset, ...]


def _wt_of_subgroups(seq: Sequence[frozenset], zero: frozenset) -> tuple[int, int]:
    w = sum(1 for i in range(1, len(seq)) if not seq[i - 1] <= seq[i])
    prev = zero
    t = 0
    for sub in seq:
        if prev <= sub and prev != sub:
            t += 1
        prev = sub
    return w, t


def wt_statistics(G: AbelianPGroup, blocks: Sequence[Sequence]) -> WTStatistics:
    """Non-containment count w, strict-growth count t, and the generated
    subgroup sequence of a block-split vector (with <g_0> = {0})."""
    tyg = tuple(subgroup_closure(G, block) for block in blocks)
    zero = frozenset({G.zero()})
    w, t = _wt_of_subgroups(tyg, zero)
    return WTStatistics(w, t, tyg)


def verify_chain_claim(G: AbelianPGroup, subgroups: Sequence[frozenset]) -> bool:
    """t(H) <= ell(G) * (1 + w(H)); must hold for every subgroup sequence."""
    zero = frozenset({G.zero()})
    w, t = _wt_of_subgroups(list(subgroups), zero)
    return t <= ell(G) * (1 + w)


def w0_chain_counts(G: AbelianPGroup, k: int) -> dict[int, int]:
    """Counts |{H in Sg(G)**k : w(H) = 0, t(H) = i}| for every i, by dynamic
    programming over the weakly increasing sequences of the lattice."""
    lat = enumerate_subgroups(G)
    size = len(lat)
    triv = lat.trivial_index
    lmax = ell(G)
    ups = [[j for j in range(size) if lat.leq[i][j]] for i in range(size)]
    # f[j][t] = number of weakly increasing prefixes ending at subgroup j
    # with t strict steps (counting the step from {0} to H_1)
    f = [[0] * (lmax + 2) for _ in range(size)]
    for j in range(size):
        f[j][0 if j == triv else 1] = 1
    for _ in range(k - 1):
        nxt = [[0] * (lmax + 2) for _ in range(size)]
        for j in range(size):
            for t, ways in enumerate(f[j]):
                if not ways:
                    continue
                for j2 in ups[j]:
                    nxt[j2][t + (1 if j2 != j else 0)] += ways
        f = nxt
    out: dict[int, int] = {}
    for j in range(size):
        for t, ways in enumerate(f[j]):
            if ways:
                out[t] = out.get(t, 0) + ways
    return out


# ---------------------------------------------------------------------------
# Probability decomposition over w=0, t=i vectors
# ---------------------------------------------------------------------------

class W0DecompositionResult(NamedTuple):
    total: Fraction
    target: Fraction
    vector_count: int


def verify_w0_decomposition(
    law: FiniteSupportMatrixLaw,
    G: AbelianPGroup,
    i: int,
    k: int,
    block_sizes: Sequence[int],
    B_fixed: Sequence[Sequence[int]] | None = None,
) -> W0DecompositionResult:
    """Exact sum of P(Cg = 0) over vectors g with w(g) = 0 and t(g) = i, with
    B frozen to a deterministic fill, against the target c(G, i) * C(k, i).

    P(Cg = 0) factors block row by block row: the first block row needs
    A_11 g_1 = 0, and block row i needs A_ii g_i to hit the deterministic
    shift -A_{i,i-1} g_{i-1} - sum_j B_{i,j} g_j, with the two A laws
    independent.  The target is exact only in the limit; the vector count per
    (w=0, t=i) stratum is checked exactly elsewhere.
    """
    sizes = [int(s) for s in block_sizes]
    if len(sizes) != k or any(s < 1 for s in sizes):
        raise ValueError("need k positive block sizes")
    n = sum(sizes)
    if G.order ** n > W0_ENUM_GUARD:
        raise EnumerationGuardError("vector enumeration too large")
    if B_fixed is None:
        B_fixed = [[0] * n for _ in range(n)]
    offs = [0]
    for s in sizes:
        offs.append(offs[-1] + s)

    support = law.support
    zero = G.zero()
    total = Fraction(0)
    count = 0
    for g in itertools.product(G.elements(), repeat=n):
        blocks = [list(g[offs[b]:offs[b + 1]]) for b in range(k)]
        stats = wt_statistics(G, blocks)
        if stats.w != 0 or stats.t != i:
            continue
        count += 1
        prob = Fraction(1)
        # block row 1: every row of A_11 g_1 must vanish
        m1 = _dot_distribution(G, blocks[0], support)
        prob *= m1.get(zero, Fraction(0)) ** sizes[0]
        for b in range(1, k):
            prev = _dot_distribution(G, blocks[b - 1], support)
            cur = _dot_distribution(G, blocks[b], support)
            for r in range(sizes[b]):
                row = offs[b] + r
                shift = zero
                for col in range(offs[b - 1]):
                    shift = G.add(shift, G.scale(B_fixed[row][col], g[col]))
                # P(cur = -prev - shift), prev and cur independent
                row_prob = Fraction(0)
                for y, wy in prev.items():
                    need = G.neg(G.add(y, shift))
                    row_prob += wy * cur.get(need, Fraction(0))
                prob *= row_prob
            if prob == 0:
                break
        total += prob
    target = Fraction(chain_count(G, i) * math.comb(k, i))
    return W0DecompositionResult(total, target, count)
