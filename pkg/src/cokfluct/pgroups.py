"""Finite abelian p-group combinatorics.

Partitions and their conjugates, Hom counting, exhaustive subgroup lattices
for small groups, and counts of strictly increasing subgroup chains.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

__all__ = [
    "Partition",
    "AbelianPGroup",
    "SubgroupLattice",
    "LatticeGuardError",
    "as_partition",
    "conjugate",
    "hom_count",
    "enumerate_subgroups",
    "subgroup_closure",
    "chain_count",
    "ell",
]

Partition = tuple  # weakly decreasing tuple of positive ints; () allowed

LATTICE_ORDER_GUARD = 2 ** 12


class LatticeGuardError(ValueError):
    """Group too large for exhaustive subgroup enumeration."""


def as_partition(parts: Iterable[int]) -> tuple[int, ...]:
    lam = tuple(int(x) for x in parts)
    for i, x in enumerate(lam):
        if x < 1:
            raise ValueError("partition parts must be positive")
        if i and lam[i - 1] < x:
            raise ValueError("partition parts must be weakly decreasing")
    return lam


def conjugate(lam: Sequence[int]) -> tuple[int, ...]:
    """Conjugate partition: column lengths of the Young diagram."""
    lam = as_partition(lam)
    if not lam:
        return ()
    return tuple(sum(1 for x in lam if x >= i) for i in range(1, lam[0] + 1))


def hom_count(lam: Sequence[int], mu: Sequence[int], p: int) -> int:
    """|Hom(G_lam, G_mu)| = p ** sum(min(lam_i, mu_j))."""
    lam = as_partition(lam)
    mu = as_partition(mu)
    return p ** sum(min(a, b) for a in lam for b in mu)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class AbelianPGroup:
    """G = (+) Z/p**lam_i, the group of type `lam` at the prime `p`.

    Elements are tuples of residues, coordinate i mod p**lam_i.
    """

    p: int
    lam: tuple[int, ...]

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        object.__setattr__(self, "lam", as_partition(self.lam))

    @property
    def order(self) -> int:
        return self.p ** sum(self.lam)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(self.p ** e for e in self.lam)

    def zero(self) -> tuple[int, ...]:
        return (0,) * len(self.lam)

    def elements(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(o) for o in self.orders)))

    def add(self, x, y) -> tuple[int, ...]:
        return tuple((a + b) % o for a, b, o in zip(x, y, self.orders))

    def neg(self, x) -> tuple[int, ...]:
        return tuple((-a) % o for a, o in zip(x, self.orders))

    def scale(self, c: int, x) -> tuple[int, ...]:
        return tuple((c * a) % o for a, o in zip(x, self.orders))

    def label(self) -> str:
        return f"{self.p}:({','.join(map(str, self.lam))})"


def ell(G: AbelianPGroup) -> int:
    """Maximal subgroup-chain length: the exponent sum of |G|."""
    return sum(G.lam)


def _extend_subgroup(G: AbelianPGroup, sub: frozenset, g) -> frozenset:
    """Closure of a subgroup with one extra generator: union of cosets sub + t*g."""
    out = set(sub)
    x = g
    while x not in sub:
        out.update(G.add(s, x) for s in sub)
        x = G.add(x, g)
    return frozenset(out)


def subgroup_closure(G: AbelianPGroup, gens: Iterable) -> frozenset:
    sub = frozenset({G.zero()})
    for g in gens:
        if g not in sub:
            sub = _extend_subgroup(G, sub, g)
    return sub


@dataclass(frozen=True)
class SubgroupLattice:
    """All subgroups of a small group, with the full inclusion relation.

    Subgroups are canonical: the sorted tuple of their elements, listed in
    order of (size, elements), so index 0 is trivial and index -1 is G.
    """

    group: AbelianPGroup
    subgroups: tuple[tuple, ...]
    leq: tuple[tuple[bool, ...], ...]  # leq[i][j] iff subgroups[i] <= subgroups[j]

    def __len__(self) -> int:
        return len(self.subgroups)

    @property
    def trivial_index(self) -> int:
        return 0

    @property
    def full_index(self) -> int:
        return len(self.subgroups) - 1

    def as_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(s) for s in self.subgroups)


@lru_cache(maxsize=None)
def enumerate_subgroups(G: AbelianPGroup) -> SubgroupLattice:
    """Exhaustive subgroup lattice; guarded by |G| <= 2**12.

    BFS over single-generator extensions reaches every subgroup, since any
    subgroup is built from the trivial one by adjoining generators one at a
    time; deduplication is by element set.
    """
    if G.order > LATTICE_ORDER_GUARD:
        raise LatticeGuardError(f"|G| = {G.order} exceeds {LATTICE_ORDER_GUARD}")
    elems = G.elements()
    trivial = frozenset({G.zero()})
    seen = {trivial}
    frontier = [trivial]
    while frontier:
        sub = frontier.pop()
        # g and g + s generate the same extension for s in sub, so one
        # candidate per coset of sub suffices
        covered = set(sub)
        for g in elems:
            if g in covered:
                continue
            covered.update(G.add(g, s) for s in sub)
            bigger = _extend_subgroup(G, sub, g)
            if bigger not in seen:
                seen.add(bigger)
                frontier.append(bigger)
    canon = sorted((tuple(sorted(s)) for s in seen), key=lambda s: (len(s), s))
    sets = [frozenset(s) for s in canon]
    leq = tuple(
        tuple(a <= b for b in sets)
        for a in sets
    )
    return SubgroupLattice(G, tuple(canon), leq)


@lru_cache(maxsize=None)
def chain_count(G: AbelianPGroup, i: int) -> int:
    """Number of chains {0} < H_1 < ... < H_i <= G, all inclusions strict.

    c(G, 0) = 1 (the empty chain); 0 whenever i exceeds ell(G).
    """
    if i < 0:
        raise ValueError("chain length must be nonnegative")
    if i == 0:
        return 1
    if i > ell(G):
        return 0
    lat = enumerate_subgroups(G)
    size = len(lat)
    triv = lat.trivial_index
    # f[j] = number of strict chains of the current length ending at subgroup j
    f = [0 if j == triv else 1 for j in range(size)]
    for _ in range(i - 1):
        nxt = [0] * size
        for j in range(size):
            if j == triv:
                continue
            total = 0
            for jj in range(size):
                if jj != j and lat.leq[jj][j]:
                    total += f[jj]
            nxt[j] = total
        f = nxt
    return sum(f)
