"""Ground truth by enumeration, plus the classical single-permutation case.

Permutations are tuples of images on ``range(n)`` (0-based).  The sampler
uses numpy's ``PCG64`` bit generator seeded with the caller's integer seed.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Sequence

import numpy as np

DEFAULT_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    """Raised when an enumeration would exceed the configured work budget."""


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.count = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> None:
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        if self.size[x] < self.size[y]:
            x, y = y, x
        self.parent[y] = x
        self.size[x] += self.size[y]
        self.count -= 1


def _check_perm(p: Sequence[int], n: int) -> tuple:
    p = tuple(int(v) for v in p)
    if len(p) != n or sorted(p) != list(range(n)):
        raise ValueError(f"not a permutation of range({n}): {p}")
    return p


def compose(a: tuple, b: tuple) -> tuple:
    """``a after b``: i -> a[b[i]]."""
    return tuple(a[i] for i in b)


def commute(a: tuple, b: tuple) -> bool:
    return all(a[b[i]] == b[a[i]] for i in range(len(a)))


@dataclass(frozen=True)
class PermTuple:
    """An ell-tuple of permutations of ``range(n)``."""

    n: int
    perms: tuple
    kappa: int = field(init=False)

    def __post_init__(self):
        perms = tuple(_check_perm(p, self.n) for p in self.perms)
        object.__setattr__(self, "perms", perms)
        object.__setattr__(self, "kappa", _orbit_count(self.n, perms))

    @classmethod
    def from_one_based(cls, perms: Sequence[Sequence[int]]) -> "PermTuple":
        perms = [tuple(v - 1 for v in p) for p in perms]
        n = len(perms[0]) if perms else 0
        return cls(n, tuple(perms))

    @property
    def ell(self) -> int:
        return len(self.perms)

    def is_commuting(self) -> bool:
        ps = self.perms
        return all(commute(ps[i], ps[j]) for i in range(len(ps)) for j in range(i + 1, len(ps)))

    def conjugate(self, g: Sequence[int]) -> "PermTuple":
        """Simultaneous conjugation ``p -> g p g^{-1}``."""
        g = _check_perm(g, self.n)
        ginv = [0] * self.n
        for i, v in enumerate(g):
            ginv[v] = i
        ginv = tuple(ginv)
        return PermTuple(self.n, tuple(compose(g, compose(p, ginv)) for p in self.perms))


def _orbit_count(n: int, perms) -> int:
    uf = UnionFind(n)
    for p in perms:
        for i, j in enumerate(p):
            uf.union(i, j)
    return uf.count


def joint_orbit_count(t: PermTuple) -> int:
    """Number of orbits of ``range(n)`` under the group the tuple generates."""
    return _orbit_count(t.n, t.perms)


def _partitions(n: int, largest: int | None = None):
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k, *rest)


def _cycle_type_rep(shape: tuple) -> tuple:
    perm = []
    start = 0
    for k in shape:
        perm.extend(start + (i + 1) % k for i in range(k))
        start += k
    return tuple(perm)


def _class_size(shape: tuple) -> int:
    n = sum(shape)
    z = 1
    for k, mult in Counter(shape).items():
        z *= k**mult * math.factorial(mult)
    return math.factorial(n) // z


def work_estimate(ell: int, n: int) -> int:
    """Upper estimate of commutation checks done by :func:`brute_force_counts`."""
    nf = math.factorial(n)
    return partition_numbers(n)[n] * nf * nf ** max(ell - 2, 0)


def _tally_class(args) -> list:
    ell, n, shape, sym = args
    rep = _cycle_type_rep(shape)
    tally = [0] * (n + 1)
    if ell == 1:
        tally[_orbit_count(n, (rep,))] += 1
        return tally
    cent = [p for p in sym if commute(p, rep)]

    def recurse(chosen, candidates, depth):
        if depth == ell:
            tally[_orbit_count(n, chosen)] += 1
            return
        last = depth == ell - 1
        for p in candidates:
            nxt = None if last else [q for q in candidates if commute(p, q)]
            recurse(chosen + (p,), nxt, depth + 1)

    recurse((rep,), cent, 1)
    return tally


def brute_force_counts(ell: int, n: int, budget: int = DEFAULT_BUDGET, workers: int = 1) -> list[int]:
    """``A(ell, n, k)`` for k = 0..n by direct enumeration of commuting tuples.

    The first coordinate runs over conjugacy-class representatives (weighted
    by class size); every later coordinate runs over the joint centralizer of
    the coordinates already chosen.  Refuses with :class:`BudgetExceeded`
    when :func:`work_estimate` is above ``budget``.
    """
    if ell < 1 or n < 0:
        raise ValueError("need ell >= 1 and n >= 0")
    if n == 0:
        return [1]
    est = work_estimate(ell, n)
    if est > budget:
        raise BudgetExceeded(f"enumeration for ell={ell}, n={n} needs ~{est} checks > budget {budget}")
    sym = list(permutations(range(n))) if ell >= 2 else []
    shapes = list(_partitions(n))
    jobs = [(ell, n, s, sym) for s in shapes]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            tallies = list(ex.map(_tally_class, jobs))
    else:
        tallies = [_tally_class(j) for j in jobs]
    counts = [0] * (n + 1)
    for shape, tally in zip(shapes, tallies):
        size = _class_size(shape)
        for k, c in enumerate(tally):
            counts[k] += size * c
    return counts


def stirling_first_row(n: int) -> list[int]:
    """Unsigned Stirling numbers of the first kind ``c(n, k)``, k = 0..n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    row = [1]
    for m in range(1, n + 1):
        new = [0] * (m + 1)
        for k in range(1, m + 1):
            new[k] = row[k - 1] + (m - 1) * (row[k] if k < m else 0)
        row = new
    return row


def partition_numbers(n_max: int) -> list[int]:
    """``p(0), ..., p(n_max)`` by Euler's pentagonal-number recurrence."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    p = [1] + [0] * n_max
    for n in range(1, n_max + 1):
        total = 0
        k = 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > n:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[n - g1]
            g2 = g1 + k
            if g2 <= n:
                total += sign * p[n - g2]
            k += 1
        p[n] = total
    return p


def _as_positive_fraction(x) -> Fraction:
    x = Fraction(x)
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    return x


def ewens_exact(n: int, x) -> tuple[list[Fraction], Fraction, Fraction]:
    """PMF of the cycle count under the Ewens measure, with mean and variance.

    ``P(K = k) = c(n, k) x^k / (x (x+1) ... (x+n-1))`` for k = 0..n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    x = _as_positive_fraction(x)
    row = stirling_first_row(n)
    rising = Fraction(1)
    for j in range(n):
        rising *= x + j
    pmf = [c * x**k / rising for k, c in enumerate(row)]
    mean = sum(k * p for k, p in enumerate(pmf))
    var = sum(k * k * p for k, p in enumerate(pmf)) - mean * mean
    return pmf, mean, var


def ewens_mean_feller(n: int, x) -> Fraction:
    """``sum_{j<n} x / (x + j)``, the mean from the Bernoulli representation."""
    x = _as_positive_fraction(x)
    return sum((x / (x + j) for j in range(n)), Fraction(0))


def feller_samples(n: int, x: float, size: int, seed: int) -> np.ndarray:
    """``size`` draws of ``K = sum_{j<n} Bernoulli(x / (x + j))``.

    Draws come from ``numpy.random.Generator(PCG64(seed))``; each draw consumes
    ``n`` uniforms in row-major order, so results are reproducible per seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    x = float(x)
    if x <= 0:
        raise ValueError("x must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    probs = x / (x + np.arange(n))
    out = np.empty(size, dtype=np.int64)
    chunk = max(1, 2**22 // n)
    for start in range(0, size, chunk):
        stop = min(size, start + chunk)
        out[start:stop] = (rng.random((stop - start, n)) < probs).sum(axis=1)
    return out


def feller_sample(n: int, x: float, seed: int) -> int:
    """One draw of :func:`feller_samples`."""
    return int(feller_samples(n, x, 1, seed)[0])
