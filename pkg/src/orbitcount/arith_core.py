"""Exact arithmetic-sequence and truncated power-series primitives.

Sequences indexed from 1 (``ArithSeq``) carry Dirichlet convolutions; series
indexed from 0 (``SeriesExact`` / ``SeriesFloat``) carry exp and log.  The
float mirror exists for large truncation orders where exact rationals get
too expensive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ArithSeq",
    "SeriesExact",
    "SeriesFloat",
    "dirichlet_convolve",
    "power_sequence",
    "power_weights",
    "power_weights_array",
    "series_exp",
    "series_log",
    "log_exp_positive",
]


@dataclass(frozen=True)
class ArithSeq:
    """Sequence ``b_1..b_N`` of exact numbers; ``values[0]`` is a dummy 0."""

    values: tuple

    def __post_init__(self):
        if len(self.values) < 2:
            raise ValueError("ArithSeq needs at least one entry (N >= 1)")
        for v in self.values[1:]:
            if not isinstance(v, Rational):
                raise TypeError(f"ArithSeq entries must be exact rationals, got {type(v).__name__}")

    @classmethod
    def from_list(cls, vals: Iterable) -> "ArithSeq":
        """Build from entries for m = 1..N (no dummy slot)."""
        return cls((0, *vals))

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, m: int):
        if not 1 <= m <= self.n_max:
            raise IndexError(f"index {m} outside 1..{self.n_max}")
        return self.values[m]

    def __len__(self) -> int:
        return self.n_max

    def tolist(self) -> list:
        return list(self.values[1:])

    def is_integral(self) -> bool:
        return all(Fraction(v).denominator == 1 for v in self.values[1:])


def dirichlet_convolve(a: ArithSeq, b: ArithSeq) -> ArithSeq:
    """``(a*b)(m) = sum_{d | m} a(d) b(m/d)`` for m = 1..N, exactly."""
    if a.n_max != b.n_max:
        raise ValueError(f"length mismatch: {a.n_max} != {b.n_max}")
    n = a.n_max
    av, bv = a.values, b.values
    out = [0] * (n + 1)
    for d in range(1, n + 1):
        ad = av[d]
        if ad == 0:
            continue
        for q in range(1, n // d + 1):
            out[d * q] += ad * bv[q]
    return ArithSeq(tuple(out))


def power_sequence(e: int, n: int) -> ArithSeq:
    """The sequence ``m -> m**e`` (integers for e >= 0, rationals otherwise)."""
    if e >= 0:
        return ArithSeq((0, *(m**e for m in range(1, n + 1))))
    return ArithSeq((0, *(Fraction(1, m**-e) for m in range(1, n + 1))))


def power_weights(ell: int, n: int) -> ArithSeq:
    """``b_m = sum_{d_1...d_ell = m} d_1^(ell-1) d_2^(ell-2) ... d_ell^0``.

    This is ``m`` times the z^m coefficient of the log of the orbit-count
    generating function, so it stays integral.  For ``ell == 1`` every
    entry is 1.
    """
    _check_weights_args(ell, n)
    return ArithSeq(_power_weights_exact(ell, n))


@lru_cache(maxsize=32)
def _power_weights_exact(ell: int, n: int) -> tuple:
    acc = power_sequence(0, n)
    for e in range(1, ell):
        acc = dirichlet_convolve(power_sequence(e, n), acc)
    return acc.values


def _check_weights_args(ell, n):
    if not isinstance(ell, (int, np.integer)) or ell < 1:
        raise ValueError(f"ell must be an integer >= 1, got {ell!r}")
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"N must be an integer >= 1, got {n!r}")


def _convolve_float(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = len(a) - 1
    out = np.zeros(n + 1)
    for d in range(1, n + 1):
        if a[d] != 0.0:
            out[d::d] += a[d] * b[1 : n // d + 1]
    return out


@lru_cache(maxsize=16)
def _power_weights_float(ell: int, n: int) -> np.ndarray:
    m = np.arange(n + 1, dtype=float)
    acc = np.ones(n + 1)
    acc[0] = 0.0
    for e in range(1, ell):
        acc = _convolve_float(m**e, acc)
    acc.setflags(write=False)
    return acc


def power_weights_array(ell: int, n: int) -> np.ndarray:
    """binary64 copy of :func:`power_weights`, index 0 holding 0.

    Tables are cached at power-of-two sizes so repeated calls with growing
    cutoffs stay cheap.  Entries above 2**53 are rounded, not exact.
    """
    _check_weights_args(ell, n)
    size = 1 << max(6, math.ceil(math.log2(n + 1)))
    return _power_weights_float(int(ell), size)[: n + 1]


class _SeriesBase:
    coeffs: tuple

    @property
    def n_max(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i: int):
        return self.coeffs[i]

    def __len__(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True)
class SeriesExact(_SeriesBase):
    """Truncated power series ``sum_{i<=N} c_i z^i`` with exact coefficients."""

    coeffs: tuple

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("series needs at least the constant coefficient")
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    def _check_compatible(self, other):
        if not isinstance(other, SeriesExact) or other.n_max != self.n_max:
            raise ValueError("series must share the same truncation order")

    def __add__(self, other: "SeriesExact") -> "SeriesExact":
        self._check_compatible(other)
        return SeriesExact(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, other: "SeriesExact") -> "SeriesExact":
        self._check_compatible(other)
        n = self.n_max
        a, b = self.coeffs, other.coeffs
        return SeriesExact(tuple(sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n + 1)))

    def scale(self, c) -> "SeriesExact":
        return SeriesExact(tuple(c * v for v in self.coeffs))


@dataclass(frozen=True)
class SeriesFloat(_SeriesBase):
    """binary64 mirror of :class:`SeriesExact`."""

    coeffs: tuple

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("series needs at least the constant coefficient")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs)

    def scale(self, c) -> "SeriesFloat":
        return SeriesFloat(tuple(float(c) * v for v in self.coeffs))


def _exp_recurrence(f: Sequence, div, dot) -> list:
    # m g_m = sum_{j=1..m} j f_j g_{m-j}
    n = len(f) - 1
    jf = [j * f[j] for j in range(n + 1)]
    g = [f[0] * 0 + 1]
    for m in range(1, n + 1):
        g.append(div(dot(jf[1 : m + 1], g[m - 1 :: -1]), m))
    return g


def _log_recurrence(g: Sequence, div, dot) -> list:
    # m f_m = m g_m - sum_{j=1..m-1} j f_j g_{m-j}
    n = len(g) - 1
    f = [g[0] * 0]
    jf = [f[0]]
    for m in range(1, n + 1):
        acc = m * g[m]
        if m > 1:
            acc -= dot(jf[1:m], g[m - 1 : 0 : -1])
        f.append(div(acc, m))
        jf.append(m * f[m])
    return f


def _exact_dot(xs, ys):
    return sum(x * y for x, y in zip(xs, ys))


def _float_dot(xs, ys):
    return math.fsum(x * y for x, y in zip(xs, ys))


def series_exp(f):
    """``exp(f)`` truncated at the order of ``f``; needs ``f[0] == 0``."""
    if f.coeffs[0] != 0:
        raise ValueError("series_exp needs a zero constant term")
    if isinstance(f, SeriesExact):
        return SeriesExact(tuple(_exp_recurrence(f.coeffs, lambda a, m: Fraction(a) / m, _exact_dot)))
    return SeriesFloat(tuple(_exp_recurrence(f.coeffs, lambda a, m: a / m, _float_dot)))


def series_log(g):
    """``log(g)`` truncated at the order of ``g``; needs ``g[0] == 1``."""
    if g.coeffs[0] != 1:
        raise ValueError("series_log needs constant term 1")
    if isinstance(g, SeriesExact):
        return SeriesExact(tuple(_log_recurrence(g.coeffs, lambda a, m: Fraction(a) / m, _exact_dot)))
    return SeriesFloat(tuple(_log_recurrence(g.coeffs, lambda a, m: a / m, _float_dot)))


def log_exp_positive(zdf: np.ndarray, scale: float, n_max: int) -> np.ndarray:
    """Natural logs of the coefficients of ``exp(scale * f)`` up to ``z^n_max``.

    ``zdf[m]`` are the coefficients of ``z f'(z)`` (so ``m f_m``) and must be
    nonnegative with ``zdf[1] > 0``; the coefficients of the exponential are
    then positive and are carried in log form to avoid overflow.  Terms whose
    contribution is below ``exp(-40)`` relative to the step's sum are skipped.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    zdf = np.asarray(zdf, dtype=float)
    if len(zdf) < n_max + 1:
        raise ValueError("zdf shorter than requested order")
    if np.any(zdf[1 : n_max + 1] < 0) or (n_max >= 1 and zdf[1] <= 0):
        raise ValueError("zdf must be nonnegative with a positive first entry")
    with np.errstate(divide="ignore"):
        logw = np.log(zdf[: n_max + 1])
    logw_max = float(np.max(logw[1:])) if n_max >= 1 else 0.0
    cut = 40.0 + max(logw_max, 0.0) + math.log(n_max + 1)
    log_scale = math.log(scale)
    lam = np.empty(n_max + 1)
    lam[0] = 0.0
    run_max = 0.0
    lo = 0
    for n in range(1, n_max + 1):
        while lo < n - 1 and lam[lo] < run_max - cut:
            lo += 1
        # g_{n-m} for m = 1..n-lo, newest first
        prev = lam[n - 1 : lo - 1 : -1] if lo > 0 else lam[n - 1 :: -1]
        s = np.sum(np.exp(logw[1 : n - lo + 1] + prev - run_max))
        lam[n] = run_max + log_scale + math.log(s / n)
        if lam[n] > run_max:
            run_max = lam[n]
    return lam
