"""Certified evaluation of the multiple series Z for real exponents.

    Z_{a_1..a_l}(t) = sum over d_1..d_l >= 1 of d_1^(a_1-1)...d_l^(a_l-1) exp(-d_1...d_l t)

Grouping terms by k = d_1...d_l collapses the sum to ``sum_k w_k e^{-kt}``
with Dirichlet-convolution weights ``w_k``.  The staircase case
``Z_m = Z_{m, m-1, .., m-l+1}`` has ``w_k = k^(m-l) b_k`` with ``b_k`` the
integer power weights.

Truncation at ``k <= K`` is certified by splitting ``e^{-kt}`` as
``e^{-kt/2} e^{-kt/2}``:

    sum_{k>K} w_k e^{-kt} <= e^{-Kt/2} Z(t/2)

and ``Z(t/2)`` is itself bounded in closed form with ``e^{-y} <= (b/e)^b y^-b``,
which turns the lattice sum into a product of zeta values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.special import zeta

from .arith_core import ArithSeq, power_weights, power_weights_array

DEFAULT_RTOL = 1e-13
MAX_CUTOFF = 1 << 24
_EPS = np.finfo(float).eps


class LogarithmicRegimeError(ValueError):
    """The leading exponent is not strictly dominant; logs enter the asymptotics."""


class ZToleranceError(ArithmeticError):
    """The requested tolerance cannot be certified within the cutoff budget."""

    def __init__(self, msg: str, achieved: float):
        super().__init__(msg)
        self.achieved = achieved


@dataclass(frozen=True)
class ZValue:
    """A Z value with a certified absolute error bound."""

    value: float
    error: float
    cutoff: int

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class ZQuery:
    """One Z evaluation request: exponents, point and absolute tolerance."""

    alphas: tuple
    t: float
    tol: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if not self.alphas:
            raise ValueError("need at least one exponent")
        if not self.t > 0:
            raise ValueError("t must be positive")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")

    @classmethod
    def staircase(cls, ell: int, m: int, t: float, tol: Optional[float] = None) -> "ZQuery":
        return cls(staircase_alphas(ell, m), t, tol)

    @property
    def ell(self) -> int:
        return len(self.alphas)

    def evaluate(self) -> ZValue:
        return z_general(self.alphas, self.t, tol=self.tol)


def staircase_alphas(ell: int, m: int) -> tuple:
    """Exponents ``(m, m-1, .., m-ell+1)`` of the staircase function ``Z_m``."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    return tuple(float(m - i) for i in range(ell))


def _pow2(n: int) -> int:
    return 1 << max(6, math.ceil(math.log2(n + 1)))


@lru_cache(maxsize=64)
def _staircase_table(ell: int, m: int, size: int) -> np.ndarray:
    k = np.arange(size + 1, dtype=float)
    k[0] = 1.0
    w = power_weights_array(ell, size) * k ** float(m - ell)
    w.setflags(write=False)
    return w


def staircase_weights(ell: int, m: int, n: int) -> np.ndarray:
    """``w_k = k^(m-ell) b_k`` for k = 0..n (entry 0 is 0), read-only."""
    return _staircase_table(int(ell), int(m), _pow2(n))[: n + 1]


def staircase_weights_exact(ell: int, m: int, n: int) -> ArithSeq:
    """Exact ``w_k = k^(m-ell) b_k`` for k = 1..n (rationals when m < ell)."""
    b = power_weights(ell, n)
    return ArithSeq.from_list(Fraction(b[k]) * Fraction(k) ** (m - ell) for k in range(1, n + 1))


@lru_cache(maxsize=64)
def _general_table(alphas: tuple, size: int) -> np.ndarray:
    k = np.arange(size + 1, dtype=float)
    k[0] = 1.0
    acc = k ** (alphas[0] - 1.0)
    for a in alphas[1:]:
        f = k ** (a - 1.0)
        out = np.zeros(size + 1)
        for d in range(1, size + 1):
            out[d::d] += f[d] * acc[1 : size // d + 1]
        acc = out
    acc[0] = 0.0
    acc.setflags(write=False)
    return acc


def general_weights(alphas: Sequence[float], n: int) -> np.ndarray:
    """``w_k = sum_{d_1..d_l = k} prod d_i^(a_i - 1)`` for k = 0..n, read-only."""
    key = tuple(sorted((float(a) for a in alphas), reverse=True))
    return _general_table(key, _pow2(n))[: n + 1]


def _log_crude_bound(alphas, t) -> float:
    b = max(0.0, max(alphas)) + 1.0
    log_b = b * (math.log(b) - 1.0) - b * math.log(t)
    return log_b + sum(math.log(zeta(b + 1.0 - a)) for a in alphas)


def crude_bound(alphas: Sequence[float], t: float) -> float:
    """Closed-form upper bound on ``Z(t)`` valid for every t > 0.

    With ``b = max(0, max a_i) + 1`` each factor ``sum_d d^(a_i - 1 - b)`` is
    ``zeta(b + 1 - a_i)`` and ``e^{-kt} <= (b / (e k t))^b``.
    """
    log_b = _log_crude_bound(alphas, t)
    return math.exp(log_b) if log_b < 700 else math.inf


def _tail_log_bound(alphas, t, cutoff) -> float:
    return _log_crude_bound(alphas, t / 2.0) - cutoff * t / 2.0


def _first_cutoff(alphas, t, target) -> int:
    # smallest K whose tail bound is below target
    k = (_log_crude_bound(alphas, t / 2.0) - math.log(target)) / (t / 2.0)
    return max(1, math.ceil(k))


def tail_cutoff(alphas: Sequence[float], t: float, tail_tol: float) -> int:
    """A cutoff K whose certified tail ``sum_{k>K} w_k e^{-kt}`` is <= ``tail_tol``."""
    if not (t > 0 and tail_tol > 0):
        raise ValueError("need t > 0 and tail_tol > 0")
    return _first_cutoff(tuple(float(a) for a in alphas), float(t), tail_tol)


def _certified_sum(alphas, weights_fn, t, tol, rtol) -> ZValue:
    if not t > 0:
        raise ValueError("t must be positive")
    if tol is not None and not tol > 0:
        raise ValueError("tol must be positive")
    head = max(1, min(MAX_CUTOFF, math.ceil(40.0 / t)))
    # rough value for a relative target
    w = weights_fn(head)
    k = np.arange(1, head + 1, dtype=float)
    rough = float(np.sum(w[1:] * np.exp(-k * t)))
    target = tol if tol is not None else rtol * max(rough, np.finfo(float).tiny)
    cutoff = _first_cutoff(alphas, t, target / 2.0)
    if cutoff > MAX_CUTOFF:
        achieved = math.exp(min(_tail_log_bound(alphas, t, MAX_CUTOFF), 700.0))
        raise ZToleranceError(f"tail bound at cutoff {MAX_CUTOFF} is {achieved:.3e} > {target:.3e}", achieved)
    w = weights_fn(cutoff)
    k = np.arange(1, cutoff + 1, dtype=float)
    terms = w[1:] * np.exp(-k * t)
    value = float(np.sum(terms))
    tail = math.exp(_tail_log_bound(alphas, t, cutoff))
    # weights, exp and pairwise summation each lose a few ulps per term
    rounding = (len(alphas) + 8 + math.log2(cutoff + 1)) * _EPS * float(np.sum(np.abs(terms)))
    err = tail + rounding
    if tol is not None and err > tol:
        raise ZToleranceError(f"certified error {err:.3e} exceeds tol {tol:.3e}", err)
    return ZValue(value, float(err), cutoff)


def z_staircase(ell: int, m: int, t: float, tol: Optional[float] = None, rtol: float = DEFAULT_RTOL) -> ZValue:
    """``Z_m^{[ell]}(t)`` with a certified error bound.

    ``tol`` is an absolute target; without it the tail is pushed below
    ``rtol`` times the value.  Raises :class:`ZToleranceError` when the
    bound cannot be met.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    alphas = staircase_alphas(ell, m)
    return _certified_sum(alphas, lambda n: staircase_weights(ell, m, n), float(t), tol, rtol)


def z_general(alphas: Sequence[float], t: float, tol: Optional[float] = None, rtol: float = DEFAULT_RTOL) -> ZValue:
    """``Z_{a_1..a_l}(t)`` for real exponents, certified like :func:`z_staircase`."""
    alphas = tuple(float(a) for a in alphas)
    if not alphas:
        raise ValueError("need at least one exponent")
    return _certified_sum(alphas, lambda n: general_weights(alphas, n), float(t), tol, rtol)


def z_asymptotic_constant(alphas: Sequence[float]) -> float:
    """``C`` with ``Z(t) ~ C t^(-a_1)`` as t -> 0+, for strictly dominant ``a_1 > 0``.

    ``C = Gamma(a_1) prod_{j>=2} zeta(a_1 + 1 - a_j)``.  Exponents are sorted
    first since Z is symmetric in them.
    """
    a = sorted((float(v) for v in alphas), reverse=True)
    if not a:
        raise ValueError("need at least one exponent")
    if a[0] <= 0 or (len(a) > 1 and a[0] <= a[1]):
        raise LogarithmicRegimeError("logarithmic regime: leading exponent must be positive and strictly dominant")
    c = math.gamma(a[0])
    for aj in a[1:]:
        c *= float(zeta(a[0] + 1.0 - aj))
    return c


def kappa_constant(ell: int) -> float:
    """``K_ell = (ell-1)! zeta(2) ... zeta(ell)``; ``K_1 = 1``."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    c = float(math.factorial(ell - 1))
    for j in range(2, ell + 1):
        c *= float(zeta(j))
    return c


def leading_exponent(alphas: Sequence[float]) -> float:
    return max(float(a) for a in alphas)
