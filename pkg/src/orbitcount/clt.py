"""Distribution of the orbit count K under the x-weighted measure.

``P(K = k) = A(ell, n, k) x^k / (n! H_{ell,n}(x))``.  Small n use the exact
table; large n use the per-k columns from :func:`count_columns`, truncated at
a k beyond which a Chernoff bound certifies negligible mass:

    ln P(K >= k) <= ln H(x e^s) - ln H(x) - s k      for every s > 0
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import ndtr

from .orbit_series import SCHEMA_VERSION, OrbitTable, count_columns, log_h_float
from .saddle import contour_integral_J, prefactor_log, solve_saddle
from .zfun import kappa_constant, z_staircase

MASS_TOL = 1e-12
_TAIL_TARGET = 1e-16


@dataclass(frozen=True)
class DistSummary:
    """PMF of K with moments and, once summarized, CLT diagnostics.

    ``pmf`` covers k = 0..len(pmf)-1.  Exact summaries hold Fractions for all
    k <= n; float summaries stop at a cap whose neglected upper tail is at
    most ``truncation_bound``.
    """

    ell: int
    n: int
    x: object
    pmf: tuple
    log_pmf: np.ndarray = field(repr=False, compare=False)
    exact: bool
    mean: object
    variance: object
    truncation_bound: float = 0.0
    a_n: Optional[float] = None
    b_n: Optional[float] = None
    kolmogorov: Optional[float] = None
    psi_values: dict = field(default_factory=dict)

    @property
    def k_max(self) -> int:
        return len(self.pmf) - 1

    @classmethod
    def from_probabilities(cls, probs: Sequence[float], ell: int = 0, n: Optional[int] = None, x=1.0) -> "DistSummary":
        """Float summary for an arbitrary PMF on k = 0..len-1 (for diagnostics)."""
        p = np.asarray(probs, dtype=float)
        if np.any(p < 0) or not abs(p.sum() - 1.0) < 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        k = np.arange(len(p), dtype=float)
        mean = float(np.sum(k * p))
        var = float(np.sum((k - mean) ** 2 * p))
        with np.errstate(divide="ignore"):
            logs = np.log(p)
        return cls(ell, len(p) - 1 if n is None else n, x, tuple(p.tolist()), logs, False, mean, var)


def _int_log(v: int) -> float:
    return math.log(v) if v > 0 else -math.inf


def pmf(table: OrbitTable, n: int, x) -> DistSummary:
    """Exact PMF of K from an exact table, with exact mean and variance."""
    if not table.exact:
        raise ValueError("pmf needs an exact table; use distribution_float for large n")
    if not 0 <= n <= table.n_max:
        raise IndexError(f"n={n} outside 0..{table.n_max}")
    x = Fraction(x)
    if x <= 0:
        raise ValueError("x must be positive")
    row = table.row(n)
    weights = [a * x**k for k, a in enumerate(row)]
    total = sum(weights)
    probs = tuple(Fraction(w) / total for w in weights)
    mean = sum(k * p for k, p in enumerate(probs))
    var = sum(k * k * p for k, p in enumerate(probs)) - mean * mean
    logs = np.array([_int_log(p.numerator) - _int_log(p.denominator) if p else -math.inf for p in probs])
    return DistSummary(table.ell, n, x, probs, logs, True, mean, var)


def _log_h(ell, x, n):
    return float(log_h_float(ell, x, n)[n])


def _sd_guess(ell, x, n) -> float:
    var = x * math.log(n + 1) if ell == 1 else asymptotic_mean_variance(ell, x, n)[1]
    return math.sqrt(max(var, 1.0))


def chernoff_cap(ell: int, n: int, x: float, target: float = _TAIL_TARGET) -> int:
    """Smallest k whose Chernoff bound on ``P(K > k)`` is below ``target``."""
    if n <= 1:
        return n
    x = float(x)
    base = _log_h(ell, x, n)
    sd = _sd_guess(ell, x, n)
    best = n
    for c in (1.0, 2.0, 4.0, 8.0, 16.0, 32.0):
        s = c / sd
        delta = _log_h(ell, x * math.exp(s), n) - base
        k = math.ceil((delta - math.log(target)) / s)
        best = min(best, k)
    return max(1, min(n, best))


def chernoff_tail(ell: int, n: int, x: float, k: int) -> float:
    """Chernoff upper bound on ``P(K >= k)``."""
    if k > n:
        return 0.0
    x = float(x)
    base = _log_h(ell, x, n)
    sd = _sd_guess(ell, x, n)
    out = 0.0
    for c in (1.0, 2.0, 4.0, 8.0, 16.0, 32.0):
        s = c / sd
        out = min(out, _log_h(ell, x * math.exp(s), n) - base - s * k)
    return math.exp(out)


def distribution_float(ell: int, n: int, x, mass_tol: float = MASS_TOL, k_cap: Optional[int] = None) -> DistSummary:
    """binary64 PMF of K for large n, truncated with a certified mass bound.

    The cap is ``min(ceil(8 n^((ell-1)/ell)), Chernoff cap)``; the neglected
    mass (Chernoff bound) and the normalization defect (columns summed
    against an independent ``ln H``) must both stay below ``mass_tol``.
    """
    if ell < 1 or n < 1:
        raise ValueError("need ell >= 1 and n >= 1")
    xf = float(x)
    if not xf > 0:
        raise ValueError("x must be positive")
    hard = n if ell == 1 else min(n, math.ceil(8.0 * n ** ((ell - 1) / ell)))
    if k_cap is None:
        k_cap = min(hard, chernoff_cap(ell, n, xf))
    bound = chernoff_tail(ell, n, xf, k_cap + 1)
    if bound > mass_tol:
        raise ArithmeticError(f"truncated mass bound {bound:.2e} exceeds {mass_tol:.0e} at k <= {k_cap}")
    cols = count_columns(ell, n, k_cap)
    logs = cols + np.arange(k_cap + 1) * math.log(xf)
    log_h = _log_h(ell, xf, n)
    defect = abs(1.0 - float(np.sum(np.exp(logs - log_h))))
    if defect > mass_tol + bound:
        raise ArithmeticError(f"normalization defect {defect:.2e} exceeds {mass_tol:.0e}")
    # renormalize on the computed support
    top = float(np.max(logs))
    log_norm = top + math.log(float(np.sum(np.exp(logs - top))))
    logs = logs - log_norm
    probs = np.exp(logs)
    k = np.arange(k_cap + 1, dtype=float)
    mean = float(np.sum(k * probs))
    var = float(np.sum((k - mean) ** 2 * probs))
    return DistSummary(ell, n, xf, tuple(probs.tolist()), logs, False, mean, var, bound)


def distributions_float(ell: int, n: int, xs: Sequence, mass_tol: float = MASS_TOL) -> list:
    """:func:`distribution_float` for several x, sharing one column pass."""
    caps = [chernoff_cap(ell, n, float(x)) for x in xs]
    hard = n if ell == 1 else min(n, math.ceil(8.0 * n ** ((ell - 1) / ell)))
    caps = [min(hard, c) for c in caps]
    count_columns(ell, n, max(caps))
    return [distribution_float(ell, n, x, mass_tol, c) for x, c in zip(xs, caps)]


def asymptotic_mean_variance(ell: int, x, n) -> tuple:
    """Leading-order mean and variance of K."""
    if ell < 2:
        raise ValueError("ell must be >= 2")
    scale = (float(x) * kappa_constant(ell)) ** (1.0 / ell) * float(n) ** ((ell - 1) / ell)
    return scale / (ell - 1), scale / (ell * (ell - 1))


def refined_centering(ell: int, x, n: int) -> tuple:
    """``(a_n, b_n)`` with ``a_n = x Z_{ell-1}(t_n)`` and the closed-form ``b_n``."""
    sp = solve_saddle(ell, x, n)
    a = float(x) * z_staircase(ell, ell - 1, sp.t_n).value
    return a, centering_scale(ell, x, n)


def centering_scale(ell: int, x, n) -> float:
    """``b_n = (x K)^(1/(2 ell)) / sqrt(ell (ell-1)) * n^((ell-1)/(2 ell))``."""
    if ell < 2:
        raise ValueError("ell must be >= 2")
    return (float(x) * kappa_constant(ell)) ** (1.0 / (2 * ell)) / math.sqrt(ell * (ell - 1)) * float(n) ** (
        (ell - 1) / (2.0 * ell)
    )


def moment_centering(dist: DistSummary) -> tuple:
    """``(E K, sqrt(Var K))`` as floats."""
    return float(dist.mean), math.sqrt(float(dist.variance))


def psi_mgf(dist: DistSummary, s: float, a_n: float, b_n: float) -> float:
    """``ln E exp(s (K - a_n) / b_n)`` from the PMF, via log-sum-exp."""
    if not b_n > 0:
        raise ValueError("b_n must be positive")
    k = np.arange(len(dist.log_pmf), dtype=float)
    e = dist.log_pmf + s * (k - a_n) / b_n
    top = float(np.max(e))
    return top + math.log(float(np.sum(np.exp(e - top))))


def _float_pmf(dist: DistSummary) -> np.ndarray:
    return np.exp(dist.log_pmf)


def kolmogorov_distance(dist: DistSummary, a: float, b: float) -> float:
    """``sup_z |P((K - a)/b <= z) - Phi(z)|``, attained at the jumps of the CDF.

    Both one-sided limits are compared at every jump; ``Phi`` is
    ``scipy.special.ndtr``.
    """
    if not b > 0:
        raise ValueError("b must be positive")
    p = _float_pmf(dist)
    cdf = np.cumsum(p)
    left = cdf - p
    z = (np.arange(len(p)) - a) / b
    phi = ndtr(z)
    jumps = p > 0
    d = np.maximum(np.abs(cdf - phi), np.abs(left - phi))
    return float(np.max(d[jumps])) if np.any(jumps) else 1.0


def summarize(dist: DistSummary, s_values: Iterable[float] = (), centering: str = "refined") -> DistSummary:
    """Attach ``(a_n, b_n)``, the Kolmogorov distance and ``Psi(s)`` values.

    ``centering="refined"`` uses the saddle-point ``(a_n, b_n)``; ``"moments"``
    uses the mean and standard deviation of the PMF itself.  The Kolmogorov
    distance always uses the moments.
    """
    if centering == "refined":
        a, b = refined_centering(dist.ell, dist.x, dist.n)
    elif centering == "moments":
        a, b = moment_centering(dist)
    else:
        raise ValueError(f"unknown centering {centering!r}")
    mean, sd = moment_centering(dist)
    kol = kolmogorov_distance(dist, mean, sd) if sd > 0 else 1.0
    psi = {float(s): psi_mgf(dist, s, a, b) for s in s_values}
    return replace(dist, a_n=a, b_n=b, kolmogorov=kol, psi_values=psi)


@dataclass(frozen=True)
class LogConcavityReport:
    ok: bool
    violations: int
    first_violation: Optional[int] = None


def log_concavity_check(row: Sequence[int]) -> LogConcavityReport:
    """Check ``A_k^2 >= A_{k-1} A_{k+1}`` for k strictly inside the support."""
    nz = [k for k, a in enumerate(row) if a]
    if not nz:
        return LogConcavityReport(True, 0)
    lo, hi = nz[0], nz[-1]
    bad = [k for k in range(lo + 1, hi) if row[k] * row[k] < row[k - 1] * row[k + 1]]
    return LogConcavityReport(not bad, len(bad), bad[0] if bad else None)


@dataclass(frozen=True)
class MgfDecomposition:
    """``Psi(s) = shift + log_p_shifted - log_p_base + remainder``."""

    ell: int
    x: float
    n: int
    s: float
    t_n: float
    x_n: float
    a_n: float
    b_n: float
    shift: float
    log_p_shifted: float
    log_p_base: float
    remainder: float
    remainder_limit: float

    @property
    def total(self) -> float:
        # the two prefactor logs differ only in their Z term
        return self.shift + (self.x_n - self.x) * z_staircase(self.ell, self.ell - 1, self.t_n).value + self.remainder


def mgf_remainder_decomposition(ell: int, x, n: int, s: float) -> MgfDecomposition:
    """Split ``Psi(s)`` around the saddle of weight x, with ``x_n = x e^{s/b_n}``.

    The remainder ``R = ln J(x_n, t_n) - ln J(x, t_n)`` comes from two
    contour integrals; its limit is ``-(ell-1) s^2 / 2``.
    """
    x = float(x)
    sp = solve_saddle(ell, x, n)
    t = sp.t_n
    a = x * z_staircase(ell, ell - 1, t).value
    b = centering_scale(ell, x, n)
    x_n = x * math.exp(s / b)
    j_shift = contour_integral_J(ell, x_n, t, n).value
    j_base = contour_integral_J(ell, x, t, n).value
    return MgfDecomposition(
        ell=ell,
        x=x,
        n=n,
        s=float(s),
        t_n=t,
        x_n=x_n,
        a_n=a,
        b_n=b,
        shift=-s * a / b,
        log_p_shifted=prefactor_log(ell, x_n, t, n),
        log_p_base=prefactor_log(ell, x, t, n),
        remainder=math.log(j_shift) - math.log(j_base),
        remainder_limit=-(ell - 1) * s * s / 2.0,
    )


def report_dict(dist: DistSummary) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "ell": dist.ell,
        "x": str(dist.x),
        "n": dist.n,
        "exact": dist.exact,
        "mean": float(dist.mean),
        "variance": float(dist.variance),
        "a_n": dist.a_n,
        "b_n": dist.b_n,
        "kolmogorov": dist.kolmogorov,
        "truncation_bound": dist.truncation_bound,
        "k_max": dist.k_max,
        "psi": {repr(s): v for s, v in dist.psi_values.items()},
    }


def report_json(dist: DistSummary) -> str:
    return json.dumps(report_dict(dist), sort_keys=True)


SWEEP_FIELDS = (
    "ell", "x", "n", "mean", "variance", "mean_pred", "var_pred", "mean_ratio", "var_ratio",
    "a_n", "b_n", "centered_mean", "scaled_var", "kolmogorov", "psi_1", "psi_1_dev",
)


def sweep_row(ell: int, x, n: int, dist: Optional[DistSummary] = None) -> dict:
    """One line of n-sweep diagnostics (ratios to the leading asymptotics)."""
    if dist is None:
        dist = distribution_float(ell, n, x)
    dist = summarize(dist, (1.0,))
    mean_p, var_p = asymptotic_mean_variance(ell, x, n)
    mean, var = float(dist.mean), float(dist.variance)
    psi1 = dist.psi_values[1.0]
    return {
        "ell": ell,
        "x": str(x),
        "n": n,
        "mean": mean,
        "variance": var,
        "mean_pred": mean_p,
        "var_pred": var_p,
        "mean_ratio": mean / mean_p,
        "var_ratio": var / var_p,
        "a_n": dist.a_n,
        "b_n": dist.b_n,
        "centered_mean": (mean - dist.a_n) / dist.b_n,
        "scaled_var": var / dist.b_n**2,
        "kolmogorov": dist.kolmogorov,
        "psi_1": psi1,
        "psi_1_dev": abs(psi1 - 0.5),
    }


def sweep_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()
