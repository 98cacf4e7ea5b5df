"""Orbit-count polynomials from the generating function ``exp(x L(z))``.

``L(z) = sum_m c_m z^m`` with ``m c_m = b_m`` the integer power weights, so
``n H_n(x) = x sum_m b_m H_{n-m}(x)``.  Multiplying through by ``n!`` keeps
the exact recurrence in integers:

    A_n(x) = x sum_m b_m (n-1)(n-2)...(n-m+1) A_{n-m}(x)
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .arith_core import ArithSeq, log_exp_positive, power_weights, power_weights_array
from .oracle import partition_numbers

SCHEMA_VERSION = 1


def l_coefficients(ell: int, n_max: int) -> ArithSeq:
    """z^m coefficients ``c_m = b_m / m`` of ``L_ell``, m = 1..n_max."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    b = power_weights(ell, n_max)
    return ArithSeq.from_list(Fraction(b[m], m) for m in range(1, n_max + 1))


@dataclass(frozen=True)
class OrbitTable:
    """Coefficient table of ``H_{ell,n}(x)`` for n = 0..n_max.

    Exact tables keep the integers ``A(ell, n, k)`` and derive the
    polynomials from them; float tables keep only the polynomial
    coefficients.
    """

    ell: int
    n_max: int
    a_counts: Optional[tuple] = None
    float_polys: Optional[tuple] = None

    @property
    def exact(self) -> bool:
        return self.a_counts is not None

    def row(self, n: int) -> list[int]:
        if not self.exact:
            raise ValueError("float tables carry no integer counts")
        self._check_n(n)
        return list(self.a_counts[n])

    def h_poly(self, n: int) -> list:
        self._check_n(n)
        if self.exact:
            nf = math.factorial(n)
            return [Fraction(a, nf) for a in self.a_counts[n]]
        return list(self.float_polys[n])

    def h_value(self, n: int, x):
        """``H_{ell,n}(x)``; exact when the table is exact and ``x`` rational."""
        self._check_n(n)
        if self.exact and not isinstance(x, float):
            x = Fraction(x)
            return sum((a * x**k for k, a in enumerate(self.a_counts[n])), Fraction(0)) / math.factorial(n)
        coeffs = self.h_poly(n)
        return float(sum(float(c) * float(x) ** k for k, c in enumerate(coeffs)))

    def _check_n(self, n):
        if not 0 <= n <= self.n_max:
            raise IndexError(f"n={n} outside 0..{self.n_max}")

    def to_json(self) -> str:
        if not self.exact:
            raise ValueError("only exact tables serialize")
        doc = {
            "schema": SCHEMA_VERSION,
            "ell": self.ell,
            "n_max": self.n_max,
            "A": [[str(a) for a in r] for r in self.a_counts],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "OrbitTable":
        doc = json.loads(text)
        rows = tuple(tuple(int(a) for a in r) for r in doc["A"])
        if len(rows) != doc["n_max"] + 1:
            raise ValueError("row count does not match n_max")
        return cls(ell=int(doc["ell"]), n_max=int(doc["n_max"]), a_counts=rows)

    def row_csv(self, n: int) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ell", "n", "k", "A"])
        for k, a in enumerate(self.row(n)):
            w.writerow([self.ell, n, k, a])
        return buf.getvalue()


def _exact_rows(ell: int, n_max: int) -> tuple:
    b = power_weights(ell, max(n_max, 1)).values
    rows = [(1,)]
    for n in range(1, n_max + 1):
        row = [0] * (n + 1)
        ff = 1  # (n-1)!/(n-m)!
        for m in range(1, n + 1):
            coef = b[m] * ff
            prev = rows[n - m]
            for k, a in enumerate(prev):
                if a:
                    row[k + 1] += coef * a
            ff *= n - m
        rows.append(tuple(row))
    return tuple(rows)


def _float_rows(ell: int, n_max: int) -> tuple:
    b = power_weights_array(ell, max(n_max, 1))
    rows = [np.ones(1)]
    for n in range(1, n_max + 1):
        row = np.zeros(n + 1)
        for m in range(1, n + 1):
            prev = rows[n - m]
            row[1 : len(prev) + 1] += b[m] * prev
        rows.append(row / n)
    return tuple(tuple(r.tolist()) for r in rows)


def build_orbit_table(ell: int, n_max: int, mode: str = "exact") -> OrbitTable:
    """Tabulate ``H_{ell,n}`` (and ``A(ell,n,k)`` in exact mode) for n <= n_max."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if mode == "exact":
        return OrbitTable(ell, n_max, a_counts=_exact_rows(ell, n_max))
    if mode == "float":
        return OrbitTable(ell, n_max, float_polys=_float_rows(ell, n_max))
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class PartitionCheck:
    ok: bool
    n_max: int
    first_mismatch: Optional[int] = None


def h_at_one_vs_partitions(n_max: int, table: Optional[OrbitTable] = None) -> PartitionCheck:
    """Check ``H_{2,n}(1) == p(n)`` for every n <= n_max."""
    if table is None:
        table = build_orbit_table(2, n_max)
    if table.ell != 2 or not table.exact or table.n_max < n_max:
        raise ValueError("need an exact ell=2 table covering n_max")
    p = partition_numbers(n_max)
    for n in range(n_max + 1):
        if sum(table.a_counts[n]) != math.factorial(n) * p[n]:
            return PartitionCheck(False, n_max, n)
    return PartitionCheck(True, n_max)


def log_h_float(ell: int, x: float, n_max: int) -> np.ndarray:
    """``ln H_{ell,n}(x)`` for n = 0..n_max in binary64, log-scaled throughout."""
    x = float(x)
    if x <= 0:
        raise ValueError("x must be positive")
    if n_max == 0:
        return np.zeros(1)
    b = power_weights_array(ell, n_max)
    lam = log_exp_positive(b, x, n_max)
    if not np.all(np.isfinite(lam)):
        raise ArithmeticError("nonpositive coefficient in exp(x L): internal inconsistency")
    return lam


def _head_convolve(c: np.ndarray, w: np.ndarray) -> np.ndarray:
    """First ``len(c)`` entries of ``convolve(c, w)``; needs ``len(w) >= len(c)``."""
    size = len(c)
    if size <= 512:
        return np.convolve(c, w[:size])[:size]
    h = size // 2
    out = np.empty(size)
    out[:h] = _head_convolve(c[:h], w)
    out[h:] = _head_convolve(c[h:], w)
    # c[:h] feeding out[h:]
    out[h:] += np.convolve(w[1:size], c[:h], mode="valid")
    return out


_COLUMN_CACHE: dict = {}


def count_columns(ell: int, n: int, k_max: int) -> np.ndarray:
    """``ln([x^k] H_{ell,n}(x))`` for k = 0..k_max at a single n.

    Runs the recurrence column by column in k,
    ``j F_{j,k} = sum_m b_m F_{j-m,k-1}``, as direct convolutions of
    nonnegative arrays, so every entry keeps full relative precision.  Each
    column is stored as ``F_{j,k} = col[j] exp(log_s + j tau)``; the tilt
    ``tau`` keeps the column maximum at ``j = n`` so the entry read off never
    underflows.  Zero coefficients (k = 0 < n, or k > n) come back as
    ``-inf``.  The result is read-only; the longest run per ``(ell, n)`` is
    cached and sliced for shorter requests.
    """
    if n < 0 or k_max < 0:
        raise ValueError("need n >= 0, k_max >= 0")
    cached = _COLUMN_CACHE.get((ell, n))
    if cached is not None and len(cached) >= k_max + 1:
        return cached[: k_max + 1]
    out = _count_columns(ell, n, k_max)
    if len(_COLUMN_CACHE) >= 64:
        # drop the cheapest entry (smallest n)
        del _COLUMN_CACHE[min(_COLUMN_CACHE, key=lambda key: key[1])]
    _COLUMN_CACHE[(ell, n)] = out
    return out


def _count_columns(ell: int, n: int, k_max: int) -> np.ndarray:
    out = np.full(k_max + 1, -np.inf)
    if n == 0:
        out[0] = 0.0
        out.setflags(write=False)
        return out
    top = min(k_max, n)
    logb = np.log(power_weights_array(ell, n)[1:])
    idx = np.arange(n + 1, dtype=float)
    inv_idx = np.zeros(n + 1)
    inv_idx[1:] = 1.0 / idx[1:]
    tau = 0.0
    w = np.exp(logb)
    col = np.zeros(n + 1)
    col[0] = 1.0
    log_s = 0.0
    for k in range(1, top + 1):
        # support of column k is j >= k
        conv = _head_convolve(col[k - 1 : n], w)
        col = np.zeros(n + 1)
        col[k:] = conv * inv_idx[k:]
        p = int(np.argmax(col))
        if col[p] <= 0.0:
            raise ArithmeticError(f"column {k} vanished")
        if p < n:
            if col[n] <= 0.0:
                raise ArithmeticError(f"column {k} underflowed at j = n")
            delta = math.log(col[p] / col[n]) / (n - p)
            col *= np.exp((idx - n) * delta)
            tau -= delta
            log_s += n * delta
            w = np.exp(logb - tau * idx[1:])
        peak = col[n]
        col /= peak
        log_s += math.log(peak)
        out[k] = log_s + n * tau
    out.setflags(write=False)
    return out
