"""Saddle point, prefactor and contour integral for coefficient extraction.

On the circle ``z = e^{-t + i theta}`` Cauchy's formula splits as
``H_{ell,n}(x) = P * J`` with

    ln P = n t + x Z_{ell-1}(t)
    J    = (1/2pi) int exp(-q(theta)) dtheta
    q    = i n theta - x sum_k c_k e^{-kt} (e^{ik theta} - 1)

where ``c_k = b_k / k``.  The saddle point ``t_n`` solves ``x Z_ell(t) = n``.
J is computed with the trapezoid rule; on ``M`` nodes the rule picks up the
extra coefficients ``n + M, n + 2M, ...``, all positive, so ``J_M`` decreases
to J as M grows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .zfun import kappa_constant, staircase_alphas, staircase_weights, tail_cutoff, z_staircase

DEFAULT_TOL = 1e-9
J_RTOL = 1e-10
MAX_GRID = 1 << 24
# q truncation: absolute tail on sum_k c_k e^{-kt}, scaled by 1/y
_Q_TAIL = 1e-17


class SaddleError(ArithmeticError):
    pass


class ContourNotConverged(ArithmeticError):
    def __init__(self, msg: str, last_values: tuple):
        super().__init__(msg)
        self.last_values = last_values


@dataclass(frozen=True)
class SaddlePoint:
    ell: int
    x: float
    n: int
    t_n: float
    residual: float
    lambda_n: float
    prefactor_log: float
    iterations: int = 0


def _check_ell(ell):
    if not isinstance(ell, (int, np.integer)) or ell < 2:
        raise ValueError("ell must be an integer >= 2")


def asymptotic_t(ell: int, x: float, n: float) -> float:
    """Leading-order saddle ``(n / (x K_ell))^(-1/ell)``."""
    return (n / (x * kappa_constant(ell))) ** (-1.0 / ell)


def solve_saddle(ell: int, x, n: int, tol: float = DEFAULT_TOL) -> SaddlePoint:
    """Root ``t_n`` of ``x Z_ell(t) = n``, with ``|x Z_ell(t_n) - n| <= tol n``.

    Newton steps in ``u = ln t`` (where ``ln Z_ell`` is smooth and convex), kept
    inside a bisection bracket, started from the leading-order guess.
    """
    _check_ell(ell)
    x = float(x)
    if not x > 0:
        raise ValueError("x must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    log_target = math.log(n / x)

    def f(u):
        t = math.exp(u)
        z = z_staircase(ell, ell, t).value
        return math.log(z) - log_target, t, z

    u = math.log(asymptotic_t(ell, x, n))
    fu, t, z = f(u)
    # bracket: f is strictly decreasing in u
    lo = hi = None
    if fu > 0:
        lo = u
    else:
        hi = u
    step = 0.5
    while lo is None or hi is None:
        cand = (hi - step) if lo is None else (lo + step)
        fc = f(cand)[0]
        if fc > 0:
            lo = cand
        else:
            hi = cand
        step *= 2.0
        if step > 1e4:
            raise SaddleError("could not bracket the saddle point")
    its = 0
    for its in range(1, 200):
        fu, t, z = f(u)
        if fu == 0.0:
            break
        if fu > 0:
            lo = u
        else:
            hi = u
        dz = z_staircase(ell, ell + 1, t).value
        deriv = -t * dz / z
        nxt = u - fu / deriv
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - u) <= 1e-15 * max(1.0, abs(u)) or abs(fu) < 1e-15:
            u = nxt
            break
        u = nxt
    t = math.exp(u)
    z = z_staircase(ell, ell, t).value
    residual = abs(x * z - n)
    if residual > tol * n:
        raise SaddleError(f"residual {residual:.3e} above {tol:.1e} * n")
    lam = (x * z_staircase(ell, ell + 1, t).value) ** -0.5
    return SaddlePoint(ell, x, int(n), t, residual, lam, prefactor_log(ell, x, t, n), its)


def prefactor_log(ell: int, x_eff, t: float, n) -> float:
    """``ln P = n t + x_eff Z_{ell-1}(t)``."""
    _check_ell(ell)
    if not t > 0:
        raise ValueError("t must be positive")
    return n * t + float(x_eff) * z_staircase(ell, ell - 1, t).value


def _c_terms(ell: int, y: float, u: float) -> np.ndarray:
    # c_k e^{-ku} for k = 0..K, with the dropped tail times y below _Q_TAIL
    cutoff = tail_cutoff(staircase_alphas(ell, ell - 1), u, _Q_TAIL / y)
    w = staircase_weights(ell, ell - 1, cutoff)
    k = np.arange(cutoff + 1, dtype=float)
    out = w * np.exp(-k * u)
    out[0] = 0.0
    return out


def q_function(ell: int, n: int, y, u: float, theta: float) -> complex:
    """``q(theta) = i n theta - y sum_k c_k e^{-ku} (e^{ik theta} - 1)``."""
    _check_ell(ell)
    y = float(y)
    if not (y > 0 and u > 0):
        raise ValueError("need y > 0 and u > 0")
    a = _c_terms(ell, y, u)
    k = np.arange(len(a), dtype=float)
    # e^{ik theta} - 1 = 2i sin(k theta/2) e^{ik theta/2}, accurate near 0
    half = 0.5 * k * theta
    d = 2j * np.sin(half) * np.exp(1j * half)
    return 1j * n * theta - y * complex(np.sum(a * d))


def q_grid(ell: int, n: int, y, u: float, grid_points: int) -> np.ndarray:
    """``q`` at ``theta_j = 2 pi j / M``, j = 0..M-1, through one FFT."""
    _check_ell(ell)
    y = float(y)
    m = int(grid_points)
    if m < 2 or m % 2:
        raise ValueError("grid_points must be an even integer >= 2")
    a = _c_terms(ell, y, u)
    folded = np.zeros(m)
    pad = (-len(a)) % m
    folded += np.concatenate([a, np.zeros(pad)]).reshape(-1, m).sum(axis=0)
    f = np.fft.ifft(folded) * m  # sum_r a_r e^{2 pi i r j / m}
    j = np.arange(m)
    phase = 2.0 * np.pi * ((n * j) % m) / m
    return 1j * phase - y * (f - folded.sum())


@dataclass(frozen=True)
class JResult:
    value: float
    imag: float
    grid_points: int
    previous: Optional[float] = None


def _j_on_grid(ell, x_eff, t, n, m) -> tuple:
    vals = np.exp(-q_grid(ell, n, x_eff, t, m))
    s = vals.mean()
    return float(s.real), float(s.imag)


def contour_integral_J(ell: int, x_eff, t: float, n: int, grid_points: Optional[int] = None) -> JResult:
    """``J = (1/2pi) int exp(-q) dtheta`` by the trapezoid rule.

    With ``grid_points`` given the rule is applied once; otherwise the grid
    starts at the power of two ``>= max(8n, 64)`` and doubles until two
    successive values agree to ``1e-10`` relative.
    """
    _check_ell(ell)
    x_eff = float(x_eff)
    if not (x_eff > 0 and t > 0) or n < 0:
        raise ValueError("need x_eff > 0, t > 0, n >= 0")
    if grid_points is not None:
        re, im = _j_on_grid(ell, x_eff, t, n, grid_points)
        return JResult(re, im, int(grid_points))
    m = 1 << max(6, math.ceil(math.log2(max(8 * n, 64))))
    prev, _ = _j_on_grid(ell, x_eff, t, n, m)
    while m < MAX_GRID:
        m *= 2
        re, im = _j_on_grid(ell, x_eff, t, n, m)
        if abs(re - prev) <= J_RTOL * abs(re):
            return JResult(re, im, m, prev)
        prev = re
    raise ContourNotConverged(f"no convergence up to {MAX_GRID} nodes", (prev, re))


def log_h_contour(ell: int, x, n: int, t: Optional[float] = None) -> float:
    """``ln H_{ell,n}(x) = ln P + ln J`` at the saddle (or at a given t)."""
    if t is None:
        t = solve_saddle(ell, x, max(n, 1)).t_n
    j = contour_integral_J(ell, x, t, n)
    if not j.value > 0:
        raise ArithmeticError("contour integral is not positive")
    return prefactor_log(ell, x, t, n) + math.log(j.value)


def j_gaussian_prediction(ell: int, x, n, s: float = 0.0) -> float:
    """``(x K)^(1/(2 ell)) / sqrt(2 pi ell) * n^(-(ell+1)/(2 ell)) * exp(-(ell-1) s^2 / 2)``."""
    _check_ell(ell)
    x = float(x)
    k = kappa_constant(ell)
    return (
        (x * k) ** (1.0 / (2 * ell))
        / math.sqrt(2.0 * math.pi * ell)
        * float(n) ** (-(ell + 1) / (2.0 * ell))
        * math.exp(-(ell - 1) * s * s / 2.0)
    )
