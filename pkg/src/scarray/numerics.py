"""Self-contained numerical kernels: Bessel functions, adaptive quadrature,
positive-semidefinite Cholesky, and seeded complex-Gaussian sampling.

Everything here is pure except :class:`Rng`, which owns per-caller state.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

__all__ = [
    "QuadratureConvergenceError",
    "NotPositiveSemidefiniteError",
    "bessel_j0",
    "bessel_j1",
    "integrate",
    "cholesky_psd",
    "Rng",
    "gaussian_pair",
]

# Series/asymptotic crossover for the Bessel evaluations. Below this the
# Maclaurin series keeps cancellation under ~5 digits; above it the Hankel
# expansion's optimal truncation error is already < 1e-10.
_BESSEL_SPLIT = 12.0


class QuadratureConvergenceError(ArithmeticError):
    """Adaptive quadrature ran out of recursion depth before reaching tol.

    Carries the best available estimate in :attr:`estimate`.
    """

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


class NotPositiveSemidefiniteError(ValueError):
    """Matrix has a negative pivot beyond the allowed diagonal jitter."""


def _bessel_series(nu: int, x: float, max_terms: int = 200) -> float:
    """Maclaurin series for J_nu, nu in {0, 1}. Accurate for |x| <~ 20."""
    q = 0.25 * x * x
    term = 1.0 if nu == 0 else 0.5 * x
    total = term
    for k in range(1, max_terms):
        term *= -q / (k * (k + nu))
        total += term
        if abs(term) < 1e-18 * abs(total) + 1e-300:
            break
    return total


def _bessel_hankel(nu: int, x: float) -> float:
    """Hankel asymptotic expansion for J_nu(x), x > 0, truncated adaptively."""
    mu = 4 * nu * nu
    omega = x - (0.5 * nu + 0.25) * math.pi
    p_sum = 1.0
    q_sum = 0.0
    a_k = 1.0
    prev = math.inf
    for k in range(1, 30):
        a_k *= (mu - (2 * k - 1) ** 2) / (8.0 * k)
        t = a_k / x**k
        if abs(t) >= prev:
            break  # asymptotic terms started growing: stop at optimal truncation
        if k % 2 == 1:
            q_sum += t if (k - 1) % 4 == 0 else -t
        else:
            p_sum += t if k % 4 == 0 else -t
        prev = abs(t)
        if abs(t) < 1e-17:
            break
    amp = math.sqrt(2.0 / (math.pi * x))
    return amp * (p_sum * math.cos(omega) - q_sum * math.sin(omega))


def _bessel(nu: int, x: float) -> float:
    if not math.isfinite(x):
        raise ValueError(f"bessel_j{nu}: non-finite argument {x!r}")
    ax = abs(x)
    if ax <= _BESSEL_SPLIT:
        value = _bessel_series(nu, ax)
    else:
        value = _bessel_hankel(nu, ax)
    if nu == 1 and x < 0.0:
        return -value  # J1 is odd
    return value


def bessel_j0(x: float) -> float:
    """Zeroth-order Bessel function of the first kind, |error| <= 1e-10 on |x| <= 1e4."""
    return _bessel(0, float(x))


def bessel_j1(x: float) -> float:
    """First-order Bessel function of the first kind, |error| <= 1e-10 on |x| <= 1e4."""
    return _bessel(1, float(x))


def _simpson(f: Callable[[float], float], a: float, fa: float, b: float, fb: float):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def integrate(
    f: Callable[[float], float], a: float, b: float, tol: float, max_depth: int = 60
) -> float:
    """Adaptive Simpson quadrature of ``f`` on [a, b] to absolute tolerance ``tol``.

    Raises :class:`QuadratureConvergenceError` (carrying the best estimate)
    if the recursion depth is exhausted before the local error bound is met.
    """
    a = float(a)
    b = float(b)
    if not (a < b):
        raise ValueError(f"integrate: need a < b, got [{a!r}, {b!r}]")
    if not (tol > 0.0):
        raise ValueError(f"integrate: tol must be positive, got {tol!r}")

    fa = f(a)
    fb = f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)
    exhausted = False

    def recurse(a, fa, m, fm, b, fb, whole, tol, depth):
        nonlocal exhausted
        lm, flm, left = _simpson(f, a, fa, m, fm)
        rm, frm, right = _simpson(f, m, fm, b, fb)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        if depth <= 0:
            exhausted = True
            return left + right + delta / 15.0
        return recurse(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) + recurse(
            m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1
        )

    result = recurse(a, fa, m, fm, b, fb, whole, tol, max_depth)
    if exhausted:
        raise QuadratureConvergenceError(
            f"integrate: depth exhausted before reaching tol={tol!r} on [{a!r}, {b!r}]",
            estimate=result,
        )
    return result


def cholesky_psd(matrix: np.ndarray) -> np.ndarray:
    """Lower-triangular G with G @ G.conj().T == matrix, for Hermitian PSD input.

    Semi-definite inputs are handled by retrying with diagonal jitter up to
    1e-12 * order; anything needing more raises
    :class:`NotPositiveSemidefiniteError`.
    """
    r = np.asarray(matrix)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError(f"cholesky_psd: expected a square matrix, got shape {r.shape}")
    if np.max(np.abs(r - r.conj().T)) > 1e-12:
        raise ValueError("cholesky_psd: matrix is not Hermitian within 1e-12")
    order = r.shape[0]
    eye = np.eye(order, dtype=r.dtype)
    for jitter in (0.0, 1e-14 * order, 1e-12 * order):
        try:
            return np.linalg.cholesky(r + jitter * eye if jitter else r)
        except np.linalg.LinAlgError:
            continue
    raise NotPositiveSemidefiniteError(
        f"cholesky_psd: negative pivot beyond jitter tolerance {1e-12 * order:g}"
    )


def _mix64(z: int) -> int:
    """SplitMix64 finalizer; used to hash (seed, index...) into child seeds."""
    z = (z + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


class Rng:
    """Deterministic random stream seeded by a 64-bit integer.

    Complex-Gaussian draws use the Box-Muller transform on top of uniform
    variates, so every sample consumes exactly two uniforms and the stream
    length per seed is deterministic (no rejection steps).
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def derive(self, *indices: int) -> "Rng":
        """Independent child stream keyed by (seed, *indices)."""
        h = self.seed
        for idx in indices:
            h = _mix64(h ^ _mix64(int(idx) & 0xFFFFFFFFFFFFFFFF))
        return Rng(h)

    def uniform(self, n: int) -> np.ndarray:
        return self._gen.random(n)

    def cn(self, shape) -> np.ndarray:
        """Circularly-symmetric complex Gaussian CN(0, 1) samples.

        Real and imaginary parts each have variance 1/2. Each sample
        consumes one adjacent uniform pair, so the first k samples of a
        draw do not depend on how many more are requested.
        """
        n = int(np.prod(shape))
        u = self._gen.random(2 * n)
        # 1 - u lies in (0, 1], so the log is finite for every draw.
        radius = np.sqrt(-np.log1p(-u[0::2]))
        phase = 2.0 * np.pi * u[1::2]
        out = radius * np.exp(1j * phase)
        return out.reshape(shape)


def gaussian_pair(rng: Rng) -> complex:
    """One CN(0, 1) sample: zero mean, unit variance, variance 1/2 per part."""
    return complex(rng.cn(1)[0])
