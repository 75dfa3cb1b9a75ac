"""One-dimensional calculus for rotation-invariant data.

Everything invariant under the unitary group reduces to sequences indexed
by total degree: Toeplitz operators with radial symbols act diagonally
with eigenvalues given by 1-D moment integrals, the smoothing family
``phi_alpha`` has explicit eigenvalue levels, and the Berezin transform
of a radial operator is an explicit power series in ``|z|^2``.

These closed forms serve as the independent oracle for the dense matrix
engine: every radial quantity the engine produces is cross-checked here,
and this module's own formulas are validated once against brute-force
full-dimensional quadrature (see the provenance tests).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.special import binom as _sbinom
from scipy.special import gammaln, hyp2f1

from .space import c_alpha, gauss_legendre_01, gauss_jacobi_01

__all__ = [
    "LevelSequence",
    "moment_levels",
    "moment_matrix",
    "phi_alpha_levels",
    "phi_alpha_level_tail",
    "phi_alpha_trace_norm",
    "level_multiplicities",
    "weighted_trace",
    "berezin_radial",
    "balpha_radial_symbol",
    "balpha_profile_power",
]


@dataclass(frozen=True)
class LevelSequence:
    """Eigenvalue-per-degree sequence of a rotation-invariant operator."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(-1)
        object.__setattr__(self, "values", v)

    @property
    def D(self) -> int:
        return self.values.size - 1


def level_multiplicities(n: int, D: int) -> np.ndarray:
    """Dimension of each homogeneous degree: binom(n+k-1, k)."""
    k = np.arange(D + 1)
    return np.round(np.exp(gammaln(n + k) - gammaln(k + 1) - gammaln(n))).astype(np.int64)


def moment_levels(profile: Callable, n: int, D: int, num_nodes: int = 256,
                  breaks: Iterable[float] = ()) -> LevelSequence:
    """Toeplitz eigenvalues of a radial symbol: gamma_k = (n+k) int a(sqrt(t)) t^(n+k-1) dt.

    ``profile`` maps radius r in [0, 1) to the symbol value.  Interior
    jumps should be passed as squared-radius breakpoints so the composite
    rule keeps spectral accuracy.
    """
    tt, wt = gauss_legendre_01(num_nodes, breaks=breaks)
    vals = np.asarray(profile(np.sqrt(tt)), dtype=complex)
    k = np.arange(D + 1)[:, None]
    kernel_ = (n + k) * tt[None, :] ** (n + k - 1)
    return LevelSequence(n, kernel_ @ (wt * vals))


def moment_matrix(n: int, D: int, J: int | None = None) -> np.ndarray:
    """Map from polynomial profile coefficients to moment levels.

    For a(sqrt(t)) = sum_j c_j t^j the levels are gamma_k = sum_j M[k, j] c_j
    with M[k, j] = (n+k) / (n+k+j); Hilbert-matrix-like conditioning.
    """
    J = D + 1 if J is None else J
    k = np.arange(D + 1)[:, None]
    j = np.arange(J)[None, :]
    return (n + k) / (n + k + j)


def phi_alpha_levels(alpha: float, n: int, D: int) -> LevelSequence:
    """Eigenvalues C_alpha (-1)^k binom(alpha, k) k! n! / (n+k)! of the smoothing operator.

    For integer alpha the sequence terminates at k = alpha; otherwise it
    decays like k^(-(alpha + n + 1)) and the truncation at D leaves the
    tail reported by :func:`phi_alpha_level_tail`.
    """
    if alpha <= -1:
        raise ValueError("weight parameter must exceed -1")
    k = np.arange(D + 1)
    lam = (c_alpha(n, alpha) * (-1.0) ** k * _sbinom(alpha, k)
           * np.exp(gammaln(k + 1) + gammaln(n + 1) - gammaln(n + k + 1)))
    if float(alpha).is_integer():
        lam[k > alpha] = 0.0
    return LevelSequence(n, lam)


def phi_alpha_level_tail(alpha: float, n: int, D: int, terms: int = 200_000) -> float:
    """Exact value of sum_{k > D} d_k |lambda_k| dropped by the truncation.

    Uses d_k |lambda_k| = C_alpha |binom(alpha, k)| n/(n+k) and the
    telescoping sum_{k >= K} Gamma(k-alpha)/Gamma(k+m) =
    Gamma(K-alpha) / ((m-1+alpha) Gamma(K+m)) closed form (n = 1, 2);
    larger n falls back to direct summation with an integral closure.
    """
    if float(alpha).is_integer() and alpha <= D:
        return 0.0
    pref = c_alpha(n, alpha) * n * np.exp(-gammaln(-alpha))  # gammaln = log|Gamma|
    K = D + 1

    def telescope(m: int) -> float:
        # sum_{k >= K} Gamma(k - alpha) / Gamma(k + m)
        return float(np.exp(gammaln(K - alpha) - gammaln(K + m - 1)) / (m - 1 + alpha))

    if n == 1:
        return pref * telescope(2)
    if n == 2:
        return pref * (telescope(2) - telescope(3))
    k = np.arange(K, K + terms, dtype=float)
    vals = pref * np.exp(gammaln(k - alpha) - gammaln(k + 1)) / (n + k)
    return float(np.sum(vals) + vals[-1] * k[-1] / (alpha + 1) * 1.05)


def phi_alpha_trace_norm(alpha: float, n: int, num_nodes: int = 256) -> float:
    """Trace norm n C_alpha int_0^1 (1+t)^alpha (1-t)^(n-1) dt (integer alpha)."""
    if not float(alpha).is_integer():
        raise ValueError("closed trace-norm formula applies to integer weights")
    tt, wt = gauss_legendre_01(num_nodes)
    return float(n * c_alpha(n, alpha) * np.sum(wt * (1 + tt) ** alpha * (1 - tt) ** (n - 1)))


def weighted_trace(levels: LevelSequence) -> complex:
    """Trace of the radial operator: sum_k d_k lambda_k."""
    d = level_multiplicities(levels.n, levels.D)
    return complex(np.sum(d * levels.values))


def berezin_radial(levels: LevelSequence, r) -> np.ndarray:
    """Berezin transform of a radial operator as a function of the radius.

    (1-r^2)^(n+1) sum_k lambda_k binom(n+k, n) r^(2k); the truncated-space
    counterpart of the matrix-engine transform.
    """
    n = levels.n
    t = np.atleast_1d(np.asarray(r, dtype=float)) ** 2
    k = np.arange(levels.D + 1)
    rho = np.exp(gammaln(n + k + 1) - gammaln(n + 1) - gammaln(k + 1))
    series = (t[:, None] ** k[None, :]) @ (rho * levels.values)
    out = (1 - t) ** (n + 1) * series
    return out if np.ndim(r) else out[0]


def balpha_radial_symbol(profile: Callable, alpha: float, r: float, n: int = 1,
                         num_radial: int = 160, num_angular: int = 160,
                         num_s: int = 32, breaks: Iterable[float] = ()) -> float:
    """Weighted-kernel transform of a radial symbol at radius r, by full quadrature.

    C_alpha (1-r^2)^(n+1+alpha) int a(|w|) (1-|w|^2)^alpha
    |1 - <z, w>|^(-2(n+1+alpha)) dv(w) at z = (r, 0, ..., 0).  The weight
    (1-|w|^2)^alpha is folded into the radial rule so non-integer weights
    keep spectral accuracy.  Intended for moderate radii; the kernel
    concentration makes fixed grids inaccurate for r near 1.
    """
    M = n + 1 + alpha
    if float(alpha).is_integer() and not breaks:
        tt, wt = gauss_legendre_01(num_radial)
        wt = wt * (1 - tt) ** alpha
    elif breaks:
        tt, wt = gauss_legendre_01(num_radial, breaks=breaks)
        wt = wt * (1 - tt) ** alpha
    else:
        tt, wt = gauss_jacobi_01(num_radial, alpha)
    theta = 2 * np.pi * np.arange(num_angular) / num_angular
    a_vals = np.asarray(profile(np.sqrt(tt)), dtype=float)
    if n == 1:
        w1 = np.sqrt(tt)[:, None] * np.exp(1j * theta)[None, :]
        ker = np.abs(1 - r * w1.conj()) ** (-2 * M)
        inner = np.mean(ker, axis=1)
        total = np.sum(wt * a_vals * inner)
    elif n == 2:
        ss, ws = gauss_legendre_01(num_s)
        # |w1|^2 = t (1-s); the kernel only sees the first coordinate
        w1 = np.sqrt(np.outer(tt, 1 - ss))[:, :, None] * np.exp(1j * theta)[None, None, :]
        ker = np.mean(np.abs(1 - r * w1.conj()) ** (-2 * M), axis=2)
        radial_w = 2 * tt * wt  # dv radial density for n=2 carries n t^(n-1)
        total = np.sum(radial_w * a_vals * (ker @ ws))
    else:
        raise NotImplementedError("full-grid transform implemented for n = 1, 2")
    return float(c_alpha(n, alpha) * (1 - r * r) ** M * total)


def balpha_profile_power(alpha: float, t) -> np.ndarray:
    """Exact transform of the symbol a(w) = |w|^2 on the disc (n = 1).

    1 - (1-t) (alpha+1)/(alpha+2) 2F1(1, 1; alpha+3; t); stable on the
    whole radius range, used as the infinite-dimensional reference when
    measuring how fast smoothed Toeplitz operators approach the original.
    """
    t = np.asarray(t, dtype=float)
    return 1.0 - (1.0 - t) * ((alpha + 1.0) / (alpha + 2.0)) * hyp2f1(1.0, 1.0, alpha + 3.0, t)
