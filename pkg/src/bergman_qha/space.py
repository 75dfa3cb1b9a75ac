"""Degree-truncated model of the Bergman space over the unit ball.

The model space is the span of the monomial orthonormal basis
``e_m(z) = sqrt((n + |m|)! / (n! m!)) z^m`` over multi-indices with total
degree ``|m| <= D``, enumerated in graded lexicographic order.  This
module provides the enumeration, tensor-product quadrature grids for the
normalized volume measure of the ball, kernel evaluation, and the
sample-to-coefficient projection.

Grid exactness: a grid built by :func:`default_grid` integrates every
monomial ``z^a conj(z)^b`` with ``|a|, |b| <= 2D + 2`` to machine
precision (the degree target is 2D + 4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaln, roots_jacobi

__all__ = [
    "BasisSpec",
    "CoeffVector",
    "QuadratureGrid",
    "KernelParams",
    "gauss_legendre_01",
    "gauss_jacobi_01",
    "disc_grid",
    "ball2_grid",
    "default_grid",
    "radial_measure_nodes",
    "basis_matrix",
    "basis_eval",
    "kernel",
    "normalized_kernel",
    "kernel_tail",
    "project",
    "integrate",
    "integrate_invariant",
    "c_alpha",
]


def _multi_indices(n: int, D: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices with |m| <= D in graded lexicographic order."""
    def degree_block(d: int, nn: int):
        if nn == 1:
            yield (d,)
            return
        for first in range(d + 1):
            for rest in degree_block(d - first, nn - 1):
                yield (first,) + rest
    out: list[tuple[int, ...]] = []
    for d in range(D + 1):
        out.extend(sorted(degree_block(d, n)))
    return tuple(out)


@dataclass(frozen=True)
class BasisSpec:
    """Monomial basis of the truncation span{e_m : |m| <= D} in C^n."""

    n: int
    D: int
    indices: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1 or self.D < 0:
            raise ValueError("need n >= 1 and D >= 0")
        object.__setattr__(self, "indices", _multi_indices(self.n, self.D))

    @property
    def dim(self) -> int:
        return len(self.indices)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([sum(m) for m in self.indices], dtype=int)

    def index_of(self, m: Sequence[int]) -> int:
        return self.indices.index(tuple(m))

    def multiplicity(self, k: int) -> int:
        """Number of multi-indices of total degree k (dimension of that level)."""
        return math.comb(self.n + k - 1, k)

    def degree_lists(self) -> list[np.ndarray]:
        """Positions of each degree level, in enumeration order."""
        deg = self.degrees
        return [np.flatnonzero(deg == k) for k in range(self.D + 1)]

    def norm_constants(self) -> np.ndarray:
        """c_m = sqrt((n + |m|)! / (n! m!)); e_m = c_m z^m."""
        vals = np.empty(self.dim)
        for i, m in enumerate(self.indices):
            lg = gammaln(self.n + sum(m) + 1) - gammaln(self.n + 1)
            lg -= sum(gammaln(mi + 1) for mi in m)
            vals[i] = np.exp(0.5 * lg)
        return vals


@dataclass(frozen=True)
class CoeffVector:
    """Element of the truncated space as coefficients against the e_m basis."""

    basis: BasisSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.size != self.basis.dim:
            raise ValueError("coefficient length does not match basis dimension")
        object.__setattr__(self, "coeffs", c)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


@dataclass(frozen=True)
class KernelParams:
    """Weight parameter of the reproducing kernel family."""

    alpha: float = 0.0

    def __post_init__(self):
        if self.alpha <= -1:
            raise ValueError("weight parameter must exceed -1")


def c_alpha(n: int, alpha: float) -> float:
    """Normalizing constant Gamma(n+alpha+1) / (n! Gamma(alpha+1))."""
    if alpha <= -1:
        raise ValueError("weight parameter must exceed -1")
    return float(np.exp(gammaln(n + alpha + 1) - gammaln(n + 1) - gammaln(alpha + 1)))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def gauss_legendre_01(N: int, lo: float = 0.0, hi: float = 1.0,
                      breaks: Iterable[float] = ()) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [lo, hi], composite across breaks.

    Breakpoints inside the interval split it into panels with N nodes each,
    which restores spectral accuracy for integrands with interior jumps.
    """
    edges = [lo] + sorted(b for b in breaks if lo < b < hi) + [hi]
    x, w = leggauss(N)
    ts, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        ts.append(0.5 * (b - a) * (x + 1.0) + a)
        ws.append(0.5 * (b - a) * w)
    return np.concatenate(ts), np.concatenate(ws)


def gauss_jacobi_01(N: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for integrals of f(t) (1-t)^alpha dt over [0, 1].

    The (1-t)^alpha factor is folded into the weights, so endpoint branch
    singularities of non-integer weights cost no accuracy.
    """
    x, w = roots_jacobi(N, alpha, 0.0)
    return 0.5 * (x + 1.0), w / 2.0 ** (alpha + 1)


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and weights for the normalized volume measure of the ball.

    Nodes are grouped into radial shells (constant ``|z|^2``): the shell
    arrays make sphere averages and invariant-measure integrals cheap.
    """

    n: int
    points: np.ndarray        # (N, n) complex
    weights: np.ndarray       # (N,) positive, sums to 1
    t: np.ndarray             # (N,) squared radius per node
    shell_id: np.ndarray      # (N,) index into shell_t
    shell_t: np.ndarray
    shell_weight: np.ndarray  # per-shell total weight
    exact_degree: int

    @property
    def size(self) -> int:
        return self.weights.size

    def sphere_average(self, samples: np.ndarray) -> np.ndarray:
        """Average node samples over each radial shell (the U(n) orbit)."""
        samples = np.asarray(samples)
        acc = np.zeros(self.shell_t.size, dtype=samples.dtype)
        np.add.at(acc, self.shell_id, self.weights * samples)
        return acc / self.shell_weight


def disc_grid(Nt: int, Ntheta: int, breaks: Iterable[float] = ()) -> QuadratureGrid:
    """Polar tensor grid on the unit disc: Gauss-Legendre in t = r^2, uniform in angle."""
    tt, wt = gauss_legendre_01(Nt, breaks=breaks)
    theta = 2.0 * np.pi * np.arange(Ntheta) / Ntheta
    z = (np.sqrt(tt)[:, None] * np.exp(1j * theta)[None, :]).ravel()
    w = np.repeat(wt / Ntheta, Ntheta)
    shell_id = np.repeat(np.arange(tt.size), Ntheta)
    return QuadratureGrid(1, z[:, None], w, np.repeat(tt, Ntheta),
                          shell_id, tt, wt, 2 * Nt - 1)


def ball2_grid(Nt: int, Ns: int, Ntheta: int, breaks: Iterable[float] = ()) -> QuadratureGrid:
    """Tensor grid on the ball in C^2.

    Coordinates t = |z|^2 (Gauss-Legendre with the radial density folded
    in), s = |z_2|^2/|z|^2 (Gauss-Legendre), and two uniform angles.
    """
    tt, wt = gauss_legendre_01(Nt, breaks=breaks)
    ss, ws = gauss_legendre_01(Ns)
    theta = 2.0 * np.pi * np.arange(Ntheta) / Ntheta
    phase = np.exp(1j * theta)
    # dv = 2 t dt ds dtheta1/(2pi) dtheta2/(2pi)
    T, S, P1, P2 = np.meshgrid(tt, ss, phase, phase, indexing="ij")
    z1 = np.sqrt(T * (1.0 - S)) * P1
    z2 = np.sqrt(T * S) * P2
    w = (2.0 * np.outer(tt * wt, ws)[:, :, None, None]
         * np.full((1, 1, Ntheta, Ntheta), 1.0 / Ntheta ** 2))
    pts = np.stack([z1.ravel(), z2.ravel()], axis=1)
    shell_id = np.broadcast_to(np.arange(tt.size)[:, None, None, None], T.shape)
    return QuadratureGrid(2, pts, w.ravel(), T.real.ravel().copy(),
                          shell_id.ravel().copy(), tt, 2.0 * tt * wt, 2 * Nt - 1)


def default_grid(n: int, D: int, Nr: int | None = None, Ntheta: int | None = None,
                 Ns: int | None = None, breaks: Iterable[float] = ()) -> QuadratureGrid:
    """Grid sized for monomial exactness to total degree 2D + 4."""
    target = 2 * D + 4
    Nr = Nr if Nr is not None else target // 2 + 3
    Ntheta = Ntheta if Ntheta is not None else target + 2
    if n == 1:
        return disc_grid(Nr, Ntheta, breaks=breaks)
    if n == 2:
        Ns = Ns if Ns is not None else target // 2 + 3
        return ball2_grid(Nr, Ns, Ntheta, breaks=breaks)
    raise NotImplementedError("full-grid quadrature is provided for n = 1, 2 only")


def radial_measure_nodes(n: int, Nt: int, t_hi: float = 1.0,
                         breaks: Iterable[float] = ()) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for radial dv-integrals: int f(sqrt(t)) n t^(n-1) dt on [0, t_hi]."""
    tt, wt = gauss_legendre_01(Nt, 0.0, t_hi, breaks=breaks)
    return tt, wt * n * tt ** (n - 1)


# ---------------------------------------------------------------------------
# basis and kernels
# ---------------------------------------------------------------------------

def _as_points(n: int, points) -> np.ndarray:
    pts = np.asarray(points, dtype=complex)
    if pts.ndim == 1 and n == 1:
        pts = pts[:, None]
    if pts.ndim == 1 and pts.size == n:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != n:
        raise ValueError(f"points must have shape (N, {n})")
    return pts


def basis_matrix(spec: BasisSpec, points) -> np.ndarray:
    """Evaluate every basis function at every point; shape (N, dim)."""
    pts = _as_points(spec.n, points)
    N = pts.shape[0]
    powers = [np.ones((N, spec.D + 1), dtype=complex) for _ in range(spec.n)]
    for l in range(spec.n):
        for p in range(1, spec.D + 1):
            powers[l][:, p] = powers[l][:, p - 1] * pts[:, l]
    E = np.empty((N, spec.dim), dtype=complex)
    cs = spec.norm_constants()
    for i, m in enumerate(spec.indices):
        col = np.full(N, cs[i], dtype=complex)
        for l, ml in enumerate(m):
            if ml:
                col = col * powers[l][:, ml]
        E[:, i] = col
    return E


def basis_eval(spec: BasisSpec, m: Sequence[int], z) -> complex:
    """Single basis function e_m at a single point."""
    i = spec.index_of(m)
    return complex(basis_matrix(spec, np.asarray(z, dtype=complex))[0, i])


def kernel(params: KernelParams, z, w_points, n: int | None = None) -> np.ndarray:
    """Reproducing kernel K_z(w) = (1 - <w, z>)^(-(n+1+alpha)), vectorized over w."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    n = z.size if n is None else n
    pts = _as_points(n, w_points)
    inner = pts @ z.conj()
    return (1.0 - inner) ** (-(n + 1 + params.alpha))


@lru_cache(maxsize=32)
def _weighted_norm_constants(spec: BasisSpec, alpha: float) -> np.ndarray:
    """Norm constants of the alpha-weighted monomial basis."""
    vals = np.empty(spec.dim)
    for i, m in enumerate(spec.indices):
        lg = gammaln(spec.n + sum(m) + alpha + 1) - gammaln(spec.n + alpha + 1)
        lg -= sum(gammaln(mi + 1) for mi in m)
        vals[i] = np.exp(0.5 * lg)
    return vals


def normalized_kernel(spec: BasisSpec, z, alpha: float = 0.0) -> CoeffVector:
    """Coefficients of the normalized kernel at z against the (weighted) basis.

    c_m = (1 - |z|^2)^((n+1+alpha)/2) conj(e_m(z)); the truncated norm is
    <= 1 and approaches 1 as D grows (see :func:`kernel_tail`).
    """
    z = np.asarray(z, dtype=complex).reshape(-1)
    t = float(np.sum(np.abs(z) ** 2))
    cs = spec.norm_constants() if alpha == 0.0 else _weighted_norm_constants(spec, float(alpha))
    mono = np.empty(spec.dim, dtype=complex)
    for i, m in enumerate(spec.indices):
        val = 1.0 + 0.0j
        for l, ml in enumerate(m):
            if ml:
                val *= z[l] ** ml
        mono[i] = val
    coeffs = (1.0 - t) ** (0.5 * (spec.n + 1 + alpha)) * cs * mono.conj()
    return CoeffVector(spec, coeffs)


def kernel_tail(spec: BasisSpec, z, alpha: float = 0.0) -> float:
    """Squared norm 1 - |P_D k_z|^2 lost to the truncation."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    t = float(np.sum(np.abs(z) ** 2))
    M = spec.n + 1 + alpha
    k = np.arange(spec.D + 1)
    rho = np.exp(gammaln(M + k) - gammaln(M) - gammaln(k + 1))
    partial = float(np.sum(rho * t ** k))
    return max(0.0, 1.0 - (1.0 - t) ** M * partial)


# ---------------------------------------------------------------------------
# projection and integration
# ---------------------------------------------------------------------------

def _samples(fn_or_values, grid: QuadratureGrid) -> np.ndarray:
    if callable(fn_or_values):
        vals = np.asarray(fn_or_values(grid.points), dtype=complex)
    else:
        vals = np.asarray(fn_or_values, dtype=complex)
    if vals.shape != (grid.size,):
        raise ValueError("sample vector does not match the grid")
    return vals


def project(fn_or_values, grid: QuadratureGrid, spec: BasisSpec,
            chunk: int = 2_000_000) -> CoeffVector:
    """Bergman projection onto the truncation: c_m = sum_j w_j f(z_j) conj(e_m(z_j)).

    Node chunks bound the basis-evaluation memory on large grids.
    """
    if grid.n != spec.n:
        raise ValueError("grid and basis dimension mismatch")
    vals = _samples(fn_or_values, grid)
    out = np.zeros(spec.dim, dtype=complex)
    step = max(1, chunk // spec.dim)
    for lo in range(0, grid.size, step):
        hi = min(grid.size, lo + step)
        E = basis_matrix(spec, grid.points[lo:hi])
        out += E.conj().T @ (grid.weights[lo:hi] * vals[lo:hi])
    return CoeffVector(spec, out)


def integrate(fn_or_values, grid: QuadratureGrid) -> complex:
    """Integral against the normalized volume measure."""
    vals = _samples(fn_or_values, grid)
    return complex(np.sum(grid.weights * vals))


def integrate_invariant(fn_or_values, grid: QuadratureGrid) -> complex:
    """Integral against the invariant measure (1-|z|^2)^(-(n+1)) dv.

    The integrand must decay fast enough at the boundary for the weighted
    sum to be meaningful; callers supply the decay (e.g. through a factor
    of the approximate-identity family).
    """
    vals = _samples(fn_or_values, grid)
    dens = (1.0 - grid.t) ** (-(grid.n + 1))
    return complex(np.sum(grid.weights * dens * vals))
