"""Matrices of the point translations pi(z) in the truncated monomial basis.

pi(z) acts on a function f by ``(1-|z|^2)^((n+1)/2) K_z(w) f(tau_z(w))``
with ``tau_z`` the geodesic involution.  Its matrix entries against the
monomial basis have a closed form in Jacobi polynomials, which is the
only numerically stable route at high degree: the naive Taylor expansion
of the translated basis functions cancels catastrophically once
``|z|^2 (D+1)`` is large, while the Jacobi three-term recurrence holds
entries to near machine precision on the whole radius range.

For a real radial base point z = (r, 0, ..., 0) the matrix is block
diagonal over the transverse multi-degree, and each block is

    <pi(r) e_j, e_m> = (1-t)^((n+1)/2) (c_j / c_m) (-1)^(j1) (-s)^(|j'|)
                        * A_(m1 j1)^(B)(r),        B = |j'| + n,

where t = r^2, s = sqrt(1-t), c are basis norm constants, and A is the
coefficient family

    A_(m j)^(B)(r) = [w^m] (w - r)^j (1 - r w)^(-(j+B+1))
                   = binom(m+B, B+j) / binom(m, j) * r^(m-j)
                     * P_j^(m-j, B)(1 - 2t)            for m >= j,

extended to m < j by A_(m j) = (-1)^(j-m) binom(m+B,B)/binom(j+B,B) A_(j m).
General base points reduce to radial ones by conjugating with the
(degree-preserving) rotation that maps (|z|, 0, ..., 0) to z.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import eval_jacobi, gammaln

from .space import BasisSpec, basis_matrix, kernel, KernelParams

__all__ = [
    "a_block",
    "pi_matrix_radial",
    "rotation_matrix",
    "pi_matrix",
    "column_tails",
    "pi_matrix_sampled",
]


def _binom(a, b):
    return np.exp(gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1))


def a_block(M: int, J: int, B: int, r: float) -> np.ndarray:
    """Coefficient matrix A^(B) for rows m <= M, columns j <= J at radius r."""
    t = r * r
    m = np.arange(M + 1)[:, None] + np.zeros((1, J + 1), dtype=int)
    j = np.zeros((M + 1, 1), dtype=int) + np.arange(J + 1)[None, :]
    lo = np.minimum(m, j)
    hi = np.maximum(m, j)
    pref = _binom(hi + B, B + lo) / _binom(hi, lo)
    vals = pref * r ** (hi - lo) * eval_jacobi(lo, hi - lo, B, 1.0 - 2.0 * t)
    swap = (-1.0) ** (j - m) * _binom(m + B, B) / _binom(j + B, B)
    return np.where(m < j, swap, 1.0) * vals


@lru_cache(maxsize=64)
def _transverse_layout(rows: BasisSpec, cols: BasisSpec):
    """Group two enumerations by shared transverse multi-index (coords 2..n)."""
    groups: dict[tuple[int, ...], tuple[list[int], list[int]]] = {}
    for i, m in enumerate(rows.indices):
        groups.setdefault(m[1:], ([], []))[0].append(i)
    for i, m in enumerate(cols.indices):
        if m[1:] in groups:
            groups[m[1:]][1].append(i)
    return groups


def pi_matrix_radial(rows: BasisSpec, cols: BasisSpec, t: float,
                     density_cancelled: bool = False) -> np.ndarray:
    """Entries <pi(z_t) e_j, e_m> at the radial point z_t = (sqrt(t), 0, ..., 0).

    ``rows`` and ``cols`` may have different truncation degrees (rows beyond
    the model degree give access to the untruncated operator's entries).
    With ``density_cancelled`` the overall factor (1-t)^((n+1)/2) is left
    out, which is the natural integrand normalization for invariant-measure
    integrals.  Cached per (bases, t); treat the result as read-only.
    """
    U = _pi_matrix_radial_cached(rows, cols, float(t))
    if density_cancelled:
        n = rows.n
        scaled = U * (1.0 - float(t)) ** (-0.5 * (n + 1))
        return scaled
    return U


@lru_cache(maxsize=512)
def _pi_matrix_radial_cached(rows: BasisSpec, cols: BasisSpec, t: float) -> np.ndarray:
    if rows.n != cols.n:
        raise ValueError("row/column bases must share the ambient dimension")
    n = rows.n
    r = float(np.sqrt(t))
    s = float(np.sqrt(max(0.0, 1.0 - t)))
    U = np.zeros((rows.dim, cols.dim))
    crow = rows.norm_constants()
    ccol = cols.norm_constants()
    for jt, (ridx, cidx) in _transverse_layout(rows, cols).items():
        if not cidx:
            continue
        kt = sum(jt)
        B = kt + n
        m1 = np.array([rows.indices[i][0] for i in ridx])
        j1 = np.array([cols.indices[i][0] for i in cidx])
        A = a_block(int(m1.max()), int(j1.max()), B, r)[np.ix_(m1, j1)]
        signs = (-1.0) ** j1 * (-s) ** kt
        block = (ccol[cidx][None, :] / crow[ridx][:, None]) * signs[None, :] * A
        U[np.ix_(ridx, cidx)] = block
    U *= (1.0 - t) ** (0.5 * (n + 1))
    U.flags.writeable = False
    return U


@lru_cache(maxsize=64)
def _shift_tables(spec: BasisSpec) -> np.ndarray:
    """tab[l, i] = index of m_i + delta_l, or -1 when the degree overflows."""
    lookup = {m: i for i, m in enumerate(spec.indices)}
    tab = np.full((spec.n, spec.dim), -1, dtype=np.int64)
    for i, m in enumerate(spec.indices):
        for l in range(spec.n):
            shifted = tuple(mi + (1 if k == l else 0) for k, mi in enumerate(m))
            tab[l, i] = lookup.get(shifted, -1)
    return tab


def _multiply_linear(spec: BasisSpec, poly: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Multiply a truncated polynomial by the linear form sum_l coeffs[l] w_l."""
    tab = _shift_tables(spec)
    out = np.zeros_like(poly)
    for l in range(spec.n):
        if coeffs[l] == 0:
            continue
        tgt = tab[l]
        ok = tgt >= 0
        np.add.at(out, tgt[ok], coeffs[l] * poly[ok])
    return out


def rotation_matrix(spec: BasisSpec, V: np.ndarray) -> np.ndarray:
    """Matrix of f -> f(V^(-1) w) on the truncation, V an n x n unitary.

    Block diagonal over total degree (rotations preserve homogeneity), so
    it conjugates radial matrices exactly within the truncated model.
    """
    V = np.asarray(V, dtype=complex)
    n = spec.n
    if V.shape != (n, n):
        raise ValueError("rotation must be an n x n matrix")
    if n == 1:
        phase = V[0, 0]
        return np.diag(phase ** (-spec.degrees.astype(float)))
    cs = spec.norm_constants()
    rows = V.conj()  # (V^{-1} w)_l = sum_k conj(V[k, l]) w_k
    C = np.zeros((spec.dim, spec.dim), dtype=complex)
    for jcol, m in enumerate(spec.indices):
        poly = np.zeros(spec.dim, dtype=complex)
        poly[0] = cs[jcol]
        for l, ml in enumerate(m):
            for _ in range(ml):
                poly = _multiply_linear(spec, poly, rows[:, l])
        C[:, jcol] = poly / cs
    return C


def _unitary_to_axis(zeta: np.ndarray) -> np.ndarray:
    """Deterministic unitary with first column zeta."""
    n = zeta.size
    M = np.concatenate([zeta[:, None], np.eye(n, dtype=complex)], axis=1)
    Q = np.linalg.qr(M)[0][:, :n]
    Q[:, 0] *= np.vdot(Q[:, 0], zeta)  # align the QR phase so column 0 is exactly zeta
    Q[:, 0] = zeta
    return Q


def pi_matrix(spec: BasisSpec, z) -> np.ndarray:
    """Matrix of pi(z) on the truncation for an arbitrary base point."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.size != spec.n:
        raise ValueError("point dimension does not match the basis")
    t = float(np.sum(np.abs(z) ** 2))
    if t >= 1.0:
        raise ValueError("base point must lie inside the ball")
    if t == 0.0:
        return np.eye(spec.dim, dtype=complex)
    Urad = pi_matrix_radial(spec, spec, t)
    on_axis = (z[0].imag == 0.0 and z[0].real > 0.0
               and (spec.n == 1 or not np.any(z[1:])))
    if on_axis:
        return Urad.astype(complex)
    zeta = z / np.sqrt(t)
    if spec.n == 1:
        ph = zeta[0] ** (-spec.degrees.astype(float))
        return (ph[:, None] * Urad) * ph.conj()[None, :]
    C = rotation_matrix(spec, _unitary_to_axis(zeta))
    return C @ Urad @ C.conj().T


def column_tails(U: np.ndarray) -> np.ndarray:
    """Per-column truncation tails sqrt(1 - |column|^2) of a translation matrix."""
    mass = np.sum(np.abs(U) ** 2, axis=0)
    return np.sqrt(np.maximum(0.0, 1.0 - mass))


def pi_matrix_sampled(spec: BasisSpec, z, grid) -> np.ndarray:
    """Reference implementation: sample the translated basis and project.

    Slower and limited by the grid's angular resolution (the translated
    functions are not polynomials), but independent of the Jacobi closed
    form; used to cross-validate it.
    """
    from .geometry import involution_map

    z = np.asarray(z, dtype=complex).reshape(-1)
    t = float(np.sum(np.abs(z) ** 2))
    if t == 0.0:
        return np.eye(spec.dim, dtype=complex)
    pts = grid.points
    tau = np.empty_like(pts)
    for i in range(pts.shape[0]):
        tau[i] = involution_map(z, pts[i])
    kz = kernel(KernelParams(0.0), z, pts, n=spec.n)
    pref = (1.0 - t) ** (0.5 * (spec.n + 1))
    E_tau = basis_matrix(spec, tau)
    E = basis_matrix(spec, pts)
    return E.conj().T @ (grid.weights[:, None] * (pref * kz[:, None] * E_tau))
