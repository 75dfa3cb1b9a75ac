"""Symmetric-space layer of the unit ball in C^n.

Points live strictly inside the ball, group elements are (n+1)x(n+1)
complex matrices preserving the signature-(n,1) hermitian form with
determinant one, and the group acts by fractional-linear (Moebius)
transformations.  The module also provides the geodesic involutions
``tau_z`` as point maps, the weighted multiplier cocycle attached to the
fractional-linear action, and the density of the invariant measure.

Inner products follow the convention ``<z, w> = sum_i z_i * conj(w_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "SingularMapError",
    "GroupElement",
    "CocycleValue",
    "ball_point",
    "signature_matrix",
    "mobius_act",
    "involution_map",
    "boost",
    "unitary_embed",
    "cocycle",
    "invariant_density",
    "random_group_element",
]

_GROUP_TOL = 1e-12
_SINGULAR_TOL = 1e-14


class SingularMapError(ValueError):
    """Fractional-linear denominator fell below tolerance (invalid input)."""


def ball_point(coords) -> np.ndarray:
    """Validate and return a point of the open unit ball as a complex vector."""
    z = np.asarray(coords, dtype=complex).reshape(-1)
    if z.size == 0:
        raise ValueError("ball point needs at least one coordinate")
    if np.sum(np.abs(z) ** 2) >= 1.0:
        raise ValueError(f"point lies outside the open unit ball: |z|^2 = {np.sum(np.abs(z)**2)}")
    return z


def signature_matrix(n: int) -> np.ndarray:
    """diag(1, ..., 1, -1) defining the preserved hermitian form."""
    J = np.eye(n + 1, dtype=complex)
    J[n, n] = -1.0
    return J


@dataclass(frozen=True)
class GroupElement:
    """Matrix of the ball's isometry group, in (A, u; v*, d) block form.

    Invariants checked on construction: ``g* J g = J`` for the signature
    matrix ``J = diag(1,...,1,-1)`` and ``det g = 1``, both to 1e-12.
    """

    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise ValueError("group element must be a square matrix of size >= 2")
        object.__setattr__(self, "mat", m)
        J = signature_matrix(self.n)
        if np.max(np.abs(m.conj().T @ J @ m - J)) > 100 * _GROUP_TOL * max(1.0, np.max(np.abs(m)) ** 2):
            raise ValueError("matrix does not preserve the signature form")
        if abs(np.linalg.det(m) - 1.0) > 1e-9:
            raise ValueError("matrix must have determinant one")

    @property
    def n(self) -> int:
        return self.mat.shape[0] - 1

    def inverse(self) -> "GroupElement":
        # g^{-1} = J g* J, exact for signature-preserving g.
        J = signature_matrix(self.n)
        return GroupElement(J @ self.mat.conj().T @ J)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.mat @ other.mat)

    @classmethod
    def identity(cls, n: int) -> "GroupElement":
        return cls(np.eye(n + 1, dtype=complex))


class CocycleValue(NamedTuple):
    """Value of the weighted multiplier together with its weight parameter."""

    value: complex
    alpha: float


def mobius_act(g: GroupElement, z) -> np.ndarray:
    """Fractional-linear action ``g . z = (A z + u) / (<z, v> + d)``."""
    z = ball_point(z)
    n = g.n
    num = g.mat[:n, :n] @ z + g.mat[:n, n]
    den = g.mat[n, :n] @ z + g.mat[n, n]
    if abs(den) < _SINGULAR_TOL:
        raise SingularMapError("fractional-linear denominator vanished")
    return num / den


def involution_map(z, w) -> np.ndarray:
    """Geodesic involution ``tau_z`` applied to ``w``.

    Satisfies ``tau_z(0) = z``, ``tau_z(z) = 0`` and ``tau_z(tau_z(w)) = w``.
    For n = 1 this is ``(w - z) / (<w, z> - 1)``; in general it is the
    standard ball automorphism built from the projections onto ``z`` and
    its orthogonal complement.
    """
    z = ball_point(z)
    w = ball_point(w)
    zz = float(np.sum(np.abs(z) ** 2))
    if zz == 0.0:
        return -w
    wz = complex(np.vdot(z, w))  # <w, z>
    pw = (wz / zz) * z
    s = np.sqrt(1.0 - zz)
    return (z - pw - s * (w - pw)) / (1.0 - wz)


def boost(z) -> GroupElement:
    """Transvection moving the origin to ``z``.

    Blocks: A = I + (gamma - 1) zhat zhat*, u = gamma z, v* = gamma z*,
    d = gamma with gamma = (1 - |z|^2)^{-1/2}.  Has determinant one and
    preserves the signature form exactly.
    """
    z = ball_point(z)
    n = z.size
    zz = float(np.sum(np.abs(z) ** 2))
    gamma = 1.0 / np.sqrt(1.0 - zz)
    m = np.zeros((n + 1, n + 1), dtype=complex)
    if zz == 0.0:
        return GroupElement.identity(n)
    zhat = z / np.sqrt(zz)
    m[:n, :n] = np.eye(n) + (gamma - 1.0) * np.outer(zhat, zhat.conj())
    m[:n, n] = gamma * z
    m[n, :n] = gamma * z.conj()
    m[n, n] = gamma
    return GroupElement(m)


def unitary_embed(A) -> GroupElement:
    """Embed an n x n unitary as the block-diagonal element diag(A, 1/det A)."""
    A = np.asarray(A, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    n = A.shape[0]
    if np.max(np.abs(A.conj().T @ A - np.eye(n))) > _GROUP_TOL:
        raise ValueError("matrix is not unitary to 1e-12")
    m = np.zeros((n + 1, n + 1), dtype=complex)
    m[:n, :n] = A
    m[n, n] = 1.0 / np.linalg.det(A)
    return GroupElement(m)


def cocycle(g: GroupElement, z, alpha: float) -> CocycleValue:
    """Multiplier ``(<z, v> + d)^{-(alpha + n + 1)}`` of the action.

    Principal branch for non-integer exponents; exact identities among
    cocycle values should only be expected when ``alpha + n + 1`` is an
    integer (otherwise they hold up to phase).
    """
    if alpha <= -1:
        raise ValueError("weight parameter must exceed -1")
    z = ball_point(z)
    n = g.n
    den = g.mat[n, :n] @ z + g.mat[n, n]
    if abs(den) < _SINGULAR_TOL:
        raise SingularMapError("cocycle denominator vanished")
    expo = alpha + n + 1
    if float(expo).is_integer():
        value = den ** (-int(round(expo)))
    else:
        value = np.exp(-expo * np.log(den))
    return CocycleValue(complex(value), float(alpha))


def invariant_density(z) -> float:
    """Density ``(1 - |z|^2)^{-(n+1)}`` of the invariant measure w.r.t. dv."""
    z = ball_point(z)
    n = z.size
    return float((1.0 - np.sum(np.abs(z) ** 2)) ** (-(n + 1)))


def random_group_element(rng: np.random.Generator, n: int, radius: float = 0.9) -> GroupElement:
    """Random boost(z0) . unitary_embed(A) with |z0| <= radius, A Haar-ish."""
    direction = rng.normal(size=n) + 1j * rng.normal(size=n)
    direction /= np.linalg.norm(direction)
    z0 = rng.uniform(0.0, radius) * direction
    ginibre = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(ginibre)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    return boost(z0) @ unitary_embed(q)
