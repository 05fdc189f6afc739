"""Heisenberg group core: points, group law, Koranyi gauge, dilations.

The Heisenberg group H^N is R^{2N+1} with coordinates xi = (x, y, phi),
x, y in R^N, phi in R, under the (non-commutative) group law

    xi o xi' = (x + x', y + y', phi + phi' + 2 sum_i (x_i' y_i - x_i y_i')).

The Koranyi gauge |xi| = ((|x|^2 + |y|^2)^2 + phi^2)^{1/4} is homogeneous of
degree 1 under the anisotropic dilation (x, y, phi) -> (r x, r y, r^2 phi),
which scales volume by r^Q with homogeneous dimension Q = 2N + 2.  The induced
distance d(xi, xi') = |xi'^{-1} o xi| is left-invariant.

Two objects recur in every radial computation downstream:

* the angular weight psi = (|x|^2 + |y|^2) / |xi|^2 in [0, 1], which is the
  squared length of the horizontal gradient of the gauge; and
* the coefficient matrix A(z), z = (x, y), whose quadratic form turns Euclidean
  gradients into horizontal ones (A = M M^T for the field-coefficient matrix M).

Coordinate-level helpers (`knorm_of`, `psi_of`, `knorm_grad_of`) operate on
raw arrays with the N-axis last, so the same expressions run vectorized over
sample batches and, elementwise, over dual-number scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True)
class GroupContext:
    """Fixes N; everything else (Q, dimensions) derives from it."""

    N: int

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")

    @property
    def Q(self) -> int:
        """Homogeneous dimension 2N + 2."""
        return 2 * self.N + 2

    @property
    def dim(self) -> int:
        """Topological dimension 2N + 1."""
        return 2 * self.N + 1


@dataclass(frozen=True)
class HPoint:
    """A point xi = (x, y, phi) of H^N. Components are finite floats."""

    x: NDArray[np.float64]
    y: NDArray[np.float64]
    phi: float

    @staticmethod
    def of(x, y, phi) -> "HPoint":
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError(f"x and y must be equal-length vectors, got {x.shape} and {y.shape}")
        pt = HPoint(x, y, float(phi))
        if not pt.finite():
            raise ValueError("HPoint components must be finite")
        return pt

    @property
    def N(self) -> int:
        return self.x.shape[0]

    def finite(self) -> bool:
        return bool(np.isfinite(self.x).all() and np.isfinite(self.y).all() and math.isfinite(self.phi))

    def coords(self) -> tuple[NDArray[np.float64], NDArray[np.float64], float]:
        return self.x, self.y, self.phi


ORIGIN1 = HPoint.of([0.0], [0.0], 0.0)


def origin(ctx: GroupContext) -> HPoint:
    return HPoint.of(np.zeros(ctx.N), np.zeros(ctx.N), 0.0)


def _check_same_n(xi: HPoint, eta: HPoint) -> None:
    if xi.N != eta.N:
        raise ValueError(f"dimension mismatch: N={xi.N} vs N={eta.N}")


def compose(xi: HPoint, eta: HPoint) -> HPoint:
    """Group law xi o eta."""
    _check_same_n(xi, eta)
    twist = 2.0 * float(np.dot(eta.x, xi.y) - np.dot(xi.x, eta.y))
    return HPoint(xi.x + eta.x, xi.y + eta.y, xi.phi + eta.phi + twist)


def inverse(xi: HPoint) -> HPoint:
    """Group inverse, which is just -xi."""
    return HPoint(-xi.x, -xi.y, -xi.phi)


# ---------------------------------------------------------------------------
# gauge, weight, and their coordinate expressions
# ---------------------------------------------------------------------------

def knorm_of(x, y, phi):
    """Koranyi gauge from raw coordinates; N-axis last.

    Works on float arrays of shape (..., N) with phi of shape (...), and on
    object arrays holding dual numbers (the reductions go through `+`/`*`).
    """
    zsq = (x * x).sum(axis=-1) + (y * y).sum(axis=-1)
    return (zsq * zsq + phi * phi) ** 0.25


def psi_of(x, y, phi):
    """Angular weight psi = |z|^2 / |xi|^2 from raw coordinates."""
    zsq = (x * x).sum(axis=-1) + (y * y).sum(axis=-1)
    return zsq / (zsq * zsq + phi * phi) ** 0.5


def knorm_grad_of(x, y, phi):
    """Euclidean gradient of the gauge, as (grad_x, grad_y, grad_phi).

    grad rho = (|z|^2 x, |z|^2 y, phi/2) / rho^3; hence
    |grad rho|^2 = (|z|^6 + phi^2/4) / rho^6.  Vectorized over leading axes.
    """
    zsq = (x * x).sum(axis=-1) + (y * y).sum(axis=-1)
    rho3 = (zsq * zsq + phi * phi) ** 0.75
    gx = x * (zsq / rho3)[..., None]
    gy = y * (zsq / rho3)[..., None]
    gphi = 0.5 * phi / rho3
    return gx, gy, gphi


def knorm(xi: HPoint) -> float:
    """Koranyi gauge |xi| = ((|x|^2+|y|^2)^2 + phi^2)^{1/4}."""
    return float(knorm_of(xi.x, xi.y, xi.phi))


def kdist(xi: HPoint, eta: HPoint) -> float:
    """Left-invariant gauge distance d(xi, eta) = |eta^{-1} o xi|."""
    _check_same_n(xi, eta)
    return knorm(compose(inverse(eta), xi))


def psi(xi: HPoint) -> float:
    """psi(xi) = (|x|^2 + |y|^2)/|xi|^2, in [0, 1]. Undefined at the origin."""
    if knorm(xi) == 0.0:
        raise ValueError("psi is undefined at the group identity")
    return float(psi_of(xi.x, xi.y, xi.phi))


def dilate(r: float, xi: HPoint) -> HPoint:
    """Anisotropic dilation (x, y, phi) -> (r x, r y, r^2 phi), r > 0."""
    if not r > 0.0:
        raise ValueError(f"dilation factor must be positive, got {r}")
    return HPoint(r * xi.x, r * xi.y, r * r * xi.phi)


def a_matrix(xi: HPoint) -> NDArray[np.float64]:
    """The (2N+1) x (2N+1) coefficient matrix A(z) of the sub-Laplacian.

    A(z) = [[ I_N,  0,    2y ],
            [ 0,    I_N, -2x ],
            [ 2y^T, -2x^T, 4|z|^2 ]]

    It is the Gram matrix of the horizontal field coefficients, so it is
    symmetric positive semidefinite with null vector (-2y, 2x, 1).
    """
    n = xi.N
    a = np.eye(2 * n + 1)
    a[:n, -1] = 2.0 * xi.y
    a[n : 2 * n, -1] = -2.0 * xi.x
    a[-1, :n] = 2.0 * xi.y
    a[-1, n : 2 * n] = -2.0 * xi.x
    a[-1, -1] = 4.0 * float(np.dot(xi.x, xi.x) + np.dot(xi.y, xi.y))
    return a


# ---------------------------------------------------------------------------
# unit-sphere chart
# ---------------------------------------------------------------------------

def sphere_point(r: float, omega: NDArray[np.float64], sign: int) -> tuple[HPoint, float]:
    """Chart of the unit gauge sphere {|z|^4 + phi^2 = 1}.

    z = r*omega with omega a unit vector of R^{2N}, phi = sign*sqrt(1 - r^4).
    Returns the point together with the surface element of the chart relative
    to dr d(sigma)(omega):

        J(r) = r^{2N-1} sqrt(1 + 4 r^6 / (1 - r^4)),

    the Gram determinant of (d/dr, d/domega).  J diverges at the equator
    r = 1 (the (r, omega) chart is singular there); math.inf is returned.
    Quadrature code should integrate in the substituted variable
    r = sqrt(cos chi), under which the element is smooth (see hquad).
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"chart radius must lie in [0, 1], got {r}")
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != 1 or omega.shape[0] % 2 != 0:
        raise ValueError("omega must be a vector of even length 2N")
    nrm = float(np.linalg.norm(omega))
    if abs(nrm - 1.0) > 1e-12:
        raise ValueError(f"omega must be a unit vector, |omega| = {nrm}")
    if sign not in (-1, 1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    n = omega.shape[0] // 2
    z = r * omega
    phi = sign * math.sqrt(max(1.0 - r**4, 0.0))
    pt = HPoint(z[:n].copy(), z[n:].copy(), phi)
    if r == 1.0:
        return pt, math.inf
    jac = r ** (2 * n - 1) * math.sqrt(1.0 + 4.0 * r**6 / (1.0 - r**4))
    return pt, jac
