"""Sub-Riemannian calculus via hyper-dual automatic differentiation.

A hyper-dual number a + b*e1 + c*e2 + d*e1*e2 (with e1^2 = e2^2 = 0,
e1*e2 != 0) pushed through a smooth f comes out as

    f(a) + f'(a) b e1 + f'(a) c e2 + (f'(a) d + f''(a) b c) e1 e2,

so seeding b = c = v against a coordinate direction v reads off the exact
first and pure second directional derivatives in one evaluation, with no
truncation error and no step-size tuning.

On the Heisenberg group the horizontal fields are

    X_i = d/dx_i + 2 y_i d/dphi,      Y_i = d/dy_i - 2 x_i d/dphi,

and the sub-Laplacian is L = sum_i (X_i^2 + Y_i^2).  Because the coefficient
of X_i is constant along X_i itself -- X_i(2 y_i) = (d/dx_i + 2 y_i d/dphi)(2 y_i) = 0,
and likewise Y_i(-2 x_i) = 0 -- each X_i^2 f is the pure second directional
derivative D^2 f[v_i, v_i] with v_i = e_{x_i} + 2 y_i e_phi frozen at the
base point, so L reduces to a sum of 2N hyper-dual evaluations.

Scalar fields are callables f(x, y, phi) written against the N-axis-last
convention of `hgroup`; the same body then accepts float batches and
hyper-dual object arrays.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .hgroup import GroupContext, HPoint, a_matrix, knorm_of

ScalarField = Callable[..., object]


class HyperDual:
    """Second-order dual scalar with parts (value, d1, d2, d12)."""

    __slots__ = ("value", "d1", "d2", "d12")

    def __init__(self, value: float, d1: float = 0.0, d2: float = 0.0, d12: float = 0.0):
        self.value = float(value)
        self.d1 = float(d1)
        self.d2 = float(d2)
        self.d12 = float(d12)

    def __repr__(self) -> str:
        return f"HyperDual({self.value}, {self.d1}, {self.d2}, {self.d12})"

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.value + other.value, self.d1 + other.d1,
                             self.d2 + other.d2, self.d12 + other.d12)
        return HyperDual(self.value + other, self.d1, self.d2, self.d12)

    __radd__ = __add__

    def __neg__(self):
        return HyperDual(-self.value, -self.d1, -self.d2, -self.d12)

    def __sub__(self, other):
        return self + (-other if isinstance(other, HyperDual) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(
                self.value * other.value,
                self.value * other.d1 + self.d1 * other.value,
                self.value * other.d2 + self.d2 * other.value,
                self.value * other.d12 + self.d1 * other.d2
                + self.d2 * other.d1 + self.d12 * other.value,
            )
        o = float(other)
        return HyperDual(self.value * o, self.d1 * o, self.d2 * o, self.d12 * o)

    __rmul__ = __mul__

    def _chain(self, f0: float, f1: float, f2: float) -> "HyperDual":
        """Compose with a scalar map given f(a), f'(a), f''(a)."""
        return HyperDual(f0, f1 * self.d1, f1 * self.d2,
                         f1 * self.d12 + f2 * self.d1 * self.d2)

    def reciprocal(self) -> "HyperDual":
        a = self.value
        return self._chain(1.0 / a, -1.0 / (a * a), 2.0 / (a * a * a))

    def __truediv__(self, other):
        if isinstance(other, HyperDual):
            return self * other.reciprocal()
        return self * (1.0 / float(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * float(other)

    def __pow__(self, c):
        if isinstance(c, HyperDual):
            # a^u = exp(u ln a); rarely needed, supported for completeness
            return hd_exp(c * hd_log(self))
        c = float(c)
        a = self.value
        if c == 0.0:
            return HyperDual(1.0)
        if c == 1.0:
            return HyperDual(self.value, self.d1, self.d2, self.d12)
        if a < 0.0 and c != round(c):
            raise ValueError(f"fractional power {c} of negative base {a}")
        if a == 0.0:
            if c > 2.0:
                return HyperDual(0.0)
            if c == 2.0:
                return HyperDual(0.0, 0.0, 0.0, 2.0 * self.d1 * self.d2)
            raise ValueError(f"power {c} at zero base has singular derivatives")
        return self._chain(a ** c, c * a ** (c - 1.0), c * (c - 1.0) * a ** (c - 2.0))

    def __abs__(self):
        return self if self.value >= 0.0 else -self

    # -- value-order comparisons (branching in cutoff definitions) ----------

    @staticmethod
    def _val(other) -> float:
        return other.value if isinstance(other, HyperDual) else float(other)

    def __lt__(self, other):
        return self.value < self._val(other)

    def __le__(self, other):
        return self.value <= self._val(other)

    def __gt__(self, other):
        return self.value > self._val(other)

    def __ge__(self, other):
        return self.value >= self._val(other)


def _unary(u, f, f1, f2):
    if isinstance(u, HyperDual):
        a = u.value
        return u._chain(f(a), f1(a), f2(a))
    return f(u)


def hd_exp(u):
    return _unary(u, np.exp, np.exp, np.exp)


def hd_log(u):
    return _unary(u, np.log, lambda a: 1.0 / a, lambda a: -1.0 / (a * a))


def hd_sqrt(u):
    return u ** 0.5 if isinstance(u, HyperDual) else np.sqrt(u)


def hd_sin(u):
    return _unary(u, np.sin, np.cos, lambda a: -np.sin(a))


def hd_cos(u):
    return _unary(u, np.cos, lambda a: -np.sin(a), lambda a: -np.cos(a))


def value_of(u) -> float:
    """Plain float value of a float or HyperDual."""
    return u.value if isinstance(u, HyperDual) else float(u)


def _parts(u) -> tuple[float, float, float, float]:
    if isinstance(u, HyperDual):
        return u.value, u.d1, u.d2, u.d12
    return float(u), 0.0, 0.0, 0.0


# ---------------------------------------------------------------------------
# seeded field evaluation
# ---------------------------------------------------------------------------

def _eval_seeded(f: ScalarField, xi: HPoint, dir1, dir2):
    """Evaluate f at xi with coordinates seeded along dir1 (e1) and dir2 (e2).

    Directions are length-(2N+1) vectors ordered (x_1..x_N, y_1..y_N, phi).
    """
    n = xi.N
    x = np.empty(n, dtype=object)
    y = np.empty(n, dtype=object)
    for j in range(n):
        x[j] = HyperDual(xi.x[j], dir1[j], dir2[j])
        y[j] = HyperDual(xi.y[j], dir1[n + j], dir2[n + j])
    phi = HyperDual(xi.phi, dir1[2 * n], dir2[2 * n])
    return f(x, y, phi)


def _horizontal_direction(xi: HPoint, i: int, which: str) -> np.ndarray:
    n = xi.N
    if not 1 <= i <= n:
        raise IndexError(f"field index must be in 1..{n}, got {i}")
    v = np.zeros(2 * n + 1)
    if which == "x":
        v[i - 1] = 1.0
        v[2 * n] = 2.0 * xi.y[i - 1]
    else:
        v[n + i - 1] = 1.0
        v[2 * n] = -2.0 * xi.x[i - 1]
    return v


def x_field(i: int, f: ScalarField, xi: HPoint) -> float:
    """(X_i f)(xi) = (d/dx_i + 2 y_i d/dphi) f, exact via a dual seed."""
    v = _horizontal_direction(xi, i, "x")
    zero = np.zeros_like(v)
    return _parts(_eval_seeded(f, xi, v, zero))[1]


def y_field(i: int, f: ScalarField, xi: HPoint) -> float:
    """(Y_i f)(xi) = (d/dy_i - 2 x_i d/dphi) f, exact via a dual seed."""
    v = _horizontal_direction(xi, i, "y")
    zero = np.zeros_like(v)
    return _parts(_eval_seeded(f, xi, v, zero))[1]


def hgrad(f: ScalarField, xi: HPoint) -> np.ndarray:
    """Horizontal gradient (X_1 f, .., X_N f, Y_1 f, .., Y_N f)(xi)."""
    n = xi.N
    out = np.empty(2 * n)
    for i in range(1, n + 1):
        out[i - 1] = x_field(i, f, xi)
        out[n + i - 1] = y_field(i, f, xi)
    return out


def hlap(f: ScalarField, xi: HPoint) -> float:
    """Sub-Laplacian (sum_i X_i^2 + Y_i^2) f at xi.

    Each square collapses to a pure second directional derivative because the
    field's coefficients are constant along its own direction:
        X_i(2 y_i) = d(2 y_i)/dx_i + 2 y_i d(2 y_i)/dphi = 0, so
        X_i^2 f = D^2 f[v_i, v_i] with v_i = e_{x_i} + 2 y_i e_phi.
    """
    total = 0.0
    for i in range(1, xi.N + 1):
        for which in ("x", "y"):
            v = _horizontal_direction(xi, i, which)
            total += _parts(_eval_seeded(f, xi, v, v))[3]
    return total


def egrad(f: ScalarField, xi: HPoint) -> np.ndarray:
    """Full Euclidean gradient of f on R^{2N+1}, one dual seed per axis."""
    m = 2 * xi.N + 1
    zero = np.zeros(m)
    out = np.empty(m)
    for j in range(m):
        e = np.zeros(m)
        e[j] = 1.0
        out[j] = _parts(_eval_seeded(f, xi, e, zero))[1]
    return out


def hlap_divform(f: ScalarField, xi: HPoint, h: float = 1e-4) -> float:
    """Divergence-form evaluation div(A(z) grad f) by central differences.

    Independent cross-check of `hlap`: the flux A grad f is assembled from
    dual-seeded Euclidean gradients at shifted points, then differenced with
    step h.  Expect agreement to O(h^2) only.
    """
    if not h > 0.0:
        raise ValueError("step h must be positive")
    m = 2 * xi.N + 1
    n = xi.N

    def flux(pt: HPoint) -> np.ndarray:
        return a_matrix(pt) @ egrad(f, pt)

    div = 0.0
    for j in range(m):
        delta = np.zeros(m)
        delta[j] = h
        up = HPoint(xi.x + delta[:n], xi.y + delta[n : 2 * n], xi.phi + delta[2 * n])
        dn = HPoint(xi.x - delta[:n], xi.y - delta[n : 2 * n], xi.phi - delta[2 * n])
        div += (flux(up)[j] - flux(dn)[j]) / (2.0 * h)
    return div


# ---------------------------------------------------------------------------
# radial shortcuts
# ---------------------------------------------------------------------------

def radial_lift(F: Callable) -> ScalarField:
    """Lift a profile F(rho) to the field F(|xi|)."""

    def field(x, y, phi):
        return F(knorm_of(x, y, phi))

    return field


def radial_lap(F: Callable, rho: float, ctx: GroupContext) -> float:
    """The radial bracket F''(rho) + (2N+1) F'(rho)/rho.

    For the lift f = F(|xi|) the sub-Laplacian is psi(xi) times this bracket,
    so it equals (1/psi) L f wherever psi != 0.
    """
    if not rho > 0.0:
        raise ValueError(f"rho must be positive, got {rho}")
    u = F(HyperDual(rho, 1.0, 1.0, 0.0))
    _, d1, _, d12 = _parts(u)
    return d12 + (2 * ctx.N + 1) * d1 / rho
