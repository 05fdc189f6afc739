"""Radial method-of-lines simulator for the evolution equation.

For radial u the spatial operator collapses to the 1D expression

    u'' + (2N+1) u'/rho - (lambda/rho^2) u + rho^a |u|^p

on a truncated interval (rho_min, 1): the origin is singular, so the grid
stops at rho_min with a Neumann condition there (a modeling choice recorded
in output metadata), and u is pinned to a constant boundary value at rho = 1.
The k-th-order time equation becomes a first-order system of k layers and is
advanced by classic RK4.

Step control: the base policy dt = c dr^2 (k=1) or c dr (k=2), c = 0.2, is
additionally capped by the linear reaction rate |lambda|/rho_min^2 and by the
instantaneous nonlinear rate p rho^a |u|^{p-1}, both of which outrun the
diffusion limit near the inner boundary.  The nonlinear cap shrinks dt as the
solution grows, so a genuine blow-up manifests either as max|u| crossing the
threshold or as dt collapsing below 1e-12; both are reported as blown_up.

Everything here is illustrative: the underlying problem is an inequality
with no prescribed dynamics, and the simulated equality case near the
existence frontier must not be over-read.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .hgroup import GroupContext
from .spectrum import ProblemParams, classify

BLOWUP_SUP = 1e8
DT_FLOOR = 1e-12


@dataclass(frozen=True)
class RadialGrid:
    """Nodes on [rho_min, 1], boundary node exactly at 1."""

    rho_min: float = 1e-3
    n_cells: int = 128
    spacing: str = "uniform"

    def __post_init__(self) -> None:
        if not 0.0 < self.rho_min < 1.0:
            raise ValueError(f"rho_min must lie in (0, 1), got {self.rho_min}")
        if self.n_cells < 32:
            raise ValueError(f"need at least 32 cells, got {self.n_cells}")
        if self.spacing not in ("uniform", "log"):
            raise ValueError(f"spacing must be 'uniform' or 'log', got {self.spacing!r}")

    def nodes(self) -> np.ndarray:
        if self.spacing == "uniform":
            return np.linspace(self.rho_min, 1.0, self.n_cells + 1)
        return np.exp(np.linspace(math.log(self.rho_min), 0.0, self.n_cells + 1))

    def describe(self) -> str:
        return f"{self.spacing}[{self.rho_min:g},1]x{self.n_cells}"


@dataclass
class SimState:
    t: float
    layers: np.ndarray  # (k, n_nodes): u, du/dt, ...
    status: str = "running"  # running | completed | blown_up


@dataclass(frozen=True)
class SimResult:
    status: str
    t_final: float
    sup_norm_history: tuple[tuple[float, float], ...]
    blow_up_time: Optional[float]
    final_state: SimState
    dt_policy: str
    note: str = ""


@lru_cache(maxsize=64)
def _grid_data(grid: RadialGrid) -> tuple:
    """Nodes, stencil weights, and spacings, computed once per grid."""
    rho = grid.nodes()
    hm = rho[1:-1] - rho[:-2]
    hp = rho[2:] - rho[1:-1]
    denom = hm * hp * (hm + hp)
    weights = (
        -(hp**2) / denom,          # d1 at i-1
        (hp**2 - hm**2) / denom,   # d1 at i
        hm**2 / denom,             # d1 at i+1
        2.0 * hp / denom,          # d2 at i-1
        -2.0 * (hm + hp) / denom,  # d2 at i
        2.0 * hm / denom,          # d2 at i+1
    )
    return rho, weights, float(rho[1] - rho[0]), float(np.min(np.diff(rho)))


def radial_rhs(
    u: np.ndarray,
    grid: RadialGrid,
    params: ProblemParams,
    boundary_value: float,
    nonlinear: bool = True,
    neumann_slope: float = 0.0,
) -> np.ndarray:
    """Spatial operator on one field layer; assumes u[-1] == boundary_value.

    Interior nodes use 3-point stencils; the inner node applies a mirror
    ghost carrying the prescribed slope; the boundary node is pinned (its
    time derivative is 0, matching the constant Dirichlet value).
    """
    rho, (d1_lo, d1_mid, d1_hi, d2_lo, d2_mid, d2_hi), h, _ = _grid_data(grid)
    out = np.zeros_like(u)

    ui, um, up = u[1:-1], u[:-2], u[2:]
    du = d1_lo * um + d1_mid * ui + d1_hi * up
    ddu = d2_lo * um + d2_mid * ui + d2_hi * up
    ri = rho[1:-1]
    out[1:-1] = ddu + (2 * params.ctx.N + 1) * du / ri - params.lam * ui / ri**2

    # inner Neumann node: ghost at rho_min - h with u_ghost = u[1] - 2 h g
    ghost = u[1] - 2.0 * h * neumann_slope
    ddu0 = (u[1] - 2.0 * u[0] + ghost) / h**2
    out[0] = ddu0 + (2 * params.ctx.N + 1) * neumann_slope / rho[0] - params.lam * u[0] / rho[0] ** 2

    if nonlinear:
        out[:-1] += rho[:-1] ** params.a * np.abs(u[:-1]) ** params.p

    out[-1] = 0.0
    return out


def _dt_for(
    u: np.ndarray, rho: np.ndarray, dr_min: float, params: ProblemParams, nonlinear: bool
) -> float:
    """Base policy capped by the linear and instantaneous nonlinear rates."""
    base = 0.2 * dr_min * dr_min if params.k == 1 else 0.2 * dr_min
    rate = abs(params.lam) / float(rho[0]) ** 2
    if nonlinear:
        rate = max(rate, float(np.max(rho**params.a * params.p * np.abs(u) ** (params.p - 1.0))))
    if rate > 0.0:
        cap = 0.5 / rate if params.k == 1 else 0.5 / math.sqrt(rate)
        return min(base, cap)
    return base


def integrate(
    params: ProblemParams,
    ic: np.ndarray,
    grid: RadialGrid,
    t_end: float,
    boundary_value: float = 0.0,
    nonlinear: bool = True,
    source: Optional[Callable[[float, np.ndarray], np.ndarray]] = None,
    neumann_slope: Optional[Callable[[float], float]] = None,
    max_history: int = 400,
) -> SimResult:
    """Advance the k-layer system to t_end or to blow-up.

    ic is (k, n_nodes), or (n_nodes,) for k = 1.  source(t, rho) adds to the
    top layer's rate (manufactured-solution forcing); neumann_slope(t) sets
    the inner slope (default homogeneous).
    """
    if params.k not in (1, 2):
        raise ValueError(f"time order must be 1 or 2, got {params.k}")
    rho = grid.nodes()
    layers = np.array(ic, dtype=float, copy=True)
    if layers.ndim == 1:
        layers = layers[None, :]
    if layers.shape != (params.k, rho.size):
        raise ValueError(f"initial data must be ({params.k}, {rho.size}), got {layers.shape}")
    if not np.all(np.isfinite(layers)):
        raise ValueError("initial data contains non-finite values")

    policy = f"rk4 dt=min(0.2*dr^{2 if params.k == 1 else 1}, rate caps)"
    layers[0, -1] = boundary_value
    if params.k == 2:
        layers[1, -1] = 0.0

    slope = neumann_slope if neumann_slope is not None else (lambda t: 0.0)

    def deriv(t: float, y: np.ndarray) -> np.ndarray:
        dy = np.empty_like(y)
        if params.k == 2:
            dy[0] = y[1]
            dy[0, -1] = 0.0
        top = radial_rhs(
            y[0], grid, params, boundary_value, nonlinear=nonlinear, neumann_slope=slope(t)
        )
        if source is not None:
            top[:-1] = top[:-1] + source(t, rho[:-1])
        dy[-1] = top
        return dy

    t = 0.0
    history = [(0.0, float(np.max(np.abs(layers[0]))))]
    record_dt = t_end / max_history
    next_record = record_dt
    status = "running"
    blow_time: Optional[float] = None
    note = ""

    dr_min = _grid_data(grid)[3]
    while t < t_end:
        dt = _dt_for(layers[0], rho, dr_min, params, nonlinear)
        if dt < DT_FLOOR:
            status = "blown_up"
            blow_time = t
            note = f"dt underflow ({dt:.3e}) at t = {t:.6g}"
            history.append((t, float(np.max(np.abs(layers[0])))))
            break
        dt = min(dt, t_end - t)

        k1 = deriv(t, layers)
        k2 = deriv(t + 0.5 * dt, layers + 0.5 * dt * k1)
        k3 = deriv(t + 0.5 * dt, layers + 0.5 * dt * k2)
        k4 = deriv(t + dt, layers + dt * k3)
        layers = layers + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        layers[0, -1] = boundary_value
        if params.k == 2:
            layers[1, -1] = 0.0
        t += dt

        sup = float(np.max(np.abs(layers[0])))
        if not np.all(np.isfinite(layers)) or sup > BLOWUP_SUP:
            status = "blown_up"
            blow_time = t
            note = f"sup norm {sup:.3e} at t = {t:.6g}"
            history.append((t, sup))
            break
        if t >= next_record or t >= t_end:
            history.append((t, sup))
            next_record += record_dt

    if status == "running":
        status = "completed"
    state = SimState(t, layers, status)
    return SimResult(status, t, tuple(history), blow_time, state, policy, note)


# ---------------------------------------------------------------------------
# manufactured solution helpers
# ---------------------------------------------------------------------------

def mms_reference(t: float, rho: np.ndarray) -> np.ndarray:
    """The manufactured profile e^{-t} cos(pi rho/2); vanishes at rho = 1."""
    return np.exp(-t) * np.cos(0.5 * math.pi * rho)


def mms_source(params: ProblemParams) -> Callable[[float, np.ndarray], np.ndarray]:
    """Forcing that makes mms_reference an exact solution of the k-th order
    equation (nonlinearity included; the profile is nonnegative on [0,1])."""
    half_pi = 0.5 * math.pi
    sign = -1.0 if params.k == 1 else 1.0  # d^k/dt^k e^{-t} = (-1)^k e^{-t}

    def src(t: float, rho: np.ndarray) -> np.ndarray:
        e = math.exp(-t)
        c = np.cos(half_pi * rho)
        s = np.sin(half_pi * rho)
        spatial = (
            -half_pi**2 * e * c
            - (2 * params.ctx.N + 1) * half_pi * e * s / rho
            - params.lam * e * c / rho**2
            + rho**params.a * (e * c) ** params.p
        )
        return sign * e * c - spatial

    return src


def mms_neumann(rho_min: float) -> Callable[[float], float]:
    """Exact inner slope of the manufactured profile."""
    half_pi = 0.5 * math.pi
    return lambda t: -math.exp(-t) * half_pi * math.sin(half_pi * rho_min)


def mms_initial_layers(params: ProblemParams, grid: RadialGrid) -> np.ndarray:
    rho = grid.nodes()
    u0 = mms_reference(0.0, rho)
    if params.k == 1:
        return u0[None, :]
    return np.stack([u0, -u0])  # du*/dt = -u* at t = 0


# ---------------------------------------------------------------------------
# phase sweep
# ---------------------------------------------------------------------------

def canonical_bump(rho: np.ndarray) -> np.ndarray:
    """The standard initial profile 0.1 (1-rho)^2 rho^2 used by sweeps."""
    return 0.1 * (1.0 - rho) ** 2 * rho**2


def phase_sweep(
    lambda_list: Sequence[float],
    a_list: Sequence[float],
    p_list: Sequence[float],
    ctx: GroupContext,
    k: int = 1,
    grid: Optional[RadialGrid] = None,
    t_end: float = 5.0,
    boundary_value: float = 0.1,
    threads: Optional[int] = None,
) -> list[dict]:
    """Run the canonical setup over the parameter box; one row per tuple.

    Rows carry the simulator outcome next to the classifier verdict; cells
    whose parameters are inadmissible are recorded as errors rather than
    aborting the sweep.  Deterministic: fixed data, ordered assembly.
    """
    if grid is None:
        grid = RadialGrid()
    rho = grid.nodes()
    ic0 = canonical_bump(rho)

    cells = [
        (lam, a, p) for lam in lambda_list for a in a_list for p in p_list
    ]

    def run(cell: tuple[float, float, float]) -> dict:
        lam, a, p = cell
        row = {
            "lambda": lam, "a": a, "p": p, "k": k,
            "status": "", "blow_up_time": "", "classifier_verdict": "",
            "grid": grid.describe(), "dt_policy": "",
        }
        try:
            params = ProblemParams(ctx, lam, a, p, k)
        except ValueError as exc:
            row["status"] = f"error: {exc}"
            return row
        row["classifier_verdict"] = classify(params).verdict.value
        ic = ic0 if k == 1 else np.stack([ic0, np.zeros_like(ic0)])
        try:
            res = integrate(
                params, ic, grid, t_end, boundary_value=boundary_value
            )
        except (ValueError, RuntimeError) as exc:
            row["status"] = f"error: {exc}"
            return row
        row["status"] = res.status
        row["blow_up_time"] = "" if res.blow_up_time is None else f"{res.blow_up_time:.6g}"
        row["dt_policy"] = res.dt_policy
        return row

    if threads is None:
        threads = int(os.environ.get("KORANYI_THREADS", "0")) or (os.cpu_count() or 1)
    if threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(c) for c in cells]
    return rows
