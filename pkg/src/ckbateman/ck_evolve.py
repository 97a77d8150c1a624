"""Crank-Nicolson propagation of the Caldirola-Kanai equation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .arnold import GridState, uniform_grid
from .errors import BoundaryLeak, UnsupportedOperator
from .weylalg import WeylOp

LEAK_TOL = 1e-6
INITIAL_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class EvolveConfig:
    dt: float
    n_steps: int
    x_min: float = -16.0
    x_max: float = 16.0
    n: int = 4096
    snapshot_every: int = 0  # 0: only first and last
    stencil: int = 5  # Laplacian points: 3 (tridiagonal) or 5 (pentadiagonal)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 0:
            raise ValueError("n_steps must be non-negative")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError("grid size n must be a power of two")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.stencil not in (3, 5):
            raise ValueError("stencil must be 3 or 5")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    def grid(self) -> np.ndarray:
        return uniform_grid(self.x_min, self.x_max, self.n)


class Evolution(list):
    """Snapshots of a run plus bookkeeping on the per-step norm change."""

    max_step_norm_drift: float = 0.0
    max_edge_amplitude: float = 0.0


def _edge_amplitude(psi: np.ndarray) -> float:
    return float(max(abs(psi[0]), abs(psi[1]), abs(psi[-2]), abs(psi[-1])))


def evolve_ck(state: GridState, cfg: EvolveConfig) -> Evolution:
    """Propagate with Crank-Nicolson; coefficients are taken at mid-step.

    The Laplacian is the 3- or 5-point centered stencil with fixed zero ends,
    so each step is one banded solve of a symmetric (hence unitary) scheme.
    """
    p = state.params
    xs = cfg.grid()
    if len(state.xs) != cfg.n or not np.allclose(state.xs, xs, atol=1e-12):
        raise ValueError("state is not on the configured grid")
    if _edge_amplitude(state.psi) > INITIAL_EDGE_TOL * max(1.0, np.abs(state.psi).max()):
        raise BoundaryLeak("initial state is not negligible at the grid ends; widen the grid")
    m, g, hb = p.m, p.gamma, p.hbar
    w2 = p.omega**2
    dx = cfg.dx
    n = cfg.n
    lap = _LAPLACIANS[cfg.stencil]
    half = len(lap) // 2
    psi = state.psi.astype(complex).copy()
    t = state.t
    out = Evolution([state])
    norm_prev = np.sum(np.abs(psi) ** 2) * dx
    ab = np.zeros((2 * half + 1, n), dtype=complex)
    a = 0.5j * cfg.dt / hb
    for step in range(1, cfg.n_steps + 1):
        tm = t + cfg.dt / 2
        kin = -(hb**2) / (2 * m) * math.exp(-g * tm) / dx**2
        diag = kin * lap[half] + 0.5 * m * w2 * math.exp(g * tm) * xs**2
        rhs = (1 - a * diag) * psi
        ab[half, :] = 1 + a * diag
        for k in range(1, half + 1):
            off = a * kin * lap[half + k]
            rhs[k:] -= off * psi[:-k]
            rhs[:-k] -= off * psi[k:]
            ab[half - k, k:] = off
            ab[half + k, :-k] = off
        psi = solve_banded((half, half), ab, rhs, check_finite=False)
        t = state.t + step * cfg.dt
        norm = np.sum(np.abs(psi) ** 2) * dx
        out.max_step_norm_drift = max(out.max_step_norm_drift, abs(norm - norm_prev))
        norm_prev = norm
        edge = _edge_amplitude(psi)
        out.max_edge_amplitude = max(out.max_edge_amplitude, edge)
        if edge > LEAK_TOL:
            raise BoundaryLeak(f"edge amplitude {edge:.3g} at t={t:.6g} exceeds {LEAK_TOL}")
        if step == cfg.n_steps or (cfg.snapshot_every and step % cfg.snapshot_every == 0):
            out.append(GridState(xs=xs, psi=psi.copy(), t=t, params=p))
    return out


_LAPLACIANS = {
    3: np.array([1.0, -2.0, 1.0]),
    5: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
}


_D1 = np.array([1, -8, 0, 8, -1]) / 12.0
_D2 = np.array([-1, 16, -30, 16, -1]) / 12.0


def _derivative(psi: np.ndarray, order: int, dx: float) -> np.ndarray:
    """Fourth-order centered derivative with zero extension past the ends."""
    if order == 0:
        return psi
    stencil = {1: _D1, 2: _D2}.get(order)
    if stencil is None:
        raise UnsupportedOperator("derivatives above second order are not supported")
    padded = np.concatenate([np.zeros(2, complex), psi, np.zeros(2, complex)])
    n = len(psi)
    out = sum(stencil[j] * padded[j : j + n] for j in range(5))
    return out / dx**order


def apply_op(op: WeylOp, state: GridState) -> np.ndarray:
    """``O psi`` on the grid for operators in ``x`` and ``d_x`` only."""
    if op.has_dt():
        raise UnsupportedOperator("operators with d_t have no instantaneous expectation")
    out = np.zeros_like(state.psi, dtype=complex)
    cache: dict[int, np.ndarray] = {}
    for (a, b, c, d, _), coeff in op.monomials.items():
        if b or d:
            raise UnsupportedOperator("operator acts on y; grid states are one-dimensional")
        if c > 2 or a > 2:
            raise UnsupportedOperator("degrees above 2 are not supported")
        if c not in cache:
            cache[c] = _derivative(state.psi, c, state.dx)
        out = out + complex(coeff(state.t)) * state.xs**a * cache[c]
    return out


def expectation(op: WeylOp, state: GridState) -> complex:
    """``<psi|O|psi> / <psi|psi>`` at the state's time stamp."""
    num = np.sum(np.conj(state.psi) * apply_op(op, state)) * state.dx
    den = np.sum(np.abs(state.psi) ** 2) * state.dx
    return complex(num / den)


def conservation_report(snapshots, ops: dict[str, WeylOp]) -> dict:
    """Max deviation of each expectation from its initial value, plus norm drift."""
    series = {name: np.array([expectation(op, s) for s in snapshots]) for name, op in ops.items()}
    norms = np.array([s.norm() for s in snapshots])
    report = {"times": [float(s.t) for s in snapshots], "operators": {}}
    for name, vals in series.items():
        drift = float(np.max(np.abs(vals - vals[0])))
        scale = float(abs(vals[0]))
        report["operators"][name] = {
            "initial": [vals[0].real, vals[0].imag],
            "final": [vals[-1].real, vals[-1].imag],
            "max_abs_drift": drift,
            "max_rel_drift": drift / scale if scale > 0 else float("inf"),
            "series_re": vals.real.tolist(),
        }
    report["norm_drift"] = float(np.max(np.abs(norms - norms[0])))
    report["max_step_norm_drift"] = float(getattr(snapshots, "max_step_norm_drift", float("nan")))
    return report
