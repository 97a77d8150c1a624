"""Quantum Arnold transformation between damped-oscillator and free-particle states."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .errors import CausticCrossed, TimeOutOfRange
from .model_core import ClassicalBasis
from .weylalg import PhysParams


@dataclass(frozen=True)
class GridState:
    """Wavefunction on a uniform grid.

    ``frame`` is ``"ck"`` for damped-oscillator states (``t`` is physical
    time, ``xs`` positions) and ``"free"`` for free-particle states (``t`` is
    the free time ``tau`` and ``xs`` the free coordinate ``kappa``).
    """

    xs: np.ndarray
    psi: np.ndarray
    t: float
    params: PhysParams
    frame: str = "ck"
    meta: dict = field(default_factory=dict)

    @property
    def dx(self) -> float:
        return float(self.xs[1] - self.xs[0])

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.dx)

    def normalized(self) -> "GridState":
        return replace(self, psi=self.psi / np.sqrt(self.norm()))

    def l2_distance(self, other: "GridState") -> float:
        if len(self.xs) != len(other.xs) or not np.allclose(self.xs, other.xs, rtol=0, atol=1e-12 * max(1.0, np.abs(self.xs).max())):
            raise ValueError("states live on different grids")
        return float(np.sqrt(np.sum(np.abs(self.psi - other.psi) ** 2) * self.dx))

    def save(self, stem) -> tuple[Path, Path]:
        """Write ``<stem>.json`` (metadata) and ``<stem>.csv`` (x, re, im)."""
        stem = Path(stem)
        meta = {
            "t": self.t,
            "frame": self.frame,
            "n": len(self.xs),
            "x_min": float(self.xs[0]),
            "dx": self.dx,
            "params": self.params.to_dict(),
            **self.meta,
        }
        jpath = stem.with_suffix(".json")
        cpath = stem.with_suffix(".csv")
        jpath.write_text(json.dumps(meta, indent=2))
        with cpath.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "re", "im"])
            for x, v in zip(self.xs, self.psi):
                w.writerow([f"{x:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])
        return jpath, cpath

    @classmethod
    def load(cls, stem) -> "GridState":
        stem = Path(stem)
        meta = json.loads(stem.with_suffix(".json").read_text())
        data = np.loadtxt(stem.with_suffix(".csv"), delimiter=",", skiprows=1, ndmin=2)
        params = PhysParams(**meta.pop("params"))
        t = meta.pop("t")
        frame = meta.pop("frame")
        for key in ("n", "x_min", "dx"):
            meta.pop(key)
        return cls(xs=data[:, 0], psi=data[:, 1] + 1j * data[:, 2], t=t, params=params, frame=frame, meta=meta)


def uniform_grid(x_min: float, x_max: float, n: int) -> np.ndarray:
    """``n`` points on ``[x_min, x_max)``."""
    return x_min + (x_max - x_min) * np.arange(n) / n


def _chirp(basis: ClassicalBasis, t: float) -> float:
    """``(m/hbar) u2'/(W u2)`` at time ``t``."""
    p = basis.params
    u2 = basis.u2(t).real
    return p.m / p.hbar * basis.u2_dot()(t).real / (basis.W(t).real * u2)


def tau_of_t(basis: ClassicalBasis, t: float) -> float:
    u2 = basis.u2(t).real
    if u2 <= 0:
        raise CausticCrossed(f"u2({t}) = {u2:.3g} <= 0")
    return basis.u1(t).real / u2


def t_of_tau(basis: ClassicalBasis, tau: float, tol: float = 1e-12) -> float:
    """Invert ``tau = u1/u2`` on the domain where ``u2 > 0`` by bisection."""
    if tau == 0:
        return 0.0
    lo_dom, hi_dom = basis.domain()
    edge = hi_dom if tau > 0 else lo_dom
    if not np.isfinite(edge):
        edge = 1e6 if tau > 0 else -1e6
    f = lambda t: basis.u1(t).real - tau * basis.u2(t).real  # noqa: E731
    a, b = (0.0, edge) if tau > 0 else (edge, 0.0)
    if f(a) * f(b) > 0:
        raise TimeOutOfRange(f"tau={tau} has no preimage in ({lo_dom:.6g}, {hi_dom:.6g})")
    return brentq(f, a, b, xtol=tol, rtol=4 * np.finfo(float).eps)


def qat_forward(state: GridState, basis: ClassicalBasis) -> GridState:
    """Map a damped-oscillator state at ``t`` to the free particle at ``tau``.

    The free grid is ``kappa = x/u2(t)``, still uniform, so no resampling is
    needed; ``sqrt(u2)`` is exactly the measure factor ``dx/dkappa``.
    """
    if state.frame != "ck":
        raise ValueError("qat_forward expects a CK-frame state")
    t = state.t
    tau = tau_of_t(basis, t)
    u2 = basis.u2(t).real
    phase = np.exp(-0.5j * _chirp(basis, t) * state.xs**2)
    return GridState(
        xs=state.xs / u2,
        psi=np.sqrt(u2) * phase * state.psi,
        t=tau,
        params=state.params,
        frame="free",
        meta={"source_t": t},
    )


def qat_inverse(state: GridState, basis: ClassicalBasis) -> GridState:
    """Map a free state at ``tau`` back to the damped oscillator at ``t(tau)``."""
    if state.frame != "free":
        raise ValueError("qat_inverse expects a free-frame state")
    t = state.meta.get("source_t")
    if t is None or abs(tau_of_t(basis, t) - state.t) > 1e-12 * max(1.0, abs(state.t)):
        t = t_of_tau(basis, state.t)
    u2 = basis.u2(t).real
    xs = state.xs * u2
    phase = np.exp(0.5j * _chirp(basis, t) * xs**2)
    return GridState(xs=xs, psi=phase * state.psi / np.sqrt(u2), t=t, params=state.params, frame="ck")


def free_gaussian(kappa, tau: float, sigma: float = 1.0, k0: float = 0.0, p0: float = 0.0,
                  m: float = 1.0, hbar: float = 1.0):
    """Normalized free Gaussian packet evolved analytically to time ``tau``."""
    kappa = np.asarray(kappa, dtype=float)
    a = 1 + 1j * hbar * tau / (m * sigma**2)
    centre = k0 + p0 * tau / m
    return (
        (np.pi * sigma**2) ** -0.25
        / np.sqrt(a)
        * np.exp(-((kappa - centre) ** 2) / (2 * sigma**2 * a) + 1j * p0 * (kappa - p0 * tau / (2 * m)) / hbar)
    )


def ck_gaussian(x, t: float, basis: ClassicalBasis, sigma: float = 1.0, k0: float = 0.0, p0: float = 0.0):
    """Exact damped-oscillator solution: inverse transform of a free Gaussian.

    At ``t = 0`` it equals the free Gaussian with the same parameters.
    """
    p = basis.params
    u2 = basis.u2(t).real
    if u2 <= 0:
        raise CausticCrossed(f"u2({t}) <= 0")
    tau = basis.u1(t).real / u2
    x = np.asarray(x, dtype=float)
    free = free_gaussian(x / u2, tau, sigma, k0, p0, p.m, p.hbar)
    return np.exp(0.5j * _chirp(basis, t) * x**2) * free / np.sqrt(u2)


def ck_gaussian_state(xs, t: float, basis: ClassicalBasis, **kw) -> GridState:
    return GridState(xs=np.asarray(xs, dtype=float), psi=ck_gaussian(xs, t, basis, **kw), t=t, params=basis.params)


def free_gaussian_state(kappas, tau: float, params: PhysParams, **kw) -> GridState:
    return GridState(
        xs=np.asarray(kappas, dtype=float),
        psi=free_gaussian(kappas, tau, m=params.m, hbar=params.hbar, **kw),
        t=tau,
        params=params,
        frame="free",
    )


def ck_residual(func, x, t: float, params: PhysParams, hx: float = 1e-3, ht: float = 1e-4):
    """Finite-difference residual of the damped-oscillator equation.

    Returns ``|i hbar phi_t - H phi|`` pointwise, with fourth-order centered
    stencils in both ``x`` and ``t``.
    """
    m, g, w2, hb = params.m, params.gamma, params.omega**2, params.hbar
    x = np.asarray(x, dtype=float)
    phi = func(x, t)
    phi_t = (-func(x, t + 2 * ht) + 8 * func(x, t + ht) - 8 * func(x, t - ht) + func(x, t - 2 * ht)) / (12 * ht)
    phi_xx = (
        -func(x + 2 * hx, t) + 16 * func(x + hx, t) - 30 * phi + 16 * func(x - hx, t) - func(x - 2 * hx, t)
    ) / (12 * hx**2)
    H = -(hb**2) / (2 * m) * np.exp(-g * t) * phi_xx + 0.5 * m * w2 * np.exp(g * t) * x**2 * phi
    return np.abs(1j * hb * phi_t - H)
