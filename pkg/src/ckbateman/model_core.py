"""Classical solutions of the damped oscillator and the classical Arnold map."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .coeffring import ExpPoly
from .errors import CausticCrossed
from .weylalg import PhysParams


@dataclass(frozen=True)
class ClassicalBasis:
    """Fundamental solutions ``u1, u2`` of ``u'' + gamma u' + omega^2 u = 0``.

    ``u1(0) = 0, u1'(0) = 1`` and ``u2(0) = 1, u2'(0) = 0``; ``W`` is the
    Wronskian-like combination ``u1' u2 - u1 u2'``.
    """

    u1: ExpPoly
    u2: ExpPoly
    W: ExpPoly
    params: PhysParams

    def u1_dot(self) -> ExpPoly:
        return self.u1.diff()

    def u2_dot(self) -> ExpPoly:
        return self.u2.diff()

    def ode_residuals(self) -> tuple[ExpPoly, ExpPoly]:
        g, w2 = self.params.gamma, self.params.omega**2
        return tuple(u.diff(2) + u.diff() * g + u * w2 for u in (self.u1, self.u2))

    def domain(self, tol: float = 1e-12) -> tuple[float, float]:
        """Maximal interval around 0 on which ``u2 > 0``."""
        return (-_first_root(self.u2, -1, tol), _first_root(self.u2, 1, tol))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    positions: np.ndarray
    momenta: np.ndarray

    def __post_init__(self):
        if not len(self.times) == len(self.positions) == len(self.momenta):
            raise ValueError("trajectory columns must have equal length")

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "p"])
            for row in zip(self.times, self.positions, self.momenta):
                w.writerow([f"{v:.17g}" for v in row])
        return path


def build_basis(params: PhysParams) -> ClassicalBasis:
    Om = params.Omega  # raises OverdampedUnsupported
    half = -params.gamma / 2
    u1 = ExpPoly.sin(Om, half, 1.0 / Om)
    u2 = ExpPoly.cos(Om, half) + ExpPoly.sin(Om, half, params.gamma / (2 * Om))
    W = u1.diff() * u2 - u1 * u2.diff()
    return ClassicalBasis(u1=u1, u2=u2, W=W, params=params)


def classical_trajectory(basis: ClassicalBasis, x0: float, v0: float, times) -> Trajectory:
    """Closed-form solution; the momentum column is the kinetic ``m e^{gamma t} x'``.

    That is the canonical momentum conjugate to ``x`` for the time-dependent
    Hamiltonian whose quantization is the Caldirola-Kanai operator.
    """
    times = np.asarray(times, dtype=float)
    x = x0 * basis.u2(times).real + v0 * basis.u1(times).real
    v = x0 * basis.u2_dot()(times).real + v0 * basis.u1_dot()(times).real
    p = basis.params.m * np.exp(basis.params.gamma * times) * v
    return Trajectory(times=times, positions=np.atleast_1d(x), momenta=np.atleast_1d(p))


def arnold_map(basis: ClassicalBasis, x, t: float) -> tuple:
    """``(kappa, tau) = (x / u2(t), u1(t) / u2(t))``."""
    u2 = basis.u2(t).real
    if u2 <= 0:
        raise CausticCrossed(f"u2({t}) = {u2:.3g} <= 0: outside the Arnold-map domain")
    return np.asarray(x) / u2, basis.u1(t).real / u2


def _first_root(f: ExpPoly, direction: int, tol: float) -> float:
    """First sign change of ``f`` along ``direction * s``, s > 0, by bracketing and bisection."""
    g = lambda s: f(direction * s).real  # noqa: E731
    step = 0.05
    lo = 0.0
    for _ in range(100000):
        hi = lo + step
        if g(hi) <= 0:
            return brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)
        lo = hi
    return float("inf")
