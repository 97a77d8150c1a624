"""Bateman wavefunctions in the mixed ``(x, p_y)`` representation.

Polarized wavefunctions obey the first-order equation ``d_t phi = L phi`` with

    L = (gamma x/2 - p_y/m) d_x + (gamma p_y/2 + m Omega^2 x) d_{p_y}.

In ``z = p_y + i m Omega x`` one has ``L z = (gamma/2 - i Omega) z``, hence
``L arg z = -Omega`` and ``L ln(z z*) = gamma``.  Stationary states
``i hbar L phi = E phi`` are pure phases in ``arg z`` and ``ln|z|^2``; the
single-valuedness of the ``arg z`` factor quantizes ``E``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OriginSingular
from .weylalg import PhysParams

SINGLE_VALUED_TOL = 1e-9


@dataclass(frozen=True)
class MixedPoint:
    x: float
    p_y: float
    m_omega: float  # m * Omega

    @classmethod
    def make(cls, x: float, p_y: float, params: PhysParams) -> "MixedPoint":
        return cls(float(x), float(p_y), params.m * params.Omega)

    @classmethod
    def from_z(cls, z: complex, params: PhysParams) -> "MixedPoint":
        mo = params.m * params.Omega
        return cls(z.imag / mo, z.real, mo)

    @property
    def z(self) -> complex:
        return complex(self.p_y, self.m_omega * self.x)


@dataclass(frozen=True)
class EigenLabel:
    E: float
    n: int
    lam: float

    @property
    def lambda_tilde(self) -> complex:
        return 1j * self.lam

    @classmethod
    def make(cls, n: int, lam: float, params: PhysParams) -> "EigenLabel":
        return cls(E=energy(n, lam, params), n=int(n), lam=float(lam))

    def check(self, params: PhysParams, tol: float = 1e-12) -> bool:
        return abs(self.E - energy(self.n, self.lam, params)) <= tol * max(1.0, abs(self.E))


def energy(n: int, lam: float, params: PhysParams) -> float:
    return params.hbar * (n * params.Omega + lam * params.gamma)


def _exponent(E: float, lam: float, params: PhysParams) -> float:
    """``(E - hbar gamma lambda)/(hbar Omega)``: the winding number of the phase."""
    return (E - params.hbar * params.gamma * lam) / (params.hbar * params.Omega)


# ---------------------------------------------------------------------------
# first-order evolution
# ---------------------------------------------------------------------------


def velocity_field(params: PhysParams) -> np.ndarray:
    """Matrix ``V`` with ``L = (V (x, p_y)) . grad``."""
    m, g, Om = params.m, params.gamma, params.Omega
    return np.array([[g / 2, -1 / m], [m * Om**2, g / 2]])


def characteristic_matrix(params: PhysParams, t: float) -> np.ndarray:
    """``exp(V t)``: the classical ``(x, p_y)`` flow run backward for time ``t``."""
    m, g, Om = params.m, params.gamma, params.Omega
    E = math.exp(g * t / 2)
    c, s = math.cos(Om * t), math.sin(Om * t)
    return E * np.array([[c, -s / (m * Om)], [m * Om * s, c]])


def evolve_first_order(phi0, X, P, t_final: float, params: PhysParams):
    """Solution of ``d_t phi = L phi`` at ``t_final`` sampled at points ``(X, P)``.

    ``phi0(x, p_y)`` must accept arrays.  Constant along characteristics:
    ``phi(X, t) = phi0(exp(V t) X)``.
    """
    X = np.asarray(X, dtype=float)
    P = np.asarray(P, dtype=float)
    M = characteristic_matrix(params, t_final)
    return phi0(M[0, 0] * X + M[0, 1] * P, M[1, 0] * X + M[1, 1] * P)


def first_order_residual(phi_t, X, P, t: float, params: PhysParams, h: float = 1e-3, ht: float = 1e-3):
    """``|d_t phi - L phi|`` with fourth-order centered differences; ``phi_t(x, p_y, t)``."""
    V = velocity_field(params)
    d4 = ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))
    dt = sum(w * phi_t(X, P, t + k * ht) for k, w in d4) / ht
    dx = sum(w * phi_t(X + k * h, P, t) for k, w in d4) / h
    dp = sum(w * phi_t(X, P + k * h, t) for k, w in d4) / h
    L = (V[0, 0] * X + V[0, 1] * P) * dx + (V[1, 0] * X + V[1, 1] * P) * dp
    return np.abs(dt - L)


# ---------------------------------------------------------------------------
# eigenfunctions and monodromy
# ---------------------------------------------------------------------------


def branch_arg(z, center: float = 0.0):
    """``arg z`` on the branch ``(center - pi, center + pi]``."""
    return center + np.angle(np.asarray(z) * np.exp(-1j * center))


def eigenfunction_from_arg(label: EigenLabel, z, argz, params: PhysParams):
    """``exp(i a arg z - i lambda ln(z z*))`` with ``a = (E - hbar gamma lambda)/(hbar Omega)``."""
    a = _exponent(label.E, label.lam, params)
    return np.exp(1j * a * argz - 1j * label.lam * np.log(np.abs(z) ** 2))


def eigenfunction_eval(label: EigenLabel, point: MixedPoint, params: PhysParams, branch_center: float = 0.0) -> complex:
    """Stationary wavefunction at ``point`` on the arg branch around ``branch_center``."""
    z = point.z
    if z == 0:
        raise OriginSingular("eigenfunctions are singular at z = 0")
    return complex(eigenfunction_from_arg(label, z, branch_arg(z, branch_center), params))


def eigenfunction_on_path(label: EigenLabel, zs, params: PhysParams) -> np.ndarray:
    """Values along a discretized path with ``arg z`` tracked continuously."""
    zs = np.asarray(zs, dtype=complex)
    if np.any(zs == 0):
        raise OriginSingular("path passes through z = 0")
    steps = np.angle(zs[1:] / zs[:-1])
    if np.any(np.abs(steps) > math.pi / 2):
        raise ValueError("path too coarse to track arg z continuously")
    argz = np.angle(zs[0]) + np.concatenate([[0.0], np.cumsum(steps)])
    return eigenfunction_from_arg(label, zs, argz, params)


def monodromy_check(E: float, lam: float, params: PhysParams) -> tuple[complex, bool]:
    """Phase factor after one loop of ``z`` around the origin, and single-valuedness."""
    factor = complex(np.exp(2j * math.pi * _exponent(E, lam, params)))
    return factor, bool(abs(factor - 1) < SINGLE_VALUED_TOL)


def loop_monodromy(E: float, lam: float, params: PhysParams, radius: float = 1.0, n: int = 4096) -> complex:
    """Monodromy by numerically following the eigenfunction once around ``|z| = radius``."""
    label = EigenLabel(E=E, n=0, lam=lam)
    zs = radius * np.exp(1j * np.linspace(0.0, 2 * math.pi, n + 1))
    vals = eigenfunction_on_path(label, zs, params)
    return complex(vals[-1] / vals[0])


def stationary_residual(label: EigenLabel, params: PhysParams, n_points: int = 50, seed: int = 0,
                        h: float = 1e-4, box: float = 2.0) -> float:
    """Max of ``|i hbar L phi - E phi| / (max(|E|, hbar Omega) |phi|)`` at random points."""
    rng = np.random.default_rng(seed)
    V = velocity_field(params)
    mo = params.m * params.Omega
    worst = 0.0
    d4 = ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))
    count = 0
    while count < n_points:
        x, p = rng.uniform(-box, box, 2)
        if abs(complex(p, mo * x)) < 0.25:
            continue
        count += 1
        center = math.atan2(mo * x, p)

        def f(xx, pp):
            return eigenfunction_eval(label, MixedPoint(xx, pp, mo), params, branch_center=center)

        phi = f(x, p)
        dx = sum(w * f(x + k * h, p) for k, w in d4) / h
        dp = sum(w * f(x, p + k * h) for k, w in d4) / h
        Lphi = (V[0, 0] * x + V[0, 1] * p) * dx + (V[1, 0] * x + V[1, 1] * p) * dp
        scale = max(abs(label.E), params.hbar * params.Omega) * abs(phi)
        worst = max(worst, abs(1j * params.hbar * Lphi - label.E * phi) / scale)
    return worst


def spectrum_enumerate(n_range, lambda_samples, params: PhysParams, n_points: int = 50, seed: int = 0,
                       tol: float = 1e-5) -> list[dict]:
    """Certified labels: single-valued, and solving the stationary equation."""
    out = []
    for lam in lambda_samples:
        for n in n_range:
            label = EigenLabel.make(n, lam, params)
            factor, ok = monodromy_check(label.E, label.lam, params)
            if not ok:
                continue
            res = stationary_residual(label, params, n_points=n_points, seed=seed)
            out.append({"label": label, "n": label.n, "lambda": label.lam, "E": label.E,
                        "monodromy_error": abs(factor - 1), "residual": res, "ok": res < tol})
    return out


def energy_scan(params: PhysParams, lam: float, e_min: float, e_max: float, n_grid: int = 2001) -> dict:
    """Run the monodromy test over a uniform grid of energies plus the rule's candidates.

    Returns the accepted energies and their distance to the nearest ``n hbar Omega + lam hbar gamma``.
    """
    hO = params.hbar * params.Omega
    base = lam * params.hbar * params.gamma
    cands = [base + n * hO for n in range(math.floor((e_min - base) / hO) - 1, math.ceil((e_max - base) / hO) + 2)]
    inside = [c for c in cands if e_min <= c <= e_max]
    uniform = np.linspace(e_min, e_max, n_grid)
    # drop grid points that coincide with a candidate up to rounding
    uniform = uniform[[min((abs(E - c) for c in inside), default=hO) > 1e-12 * hO for E in uniform]]
    grid = np.sort(np.concatenate([uniform, inside]))
    accepted = [float(E) for E in grid if monodromy_check(E, lam, params)[1]]
    dev = [min(abs(E - c) for c in cands) for E in accepted]
    return {
        "lambda": lam,
        "n_scanned": len(grid),
        "accepted": accepted,
        "max_rule_deviation": max(dev) if dev else 0.0,
        "expected_count": len(inside),
        "all_rule_points_accepted": len(accepted) == len(inside),
    }
