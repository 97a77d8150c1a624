"""The Bateman dual oscillator: canonical map, classical flow, Gaussian states."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .ck_ops import bateman_coefficients, bateman_hamiltonian_op, classical_hamiltonian, phase_ops
from .errors import MismatchReport
from .weylalg import PhysParams, WeylOp, op_commutator, op_deviation

# canonical symplectic form on (x, y, p_x, p_y)
J4 = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
# and on (X, P, Q, Pi)
J_PAIRS = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float)


@dataclass(frozen=True)
class PhaseState4:
    x: float
    y: float
    px: float
    py: float
    t: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([self.x, self.y, self.px, self.py, self.t])):
            raise ValueError("phase-space entries must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.px, self.py], dtype=float)

    @classmethod
    def from_array(cls, v, t: float = 0.0) -> "PhaseState4":
        return cls(*map(float, v), t=t)


@dataclass(frozen=True)
class BatemanTrajectory:
    times: np.ndarray
    states: np.ndarray  # shape (n, 4): x, y, p_x, p_y

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "y", "p_x", "p_y"])
            for t, row in zip(self.times, self.states):
                w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])
        return path


@dataclass(frozen=True)
class GaussianState4:
    mean: np.ndarray
    cov: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (4, 4) or not np.allclose(cov, cov.T, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise ValueError("covariance must be a symmetric 4x4 matrix")


def map_matrix(params: PhysParams) -> np.ndarray:
    """Rows give ``X, P, Q, Pi`` as combinations of ``(x, y, p_x, p_y)``."""
    c = bateman_coefficients(params)
    return np.array([c["X"], c["P"], c["Q"], c["Pi"]], dtype=complex)


def bateman_to_canonical(params: PhysParams, x, y, px, py):
    M = map_matrix(params)
    v = np.array([x, y, px, py], dtype=complex)
    return tuple(np.tensordot(M, v, axes=1))


def canonical_to_bateman(X, P, Q, Pi, params: PhysParams):
    """Inverse of the linear map; entries may be numbers, arrays or :class:`WeylOp`."""
    Minv = np.linalg.inv(map_matrix(params))
    ins = (X, P, Q, Pi)
    if any(isinstance(v, WeylOp) for v in ins):
        return tuple(sum((v * complex(c) for v, c in zip(ins, row)), WeylOp()) for row in Minv)
    v = np.array(ins, dtype=complex)
    return tuple(np.tensordot(Minv, v, axes=1))


def symplectic_deviation(params: PhysParams) -> float:
    """``max |M J4 M^T - J_pairs|``: zero iff the linear map is canonical."""
    M = map_matrix(params)
    return float(np.max(np.abs(M @ J4 @ M.T - J_PAIRS)))


def hamiltonian_b(params: PhysParams, x, y, px, py):
    m, g = params.m, params.gamma
    Om2 = params.omega**2 - g**2 / 4
    return px * py / m + g / 2 * (y * py - x * px) + m * Om2 * x * y


def hamiltonian_match(params: PhysParams, points) -> float:
    """Max ``|H(map(point)) - H_B(point)|`` over an array of phase points (n, 4)."""
    pts = np.asarray(points, dtype=float)
    X, P, Q, Pi = bateman_to_canonical(params, *pts.T)
    lhs = classical_hamiltonian(params, X, P, Q, Pi)
    rhs = hamiltonian_b(params, *pts.T)
    return float(np.max(np.abs(lhs - rhs)))


def flow_generator(params: PhysParams) -> np.ndarray:
    """``S`` with ``d/dt (x, y, p_x, p_y) = S (x, y, p_x, p_y)``."""
    m, g = params.m, params.gamma
    Om2 = params.omega**2 - g**2 / 4
    return np.array(
        [
            [-g / 2, 0, 0, 1 / m],
            [0, g / 2, 1 / m, 0],
            [0, -m * Om2, g / 2, 0],
            [-m * Om2, 0, 0, -g / 2],
        ]
    )


def flow_matrix(params: PhysParams, t: float) -> np.ndarray:
    """Closed-form propagator ``exp(S t)`` in the underdamped regime."""
    m, g, Om = params.m, params.gamma, params.Omega
    e, E = np.exp(-g * t / 2), np.exp(g * t / 2)
    c, s = np.cos(Om * t), np.sin(Om * t)
    return np.array(
        [
            [e * c, 0, 0, e * s / (m * Om)],
            [0, E * c, E * s / (m * Om), 0],
            [0, -m * Om * E * s, E * c, 0],
            [-m * Om * e * s, 0, 0, e * c],
        ]
    )


def classical_flow(s0: PhaseState4, t_final: float, dt: float, params: PhysParams,
                   rtol: float = 1e-12, atol: float = 1e-14) -> BatemanTrajectory:
    """Integrate Hamilton's equations of ``H_B`` with an adaptive Runge-Kutta method."""
    S = flow_generator(params)
    n = int(round(abs(t_final - s0.t) / dt))
    times = np.linspace(s0.t, t_final, n + 1)
    sol = solve_ivp(lambda t, v: S @ v, (s0.t, t_final), s0.as_array(), method="DOP853",
                    t_eval=times, rtol=rtol, atol=atol)
    return BatemanTrajectory(times=sol.t, states=sol.y.T)


def exact_flow(s0: PhaseState4, times, params: PhysParams) -> BatemanTrajectory:
    times = np.asarray(times, dtype=float)
    v0 = s0.as_array()
    states = np.array([flow_matrix(params, t - s0.t) @ v0 for t in times])
    return BatemanTrajectory(times=times, states=states)


def gaussian_propagate(g: GaussianState4, t_final: float, params: PhysParams) -> GaussianState4:
    """Exact moment propagation: mean by ``exp(S t)``, covariance by ``Phi cov Phi^T``."""
    Phi = expm(flow_generator(params) * (t_final - g.t))
    mean = Phi @ np.asarray(g.mean, dtype=float)
    cov = Phi @ np.asarray(g.cov, dtype=float) @ Phi.T
    return GaussianState4(mean=mean, cov=0.5 * (cov + cov.T), t=t_final)


def uncertainty_min_eig(g: GaussianState4, hbar: float = 1.0) -> float:
    """Smallest eigenvalue of ``cov + (i hbar/2) J``; non-negative for physical states."""
    return float(np.min(np.linalg.eigvalsh(np.asarray(g.cov) + 0.5j * hbar * J4)))


def symplectic_eigenvalues(cov) -> np.ndarray:
    ev = np.abs(np.linalg.eigvals(1j * J4 @ np.asarray(cov)))
    return np.sort(ev)[::2]


def bateman_table(params: PhysParams) -> dict:
    """Expected brackets of ``x, y, p_x, p_y, H_B`` as operators."""
    m, g, hb = params.m, params.gamma, params.hbar
    Om2 = params.omega**2 - g**2 / 4
    o = phase_ops(params)
    I = WeylOp.identity()
    Z = WeylOp()
    return {
        ("x", "px"): I * (1j * hb),
        ("y", "py"): I * (1j * hb),
        ("x", "y"): Z,
        ("x", "py"): Z,
        ("y", "px"): Z,
        ("px", "py"): Z,
        ("H", "x"): (-o["py"] + o["x"] * (m * g / 2)) * (1j * hb / m),
        ("H", "px"): (o["px"] * (-g / 2) + o["y"] * (m * Om2)) * (1j * hb),
        ("H", "y"): (-o["px"] - o["y"] * (m * g / 2)) * (1j * hb / m),
        ("H", "py"): (o["py"] * (g / 2) + o["x"] * (m * Om2)) * (1j * hb),
    }


def verify_bateman_algebra(params: PhysParams, tol: float = 1e-12, raise_on_fail: bool = True) -> dict:
    ops = dict(phase_ops(params), H=bateman_hamiltonian_op(params))
    table = bateman_table(params)
    rows = []
    for a, b in itertools.combinations(("x", "y", "px", "py", "H"), 2):
        key, sign = ((a, b), 1) if (a, b) in table else ((b, a), -1)
        expected = table[key] * sign
        got = op_commutator(ops[a], ops[b])
        dev = op_deviation(got, expected)
        rows.append({"bracket": f"[{a},{b}]", "got": got.to_json(), "expected": expected.to_json(),
                     "max_dev": float(dev), "ok": bool(dev <= tol)})
    failing = [r["bracket"] for r in rows if not r["ok"]]
    report = {"rows": rows, "failing": failing, "all_pass": not failing,
              "max_dev": max(r["max_dev"] for r in rows)}
    if raise_on_fail and failing:
        raise MismatchReport(f"failing brackets: {failing}", report)
    return report


def heisenberg_velocity(params: PhysParams, name: str) -> np.ndarray:
    """``(i/hbar)[H_B, A]`` for a phase-space operator ``A``, as a row on ``(x, y, p_x, p_y)``."""
    ops = phase_ops(params)
    d = op_commutator(bateman_hamiltonian_op(params), ops[name]) * (1j / params.hbar)
    hb = params.hbar
    row = np.array(
        [
            complex(d.coeff(xa=1)(0.0)),
            complex(d.coeff(yb=1)(0.0)),
            complex(d.coeff(dxc=1)(0.0)) / (-1j * hb),
            complex(d.coeff(dyd=1)(0.0)) / (-1j * hb),
        ]
    )
    rest = set(d.monomials) - {(1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (0, 0, 1, 0, 0), (0, 0, 0, 1, 0)}
    if rest:
        raise ValueError("velocity is not linear in the phase-space operators")
    return row
