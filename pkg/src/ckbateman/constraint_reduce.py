"""Reduction of the Bateman system to the damped oscillator by one constraint.

The imposed constraint is ``C1 = y - (w^2/W^2) x - sigma (gamma/(2 m W^2)) p_x``
(``W = Omega``).  ``sigma = +1`` is the operator the good operators commute
with; ``sigma = -1`` is the member whose reduced phase and ``mu`` are the
reference closed forms.  In the Schrodinger picture the condition at
time ``t`` uses the transported row ``S(t) = C1 . Phi(-t)``, i.e.
``alpha x + beta y + delta p_x + eps p_y``.  Its kernel is
``exp(i Theta) psi(x', t)`` with ``x' = x - (delta/eps) y``.

The reduced equation is

    i hbar psi_t = -(W^2 hbar^2/(2 m w^2)) e^{-gamma t} mu psi_XX
                   - i hbar (W cot Wt - gamma/2) X psi_X - i hbar W cot(Wt) psi

with ``mu = 2 + sigma (gamma/W) cot Wt``.  It is solved from a damped
oscillator solution ``chi`` by three explicit steps:

1. ``psi = (1/sin Wt) phi(xi, T)``, ``xi = X e^{gamma t/2}/sin Wt``,
   ``T = -(W/w^2)(2 cot + sigma (gamma/(2W)) cot^2)``; ``phi`` is free.
2. scaled Appell inversion ``phi = (-T)^{-1/2} e^{i m xi^2/(2 hbar T)} F(s xi/T, -s^2/T)``,
   ``s^2 = A``.
3. ``F`` is the free image of ``chi`` under the Arnold transformation at
   time ``tau`` with ``u1(tau)/u2(tau) = -A/T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arnold import _chirp, ck_gaussian
from .bateman import PhaseState4, classical_flow, flow_matrix
from .ck_ops import bateman_hamiltonian_op, catalog_operators, phase_ops
from .errors import BranchSingularity, CausticCrossed, MismatchReport, OffConstraintSurface
from .model_core import build_basis
from .weylalg import PhysParams, WeylOp, op_commutator

GUARD = 1e-3
_D4 = ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))


def _d1(f, z, h):
    return sum(w * f(z + k * h) for k, w in _D4) / h


def _d2(f, z, h):
    return (-f(z + 2 * h) + 16 * f(z + h) - 30 * f(z) + 16 * f(z - h) - f(z - 2 * h)) / (12 * h * h)


# ---------------------------------------------------------------------------
# constraints and good operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintSet:
    params: PhysParams
    C1: WeylOp
    C2: WeylOp
    c1_row: np.ndarray  # classical C1 on (x, y, p_x, p_y) at t = 0
    c2_row: np.ndarray

    def classical(self, state: np.ndarray, t: float = 0.0) -> tuple[float, float]:
        """Time-dependent classical relations, zero on the constrained orbit."""
        p = self.params
        m, g, w2, Om2 = p.m, p.gamma, p.omega**2, p.Omega**2
        x, y, px, py = state
        r1 = y - w2 / Om2 * math.exp(g * t) * x - g / (2 * m * Om2) * px
        r2 = py - math.exp(-g * t) * px - m * g / 2 * x
        return r1, r2

    def classical_plus_exponent(self, state: np.ndarray, t: float = 0.0) -> tuple[float, float]:
        """Same relations with ``e^{+gamma t}`` in the second one (the variant that fails)."""
        p = self.params
        m, g, w2, Om2 = p.m, p.gamma, p.omega**2, p.Omega**2
        x, y, px, py = state
        return (y - w2 / Om2 * math.exp(g * t) * x - g / (2 * m * Om2) * px,
                py - math.exp(g * t) * px - m * g / 2 * x)


def constraint_row(params: PhysParams, sigma: int = 1) -> np.ndarray:
    m, g, w2, Om2 = params.m, params.gamma, params.omega**2, params.Omega**2
    return np.array([-w2 / Om2, 1.0, -sigma * g / (2 * m * Om2), 0.0])


def row_to_op(row, params: PhysParams) -> WeylOp:
    o = phase_ops(params)
    return o["x"] * row[0] + o["y"] * row[1] + o["px"] * row[2] + o["py"] * row[3]


def build_constraints(params: PhysParams) -> ConstraintSet:
    m, g = params.m, params.gamma
    r1 = constraint_row(params, 1)
    r2 = np.array([-m * g / 2, 0.0, -1.0, 1.0])
    return ConstraintSet(params=params, C1=row_to_op(r1, params), C2=row_to_op(r2, params), c1_row=r1, c2_row=r2)


def good_operator_rows(params: PhysParams) -> dict[str, np.ndarray]:
    m, g, w2, Om2 = params.m, params.gamma, params.omega**2, params.Omega**2
    return {
        "G1": np.array([2 * m * w2 / g, 0.0, 1.0, 0.0]),
        "G2": np.array([-2 * m * Om2 / g, 0.0, 0.0, 1.0]),
    }


def constrained_point(x0: float, px0: float, params: PhysParams) -> PhaseState4:
    m, g, w2, Om2 = params.m, params.gamma, params.omega**2, params.Omega**2
    return PhaseState4(x0, w2 / Om2 * x0 + g / (2 * m * Om2) * px0, px0, px0 + m * g / 2 * x0)


def classical_constraint_check(s0: PhaseState4, params: PhysParams, t_final: float = 5.0,
                               dt: float = 0.01, tol: float = 1e-8) -> dict:
    cs = build_constraints(params)
    init = cs.classical(s0.as_array(), s0.t)
    traj = classical_flow(s0, t_final, dt, params)
    viol = np.array([cs.classical(v, t) for t, v in zip(traj.times, traj.states)])
    plus = np.array([cs.classical_plus_exponent(v, t) for t, v in zip(traj.times, traj.states)])
    on_surface = max(abs(init[0]), abs(init[1])) <= tol
    max_viol = float(np.abs(viol).max())
    return {
        "initial_violation": [float(init[0]), float(init[1])],
        "on_surface": on_surface,
        "max_violation": max_viol,
        "max_violation_per_relation": np.abs(viol).max(axis=0).tolist(),
        "plus_exponent_second_relation_max_violation": float(np.abs(plus[:, 1]).max()),
        "preserved": bool(on_surface and max_viol <= tol),
        "t_final": t_final,
    }


def good_operator_check(params: PhysParams, raise_on_fail: bool = True) -> dict:
    cs = build_constraints(params)
    rows = good_operator_rows(params)
    out = {}
    for name, r in rows.items():
        br = op_commutator(row_to_op(r, params), cs.C1)
        out[name] = {"commutator_zero": br.is_zero(), "commutator": br.to_json()}
    hb = op_commutator(bateman_hamiltonian_op(params), cs.C1)
    c12 = op_commutator(cs.C1, cs.C2)
    out["H_B"] = {"commutator_zero": hb.is_zero(), "commutator": hb.to_json()}
    central = c12.is_central_scalar() and not c12.is_zero()
    out["C1C2"] = {"central_nonzero": central,
                   "value": [c12.scalar_value().real, c12.scalar_value().imag] if central else None}
    out["all_pass"] = bool(out["G1"]["commutator_zero"] and out["G2"]["commutator_zero"]
                           and not out["H_B"]["commutator_zero"] and central)
    if raise_on_fail and not out["all_pass"]:
        raise MismatchReport("good-operator relations fail", out)
    return out


# ---------------------------------------------------------------------------
# transported constraint family and the reduced equation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintFamily:
    params: PhysParams
    sigma: int = 1

    def __post_init__(self):
        if self.sigma not in (-1, 1):
            raise ValueError("sigma must be +1 or -1")
        self.params.require_underdamped()

    def row(self, t: float) -> np.ndarray:
        return constraint_row(self.params, self.sigma) @ flow_matrix(self.params, -t)

    def guard(self, t: float) -> None:
        Om = self.params.Omega
        if abs(math.sin(Om * t)) <= GUARD:
            raise BranchSingularity(f"sin(Omega t) vanishes near t={t}")
        if abs(self.mu(t)) <= GUARD:
            raise BranchSingularity(f"mu(t) vanishes near t={t}")

    def mu(self, t: float) -> float:
        Om = self.params.Omega
        return 2 + self.sigma * self.params.gamma / Om / math.tan(Om * t)

    def xprime(self, x, y, t: float):
        al, be, de, ep = self.row(t)
        return x - de / ep * y

    def phase(self, xp, y, t: float):
        """``Theta`` with ``(alpha x + beta y + delta p_x + eps p_y) e^{i Theta} psi(x') = 0``."""
        al, be, de, ep = self.row(t)
        return -(al * xp * y + (al * de / ep + be) * y**2 / 2) / (self.params.hbar * ep)

    def lift(self, psi, t: float):
        """``phi(x, y) = e^{i Theta} psi(x', t)`` as a callable of ``(x, y)``."""
        def phi(x, y):
            xp = self.xprime(x, y, t)
            return np.exp(1j * self.phase(xp, y, t)) * psi(xp, t)
        return phi

    def reduced_coefficients(self, t: float) -> tuple[float, complex, complex]:
        """``(a2, b1, c0)``: ``i hbar psi_t = a2 psi_XX + b1 X psi_X + c0 psi``."""
        p = self.params
        Om, hb, g = p.Omega, p.hbar, p.gamma
        ct = 1 / math.tan(Om * t)
        a2 = -(Om**2 * hb**2) / (2 * p.m * p.omega**2) * math.exp(-g * t) * self.mu(t)
        return a2, -1j * hb * (Om * ct - g / 2), -1j * hb * Om * ct

    def T(self, t: float) -> float:
        p = self.params
        Om = p.Omega
        ct = 1 / math.tan(Om * t)
        return -(Om / p.omega**2) * (2 * ct + self.sigma * p.gamma / (2 * Om) * ct**2)


def reduced_residual(psi, X, t: float, family: ConstraintFamily, hx: float = 1e-3, ht: float = 1e-4):
    """Pointwise ``|i hbar psi_t - R psi|`` for the reduced operator ``R``; ``psi(X, t)``."""
    X = np.asarray(X, dtype=float)
    hb = family.params.hbar
    a2, b1, c0 = family.reduced_coefficients(t)
    val = psi(X, t)
    pt = _d1(lambda s: psi(X, s), t, ht)
    px = _d1(lambda s: psi(s, t), X, hx)
    pxx = _d2(lambda s: psi(s, t), X, hx)
    return np.abs(1j * hb * pt - (a2 * pxx + b1 * X * px + c0 * val)), np.abs(val)


def bateman_residual(phi_t, x, y, t: float, params: PhysParams, h: float = 1e-3, ht: float = 1e-4):
    """``|i hbar phi_t - H_B phi|`` in the position representation; ``phi_t(x, y, t)``."""
    m, g, hb, Om = params.m, params.gamma, params.hbar, params.Omega
    f = phi_t(x, y, t)
    ft = _d1(lambda s: phi_t(x, y, s), t, ht)
    fx = _d1(lambda s: phi_t(s, y, t), x, h)
    fy = _d1(lambda s: phi_t(x, s, t), y, h)
    fxy = _d1(lambda s: _d1(lambda r: phi_t(r, s, t), x, h), y, h)
    H = -(hb**2) / m * fxy - 0.5j * hb * g * (y * fy - x * fx) + m * Om**2 * x * y * f
    return np.abs(1j * hb * ft - H)


# ---------------------------------------------------------------------------
# the reduction chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionChain:
    """Maps a damped-oscillator solution ``chi(kappa, tau)`` to a reduced ``psi(X, t)``."""

    family: ConstraintFamily
    A: float = 1.0

    def __post_init__(self):
        if self.A == 0:
            raise ValueError("branch constant A must be nonzero")

    @property
    def params(self) -> PhysParams:
        return self.family.params

    def free_time(self, t: float) -> float:
        T = self.family.T(t)
        if abs(T) <= GUARD:
            raise BranchSingularity(f"T(t) vanishes near t={t}")
        return -self.A / T

    def tau(self, t: float) -> float:
        """Damped-oscillator time with ``u1/u2 = free_time``."""
        Om, g = self.params.Omega, self.params.gamma
        s = self.free_time(t)
        return math.atan2(Om * s, 1 - g * s / 2) / Om

    def maps(self, X, t: float):
        """``(kappa, tau, prefactor)`` with ``psi(X, t) = prefactor * chi(kappa, tau)``."""
        self.family.guard(t)
        if self.A < 0:
            raise BranchSingularity("the Appell step needs A > 0 (real scale s)")
        p = self.params
        Om, g, m, hb = p.Omega, p.gamma, p.m, p.hbar
        T = self.family.T(t)
        if T >= 0:
            raise BranchSingularity(f"T({t}) >= 0: outside the A > 0 branch")
        basis = build_basis(p)
        tau = self.tau(t)
        u2 = basis.u2(tau).real
        if u2 <= 0:
            raise CausticCrossed(f"u2({tau}) <= 0")
        X = np.asarray(X, dtype=float)
        sn = math.sin(Om * t)
        xi = X * math.exp(g * t / 2) / sn
        kappa = u2 * math.sqrt(self.A) * xi / T
        pref = (
            math.sqrt(u2)
            / (sn * math.sqrt(-T))
            * np.exp(1j * m * xi**2 / (2 * hb * T) - 0.5j * _chirp(basis, tau) * kappa**2)
        )
        return kappa, tau, pref

    def psi(self, chi):
        """Reduced wavefunction ``psi(X, t)`` from ``chi(kappa, tau)``."""
        def f(X, t):
            kappa, tau, pref = self.maps(X, t)
            return pref * chi(kappa, tau)
        return f

    def chi_from_psi(self, values, X, t: float):
        """Inverse pointwise map: ``chi(kappa(X), tau)`` from ``psi(X, t)`` values."""
        kappa, tau, pref = self.maps(X, t)
        return kappa, tau, np.asarray(values) / pref


def gaussian_chi(params: PhysParams, sigma: float = 0.7, k0: float = 0.3, p0: float = 0.4):
    """Analytic damped-oscillator Gaussian ``chi(kappa, tau)``."""
    basis = build_basis(params)
    return lambda kappa, tau: ck_gaussian(kappa, tau, basis, sigma=sigma, k0=k0, p0=p0)


def _window_times(t_window, n_t: int, family: ConstraintFamily) -> tuple[list[float], list[float]]:
    kept, skipped = [], []
    for t in np.linspace(t_window[0], t_window[1], n_t):
        try:
            family.guard(float(t))
            kept.append(float(t))
        except BranchSingularity:
            skipped.append(float(t))
    return kept, skipped


def verify_reduction_to_ck(params: PhysParams, A: float = 1.0, sigma: int = 1, t_window=(0.3, 1.2),
                           n_t: int = 10, x_samples=None, chi=None, tol: float = 1e-5) -> dict:
    """Residual of the reduced equation for ``psi`` built from a damped-oscillator ``chi``."""
    if A * t_window[0] <= 0 or A * t_window[1] <= 0:
        raise BranchSingularity("window must lie on the branch selected by sign(A)")
    fam = ConstraintFamily(params, sigma)
    chain = ReductionChain(fam, A)
    chi = chi or gaussian_chi(params)
    psi = chain.psi(chi)
    X = np.linspace(-1.5, 1.5, 13) if x_samples is None else np.asarray(x_samples, dtype=float)
    times, skipped = _window_times(t_window, n_t, fam)
    worst_abs = worst_rel = 0.0
    rows = []
    for t in times:
        res, val = reduced_residual(psi, X, t, fam)
        scale = params.hbar * params.Omega * float(val.max())
        worst_abs = max(worst_abs, float(res.max()))
        worst_rel = max(worst_rel, float(res.max()) / scale)
        rows.append({"t": t, "tau": chain.tau(t), "max_residual": float(res.max()), "max_abs_psi": float(val.max())})
    return {
        "A": A,
        "sigma": sigma,
        "t_window": list(t_window),
        "skipped_times": skipped,
        "max_abs_residual": worst_abs,
        "max_rel_residual": worst_rel,
        "rows": rows,
        "pass": worst_rel < tol,
    }


def chi_grid_check(params: PhysParams, tau_final: float, dt: float = 1e-3, n: int = 4096,
                   x_range=(-16.0, 16.0), **gauss) -> dict:
    """Compare the analytic ``chi`` with a Crank-Nicolson run to ``tau_final``."""
    from .arnold import ck_gaussian_state
    from .ck_evolve import EvolveConfig, evolve_ck

    basis = build_basis(params)
    gauss = {"sigma": 0.7, "k0": 0.3, "p0": 0.4, **gauss}
    n_steps = max(1, int(round(tau_final / dt)))
    cfg = EvolveConfig(dt=tau_final / n_steps, n_steps=n_steps, x_min=x_range[0], x_max=x_range[1], n=n)
    s0 = ck_gaussian_state(cfg.grid(), 0.0, basis, **gauss)
    final = evolve_ck(s0, cfg)[-1]
    exact = ck_gaussian_state(cfg.grid(), final.t, basis, **gauss)
    return {"tau_final": final.t, "l2_error": final.l2_distance(exact)}


# ---------------------------------------------------------------------------
# reference closed forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionMaps:
    """Closed-form ``mu, f, g, kappa, tau`` and the reduced phase in reference closed form."""

    params: PhysParams
    A: float = 1.0

    def __post_init__(self):
        if self.A == 0:
            raise ValueError("branch constant A must be nonzero")
        self.params.require_underdamped()

    def _trig(self, t, guarded: bool = True):
        Om = self.params.Omega
        s = math.sin(Om * t)
        if s == 0 or (guarded and abs(s) <= GUARD):
            raise BranchSingularity(f"sin(Omega t) vanishes near t={t}")
        return s, math.cos(Om * t) / s

    def mu(self, t: float) -> float:
        _, ct = self._trig(t)
        return 2 - self.params.gamma / self.params.Omega * ct

    def _u(self, t, guarded: bool = True):
        """``u = a/mu^2`` and its first two derivatives, ``a = A gamma^2/Omega^2``.

        ``u`` is regular at ``t = 0``; ``guarded=False`` allows evaluation there.
        """
        g, Om = self.params.gamma, self.params.Omega
        s, ct = self._trig(t, guarded)
        mu = 2 - g / Om * ct
        if abs(mu) <= GUARD:
            raise BranchSingularity(f"mu(t) vanishes near t={t}")
        a = self.A * g**2 / Om**2
        mu1 = g / s**2
        mu2 = -2 * g * Om * ct / s**2
        u = a / mu**2
        u1 = -2 * a * mu1 / mu**3
        u2 = -2 * a * (mu2 / mu**3 - 3 * mu1**2 / mu**4)
        return u, u1, u2

    def tau(self, t: float) -> float:
        if t == 0:
            return 0.0
        return math.atan(self._u(t, guarded=False)[0]) / self.params.Omega

    def tau_prime(self, t: float) -> float:
        if t == 0:
            return 0.0
        u, u1, _ = self._u(t, guarded=False)
        return u1 / (self.params.Omega * (1 + u**2))

    def tau_second(self, t: float) -> float:
        u, u1, u2 = self._u(t)
        return (u2 * (1 + u**2) - 2 * u * u1**2) / (self.params.Omega * (1 + u**2) ** 2)

    def f(self, t: float) -> float:
        g, Om = self.params.gamma, self.params.Omega
        mu, tp, tpp = self.mu(t), self.tau_prime(t), self.tau_second(t)
        bracket = (-g * (2 + math.cos(2 * Om * t)) + 2 * Om * math.sin(2 * Om * t)) * tp - g * mu * tp**2 + mu * tpp
        return -math.exp(g * t) / (4 * Om * mu**2 * tp) * bracket

    def g(self, t: float) -> complex:
        gm, Om = self.params.gamma, self.params.Omega
        s, _ = self._trig(t)
        base = complex(-self.tau_prime(t) / (Om * s**2 * self.mu(t)))
        return math.exp(-gm * self.tau(t) / 4) * base**0.25

    def kappa(self, xp, t: float):
        p = self.params
        r = complex(self.tau_prime(t) / self.mu(t)) ** 0.5
        return xp * math.exp(p.gamma * (t - self.tau(t)) / 2) * p.omega / p.Omega * r

    def xprime(self, x, y, t: float):
        p = self.params
        return x + p.Omega**2 / (2 * p.omega**2) * y * math.exp(-p.gamma * t) * self.mu(t)

    def phase(self, xp, y, t: float):
        """Exponent ``Theta`` of the reduced-wavefunction prefactor ``e^{i Theta}``."""
        p = self.params
        m, g, Om, w2, hb = p.m, p.gamma, p.Omega, p.omega**2, p.hbar
        s, _ = self._trig(t)
        inner = g * Om * y * math.cos(2 * Om * t) + 2 * (w2 * math.exp(g * t) * xp - Om**2 * y) * math.sin(2 * Om * t)
        return math.exp(-g * t) * m * Om * y * inner / (4 * hb * w2 * s**2)

    def psi(self, chi):
        """``psi(x', t) = exp(-i (m w^2/(hbar W)) x'^2 f) g chi(kappa, tau)`` in reference closed form."""
        p = self.params

        def f(xp, t):
            k = self.kappa(xp, t)
            pref = np.exp(-1j * p.m * p.omega**2 / (p.hbar * p.Omega) * xp**2 * self.f(t)) * self.g(t)
            return pref * chi(np.real(k), self.tau(t))
        return f

    def drift_reference(self, t: float) -> complex:
        """Coefficient of ``X psi_X`` in the reference reduced equation."""
        return -0.5j * self.params.hbar * self.params.Omega * self.mu(t)


def literal_consistency(params: PhysParams, t_samples=(0.3, 0.7, 1.1), tol: float = 1e-10) -> dict:
    """Compare reference ``x'`` and phase with the ``sigma = -1`` transported family."""
    fam = ConstraintFamily(params, -1)
    maps = ReductionMaps(params)
    dx = dp = 0.0
    for t in t_samples:
        for x, y in ((0.3, -0.2), (-0.7, 0.5), (1.1, 0.9)):
            xp_d = maps.xprime(x, y, t)
            xp_f = fam.xprime(x, y, t)
            dx = max(dx, abs(xp_d - xp_f))
            dp = max(dp, abs(maps.phase(xp_d, y, t) - fam.phase(xp_f, y, t)))
    return {"xprime_dev": dx, "phase_dev": dp, "matches_sigma_minus_one": max(dx, dp) <= tol}


def literal_residual(params: PhysParams, A: float = 1.0, t_window=(0.3, 1.2), n_t: int = 10, chi=None) -> dict:
    """Residual of the reference ``f, g, kappa, tau`` against the reduced equation.

    Evaluated both with the reference drift and with the derived drift.
    """
    maps = ReductionMaps(params, A)
    fam = ConstraintFamily(params, -1)
    chi = chi or gaussian_chi(params)
    psi = maps.psi(chi)
    X = np.linspace(-1.5, 1.5, 13)
    hb = params.hbar
    worst_d = worst_c = 0.0
    times, skipped = _window_times(t_window, n_t, fam)
    for t in times:
        try:
            val = psi(X, t)
            pt = _d1(lambda s: psi(X, s), t, 1e-4)
            px = _d1(lambda s: psi(s, t), X, 1e-3)
            pxx = _d2(lambda s: psi(s, t), X, 1e-3)
        except (BranchSingularity, ValueError, CausticCrossed):
            skipped.append(t)
            continue
        a2, b1, c0 = fam.reduced_coefficients(t)
        scale = hb * params.Omega * float(np.abs(val).max())
        res_c = np.abs(1j * hb * pt - (a2 * pxx + b1 * X * px + c0 * val)).max() / scale
        res_d = np.abs(1j * hb * pt - (a2 * pxx + maps.drift_reference(t) * X * px + c0 * val)).max() / scale
        worst_c, worst_d = max(worst_c, float(res_c)), max(worst_d, float(res_d))
    return {"max_rel_residual_reference_drift": worst_d, "max_rel_residual_derived_drift": worst_c,
            "skipped_times": skipped}


def branch_checks(params: PhysParams, A: float = 1.0, t_max: float = 1.2, n: int = 200) -> dict:
    """``tau'(0) = 0`` and ``sign(tau) = sign(A)`` for the closed-form map and for the chain."""
    maps_p, maps_m = ReductionMaps(params, abs(A)), ReductionMaps(params, -abs(A))
    ts = np.linspace(2 * GUARD, t_max, n)
    eps = 1e-6
    disp = {
        "tau_prime_near_zero": max(abs(maps_p.tau_prime(eps)), abs(maps_p.tau_prime(-eps))),
        "sign_pos": all(maps_p.tau(t) > 0 for t in ts),
        "sign_neg": all(maps_m.tau(-t) < 0 for t in ts),
    }
    fam = ConstraintFamily(params, 1)
    cp, cm = ReductionChain(fam, abs(A)), ReductionChain(fam, -abs(A))
    pos, neg = chain_branch(fam, 1, t_max), chain_branch(fam, -1, t_max)

    def tau_prime(chain, t, h=1e-9):
        return (chain.tau(t + h) - chain.tau(t - h)) / (2 * h)

    chain = {
        "branch_positive": list(pos),
        "branch_negative": list(neg),
        "tau_prime_near_zero": max(abs(tau_prime(cp, eps)), abs(tau_prime(cm, -eps))),
        "sign_pos": all(cp.tau(t) > 0 for t in np.linspace(*pos, n)),
        "sign_neg": all(cm.tau(t) < 0 for t in np.linspace(*neg, n)),
        "monotone": bool(np.all(np.diff([cp.tau(t) for t in np.linspace(*pos, n)]) > 0)),
    }
    ok = lambda d: d["tau_prime_near_zero"] < 1e-3 and d["sign_pos"] and d["sign_neg"]  # noqa: E731
    return {"closed_form": disp, "chain": chain, "pass": bool(ok(disp) and ok(chain))}


def chain_branch(family: ConstraintFamily, direction: int, t_max: float, n: int = 4000) -> tuple[float, float]:
    """Interval adjacent to ``t = 0`` (towards ``direction``) on which ``T(t) < 0``.

    Ends are pulled in by the guard band; the interval is capped at ``t_max``.
    """
    ts = direction * np.linspace(2 * GUARD, t_max, n)
    last = ts[0]
    for t in ts:
        try:
            family.guard(float(t))
            if family.T(float(t)) >= -GUARD:
                break
        except BranchSingularity:
            break
        last = t
    lo, hi = sorted((direction * 2 * GUARD, float(last)))
    return lo, hi


def branch_table(params: PhysParams, A: float = 1.0, t_window=(0.3, 1.2), n: int = 50) -> list[dict]:
    chain = ReductionChain(ConstraintFamily(params, 1), A)
    maps = ReductionMaps(params, A)
    out = []
    for t in np.linspace(t_window[0], t_window[1], n):
        t = float(t)
        out.append({"t": t, "tau_chain": chain.tau(t), "tau_closed_form": maps.tau(t)})
    return out


# ---------------------------------------------------------------------------
# wavefunction reduction and good operators
# ---------------------------------------------------------------------------


def reduce_wavefunction(phi, family: ConstraintFamily, t: float, xs, y_samples=(-0.8, -0.3, 0.4, 0.9),
                        tol: float = 1e-8):
    """Strip the phase of ``phi(x, y)`` and return ``psi(x')`` at the given ``x'`` values.

    Raises :class:`OffConstraintSurface` if the result depends on ``y``.
    """
    family.guard(t)
    xs = np.asarray(xs, dtype=float)
    al, be, de, ep = family.row(t)
    vals = []
    for y in (0.0, *y_samples):
        x = xs + de / ep * y
        vals.append(np.exp(-1j * family.phase(xs, y, t)) * phi(x, y))
    vals = np.array(vals)
    spread = float(np.abs(vals - vals[0]).max())
    scale = max(1.0, float(np.abs(vals[0]).max()))
    if spread > tol * scale:
        raise OffConstraintSurface(f"reduced function depends on y (spread {spread:.3g})")
    return vals[0]


def good_operator_transport(params: PhysParams, A: float = 1.0, t_samples=(0.4, 0.7, 1.0),
                            kappa_samples=None, chi=None) -> dict:
    """Good operators act on reduced states as constant combinations of the oscillator basics.

    For each good operator ``G`` (transported to time ``t``) the reduced image
    ``chi' = R(G phi)`` is fitted as ``(a X + b P + c) chi`` with the oscillator's
    conserved ``X(tau), P(tau)``; the same ``(a, b, c)`` must hold at every ``t``.
    """
    fam = ConstraintFamily(params, 1)
    chain = ReductionChain(fam, A)
    chi = chi or gaussian_chi(params)
    psi = chain.psi(chi)
    ck = catalog_operators(params, params.Omega)
    hb = params.hbar
    X = np.linspace(-1.0, 1.0, 9) if kappa_samples is None else np.asarray(kappa_samples, dtype=float)
    h = 1e-3
    report = {}
    for name, r0 in good_operator_rows(params).items():
        lhs, cols = [], []
        for t in t_samples:
            r = r0 @ flow_matrix(params, -t)
            phi = fam.lift(psi, t)
            gphi = (
                (r[0] * X + r[1] * 0.0) * phi(X, 0.0)
                - 1j * hb * r[2] * _d1(lambda s: phi(s, 0.0), X, h)
                - 1j * hb * r[3] * _d1(lambda s: phi(X, s), 0.0, h)
            )
            kappa, tau, chi_img = chain.chi_from_psi(gphi, X, t)

            def apply(op):
                at = op.at(tau)
                out = np.zeros_like(kappa, dtype=complex)
                for (a, _, c, _, _), v in at.items():
                    d = chi(kappa, tau) if c == 0 else _d1(lambda s: chi(s, tau), kappa, h)
                    out = out + complex(v) * kappa**a * d
                return out

            lhs.append(chi_img)
            cols.append(np.stack([apply(ck["X"]), apply(ck["P"]), chi(kappa, tau)], axis=1))
        M = np.concatenate(cols)
        b = np.concatenate(lhs)
        coef, *_ = np.linalg.lstsq(M, b, rcond=None)
        res = float(np.abs(M @ coef - b).max() / np.abs(b).max())
        report[name] = {"coefficients": [[c.real, c.imag] for c in coef], "max_rel_residual": res}
    report["pass"] = all(report[k]["max_rel_residual"] < 1e-6 for k in good_operator_rows(params))
    return report
