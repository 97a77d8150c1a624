"""The damped free particle (``omega = 0``) and its infinite-dimensional symmetry algebra.

Generators, truncated at index ``N``:

    H_G  = i hbar e^{gamma t} d_t        H_DP = i hbar d_t
    X    = x + (i hbar/(m gamma)) (1 - e^{-gamma t}) d_x
    P_n  = -i hbar e^{-gamma n t} d_x    Y_n  = i e^{-gamma n t}
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .ck_ops import catalog_operators
from .coeffring import ExpPoly
from .errors import MismatchReport
from .weylalg import PhysParams, WeylOp, op_commutator, op_deviation

TOL = 1e-12


@dataclass(frozen=True)
class DPAlgebra:
    params: PhysParams
    N: int
    H_G: WeylOp
    H_DP: WeylOp
    X: WeylOp
    P: tuple
    Y: tuple
    x_sign: int = -1  # exponent sign in the (1 - e^{x_sign gamma t}) factor of X
    names: tuple = field(init=False)

    def __post_init__(self):
        names = ("HG", "HDP", "X") + tuple(f"P{n}" for n in range(self.N + 1)) + tuple(
            f"Y{n}" for n in range(self.N + 1)
        )
        object.__setattr__(self, "names", names)

    def get(self, name: str) -> WeylOp:
        if name == "HG":
            return self.H_G
        if name == "HDP":
            return self.H_DP
        if name == "X":
            return self.X
        idx = int(name[1:])
        if not 0 <= idx <= self.N:
            raise KeyError(name)
        return (self.P if name[0] == "P" else self.Y)[idx]


def build_dp(params: PhysParams, N: int = 6, x_sign: int = -1) -> DPAlgebra:
    if not params.gamma > 0:
        raise ValueError("damped particle requires gamma > 0")
    if N < 1:
        raise ValueError("truncation level N must be at least 1")
    if x_sign not in (-1, 1):
        raise ValueError("x_sign must be +1 or -1")
    m, g, hb = params.m, params.gamma, params.hbar
    dx = WeylOp.dx()
    H_G = WeylOp.monomial(ExpPoly.exp(g, 1j * hb), dte=1)
    H_DP = WeylOp.dt() * (1j * hb)
    X = WeylOp.x() + WeylOp.monomial(
        (ExpPoly.const(1) - ExpPoly.exp(x_sign * g)) * (1j * hb / (m * g)), dxc=1
    )
    P = tuple(WeylOp.monomial(ExpPoly.exp(-g * n, -1j * hb), dxc=1) for n in range(N + 1))
    Y = tuple(WeylOp.monomial(ExpPoly.exp(-g * n, 1j)) for n in range(N + 1))
    return DPAlgebra(params=params, N=N, H_G=H_G, H_DP=H_DP, X=X, P=P, Y=Y, x_sign=x_sign)


def expected_bracket(alg: DPAlgebra, a: str, b: str) -> WeylOp:
    """Right-hand side of the reference table for ``[a, b]`` (antisymmetry applied)."""
    p = alg.params
    hb, g, m = p.hbar, p.gamma, p.m
    Z = WeylOp()

    def fwd(a, b):
        if a == "HG" and b == "HDP":
            return alg.H_G * (-1j * hb * g)
        if a == "HG" and b == "X":
            return alg.P[0] * (-1j * hb / m)
        if a == "HDP" and b == "X":
            return alg.P[1] * (-1j * hb / m)
        if a in ("HG", "HDP") and b[0] in "PY":
            n = int(b[1:])
            fam = alg.P if b[0] == "P" else alg.Y
            if a == "HDP":
                return fam[n] * (-1j * hb * g * n)
            return fam[n - 1] * (-1j * hb * g * n) if n > 0 else Z
        if a == "X" and b[0] == "P":
            return alg.Y[int(b[1:])] * hb
        return None

    out = fwd(a, b)
    if out is not None:
        return out
    out = fwd(b, a)
    return -out if out is not None else Z


def verify_dp_algebra(alg: DPAlgebra, tol: float = TOL, raise_on_fail: bool = True) -> dict:
    rows = []
    for a, b in itertools.combinations(alg.names, 2):
        got = op_commutator(alg.get(a), alg.get(b))
        exp = expected_bracket(alg, a, b)
        dev = float(op_deviation(got, exp))
        rows.append({"pair": f"[{a},{b}]", "got": got.to_json(), "expected": exp.to_json(),
                     "max_dev": dev, "ok": dev <= tol})
    failing = [r for r in rows if not r["ok"]]
    central = all(op_commutator(alg.Y[0], alg.get(n)).is_zero() for n in alg.names)
    report = {
        "N": alg.N,
        "x_sign": alg.x_sign,
        "n_brackets": len(rows),
        "failing": [r["pair"] for r in failing],
        "all_pass": not failing,
        "Y0_central": central,
        "max_dev": max(r["max_dev"] for r in rows),
        "rows": rows,
    }
    if raise_on_fail and failing:
        r = failing[0]
        raise MismatchReport(f"bracket {r['pair']} mismatch: got {r['got']}, expected {r['expected']}", report)
    return report


def grading_check(alg: DPAlgebra, tol: float = TOL) -> dict:
    """``H_G`` lowers the index of ``P_n, Y_n`` by one, ``H_DP`` preserves it."""
    lowers = preserves = True
    for n in range(alg.N + 1):
        for fam in (alg.P, alg.Y):
            low = op_commutator(alg.H_G, fam[n])
            target = fam[n - 1] * (-1j * alg.params.hbar * alg.params.gamma * n) if n else WeylOp()
            lowers &= op_deviation(low, target) <= tol
            same = op_commutator(alg.H_DP, fam[n])
            preserves &= op_deviation(same, fam[n] * (-1j * alg.params.hbar * alg.params.gamma * n)) <= tol
    return {"H_G_lowers": bool(lowers), "H_DP_preserves": bool(preserves)}


def _decompose(op: WeylOp, basis: list[WeylOp], times=(0.0, 0.37, 1.1, 2.3)) -> tuple[np.ndarray, float]:
    """Constant coefficients ``c`` with ``op = sum c_i basis_i``; returns ``(c, residual)``."""
    keys = sorted(set(op.monomials).union(*(b.monomials for b in basis)))

    def vec(o):
        return np.array([complex(o.coeff(*k)(t)) for t in times for k in keys])

    A = np.array([vec(b) for b in basis]).T
    rhs = vec(op)
    c, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return c, float(np.max(np.abs(A @ c - rhs), initial=0.0))


SUBALGEBRA = ("HDP", "P1", "Y1", "X", "P0", "Y0")


def subalgebra_closure(alg: DPAlgebra, names=SUBALGEBRA, tol: float = 1e-10) -> dict:
    """Every bracket within ``names`` is a constant combination of ``names``."""
    basis = [alg.get(n) for n in names]
    worst = 0.0
    for a, b in itertools.combinations(names, 2):
        _, res = _decompose(op_commutator(alg.get(a), alg.get(b)), basis)
        worst = max(worst, res)
    return {"generators": list(names), "max_residual": worst, "closes": worst <= tol}


def resolve_x_sign(params: PhysParams, N: int = 6) -> dict:
    """Test both exponent signs in ``X`` against the table; report which closes."""
    out = {}
    for s in (-1, 1):
        rep = verify_dp_algebra(build_dp(params, N, x_sign=s), raise_on_fail=False)
        out["e^{-gamma t}" if s == -1 else "e^{+gamma t}"] = {"closes": rep["all_pass"], "failing": rep["failing"]}
    return out


def limit_comparison(params: PhysParams) -> dict:
    """Oscillator basic operators at ``omega = 0`` (``Omega = i gamma/2``) vs ``X`` and ``P_0``."""
    p0 = PhysParams(m=params.m, gamma=params.gamma, omega=0.0, hbar=params.hbar)
    ops = catalog_operators(p0, p0.Omega_complex)
    alg = build_dp(p0, 1)
    dX = float(op_deviation(ops["X"], alg.X))
    dP = float(op_deviation(ops["P"], alg.P[0]))
    return {"X_dev": dX, "P_dev": dP, "ok": max(dX, dP) <= 1e-10}
