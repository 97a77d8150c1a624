"""Normal-ordered differential operators in ``(x, y, t)``.

A :class:`WeylOp` is a finite sum of monomials

    f(t) * x**a * y**b * d_x**c * d_y**d * d_t**e

with :class:`~ckbateman.coeffring.ExpPoly` coefficients.  Multiplication
operators always stand to the left of derivatives, so the monomial key
``(a, b, c, d, e)`` is itself the normal form.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .coeffring import ExpPoly
from .errors import OverdampedUnsupported

Key = tuple[int, int, int, int, int]

IDENTITY_KEY: Key = (0, 0, 0, 0, 0)


@dataclass(frozen=True)
class PhysParams:
    """Mass, damping rate, bare frequency and Planck constant."""

    m: float = 1.0
    gamma: float = 0.2
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("mass m must be positive")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        if self.gamma < 0:
            raise ValueError("damping rate gamma must be non-negative")
        if self.omega < 0:
            raise ValueError("frequency omega must be non-negative")

    @property
    def underdamped(self) -> bool:
        return self.omega > self.gamma / 2

    @property
    def Omega(self) -> float:
        """Reduced frequency ``sqrt(omega**2 - gamma**2/4)`` (underdamped branch)."""
        if not self.underdamped:
            raise OverdampedUnsupported(
                f"omega={self.omega} <= gamma/2={self.gamma / 2}: underdamped regime required"
            )
        return math.sqrt(self.omega**2 - self.gamma**2 / 4)

    @property
    def Omega_complex(self) -> complex:
        return cmath.sqrt(self.omega**2 - self.gamma**2 / 4 + 0j)

    def require_underdamped(self) -> None:
        self.Omega  # noqa: B018  (raises when overdamped)

    def to_dict(self) -> dict:
        return {"m": self.m, "gamma": self.gamma, "omega": self.omega, "hbar": self.hbar}


def _falling(n: int, k: int) -> int:
    out = 1
    for j in range(k):
        out *= n - j
    return out


class WeylOp:
    """Immutable normal-ordered operator."""

    __slots__ = ("monomials",)

    def __init__(self, monomials: Mapping[Key, ExpPoly] | Iterable = ()):
        items = monomials.items() if isinstance(monomials, Mapping) else monomials
        acc: dict[Key, list] = {}
        for key, coeff in items:
            key = tuple(int(v) for v in key)
            if len(key) != 5 or min(key) < 0:
                raise ValueError(f"bad monomial key {key}")
            acc.setdefault(key, []).extend(ExpPoly.coerce(coeff).terms)
        mons = {}
        for key, terms in acc.items():
            f = ExpPoly(terms)
            if not f.is_zero():
                mons[key] = f
        object.__setattr__(self, "monomials", mons)

    def __setattr__(self, name, value):
        raise AttributeError("WeylOp is immutable")

    # generators -----------------------------------------------------------
    @classmethod
    def scalar(cls, c) -> "WeylOp":
        return cls({IDENTITY_KEY: ExpPoly.coerce(c)})

    @classmethod
    def identity(cls) -> "WeylOp":
        return cls.scalar(1.0)

    @classmethod
    def zero(cls) -> "WeylOp":
        return cls()

    @classmethod
    def x(cls) -> "WeylOp":
        return cls({(1, 0, 0, 0, 0): 1.0})

    @classmethod
    def y(cls) -> "WeylOp":
        return cls({(0, 1, 0, 0, 0): 1.0})

    @classmethod
    def dx(cls) -> "WeylOp":
        return cls({(0, 0, 1, 0, 0): 1.0})

    @classmethod
    def dy(cls) -> "WeylOp":
        return cls({(0, 0, 0, 1, 0): 1.0})

    @classmethod
    def dt(cls) -> "WeylOp":
        return cls({(0, 0, 0, 0, 1): 1.0})

    @classmethod
    def monomial(cls, coeff, xa=0, yb=0, dxc=0, dyd=0, dte=0) -> "WeylOp":
        return cls({(xa, yb, dxc, dyd, dte): coeff})

    # algebra --------------------------------------------------------------
    def __add__(self, other):
        other = _coerce_op(other)
        return WeylOp(list(self.monomials.items()) + list(other.monomials.items()))

    __radd__ = __add__

    def __neg__(self):
        return WeylOp({k: -v for k, v in self.monomials.items()})

    def __sub__(self, other):
        return self + (-_coerce_op(other))

    def __rsub__(self, other):
        return _coerce_op(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number, ExpPoly)):
            return WeylOp({k: v * other for k, v in self.monomials.items()})
        return op_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number, ExpPoly)):
            return WeylOp({k: other * v for k, v in self.monomials.items()})
        return op_mul(_coerce_op(other), self)

    def __pow__(self, n: int):
        out = WeylOp.identity()
        for _ in range(n):
            out = out * self
        return out

    # inspection -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.monomials

    def scale(self) -> float:
        return max((f.scale() for f in self.monomials.values()), default=0.0)

    def coeff(self, xa=0, yb=0, dxc=0, dyd=0, dte=0) -> ExpPoly:
        return self.monomials.get((xa, yb, dxc, dyd, dte), ExpPoly())

    def has_dt(self) -> bool:
        return any(key[4] for key in self.monomials)

    def degree(self) -> int:
        return max((sum(key) for key in self.monomials), default=0)

    def time_derivative(self) -> "WeylOp":
        """Operator whose coefficients are the time derivatives of these ones."""
        return WeylOp({k: v.diff() for k, v in self.monomials.items()})

    def at(self, t: float) -> dict[Key, complex]:
        return {k: complex(v(t)) for k, v in self.monomials.items()}

    def is_central_scalar(self) -> bool:
        """True for a multiple of the identity with a constant coefficient."""
        return set(self.monomials) <= {IDENTITY_KEY} and self.coeff().is_constant()

    def scalar_value(self) -> complex:
        if not self.monomials:
            return 0j
        if not self.is_central_scalar():
            raise ValueError("operator is not a constant multiple of the identity")
        return self.coeff().constant_value()

    def conj_coeffs(self) -> "WeylOp":
        return WeylOp({k: v.conj() for k, v in self.monomials.items()})

    def __repr__(self):
        if not self.monomials:
            return "WeylOp(0)"
        names = ("x", "y", "dx", "dy", "dt")
        parts = []
        for key in sorted(self.monomials):
            sym = "*".join(f"{n}^{p}" if p > 1 else n for n, p in zip(names, key) if p)
            parts.append(f"{self.monomials[key]!r}" + (f"*{sym}" if sym else ""))
        return "WeylOp(" + " + ".join(parts) + ")"

    # serialization ----------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "monomials": [
                {
                    "x": k[0], "y": k[1], "dx": k[2], "dy": k[3], "dt": k[4],
                    "coeff": v.to_json(),
                }
                for k, v in sorted(self.monomials.items())
            ]
        }

    @classmethod
    def from_json(cls, data) -> "WeylOp":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(
            ((m["x"], m["y"], m["dx"], m["dy"], m["dt"]), ExpPoly.from_json(m["coeff"]))
            for m in data["monomials"]
        )


def _coerce_op(value) -> WeylOp:
    if isinstance(value, WeylOp):
        return value
    return WeylOp.scalar(value)


def op_mul(A: WeylOp, B: WeylOp) -> WeylOp:
    """Normal-ordered product ``A B``.

    Derivatives of ``A`` are moved through the multiplication part of ``B``
    with the Leibniz rule; ``d_t`` differentiates the time coefficients.
    """
    out: dict[Key, list] = {}
    for (a1, b1, p1, q1, e1), c1 in A.monomials.items():
        for (a2, b2, p2, q2, e2), c2 in B.monomials.items():
            for j in range(e1 + 1):
                cj = c1 * c2.diff(j) * math.comb(e1, j)
                if cj.is_zero():
                    continue
                for i in range(min(p1, a2) + 1):
                    wi = math.comb(p1, i) * _falling(a2, i)
                    for k in range(min(q1, b2) + 1):
                        wk = math.comb(q1, k) * _falling(b2, k)
                        key = (a1 + a2 - i, b1 + b2 - k, p1 - i + p2, q1 - k + q2, e1 - j + e2)
                        out.setdefault(key, []).extend((cj * (wi * wk)).terms)
    return WeylOp((k, ExpPoly(v)) for k, v in out.items())


def op_commutator(A: WeylOp, B: WeylOp) -> WeylOp:
    return op_mul(A, B) - op_mul(B, A)


def op_deviation(A: WeylOp, B: WeylOp) -> float:
    """Largest coefficient amplitude of ``A - B`` relative to the operands' scale."""
    scale = max(A.scale(), B.scale())
    diff = (A - B).scale()
    if scale == 0:
        return diff
    return diff / scale


def op_equal(A: WeylOp, B: WeylOp, tol: float = 1e-12) -> bool:
    return op_deviation(A, B) <= tol


def linear_combination(pairs: Iterable[tuple]) -> WeylOp:
    out = WeylOp()
    for c, op in pairs:
        out = out + op * c
    return out


def apply_numeric(
    op: WeylOp,
    func: Callable[[np.ndarray, np.ndarray, float], np.ndarray],
    x,
    y,
    t: float,
    h: float = 1e-3,
) -> np.ndarray:
    """Apply an operator without ``d_t`` to ``func(x, y, t)`` with finite differences.

    Derivatives use a five-point centered stencil per order.
    """
    if op.has_dt():
        raise ValueError("apply_numeric handles spatial derivatives only")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    total = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    for (a, b, c, d, _), coeff in op.monomials.items():
        deriv = _mixed_fd(func, x, y, t, c, d, h)
        total = total + complex(coeff(t)) * x**a * y**b * deriv
    return total


_STENCILS = {
    0: {0: 1.0},
    1: {-2: 1 / 12, -1: -2 / 3, 1: 2 / 3, 2: -1 / 12},
    2: {-2: -1 / 12, -1: 4 / 3, 0: -5 / 2, 1: 4 / 3, 2: -1 / 12},
    3: {-3: 1 / 8, -2: -1.0, -1: 13 / 8, 1: -13 / 8, 2: 1.0, 3: -1 / 8},
    4: {-3: -1 / 6, -2: 2.0, -1: -13 / 2, 0: 28 / 3, 1: -13 / 2, 2: 2.0, 3: -1 / 6},
}


def _mixed_fd(func, x, y, t, c, d, h):
    if c not in _STENCILS or d not in _STENCILS:
        raise ValueError("derivative order above 4 not supported")
    out = 0.0
    for i, wi in _STENCILS[c].items():
        for j, wj in _STENCILS[d].items():
            out = out + wi * wj * func(x + i * h, y + j * h, t)
    return out / h ** (c + d)
