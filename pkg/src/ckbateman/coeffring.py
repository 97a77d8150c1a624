"""Exponential polynomials in time.

Every time-dependent coefficient used by the operator algebra is a finite sum

    f(t) = sum_j  c_j * t**k_j * exp(a_j * t)

with complex amplitudes ``c_j`` and complex rates ``a_j``.  Trigonometric
factors are entered through Euler's formula, so the set is closed under
addition, multiplication and differentiation.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

ZERO_THRESHOLD = 1e-14
RATE_TOLERANCE = 1e-12

Term = tuple  # (c: complex, k: int, a: complex)


def _same_rate(a: complex, b: complex) -> bool:
    return abs(a - b) <= RATE_TOLERANCE * max(1.0, abs(a), abs(b))


def cf_normalize(raw: Iterable[Sequence]) -> "ExpPoly":
    """Merge like terms and drop negligible amplitudes.

    Amplitudes below ``ZERO_THRESHOLD`` times the largest raw amplitude are
    removed, so exact cancellations that leave rounding residue vanish.
    """
    merged: list[list] = []
    scale = 0.0
    for c, k, a in raw:
        c = complex(c)
        a = complex(a)
        k = int(k)
        if k < 0:
            raise ValueError("powers of t must be non-negative")
        scale = max(scale, abs(c))
        for entry in merged:
            if entry[1] == k and _same_rate(entry[2], a):
                entry[0] += c
                break
        else:
            merged.append([c, k, a])
    cut = ZERO_THRESHOLD * scale
    kept = [(c, k, a) for c, k, a in merged if abs(c) > cut and c != 0]
    kept.sort(key=lambda term: (term[1], round(term[2].real, 9), round(term[2].imag, 9)))
    return ExpPoly._from_canonical(tuple(kept))


class ExpPoly:
    """Immutable exponential polynomial in canonical form."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Sequence] = ()):
        object.__setattr__(self, "terms", cf_normalize(terms).terms)

    @classmethod
    def _from_canonical(cls, terms: tuple) -> "ExpPoly":
        obj = object.__new__(cls)
        object.__setattr__(obj, "terms", terms)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("ExpPoly is immutable")

    # constructors -------------------------------------------------------
    @classmethod
    def const(cls, c: complex) -> "ExpPoly":
        return cls([(c, 0, 0)])

    @classmethod
    def exp(cls, rate: complex, c: complex = 1.0) -> "ExpPoly":
        return cls([(c, 0, rate)])

    @classmethod
    def tpow(cls, k: int, c: complex = 1.0) -> "ExpPoly":
        return cls([(c, k, 0)])

    @classmethod
    def cos(cls, freq: complex, rate: complex = 0.0, c: complex = 1.0) -> "ExpPoly":
        """``c * exp(rate t) * cos(freq t)``."""
        return cls([(c / 2, 0, rate + 1j * freq), (c / 2, 0, rate - 1j * freq)])

    @classmethod
    def sin(cls, freq: complex, rate: complex = 0.0, c: complex = 1.0) -> "ExpPoly":
        """``c * exp(rate t) * sin(freq t)``."""
        return cls([(c / 2j, 0, rate + 1j * freq), (-c / 2j, 0, rate - 1j * freq)])

    @staticmethod
    def coerce(value) -> "ExpPoly":
        if isinstance(value, ExpPoly):
            return value
        if isinstance(value, (int, float, complex, np.number)):
            return ExpPoly.const(complex(value))
        raise TypeError(f"cannot coerce {type(value).__name__} to ExpPoly")

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = ExpPoly.coerce(other)
        return cf_normalize(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly._from_canonical(tuple((-c, k, a) for c, k, a in self.terms))

    def __sub__(self, other):
        return self + (-ExpPoly.coerce(other))

    def __rsub__(self, other):
        return ExpPoly.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            if other == 0:
                return ExpPoly()
            return ExpPoly._from_canonical(tuple((c * other, k, a) for c, k, a in self.terms))
        other = ExpPoly.coerce(other)
        raw = [
            (c1 * c2, k1 + k2, a1 + a2)
            for c1, k1, a1 in self.terms
            for c2, k2, a2 in other.terms
        ]
        return cf_normalize(raw)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / complex(scalar))

    def conj(self) -> "ExpPoly":
        """Complex conjugate for real ``t``."""
        return cf_normalize((c.conjugate(), k, a.conjugate()) for c, k, a in self.terms)

    # calculus and evaluation -------------------------------------------
    def diff(self, order: int = 1) -> "ExpPoly":
        f = self
        for _ in range(order):
            raw = []
            for c, k, a in f.terms:
                if k:
                    raw.append((c * k, k - 1, a))
                raw.append((c * a, k, a))
            f = cf_normalize(raw)
        return f

    def __call__(self, t):
        return cf_eval(self, t)

    # predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def scale(self) -> float:
        return max((abs(c) for c, _, _ in self.terms), default=0.0)

    def is_constant(self) -> bool:
        return all(k == 0 and _same_rate(a, 0) for _, k, a in self.terms)

    def constant_value(self) -> complex:
        if not self.is_constant():
            raise ValueError("not a constant function of t")
        return sum((c for c, _, _ in self.terms), 0j)

    def close_to(self, other, tol: float = 1e-12, scale: float | None = None) -> bool:
        """Canonical-form equality with amplitudes compared to ``tol * scale``."""
        other = ExpPoly.coerce(other)
        if scale is None:
            scale = max(self.scale(), other.scale(), 1e-300)
        return (self - other).max_amplitude() <= tol * scale

    def max_amplitude(self) -> float:
        return self.scale()

    def __eq__(self, other):
        try:
            return self.close_to(other)
        except TypeError:
            return NotImplemented

    # tolerant equality has no consistent hash
    __hash__ = None

    def __repr__(self):
        if not self.terms:
            return "ExpPoly(0)"
        parts = []
        for c, k, a in self.terms:
            s = f"({c.real:.6g}{c.imag:+.6g}j)"
            if k:
                s += f"*t^{k}"
            if a != 0:
                s += f"*exp(({a.real:.6g}{a.imag:+.6g}j)t)"
            parts.append(s)
        return "ExpPoly(" + " + ".join(parts) + ")"

    def to_json(self) -> list:
        return [[c.real, c.imag, k, a.real, a.imag] for c, k, a in self.terms]

    @classmethod
    def from_json(cls, data) -> "ExpPoly":
        return cls((complex(re, im), k, complex(are, aim)) for re, im, k, are, aim in data)


def cf_diff(f: ExpPoly) -> ExpPoly:
    return f.diff()


def cf_eval(f: ExpPoly, t):
    """Evaluate at a scalar or an array of real times."""
    tt = np.asarray(t, dtype=float)
    out = np.zeros(tt.shape, dtype=complex)
    for c, k, a in f.terms:
        out = out + c * tt**k * np.exp(a * tt)
    if out.ndim == 0:
        return complex(out)
    return out


def cf_eval_real(f: ExpPoly, t) -> tuple[float, float]:
    """Real part of a value expected to be real, with the discarded imaginary part."""
    v = complex(cf_eval(f, t))
    return v.real, v.imag
