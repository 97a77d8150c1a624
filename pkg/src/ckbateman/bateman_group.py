"""Group law of the Bateman symmetry group and its invariant vector fields.

Elements are ``(t, x, y, p_x, p_y, zeta)`` with ``|zeta| = 1``.  The central
coordinate is kept as a phase angle so that all cocycle arithmetic happens
in the exponent.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .bateman import flow_matrix
from .ck_ops import bateman_hamiltonian_op, phase_ops
from .errors import MismatchReport
from .weylalg import PhysParams, WeylOp, op_commutator

COORDS = ("t", "x", "y", "px", "py", "phase")
FIELD_NAMES = ("t", "x", "y", "px", "py", "Xi")


def wrap_phase(phi: float) -> float:
    """Map to ``(-pi, pi]``."""
    w = math.remainder(phi, 2 * math.pi)
    return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class GroupElement:
    t: float = 0.0
    x: float = 0.0
    y: float = 0.0
    px: float = 0.0
    py: float = 0.0
    phase: float = 0.0

    @property
    def zeta(self) -> complex:
        return complex(math.cos(self.phase), math.sin(self.phase))

    @classmethod
    def from_zeta(cls, t, x, y, px, py, zeta: complex) -> "GroupElement":
        if abs(abs(zeta) - 1) > 1e-12:
            raise ValueError("zeta must have unit modulus")
        return cls(t, x, y, px, py, math.atan2(zeta.imag, zeta.real))

    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.px, self.py])

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.x, self.y, self.px, self.py, self.phase])

    @classmethod
    def from_array(cls, a) -> "GroupElement":
        return cls(*map(float, a))

    def distance(self, other: "GroupElement") -> float:
        """Largest coordinate difference, phases compared modulo ``2 pi``."""
        d = np.abs(self.as_array()[:5] - other.as_array()[:5]).max()
        return float(max(d, abs(wrap_phase(self.phase - other.phase))))


IDENTITY = GroupElement()


def time_element(t: float) -> GroupElement:
    return GroupElement(t=t)


def cocycle(g2: GroupElement, g1: GroupElement, params: PhysParams) -> float:
    """Exponent ``xi / hbar`` of the central factor for ``compose(g2, g1)``."""
    m, g, hb, Om = params.m, params.gamma, params.hbar, params.Omega
    t = g1.t
    E = math.exp(g * t / 2)
    c, s = math.cos(Om * t), math.sin(Om * t)
    xi = (
        g2.y * g1.py * E * c
        - g1.x * g2.px * E * c
        + m * Om * g1.x * g2.y * E * s
        + g2.px * g1.py * E * s / (m * Om)
    )
    return xi / hb


def _compose_raw(a2: np.ndarray, a1: np.ndarray, params: PhysParams) -> np.ndarray:
    g2, g1 = GroupElement.from_array(a2), GroupElement.from_array(a1)
    v = g1.vector() + flow_matrix(params, g1.t) @ g2.vector()
    phase = g2.phase + g1.phase + cocycle(g2, g1, params)
    return np.array([g2.t + g1.t, *v, phase])


def compose(g2: GroupElement, g1: GroupElement, params: PhysParams) -> GroupElement:
    """Product ``g2 * g1``; ``g2`` carries the primed coordinates of the law."""
    out = _compose_raw(g2.as_array(), g1.as_array(), params)
    out[5] = wrap_phase(out[5])
    return GroupElement.from_array(out)


def inverse(g: GroupElement, params: PhysParams) -> GroupElement:
    """Closed-form inverse from ``compose(inverse(g), g) = identity``."""
    v = -flow_matrix(params, -g.t) @ g.vector()
    partial = GroupElement(-g.t, *v, 0.0)
    phase = -g.phase - cocycle(partial, g, params)
    return GroupElement(-g.t, *v, wrap_phase(phase))


# ---------------------------------------------------------------------------
# invariant vector fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VectorFieldEval:
    base: GroupElement
    name: str
    side: str
    components: np.ndarray  # on (d_t, d_x, d_y, d_px, d_py, Xi)

    def __post_init__(self):
        if not np.all(np.isfinite(self.components)):
            raise ValueError("non-finite field components")


_D4 = ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))


def _field_array(a: np.ndarray, j: int, side: str, params: PhysParams, h: float) -> np.ndarray:
    """Derivative of the law along coordinate ``j`` of the identity factor."""
    out = np.zeros(6)
    for k, w in _D4:
        e = np.zeros(6)
        e[j] = k * h
        out += w * (_compose_raw(a, e, params) if side == "left" else _compose_raw(e, a, params))
    return out / h


def invariant_fields(g: GroupElement, side: str, params: PhysParams, h: float = 1e-3) -> list[VectorFieldEval]:
    """Six invariant fields at ``g`` by differentiating the group law.

    ``side="left"`` differentiates ``compose(g, eps)``, ``side="right"``
    differentiates ``compose(eps, g)``.  The sixth field is the vertical
    generator ``Xi`` (derivative along the phase).
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    a = g.as_array()
    return [
        VectorFieldEval(base=g, name=n, side=side, components=_field_array(a, j, side, params, h))
        for j, n in enumerate(FIELD_NAMES)
    ]


def _field_matrix(a: np.ndarray, side: str, params: PhysParams, h: float) -> np.ndarray:
    return np.array([_field_array(a, j, side, params, h) for j in range(6)])


def field_brackets(g: GroupElement, side_a: str, side_b: str, params: PhysParams,
                   h_inner: float = 1e-3, h_outer: float = 1e-3) -> np.ndarray:
    """Lie brackets ``[A_i, B_j]`` at ``g`` as an array (6, 6, 6) of components.

    Derivatives of field components use a fourth-order centered stencil.
    """
    a = g.as_array()
    FA = _field_matrix(a, side_a, params, h_inner)
    FB = FA if side_b == side_a else _field_matrix(a, side_b, params, h_inner)
    dA = np.zeros((6, 6, 6))  # dA[i, k, :] = d_k of field i
    dB = np.zeros((6, 6, 6))
    for k in range(6):
        for s, w in _D4:
            e = np.zeros(6)
            e[k] = s * h_outer
            dA[:, k, :] += w * _field_matrix(a + e, side_a, params, h_inner)
            if side_b != side_a:
                dB[:, k, :] += w * _field_matrix(a + e, side_b, params, h_inner)
    dA /= h_outer
    dB = dA if side_b == side_a else dB / h_outer
    out = np.zeros((6, 6, 6))
    for i in range(6):
        for j in range(6):
            out[i, j] = FA[i] @ dB[j] - FB[j] @ dA[i]
    return out, FA, FB


def operator_images(params: PhysParams) -> dict[str, WeylOp]:
    """Identification of right-invariant fields with quantum operators."""
    hb = params.hbar
    o = phase_ops(params)
    f = 1 / (1j * hb)
    return {
        "t": bateman_hamiltonian_op(params) * f,
        "x": o["px"] * f,
        "y": o["py"] * f,
        "px": o["x"] * (-f),
        "py": o["y"] * (-f),
        "Xi": WeylOp.identity() * 1j,
    }


def expected_structure(params: PhysParams) -> np.ndarray:
    """Structure constants ``c[i, j, k]`` of the identified operator algebra."""
    imgs = operator_images(params)
    names = list(FIELD_NAMES)
    keys = sorted({k for op in imgs.values() for k in op.monomials})
    basis = np.array([[complex(imgs[n].coeff(*k)(0.0)) for k in keys] for n in names]).T
    c = np.zeros((6, 6, 6))
    for i, j in itertools.product(range(6), repeat=2):
        br = op_commutator(imgs[names[i]], imgs[names[j]])
        if set(br.monomials) - set(keys):
            raise ValueError("bracket leaves the span of the identified operators")
        vec = np.array([complex(br.coeff(*k)(0.0)) for k in keys])
        sol, *_ = np.linalg.lstsq(basis, vec, rcond=None)
        if np.max(np.abs(basis @ sol - vec)) > 1e-12 or np.max(np.abs(sol.imag)) > 1e-12:
            raise ValueError("bracket not a real combination of the identified operators")
        c[i, j] = sol.real
    return c


def verify_group_closure(params: PhysParams, n_points: int = 20, seed: int = 0, tol: float = 1e-6,
                         raise_on_fail: bool = True) -> dict:
    """Right-invariant fields close onto the operator algebra; left fields give the opposite sign."""
    rng = np.random.default_rng(seed)
    c_expected = expected_structure(params)
    worst = {"right": 0.0, "left": 0.0, "mixed": 0.0}
    per_pair = np.zeros((6, 6))
    for _ in range(n_points):
        g = GroupElement(*rng.uniform(-1, 1, 5), rng.uniform(-math.pi, math.pi))
        for side, sign in (("right", 1.0), ("left", -1.0)):
            br, F, _ = field_brackets(g, side, side, params)
            for i, j in itertools.product(range(6), repeat=2):
                coef = np.linalg.solve(F.T, br[i, j])
                dev = float(np.max(np.abs(coef - sign * c_expected[i, j])))
                worst[side] = max(worst[side], dev)
                if side == "right":
                    per_pair[i, j] = max(per_pair[i, j], dev)
        mixed, _, _ = field_brackets(g, "left", "right", params)
        worst["mixed"] = max(worst["mixed"], float(np.max(np.abs(mixed))))
    rows = [
        {"bracket": f"[X_{FIELD_NAMES[i]},X_{FIELD_NAMES[j]}]", "max_dev": float(per_pair[i, j]),
         "expected": {FIELD_NAMES[k]: float(c_expected[i, j, k]) for k in range(6) if c_expected[i, j, k]}}
        for i, j in itertools.combinations(range(6), 2)
    ]
    report = {
        "n_points": n_points,
        "right_max_dev": worst["right"],
        "left_max_dev": worst["left"],
        "left_right_max_bracket": worst["mixed"],
        "rows": rows,
        "all_pass": all(v <= tol for v in worst.values()),
    }
    if raise_on_fail and not report["all_pass"]:
        raise MismatchReport("invariant fields do not close on the expected algebra", report)
    return report


def associativity_error(params: PhysParams, n_triples: int = 1000, seed: int = 0, scale: float = 1.0) -> dict:
    rng = np.random.default_rng(seed)
    worst_coord = 0.0
    worst_phase = 0.0
    for _ in range(n_triples):
        g1, g2, g3 = (GroupElement(*rng.uniform(-scale, scale, 5), rng.uniform(-math.pi, math.pi)) for _ in range(3))
        a = compose(g3, compose(g2, g1, params), params)
        b = compose(compose(g3, g2, params), g1, params)
        worst_coord = max(worst_coord, float(np.abs(a.as_array()[:5] - b.as_array()[:5]).max()))
        worst_phase = max(worst_phase, abs(wrap_phase(a.phase - b.phase)))
    return {"n_triples": n_triples, "max_coord_error": worst_coord, "max_phase_error": worst_phase}


def reference_fields(g: GroupElement, side: str, params: PhysParams) -> dict[str, np.ndarray]:
    """Reference closed-form fields (components on ``d_t..Xi``)."""
    m, gm, hb, Om = params.m, params.gamma, params.hbar, params.Omega
    t, x, y, px, py = g.t, g.x, g.y, g.px, g.py
    if side == "left":
        return {
            "t": np.array([1, -gm / 2 * x + py / m, gm / 2 * y + px / m,
                           gm / 2 * px - m * Om**2 * y, -gm / 2 * py - m * Om**2 * x, 0]),
            "x": np.array([0, 1, 0, 0, 0, -px / hb]),
            "y": np.array([0, 0, 1, 0, 0, 0]),
            "px": np.array([0, 0, 0, 1, 0, 0]),
            "py": np.array([0, 1, 0, 0, 0, y / hb]),
        }
    e, E = math.exp(-gm * t / 2), math.exp(gm * t / 2)
    c, s = math.cos(Om * t), math.sin(Om * t)
    return {
        "t": np.array([1, 0, 0, 0, 0, 0]),
        "x": np.array([0, e * c, 0, 0, -m * Om * e * s, 0]),
        "y": np.array([0, 0, E * c, -m * Om * E * s, 0, (py * E * c + m * Om * x * E * s) / hb]),
        "px": np.array([0, 0, E * s / (m * Om), E * c, 0, -(x * E * c - py * E * s / (m * Om)) / hb]),
        "py": np.array([0, e * s / (m * Om), 0, 0, e * c, 0]),
    }


def field_discrepancies(params: PhysParams, n_points: int = 20, seed: int = 1, tol: float = 1e-8) -> dict:
    """Component-wise comparison of derived fields with the reference closed forms."""
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}
    for _ in range(n_points):
        g = GroupElement(*rng.uniform(-1, 1, 5), 0.0)
        for side in ("left", "right"):
            derived = {f.name: f.components for f in invariant_fields(g, side, params)}
            for name, comp in reference_fields(g, side, params).items():
                key = f"{side}:{name}"
                worst[key] = max(worst.get(key, 0.0), float(np.max(np.abs(derived[name] - comp))))
    flagged = sorted(k for k, v in worst.items() if v > tol)
    return {"max_component_difference": worst, "flagged": flagged}
