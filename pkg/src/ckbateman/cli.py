"""Command-line entry point: verification suites, simulations and reports.

Every command writes ``report.json`` (plus CSV data and PNG figures) into the
output directory and exits with 0 on pass, 1 on a verification failure and 2
on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CKBatemanError, ConfigError, MismatchReport
from .weylalg import PhysParams

COMMANDS = (
    "simulate ck",
    "simulate bateman",
    "verify ck-algebra",
    "verify bateman-algebra",
    "verify group",
    "verify reduction",
    "verify dp",
    "spectrum",
    "qat-roundtrip",
)

DEFAULTS: dict[str, dict] = {
    "simulate ck": {"dt": 5e-4, "n": 4096, "x_min": -16.0, "x_max": 16.0, "periods": 1.0,
                    "sigma": 1.0, "k0": 1.0, "p0": 0.5, "snapshots": 64, "stencil": 5},
    "simulate bateman": {"state": [1.0, 0.5, 0.0, 0.2], "t_final": 10.0, "dt": 0.01, "n_points": 100},
    "verify ck-algebra": {},
    "verify bateman-algebra": {"n_points": 100, "t_final": 10.0},
    "verify group": {"n_triples": 1000, "n_points": 20},
    "verify reduction": {"A": 1.0, "t_window": [0.3, 1.2], "n_t": 10, "n_classical": 5,
                         "t_final": 5.0, "grid_check": True},
    "verify dp": {"N": 6},
    "spectrum": {"n_min": -5, "n_max": 5, "lambdas": [0.0, 0.25, 0.5], "n_points": 50,
                 "e_min": -5.0, "e_max": 5.0},
    "qat-roundtrip": {"t": 0.5, "n": 4096, "x_min": -16.0, "x_max": 16.0, "sigma": 1.0, "k0": 0.5, "p0": 0.3},
}


@dataclass
class RunConfig:
    command: str
    params: PhysParams = field(default_factory=PhysParams)
    options: dict = field(default_factory=dict)
    output_dir: str = "out"
    seed: int = 0
    plots: bool = True

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown command {self.command!r}; expected one of {COMMANDS}")
        known = DEFAULTS[self.command]
        unknown = sorted(set(self.options) - set(known))
        if unknown:
            raise ConfigError(f"options.{unknown[0]}: not an option of {self.command!r}")
        self.options = {**known, **self.options}
        if self.command != "verify dp" and not self.params.underdamped:
            raise ConfigError(
                f"params.omega: underdamped regime required (omega={self.params.omega} must exceed "
                f"gamma/2={self.params.gamma / 2})"
            )
        if self.command == "verify reduction":
            lo, hi = _window(self.options["t_window"])
            if self.options["A"] == 0:
                raise ConfigError("options.A: branch constant must be nonzero")
            if self.options["A"] * lo <= 0 or self.options["A"] * hi <= 0:
                raise ConfigError("options.A: sign must match the sign of the t_window (A > 0 for t > 0)")
        if self.command == "verify dp" and (not isinstance(self.options["N"], int) or self.options["N"] < 1):
            raise ConfigError("options.N: truncation level must be an integer >= 1")
        if self.command == "simulate ck":
            n = self.options["n"]
            if not isinstance(n, int) or n < 8 or n & (n - 1):
                raise ConfigError("options.n: grid size must be a power of two")
            if not self.options["dt"] > 0:
                raise ConfigError("options.dt: must be positive")

    @property
    def slug(self) -> str:
        return self.command.replace(" ", "_")


def _window(w) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in w)
    except (TypeError, ValueError):
        raise ConfigError("options.t_window: expected two numbers") from None
    if not hi > lo:
        raise ConfigError("options.t_window: upper end must exceed lower end")
    return lo, hi


def _params(d: dict) -> PhysParams:
    fields = {f.name for f in dataclasses.fields(PhysParams)}
    unknown = sorted(set(d) - fields)
    if unknown:
        raise ConfigError(f"params.{unknown[0]}: unknown parameter")
    try:
        return PhysParams(**{k: float(v) for k, v in d.items()})
    except ValueError as exc:
        name = str(exc).split()[0] if str(exc) else "params"
        name = {"damping": "gamma", "frequency": "omega", "mass": "m"}.get(name, name)
        raise ConfigError(f"params.{name}: {exc}") from None


def load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config: file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be an object")
    return data


def build_config(data: dict) -> RunConfig:
    allowed = {"command", "params", "options", "output_dir", "seed", "plots"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown config field")
    if "command" not in data:
        raise ConfigError("command: missing")
    return RunConfig(
        command=data["command"],
        params=_params(data.get("params", {})),
        options=dict(data.get("options", {})),
        output_dir=str(data.get("output_dir", "out")),
        seed=int(data.get("seed", 0)),
        plots=bool(data.get("plots", True)),
    )


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, (np.floating, float)):
        v = float(o)
        return v if math.isfinite(v) else str(v)
    if isinstance(o, (complex, np.complexfloating)):
        return [float(o.real), float(o.imag)]
    return o


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
    return path


def write_bracket_csv(path, rows, key: str = "bracket") -> Path:
    return write_csv(path, ["bracket", "max_dev", "ok"], [(r[key], float(r["max_dev"]), int(r["ok"])) for r in rows])


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _phase_aligned(state, ref) -> dict:
    overlap = np.sum(np.conj(ref.psi) * state.psi) * state.dx
    phase = float(np.angle(overlap))
    dist = float(np.sqrt(np.sum(np.abs(state.psi - np.exp(1j * phase) * ref.psi) ** 2) * state.dx))
    return {"global_phase": phase, "l2_after_alignment": dist}


def cmd_simulate_ck(cfg: RunConfig, out: Path) -> tuple[dict, bool]:
    from .arnold import ck_gaussian_state
    from .ck_evolve import EvolveConfig, conservation_report, evolve_ck
    from .ck_ops import build_catalog, hamiltonian_dho
    from .model_core import build_basis

    p, o = cfg.params, cfg.options
    basis = build_basis(p)
    span = o["periods"] * 2 * math.pi / p.Omega
    n_steps = max(1, math.ceil(span / o["dt"]))
    snap = max(1, n_steps // o["snapshots"])
    ec = EvolveConfig(dt=span / n_steps, n_steps=n_steps, x_min=o["x_min"], x_max=o["x_max"], n=o["n"],
                      snapshot_every=snap, stencil=o["stencil"])
    gauss = {k: o[k] for k in ("sigma", "k0", "p0")}
    s0 = ck_gaussian_state(ec.grid(), 0.0, basis, **gauss)
    evo = evolve_ck(s0, ec)
    cat = build_catalog(p)
    ops = {"X": cat.X, "P": cat.P, "H_DHO": hamiltonian_dho(p)}
    rep = conservation_report(evo, ops)
    exact = ck_gaussian_state(ec.grid(), evo[-1].t, basis, **gauss)
    ops_rep = rep["operators"]
    checks = {
        "norm_step_drift_lt_1e-10": rep["max_step_norm_drift"] < 1e-10,
        "X_rel_drift_lt_1e-5": ops_rep["X"]["max_rel_drift"] < 1e-5,
        "P_rel_drift_lt_1e-5": ops_rep["P"]["max_rel_drift"] < 1e-5,
        "H_DHO_rel_drift_gt_1pct": ops_rep["H_DHO"]["max_rel_drift"] > 0.01,
    }
    report = {
        "grid": {"dx": ec.dx, "dt": ec.dt, "n_steps": n_steps, "n": ec.n, "x_min": ec.x_min, "x_max": ec.x_max,
                 "stencil": ec.stencil, "dx_le_1/128": ec.dx <= 1 / 128, "dt_le_1e-3": ec.dt <= 1e-3},
        "gaussian": gauss,
        "conservation": {k: {kk: vv for kk, vv in v.items() if kk != "series_re"} for k, v in ops_rep.items()},
        "norm_drift": rep["norm_drift"],
        "max_step_norm_drift": rep["max_step_norm_drift"],
        "max_edge_amplitude": evo.max_edge_amplitude,
        # the closed form carries no Maslov phase past zeros of u2; compare up to a global phase
        "final_vs_closed_form": _phase_aligned(evo[-1], exact),
        "checks": checks,
    }
    times = rep["times"]
    write_csv(out / "expectations.csv", ["t", "X", "P", "H_DHO", "norm"],
              zip(times, *(ops_rep[k]["series_re"] for k in ("X", "P", "H_DHO")), [s.norm() for s in evo]))
    evo[-1].save(out / "final_state")
    if cfg.plots:
        from .plots import density_plot, expectations_plot

        expectations_plot(times, {k: ops_rep[k]["series_re"] for k in ("X", "P", "H_DHO")},
                          out / "expectations.png", "Crank-Nicolson expectations")
        picks = [evo[0], evo[len(evo) // 2], evo[-1]]
        density_plot(ec.grid(), [s.psi for s in picks], out / "density.png", [f"t={s.t:.3f}" for s in picks])
    return report, all(checks.values())


def cmd_simulate_bateman(cfg: RunConfig, out: Path) -> tuple[dict, bool]:
    from .bateman import (GaussianState4, PhaseState4, classical_flow, exact_flow, gaussian_propagate,
                          hamiltonian_b, hamiltonian_match, symplectic_deviation, symplectic_eigenvalues,
                          uncertainty_min_eig)
    from .model_core import build_basis, classical_trajectory

    p, o = cfg.params, cfg.options
    s0 = PhaseState4(*o["state"])
    traj = classical_flow(s0, o["t_final"], o["dt"], p)
    ex = exact_flow(s0, traj.times, p)
    energy = hamiltonian_b(p, *traj.states.T)
    e0 = energy[0]
    rng = np.random.default_rng(cfg.seed)
    hm = hamiltonian_match(p, rng.uniform(-2, 2, (o["n_points"], 4)))
    basis = build_basis(p)
    v0 = s0.py / p.m - p.gamma * s0.x / 2
    ck = classical_trajectory(basis, s0.x, v0, traj.times)
    xproj = float(np.max(np.abs(traj.states[:, 0] - ck.positions)))
    g0 = GaussianState4(mean=s0.as_array(), cov=0.5 * p.hbar * np.eye(4))
    g1 = gaussian_propagate(g0, o["t_final"], p)
    checks = {
        "symplectic_map": symplectic_deviation(p) < 1e-12,
        "hamiltonian_match_lt_1e-10": hm < 1e-10,
        "x_projection_lt_1e-6": xproj < 1e-6,
        "energy_conserved": float(np.max(np.abs(energy - e0))) <= 1e-8 * max(1.0, abs(e0)),
        "uncertainty_respected": uncertainty_min_eig(g1, p.hbar) >= -1e-10,
    }
    report = {
        "initial_state": list(o["state"]),
        "flow_vs_closed_form": float(np.max(np.abs(traj.states - ex.states))),
        "energy_initial": e0,
        "energy_max_abs_drift": float(np.max(np.abs(energy - e0))),
        "hamiltonian_match_max_dev": hm,
        "x_projection_vs_ck_max_dev": xproj,
        "gaussian_final_mean": g1.mean,
        "gaussian_final_symplectic_eigenvalues": symplectic_eigenvalues(g1.cov),
        "gaussian_min_uncertainty_eigenvalue": uncertainty_min_eig(g1, p.hbar),
        "checks": checks,
    }
    traj.to_csv(out / "trajectory.csv")
    if cfg.plots:
        from .plots import trajectory_plot

        trajectory_plot(traj.times, traj.states, out / "trajectory.png", reference=ck.positions)
    return report, all(checks.values())


def cmd_verify_ck_algebra(cfg: RunConfig, out: Path) -> tuple[dict, bool]:
    from .ck_ops import (bateman_basic_catalog, build_catalog, jacobi_catalog, k_charges, reduce_k_minus_one,
                         seven_table, solve_central_extensions, verify_reconstruction, verify_seven_algebra)

    p = cfg.params
    cat = build_catalog(p)
    seven = verify_seven_algebra(cat, raise_on_fail=False)
    ext = solve_central_extensions(seven_table(p, None), hbar=p.hbar)
    red = reduce_k_minus_one(cat, raise_on_fail=False)
    rec = verify_reconstruction(bateman_basic_catalog(p), raise_on_fail=False)
    write_bracket_csv(out / "brackets.csv", seven["rows"])
    charges = {str(k): {f"[{a},{b}]": v for (a, b), v in k_charges(p, k).items()} for k in (1.0, -1.0)}
    checks = {
        "seven_algebra_21_brackets": seven["all_pass"] and seven["n_brackets"] == 21,
        "extension_family_dim_1": ext.family_dim == 1 and ext.k_parameterization_ok,
        "k_minus_one_reduction": red["all_pass"],
        "hamiltonian_reconstruction": rec["all_pass"],
    }
    report = {
        "seven_algebra": seven,
        "jacobi_max_defect": jacobi_catalog(cat),
        "central_extensions": ext.to_json(),
        "k_charges": charges,
        "k_minus_one": red,
        "reconstruction": rec,
        "checks": checks,
    }
    return report, all(checks.values())


def cmd_verify_bateman_algebra(cfg: RunConfig, out: Path) -> tuple[dict, bool]:
    from .bateman import (PhaseState4, classical_flow, flow_generator, hamiltonian_match, heisenberg_velocity,
                          symplectic_deviation, verify_bateman_algebra)
    from .model_core import build_basis, classical_trajectory

    p, o = cfg.params, cfg.options
    alg = verify_bateman_algebra(p, raise_on_fail=False)
    write_bracket_csv(out / "brackets.csv", alg["rows"])
    rng = np.random.default_rng(cfg.seed)
    hm = hamiltonian_match(p, rng.uniform(-2, 2, (o["n_points"], 4)))
    S = flow_generator(p)
    vel = max(float(np.max(np.abs(heisenberg_velocity(p, n) - S[j]))) for j, n in enumerate(("x", "y", "px", "py")))
    basis = build_basis(p)
    worst = 0.0
    for _ in range(5):
        s0 = PhaseState4(*rng.uniform(-1, 1, 4))
        traj = classical_flow(s0, o["t_final"], 0.01, p)
        ck = classical_trajectory(basis, s0.x, s0.py / p.m - p.gamma * s0.x / 2, traj.times)
        worst = max(worst, float(np.max(np.abs(traj.states[:, 0] - ck.positions))))
    checks = {
        "bateman_table_exact": alg["all_pass"],
        "symplectic_map": symplectic_deviation(p) < 1e-12,
        "hamiltonian_match_lt_1e-10": hm < 1e-10,
        "x_projection_lt_1e-6": worst < 1e-6,
        "heisenberg_velocities": vel < 1e-12,
    }
    report = {
        "algebra": alg,
        "symplectic_deviation": symplectic_deviation(p),
        "hamiltonian_match_max_dev": hm,
        "x_projection_max_dev": worst,
        "heisenberg_velocity_max_dev": vel,
        "checks": checks,
    }
    return report, all(checks.values())


def cmd_verify_group(cfg: RunConfig, out: Path) -> tuple[dict, bool]:
    from .bateman import PhaseState4, classical_flow
    from .bateman_group import (GroupElement, IDENTITY, associativity_error, compose, field_discrepancies,
                                inverse, time_element, verify_group_closure)

    p, o = cfg.params, cfg.options
    assoc = associativity_error(p, o["n_triples"], seed=cfg.seed)
    closure = verify_group_closure(p, o["n_points"], seed=cfg.seed, raise_on_fail=False)
    write_bracket_csv(out / "field_brackets.csv", [{**r, "ok": r["max_dev"] <= 1e-6} for r in closure["rows"]])
    disc = field_discrepancies(p, seed=cfg.seed + 1)
    rng = np.random.default_rng(cfg.seed + 2)
    inv_err = 0.0
    for _ in range(100):
        g = GroupElement(*rng.uniform(-1, 1, 5), rng.uniform(-math.pi, math.pi))
        inv_err = max(inv_err, compose(inverse(g, p), g, p).distance(IDENTITY),
                      compose(g, inverse(g, p), p).distance(IDENTITY))
    v0 = rng.uniform(-1, 1, 4)
    traj = classical_flow(PhaseState4(*v0), 5.0, 0.05, p)
    sub = max(
        float(np.max(np.abs(compose(GroupElement(0.0, *v0), time_element(t), p).vector() - v)))
        for t, v in zip(traj.times, traj.states)
    )
    checks = {
        "associativity_lt_1e-10": max(assoc["max_coord_error"], assoc["max_phase_error"]) < 1e-10,
        "right_fields_close_1e-6": closure["all_pass"],
        "inverse": inv_err < 1e-12,
        "time_subgroup_is_flow": sub < 1e-8,
    }
    report = {"associativity": assoc, "closure": closure, "field_display_comparison": disc,
              "inverse_max_error": inv_err, "time_subgroup_vs_flow": sub, "checks": checks}
    return report, all(checks.values())


def cmd_verify_reduction(cfg: RunConfig, out: Path) -> tuple[dict, bool]:
    from .constraint_reduce import (branch_checks, branch_table, chi_grid_check, classical_constraint_check,
                                    constrained_point, good_operator_check, good_operator_transport,
                                    literal_consistency, literal_residual, verify_reduction_to_ck)

    p, o = cfg.params, cfg.options
    A = float(o["A"])
    window = _window(o["t_window"])
    good = good_operator_check(p, raise_on_fail=False)
    rng = np.random.default_rng(cfg.seed)
    classical = [classical_constraint_check(constrained_point(*rng.uniform(-1, 1, 2), p), p, t_final=o["t_final"])
                 for _ in range(o["n_classical"])]
    red = verify_reduction_to_ck(p, A=A, t_window=window, n_t=o["n_t"])
    red_minus = verify_reduction_to_ck(p, A=A, sigma=-1, t_window=window, n_t=o["n_t"])
    branch = branch_checks(p, abs(A), t_max=max(abs(window[0]), abs(window[1])))
    transport = good_operator_transport(p, A=A)
    report = {
        "good_operators": good,
        "classical_constraints": {"max_violation": max(c["max_violation"] for c in classical),
                                  "plus_exponent_second_relation_max_violation":
                                      max(c["plus_exponent_second_relation_max_violation"] for c in classical)},
        "reduction": red,
        "reduction_sigma_minus_one": red_minus,
        "closed_form_phase_vs_family": literal_consistency(p),
        "closed_form_maps_residual": literal_residual(p, A, window, o["n_t"]),
        "branch": branch,
        "good_operator_transport": transport,
    }
    checks = {
        "good_operators_commute": good["all_pass"],
        "classical_preserved_1e-8": all(c["preserved"] for c in classical),
        "reduced_residual_lt_1e-5": red["pass"],
        "branch_map": branch["pass"],
        "good_operators_map_to_basics": transport["pass"],
    }
    if o["grid_check"]:
        tau_max = max(r["tau"] for r in red["rows"])
        report["chi_grid_check"] = chi_grid_check(p, tau_max)
        checks["chi_grid_matches_closed_form"] = report["chi_grid_check"]["l2_error"] < 1e-5
    report["checks"] = checks
    rows = branch_table(p, A, window)
    write_csv(out / "branch_map.csv", ["t", "tau_chain", "tau_closed_form"],
              ([r["t"], r["tau_chain"], r["tau_closed_form"]] for r in rows))
    if cfg.plots:
        from .plots import branch_plot

        branch_plot(rows, out / "branch_map.png")
    return report, all(checks.values())


def cmd_verify_dp(cfg: RunConfig, out: Path) -> tuple[dict, bool]:
    from .damped_particle import build_dp, grading_check, limit_comparison, resolve_x_sign, subalgebra_closure
    from .damped_particle import verify_dp_algebra

    p = dataclasses.replace(cfg.params, omega=0.0)
    alg = build_dp(p, cfg.options["N"])
    rep = verify_dp_algebra(alg, raise_on_fail=False)
    write_bracket_csv(out / "brackets.csv", rep["rows"], key="pair")
    grading = grading_check(alg)
    sub = subalgebra_closure(alg)
    sign = resolve_x_sign(p, cfg.options["N"])
    limit = limit_comparison(p)
    checks = {
        "table_exact": rep["all_pass"],
        "Y0_central": rep["Y0_central"],
        "grading": grading["H_G_lowers"] and grading["H_DP_preserves"],
        "finite_subalgebra_closes": sub["closes"],
        "omega_to_zero_limit": limit["ok"],
    }
    report = {"algebra": rep, "grading": grading, "subalgebra": sub, "x_sign_resolution": sign,
              "omega_zero_limit": limit, "checks": checks}
    return report, all(checks.values())


def cmd_spectrum(cfg: RunConfig, out: Path) -> tuple[dict, bool]:
    from .mixedrep import energy_scan, loop_monodromy, spectrum_enumerate

    p, o = cfg.params, cfg.options
    if o["n_max"] < o["n_min"]:
        raise ConfigError("options.n_max: must be >= n_min")
    hO = p.hbar * p.Omega
    rows = spectrum_enumerate(range(o["n_min"], o["n_max"] + 1), o["lambdas"], p, n_points=o["n_points"],
                              seed=cfg.seed)
    for r in rows:
        r["loop_monodromy_error"] = abs(loop_monodromy(r["E"], r["lambda"], p) - 1)
    scans = [energy_scan(p, lam, o["e_min"] * hO, o["e_max"] * hO) for lam in o["lambdas"]]
    write_csv(out / "spectrum.csv", ["n", "lambda", "E", "E_over_hbar_Omega", "monodromy_error", "residual"],
              ([r["n"], r["lambda"], r["E"], r["E"] / hO, r["monodromy_error"], r["residual"]] for r in rows))
    checks = {
        "all_labels_residual_lt_1e-5": all(r["ok"] for r in rows),
        "loop_monodromy_single_valued": all(r["loop_monodromy_error"] < 1e-9 for r in rows),
        "scan_accepts_rule_only": all(s["all_rule_points_accepted"] and s["max_rule_deviation"] < 1e-9
                                      for s in scans),
    }
    report = {
        "labels": [{k: v for k, v in r.items() if k != "label"} for r in rows],
        "scans": [{k: v for k, v in s.items() if k != "accepted"} | {"n_accepted": len(s["accepted"])}
                  for s in scans],
        "checks": checks,
    }
    if cfg.plots:
        from .plots import spectrum_plot

        spectrum_plot(rows, out / "spectrum.png", hO)
    return report, all(checks.values())


def cmd_qat_roundtrip(cfg: RunConfig, out: Path) -> tuple[dict, bool]:
    from .arnold import (ck_gaussian, ck_gaussian_state, ck_residual, free_gaussian, free_gaussian_state,
                         qat_forward, qat_inverse, tau_of_t, uniform_grid)
    from .model_core import build_basis

    p, o = cfg.params, cfg.options
    basis = build_basis(p)
    gauss = {k: o[k] for k in ("sigma", "k0", "p0")}
    xs = uniform_grid(o["x_min"], o["x_max"], o["n"])
    t = o["t"]
    ck = ck_gaussian_state(xs, t, basis, **gauss)
    fwd = qat_forward(ck, basis)
    tau = tau_of_t(basis, t)
    analytic_free = free_gaussian(fwd.xs, tau, m=p.m, hbar=p.hbar, **gauss)
    fwd_err = float(np.sqrt(np.sum(np.abs(fwd.psi - analytic_free) ** 2) * fwd.dx))
    back = qat_inverse(fwd, basis)
    rt_ck = back.l2_distance(ck)
    free = free_gaussian_state(xs, tau, p, **gauss)
    free.meta["source_t"] = t
    rt_free = qat_forward(qat_inverse(free, basis), basis).l2_distance(free)
    xr = np.linspace(-3, 3, 61)
    res = float(np.max(ck_residual(lambda x, s: ck_gaussian(x, s, basis, **gauss), xr, t, p)))
    checks = {
        "roundtrip_lt_1e-12": max(rt_ck, rt_free) < 1e-12,
        "inverse_image_residual_lt_1e-5": res < 1e-5,
        "forward_matches_free_evolution": fwd_err < 1e-10,
    }
    report = {"t": t, "tau": tau, "roundtrip_ck_l2": rt_ck, "roundtrip_free_l2": rt_free,
              "forward_vs_free_l2": fwd_err, "ck_equation_residual": res, "checks": checks}
    write_csv(out / "qat_states.csv", ["x", "abs_psi_ck", "kappa", "abs_psi_free"],
              zip(ck.xs, np.abs(ck.psi), fwd.xs, np.abs(fwd.psi)))
    if cfg.plots:
        from .plots import density_plot

        density_plot(xs, [ck.psi, analytic_free], out / "qat.png", [f"CK t={t}", f"free (on kappa) tau={tau:.3f}"])
    return report, all(checks.values())


HANDLERS = {
    "simulate ck": cmd_simulate_ck,
    "simulate bateman": cmd_simulate_bateman,
    "verify ck-algebra": cmd_verify_ck_algebra,
    "verify bateman-algebra": cmd_verify_bateman_algebra,
    "verify group": cmd_verify_group,
    "verify reduction": cmd_verify_reduction,
    "verify dp": cmd_verify_dp,
    "spectrum": cmd_spectrum,
    "qat-roundtrip": cmd_qat_roundtrip,
}


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Execute one command; returns ``(exit_status, report)``."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        report, ok = HANDLERS[cfg.command](cfg, out)
    except MismatchReport as exc:
        report, ok = {"error": str(exc), "report": exc.report}, False
    full = {"command": cfg.command, "params": cfg.params.to_dict(), "options": cfg.options, "seed": cfg.seed,
            "pass": bool(ok), "result": report}
    write_json(out / "report.json", full)
    return (0 if ok else 1), full


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output directory")
    p.add_argument("--m", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--hbar", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-plots", action="store_true", help="skip PNG figures")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ckbateman", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="group", required=True)

    sim = sub.add_parser("simulate", help="run a simulation")
    sim.add_argument("target", choices=("ck", "bateman"))
    _add_common(sim)
    sim.add_argument("--dt", type=float)
    sim.add_argument("--n", type=int, help="grid size (power of two)")
    sim.add_argument("--t-final", type=float)

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("target", choices=("ck-algebra", "bateman-algebra", "group", "reduction", "dp"))
    _add_common(ver)
    ver.add_argument("--A", type=float, help="branch constant for the reduction")
    ver.add_argument("--t-window", help="reduction window 'lo:hi'")
    ver.add_argument("--N", type=int, help="truncation level for the damped particle")

    spc = sub.add_parser("spectrum", help="certify eigenvalue labels (n, lambda)")
    _add_common(spc)
    spc.add_argument("--n-min", type=int)
    spc.add_argument("--n-max", type=int)
    spc.add_argument("--lambdas", help="comma-separated lambda values")

    qat = sub.add_parser("qat-roundtrip", help="Arnold transformation roundtrip and residual")
    _add_common(qat)
    qat.add_argument("--t", type=float)

    runp = sub.add_parser("run", help="run the command named in a config file")
    _add_common(runp)
    return ap


def _command_of(ns) -> str | None:
    if ns.group in ("simulate", "verify"):
        return f"{ns.group} {ns.target}"
    if ns.group == "run":
        return None
    return ns.group


def config_from_args(ns) -> RunConfig:
    data = load_config(ns.config) if ns.config else {}
    cmd = _command_of(ns)
    if cmd is not None:
        if "command" in data and data["command"] != cmd:
            raise ConfigError(f"command: config names {data['command']!r} but {cmd!r} was requested")
        data["command"] = cmd
    elif "command" not in data:
        raise ConfigError("command: 'run' needs a config with a command field")
    params = dict(data.get("params", {}))
    for name in ("m", "gamma", "omega", "hbar"):
        if getattr(ns, name, None) is not None:
            params[name] = getattr(ns, name)
    data["params"] = params
    opts = dict(data.get("options", {}))
    over = {
        "dt": getattr(ns, "dt", None),
        "n": getattr(ns, "n", None),
        "t_final": getattr(ns, "t_final", None),
        "A": getattr(ns, "A", None),
        "N": getattr(ns, "N", None),
        "n_min": getattr(ns, "n_min", None),
        "n_max": getattr(ns, "n_max", None),
        "t": getattr(ns, "t", None),
    }
    if getattr(ns, "t_window", None):
        try:
            over["t_window"] = [float(v) for v in ns.t_window.split(":")]
        except ValueError:
            raise ConfigError("options.t_window: expected 'lo:hi'") from None
    if getattr(ns, "lambdas", None):
        try:
            over["lambdas"] = [float(v) for v in ns.lambdas.split(",")]
        except ValueError:
            raise ConfigError("options.lambdas: expected comma-separated numbers") from None
    opts.update({k: v for k, v in over.items() if v is not None})
    data["options"] = opts
    if ns.out:
        data["output_dir"] = ns.out
    elif "output_dir" not in data:
        data["output_dir"] = str(Path("out") / data["command"].replace(" ", "_"))
    if ns.seed is not None:
        data["seed"] = ns.seed
    if ns.no_plots:
        data["plots"] = False
    return build_config(data)


def main(argv=None) -> int:
    ns = make_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        status, report = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CKBatemanError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    verdict = "PASS" if status == 0 else "FAIL"
    print(f"{verdict} {cfg.command} -> {Path(cfg.output_dir) / 'report.json'}")
    checks = report["result"].get("checks", {})
    for name, ok in checks.items():
        print(f"  {'ok  ' if ok else 'FAIL'} {name}")
    return status


if __name__ == "__main__":
    sys.exit(main())
