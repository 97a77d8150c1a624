"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Every criterion is driven through its shipped config in ``configs/`` (the
same files the CLI runs) and the reported numbers are re-checked here at the
stated tolerances.  Runtime limits are measured on the core computation.
Run ``python tests/test_acceptance.py`` for the summary lines alone.
"""

import contextlib
import time
from pathlib import Path

import numpy as np
import pytest

from ckbateman import cli
from ckbateman.bateman import hamiltonian_match
from ckbateman.ck_ops import (
    bateman_basic_catalog,
    build_catalog,
    reduce_k_minus_one,
    seven_table,
    solve_central_extensions,
    verify_reconstruction,
    verify_seven_algebra,
)
from ckbateman.damped_particle import build_dp, subalgebra_closure, verify_dp_algebra
from ckbateman.mixedrep import EigenLabel, energy_scan, stationary_residual
from ckbateman.weylalg import PhysParams

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"
RESULTS: list[str] = []


@contextlib.contextmanager
def criterion(number: int, title: str):
    """Record a PASS/FAIL line for the enclosed checks; details go in the yielded dict."""
    info: dict = {}
    try:
        yield info
    except BaseException:
        line = f"FAIL  {number:2d}. {title}  {_fmt(info)}"
        RESULTS.append(line)
        print(line)
        raise
    line = f"PASS  {number:2d}. {title}  {_fmt(info)}"
    RESULTS.append(line)
    print(line)


def _fmt(info: dict) -> str:
    return " ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}" for k, v in info.items())


def run_config(name: str, tmp_path: Path) -> tuple[int, dict, float]:
    data = cli.load_config(CONFIG_DIR / f"{name}.json")
    data["output_dir"] = str(tmp_path / name)
    data["plots"] = False
    cfg = cli.build_config(data)
    t0 = time.perf_counter()
    status, report = cli.run(cfg)
    return status, report, time.perf_counter() - t0


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


@pytest.fixture
def p():
    return PhysParams(m=1.0, gamma=0.2, omega=1.0, hbar=1.0)


def test_criterion_01_seven_dimensional_algebra(p, tmp_path):
    with criterion(1, "seven-dimensional algebra, 21 brackets < 1e-12, < 1 s") as info:
        status, report, _ = run_config("acc01_seven_algebra", tmp_path)
        rep, dt = timed(lambda: verify_seven_algebra(build_catalog(p), raise_on_fail=False))
        info.update(brackets=rep["n_brackets"], max_dev=rep["max_dev"], seconds=dt)
        assert status == 0 and report["result"]["checks"]["seven_algebra_21_brackets"]
        assert rep["n_brackets"] == 21
        assert all(r["max_dev"] < 1e-12 for r in rep["rows"])
        assert dt < 1.0


def test_criterion_02_central_extension_family(p, tmp_path):
    with criterion(2, "central extensions: family dimension 1, k = +-1 charges, < 1 s") as info:
        status, report, _ = run_config("acc02_central_extensions", tmp_path)
        ext, dt = timed(solve_central_extensions, seven_table(p, None), hbar=p.hbar)
        info.update(family_dim=ext.family_dim, seconds=dt)
        assert status == 0
        assert ext.family_dim == 1 and ext.k_parameterization_ok
        assert max(ext.k_checks.values()) < 1e-10
        i, hb = 1j, p.hbar
        reference = {
            1.0: {("X", "P"): i * hb, ("Qt", "Pi"): i * hb, ("Qt", "P"): 0, ("H", "G2"): -2 * i * hb},
            -1.0: {("X", "P"): i * hb, ("Qt", "Pi"): -i * hb, ("Qt", "P"): 2 * i * hb, ("H", "G2"): 0},
        }
        for k, charges in reference.items():
            for pair, value in charges.items():
                assert abs(ext.charges(k, p)[pair] - value) < 1e-12, (k, pair)
        assert dt < 1.0


def test_criterion_03_k_minus_one_and_reconstruction(p, tmp_path):
    with criterion(3, "k = -1 reduction to 5+1 and Hamiltonian reconstruction, exact, < 1 s") as info:
        status, report, _ = run_config("acc03_k_minus_one", tmp_path)
        t0 = time.perf_counter()
        red = reduce_k_minus_one(build_catalog(p), raise_on_fail=False)
        rec = verify_reconstruction(bateman_basic_catalog(p), raise_on_fail=False)
        dt = time.perf_counter() - t0
        worst = max(r["max_dev"] for r in rec["rows"])
        info.update(reconstruction_max_dev=worst, seconds=dt)
        assert status == 0
        assert red["all_pass"] and red["bateman_realization"]["all_pass"]
        assert [r["operator"] for r in rec["rows"]] == ["X", "P", "Q", "Pi"]
        assert worst <= 1e-12 and rec["difference_is_constant"]
        assert dt < 1.0


def test_criterion_04_bateman_algebra_and_classical_consistency(p, tmp_path):
    with criterion(4, "Bateman algebra exact; H match < 1e-10; x-projection < 1e-6") as info:
        status, report, _ = run_config("acc04_bateman", tmp_path)
        res = report["result"]
        pts = np.random.default_rng(123).uniform(-2, 2, (100, 4))
        hm = hamiltonian_match(p, pts)
        info.update(H_match=hm, x_projection=res["x_projection_max_dev"])
        assert status == 0 and res["algebra"]["all_pass"]
        assert res["algebra"]["max_dev"] <= 1e-12
        assert hm < 1e-10 and res["hamiltonian_match_max_dev"] < 1e-10
        assert report["options"]["t_final"] == 10.0
        assert res["x_projection_max_dev"] < 1e-6


def test_criterion_05_conservation(tmp_path):
    with criterion(5, "Crank-Nicolson: norm/step < 1e-10, <X>,<P> < 1e-5, <H_DHO> > 1%, < 30 s") as info:
        status, report, dt = run_config("acc05_conservation", tmp_path)
        res = report["result"]
        cons = res["conservation"]
        grid = res["grid"]
        info.update(norm_step=res["max_step_norm_drift"], X=cons["X"]["max_rel_drift"],
                    P=cons["P"]["max_rel_drift"], H_DHO=cons["H_DHO"]["max_rel_drift"], seconds=dt)
        assert grid["dx"] <= 1 / 128 and grid["dt"] <= 1e-3
        assert report["params"]["gamma"] == 0.2 and report["params"]["omega"] == 1.0
        assert abs(grid["n_steps"] * grid["dt"] - 2 * np.pi / PhysParams().Omega) < 1e-9
        assert res["max_step_norm_drift"] < 1e-10
        assert cons["X"]["max_rel_drift"] < 1e-5
        assert cons["P"]["max_rel_drift"] < 1e-5
        assert cons["H_DHO"]["max_rel_drift"] > 0.01
        assert status == 0
        assert dt < 30.0


def test_criterion_06_qat_transport(tmp_path):
    with criterion(6, "inverse-QAT image residual < 1e-5; roundtrip L2 < 1e-12") as info:
        status, report, _ = run_config("acc06_qat", tmp_path)
        res = report["result"]
        info.update(residual=res["ck_equation_residual"], roundtrip=res["roundtrip_ck_l2"])
        assert res["ck_equation_residual"] < 1e-5
        assert res["roundtrip_ck_l2"] < 1e-12 and res["roundtrip_free_l2"] < 1e-12
        assert status == 0


def test_criterion_07_group_axioms(tmp_path):
    with criterion(7, "group: associativity on 1000 triples < 1e-10; right fields close < 1e-6") as info:
        status, report, _ = run_config("acc07_group", tmp_path)
        assoc = report["result"]["associativity"]
        closure = report["result"]["closure"]
        info.update(coord=assoc["max_coord_error"], phase=assoc["max_phase_error"],
                    closure=closure["right_max_dev"])
        assert assoc["n_triples"] == 1000
        assert assoc["max_coord_error"] < 1e-10 and assoc["max_phase_error"] < 1e-10
        assert closure["right_max_dev"] < 1e-6
        assert status == 0


def test_criterion_08_spectrum(p, tmp_path):
    with criterion(8, "spectrum: scan accepts only n hbar Omega + lambda hbar gamma; residual < 1e-5") as info:
        status, report, _ = run_config("acc08_spectrum", tmp_path)
        hO, hg = p.hbar * p.Omega, p.hbar * p.gamma
        worst_dev = worst_res = 0.0
        n_acc = 0
        for lam in (0.0, 0.25, 0.5):
            scan = energy_scan(p, lam, -5 * hO, 5 * hO)
            assert scan["all_rule_points_accepted"]
            for E in scan["accepted"]:
                n = round((E - lam * hg) / hO)
                worst_dev = max(worst_dev, abs(E - (n * hO + lam * hg)))
                worst_res = max(worst_res, stationary_residual(EigenLabel(E=E, n=n, lam=lam), p, n_points=20))
                n_acc += 1
        info.update(accepted=n_acc, rule_dev=worst_dev, residual=worst_res)
        assert worst_dev < 1e-9 and worst_res < 1e-5
        assert all(r["residual"] < 1e-5 for r in report["result"]["labels"])
        assert status == 0


def test_criterion_09_constraints(tmp_path):
    with criterion(9, "constraints: good operators commute with C1, [H_B, C1] != 0, classical < 1e-8") as info:
        status, report, _ = run_config("acc09_constraints", tmp_path)
        res = report["result"]
        good = res["good_operators"]
        info.update(classical=res["classical_constraints"]["max_violation"])
        assert good["G1"]["commutator_zero"] and good["G2"]["commutator_zero"]
        assert not good["H_B"]["commutator_zero"]
        assert res["classical_constraints"]["max_violation"] < 1e-8
        assert report["options"]["t_final"] == 5.0
        assert status == 0


def test_criterion_10_reduction_to_ck(tmp_path):
    with criterion(10, "reduction to CK on t in [0.3, 1.2], A = +1: residual < 1e-5; branch map") as info:
        status, report, _ = run_config("acc10_reduction", tmp_path)
        res = report["result"]
        red = res["reduction"]
        branch = res["branch"]["chain"]
        info.update(residual=red["max_rel_residual"], tau_prime_0=branch["tau_prime_near_zero"])
        assert red["A"] == 1.0 and red["t_window"] == [0.3, 1.2] and not red["skipped_times"]
        assert red["max_rel_residual"] < 1e-5
        assert branch["tau_prime_near_zero"] < 1e-3
        assert branch["sign_pos"] and branch["sign_neg"]
        assert res["branch"]["pass"]
        assert status == 0


def test_criterion_11_damped_particle_algebra(tmp_path):
    with criterion(11, "damped-particle algebra n <= 6 exact; finite subalgebra closes; < 1 s") as info:
        status, report, _ = run_config("acc11_dp", tmp_path)
        q = PhysParams(m=1.0, gamma=0.2, omega=0.0, hbar=1.0)
        t0 = time.perf_counter()
        alg = build_dp(q, 6)
        rep = verify_dp_algebra(alg, raise_on_fail=False)
        sub = subalgebra_closure(alg)
        dt = time.perf_counter() - t0
        info.update(brackets=rep["n_brackets"], max_dev=rep["max_dev"], seconds=dt)
        assert rep["all_pass"] and rep["max_dev"] <= 1e-12
        assert sub["closes"]
        assert status == 0
        assert dt < 1.0


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
