"""Acceptance criteria 1-11, one test each.

Every test records a PASS/FAIL line that the terminal summary prints at the
end of the run (see conftest.py), then asserts.
"""

import subprocess
import sys

import numpy as np
import pytest

from conftest import ACCEPTANCE
from warpsimons import catalog, identities as idn
from warpsimons.ambient import AmbientConfig, ChartPoint, closed_form_tensor, constant_curvature, riemann_from_chart
from warpsimons.cli import sample_points
from warpsimons.extrinsic import Immersion, analyze, extrinsic_at

NAMES = catalog.names()
PP_ENTRIES = ("veronese_RxS4", "hyperbolic_veronese_cylinder", "adS_product")


def record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    print(f"{'PASS' if ok else 'FAIL'} {key}: {detail}")
    assert ok, detail


def centre(entry):
    return np.array([0.5 * (lo + hi) for lo, hi in entry.sample_region])


def test_01_curvature_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for name in NAMES:
        entry = catalog.get_entry(name)
        (lo, hi), half = entry.ambient_box()
        cfg = entry.cfg
        for _ in range(20):
            p = ChartPoint(rng.uniform(lo, hi), rng.uniform(-half, half, cfg.fiber_dim))
            chart = riemann_from_chart(cfg, p)
            closed = closed_form_tensor(cfg, p)
            worst = max(worst, float(np.max(np.abs(chart - closed)) / max(1.0, np.max(np.abs(chart)))))
    record("1 curvature oracle", worst <= 1e-8, f"max rel err {worst:.2e} over 20 points x {len(NAMES)} ambients")


def test_02_constant_curvature():
    ds = constant_curvature(catalog.de_sitter_model(2.0))
    ads = constant_curvature(AmbientConfig(-1, "cos(t)", (-1.5, 1.5), 2, -1.0))
    cyl = constant_curvature(AmbientConfig(1, "1", (-5.0, 5.0), 3, 1.0))
    ok = ds is not None and abs(ds - 2.0) <= 1e-10 and ads is not None and abs(ads + 1.0) <= 1e-10 and cyl is None
    record("2 constant curvature", ok, f"de Sitter {ds}, anti-de Sitter {ads}, R x S^3 {cyl}")


def test_03_fundamental_equations():
    worst = {"gauss": 0.0, "codazzi": 0.0, "ricci": 0.0}
    for name in NAMES:
        entry = catalog.get_entry(name)
        for u in sample_points(entry.sample_region, 10, 0):
            data, derived = analyze(entry.imm, entry.cfg, u)
            for rep in idn.check_fundamental(data, derived, entry.cfg):
                worst[rep.name] = max(worst[rep.name], rep.max_rel)
    ok = all(v <= 1e-8 for v in worst.values())
    record("3 fundamental equations", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


SIMONS_CASES = [
    ("veronese_RxS4", "theorem1"),
    ("hyperbolic_veronese_cylinder", "theorem1"),
    ("adS_product", "theorem1"),
    ("slice", "theorem1"),
    ("de_sitter_slice", "theorem1"),
    ("einstein_de_sitter_slice", "theorem1"),
    ("graph", "theorem1"),
    ("space_form_models", "theorem1"),
    ("lorentzian_graph", "theorem1"),
    ("lorentzian_graph", "hypersurface"),
    ("space_form_models", "hypersurface"),
    ("round_sphere", "nomizu_smyth"),
    ("space_form_models", "nomizu_smyth"),
    ("bumped_sphere_c0.5", "nomizu_smyth"),
    ("de_sitter_graph", "constant_curvature"),
    ("bumped_sphere_c-0.7", "constant_curvature"),
    ("veronese_RxS4", "product_space"),
]


def _entry(name):
    extra = {
        "lorentzian_graph": catalog.lorentzian_graph,
        "round_sphere": lambda: catalog.space_form_model(0.0, 2, 1.5, 0.0, "round_sphere"),
        "bumped_sphere_c0.5": lambda: catalog.space_form_model(0.5, 2, 1.0, 0.1),
        "bumped_sphere_c-0.7": lambda: catalog.space_form_model(-0.7, 2, 1.0, 0.1),
        "de_sitter_graph": catalog.de_sitter_graph,
    }
    return extra[name]() if name in extra else catalog.get_entry(name)


def test_04_simons_formula():
    lines, ok = [], True
    for name, variant in SIMONS_CASES:
        entry = _entry(name)
        tol = 1e-8 if name == "round_sphere" else idn.SIMONS_TOL
        worst = 0.0
        for u in sample_points(entry.sample_region, 4, 1):
            data, derived = analyze(entry.imm, entry.cfg, u)
            worst = max(worst, idn.check_simons(data, derived, variant, entry.cfg, tol).max_rel)
        ok &= worst <= tol
        lines.append(f"{name}/{variant} {worst:.1e}")
    record("4 Simons formula and variants", ok, "; ".join(lines))


def test_05_example_values():
    checks = []
    ver = catalog.get_entry("veronese_RxS4")
    ads = catalog.get_entry("adS_product")
    cyl = catalog.get_entry("hyperbolic_veronese_cylinder")
    for u in sample_points(ver.sample_region, 5, 2):
        d = extrinsic_at(ver.imm, ver.cfg, u)
        checks.append(("veronese H", np.max(np.abs(d.mean_components)), 1e-10))
        checks.append(("veronese |alpha|^2", abs(d.alpha_norm_sq - 4.0 / 3.0), 1e-8))
    for u in sample_points(ads.sample_region, 5, 2):
        d = extrinsic_at(ads.imm, ads.cfg, u)
        checks.append(("adS |alpha|^2", abs(d.alpha_norm_sq - 2.0), 1e-8))
    for entry in (ver, cyl):
        for u in sample_points(entry.sample_region, 5, 2):
            fit = idn.fit_psi(extrinsic_at(entry.imm, entry.cfg, u))
            checks.append((f"{entry.name} psi_hat", abs(fit.psi_hat), 1e-8))
            checks.append((f"{entry.name} fit residual", fit.residual_norm, 1e-8))
    worst = {}
    for label, val, tol in checks:
        worst[label] = max(worst.get(label, 0.0), val / tol)
    record("5 example values", all(v <= 1 for v in worst.values()),
           ", ".join(f"{k} {v:.1e} of tol" for k, v in worst.items()))


def test_06_threshold():
    notes, ok = [], True
    ds = catalog.get_entry("de_sitter_slice")
    for u in sample_points(ds.sample_region, 3, 3):
        d = extrinsic_at(ds.imm, ds.cfg, u)
        th = idn.theorem2_threshold(ds.cfg, d, ds.declared_psi)
        ok &= abs(th.B_value) <= 1e-10 and abs(th.psi_star - 2.0) <= 1e-10
        ok &= th.prediction == "geodesic point" and d.alpha_norm_sq <= 1e-20
    notes.append("de Sitter: B=0, psi*=2, geodesic, alpha=0")

    eds = catalog.get_entry("einstein_de_sitter_slice")
    n = eds.cfg.fiber_dim
    for t0 in (0.7, 1.5, 3.0):
        e = catalog.slice_entry(eds.cfg, t0)
        d = extrinsic_at(e.imm, e.cfg, np.zeros(n))
        th = idn.theorem2_threshold(e.cfg, d)
        want = (t0**-2 / (3 * n)) * (d.norm_T_sq + n / 3)
        ok &= abs(th.B_value + t0**-2 / 3) <= 1e-10 and abs(th.psi_star - want) <= 1e-10
    notes.append("Einstein-de Sitter: B and psi* match at t = 0.7, 1.5, 3")

    strict = {
        "veronese_RxS4": lambda th: th.B_value > 0 and th.psi < th.psi_star,
        "hyperbolic_veronese_cylinder": lambda th: th.B_value < 0 and th.psi > th.psi_star,
        "adS_product": lambda th: abs(th.B_value) <= 1e-10 and th.psi > th.psi_star,
    }
    for name, violated in strict.items():
        e = catalog.get_entry(name)
        for u in sample_points(e.sample_region, 3, 3):
            d = extrinsic_at(e.imm, e.cfg, u)
            th = idn.theorem2_threshold(e.cfg, d)
            ok &= th.extremal and violated(th) and d.alpha_norm_sq > 1e-3 and th.prediction == "no conclusion"
        notes.append(f"{name}: B={th.B_value:.3g}, psi={th.psi:.1g}, psi*={th.psi_star:.4g}, |alpha|^2={d.alpha_norm_sq:.4g}")
    record("6 threshold", ok, "; ".join(notes))


def test_07_pp_identity():
    worst = 0.0
    for name in PP_ENTRIES:
        e = catalog.get_entry(name)
        for u in sample_points(e.sample_region, 5, 4):
            d = extrinsic_at(e.imm, e.cfg, u)
            worst = max(worst, idn.check_pp_identity(d, idn.fit_psi(d).psi_hat).max_rel)
    record("7 pp identity", worst <= 1e-7, f"max rel residual {worst:.2e}")


def test_08_normal_curvature():
    lemma = 0.0
    for name in PP_ENTRIES + ("de_sitter_slice", "einstein_de_sitter_slice"):
        e = catalog.get_entry(name)
        for u in sample_points(e.sample_region, 4, 5):
            lemma = max(lemma, idn.check_lemma_R(extrinsic_at(e.imm, e.cfg, u)).max_abs)
    flat = 0.0
    for e in (catalog.get_entry("slice"), catalog.get_entry("space_form_models"), catalog.lorentzian_graph()):
        flat = max(flat, idn.normal_flatness(extrinsic_at(e.imm, e.cfg, centre(e))))
    ver = catalog.get_entry("veronese_RxS4")
    curved = idn.normal_flatness(extrinsic_at(ver.imm, ver.cfg, centre(ver)))
    cross = 0.0
    for name in ("veronese_RxS4", "graph", "hyperbolic_veronese_cylinder"):
        e = catalog.get_entry(name)
        d = extrinsic_at(e.imm, e.cfg, centre(e))
        cross = max(cross, float(np.max(np.abs(d.normal_curvature_jets - idn.ricci_normal_curvature(d)))))
    ok = lemma <= 1e-9 and flat <= 1e-12 and curved > 1e-3 and cross <= 1e-9
    record("8 normal curvature", ok,
           f"max |Rperp H| {lemma:.1e}; hypersurface Rperp {flat:.1e}; Veronese Rperp {curved:.3f}; "
           f"jet vs Ricci equation {cross:.1e}")


def test_09_eigenvalue_identity():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        M = rng.normal(size=(n, n))
        A = M + M.T
        kappa, delta = rng.normal(), float(rng.choice([-1.0, 1.0]))
        worst = max(worst, idn.eigenvalue_identity(A, kappa, delta) / max(1.0, np.trace(A @ A) ** 2))
    record("9 eigenvalue identity", worst <= 1e-9, f"max rel residual {worst:.1e} on 100 instances")


def test_10_cylinder_lift():
    worst = 0.0
    cyl = catalog.get_entry("hyperbolic_veronese_cylinder")
    cfg3 = AmbientConfig(1, "1", (-5.0, 5.0), 3, 1.0)
    src = Immersion(["0", "u1", "u2", "0.3*u1*u2 + 0.2*u1^2"], [(-1, 1), (-1, 1)])
    cases = [(cyl.imm, cyl.source, cyl.cfg, cyl.sample_region),
             (idn.cylinder_lift(src, cfg3, (-1, 1)), src, cfg3, ((-0.5, 0.5),) * 3)]
    for lifted, source, cfg, region in cases:
        for u in sample_points(region, 4, 6):
            rep = idn.check_cylinder_lift(extrinsic_at(lifted, cfg, u), extrinsic_at(source, cfg, u[1:]))
            worst = max(worst, rep.max_abs)
    record("10 cylinder lift", worst <= 1e-10, f"max abs deviation {worst:.1e}")


def test_11_determinism(tmp_path):
    cmd = [sys.executable, "-m", "warpsimons", "verify", "--catalog", "veronese_RxS4",
           "--checks", "fundamental,simons,psi_fit,pp,theorem2", "--points", "5", "--seed", "7"]
    runs = [subprocess.run(cmd, capture_output=True, check=False) for _ in range(2)]
    ok = all(r.returncode == 0 for r in runs) and runs[0].stdout == runs[1].stdout and runs[0].stdout
    record("11 determinism", ok, f"two CLI runs, {len(runs[0].stdout)} bytes each, identical={runs[0].stdout == runs[1].stdout}")
