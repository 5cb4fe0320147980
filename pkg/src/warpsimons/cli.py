"""Command-line verification runner.

    warpsimons verify --catalog veronese_RxS4 --checks simons,psi_fit --points 10 --seed 7
    warpsimons verify --config run.json --out report.json
    warpsimons list-catalog

Exit status: 0 when every requested check passes, 1 when any fails, 2 on
configuration errors.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import catalog, identities as idn
from .ambient import AmbientConfig
from .errors import GeometryError, PreconditionError
from .extrinsic import Immersion, analyze

DEFAULT_CHECKS = ("fundamental", "simons")
FUNDAMENTAL = ("gauss", "codazzi", "ricci")


@dataclass
class RunConfig:
    entry: catalog.CatalogEntry
    checks: tuple = DEFAULT_CHECKS
    points: int = 10
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    out: str = None


class ConfigProblem(Exception):
    """Invalid run configuration (exit status 2)."""


# individual checks ------------------------------------------------------------------


def _simons(variant):
    def run(entry, data, derived, tol):
        return idn.check_simons(data, derived, variant, entry.cfg, tol)

    return run


def _psi_for(entry, data):
    fit = idn.fit_psi(data)
    if fit.underdetermined and entry.declared_psi is not None:
        return entry.declared_psi
    return fit.psi_hat


def _psi_fit(entry, data, derived, tol):
    fit = idn.fit_psi(data)
    rep = idn.IdentityReport.single("psi_fit", data.u, fit.residual_norm, 1.0, tol)
    rep.points[0].details = {"psi_hat": fit.psi_hat, "underdetermined": fit.underdetermined}
    return rep


def _pp(entry, data, derived, tol):
    return idn.check_pp_identity(data, _psi_for(entry, data), tol)


def _theorem2(entry, data, derived, tol):
    th = idn.theorem2_threshold(entry.cfg, data, _psi_for(entry, data))
    # a predicted geodesic point must carry no second fundamental form
    res = data.alpha_norm_sq if th.prediction == "geodesic point" else 0.0
    rep = idn.IdentityReport.single("theorem2", data.u, res, 1.0, tol)
    rep.points[0].details = {
        "B_value": th.B_value,
        "psi_star": th.psi_star,
        "psi": th.psi,
        "case": th.case_tag,
        "prediction": th.prediction,
        "alpha_norm_sq": data.alpha_norm_sq,
    }
    return rep


def _normal_flatness(entry, data, derived, tol):
    return idn.IdentityReport.single("normal_flatness", data.u, idn.normal_flatness(data), 1.0, tol)


def _expected(entry, data, derived, tol):
    """Deviations from the entry's expected values, each divided by its own tolerance."""
    obs = catalog.observables(entry, data, derived)
    worst, terms = 0.0, {}
    for key in sorted(entry.expected):
        exp = entry.expected[key]
        got = obs.get(key, float("nan"))
        dev = abs(got - exp.value) / exp.tol if math.isfinite(got) else float("inf")
        terms[key] = dev
        worst = max(worst, dev)
    p = idn.PointResidual(tuple(data.u), worst, worst, terms)
    p.details = {k: (obs[k] if math.isfinite(obs.get(k, float("nan"))) else None) for k in sorted(entry.expected)}
    return idn.IdentityReport("expected", [p], tol)


CHECKS = {
    "gauss": (lambda e, d, D, tol: idn.check_gauss(d, e.cfg, tol), idn.FIRST_ORDER_TOL),
    "codazzi": (lambda e, d, D, tol: idn.check_codazzi(d, D, tol), idn.FIRST_ORDER_TOL),
    "ricci": (lambda e, d, D, tol: idn.check_ricci(d, tol), idn.FIRST_ORDER_TOL),
    "structure": (lambda e, d, D, tol: idn.check_structure(d, tol), idn.FIRST_ORDER_TOL),
    "weingarten": (lambda e, d, D, tol: idn.check_weingarten(d, tol), idn.FIRST_ORDER_TOL),
    "simons": (_simons("theorem1"), idn.SIMONS_TOL),
    "simons_hypersurface": (_simons("hypersurface"), idn.SIMONS_TOL),
    "nomizu_smyth": (_simons("nomizu_smyth"), idn.SIMONS_TOL),
    "simons_constant_curvature": (_simons("constant_curvature"), idn.SIMONS_TOL),
    "simons_product_space": (_simons("product_space"), idn.SIMONS_TOL),
    "psi_fit": (_psi_fit, 1e-8),
    "pp": (_pp, idn.PP_TOL),
    "theorem2": (_theorem2, 1e-10),
    "lemma_R": (lambda e, d, D, tol: idn.check_lemma_R(d, tol), 1e-9),
    "normal_flatness": (_normal_flatness, 1e-8),
    "expected": (_expected, 1.0),
}


def expand_checks(names):
    out = []
    for name in names:
        group = FUNDAMENTAL if name == "fundamental" else (name,)
        for n in group:
            if n not in CHECKS:
                raise ConfigProblem(f"unknown check {n!r}; known: fundamental, {', '.join(sorted(CHECKS))}")
            if n not in out:
                out.append(n)
    return out


# configuration ----------------------------------------------------------------------


def _shrunk(box, margin=0.1):
    return tuple((lo + margin * (hi - lo), hi - margin * (hi - lo)) for lo, hi in box)


def entry_from_json(doc):
    """Catalog entry named in ``doc`` or built from inline ambient/immersion specs."""
    if "catalog" in doc:
        return catalog.get_entry(doc["catalog"])
    try:
        amb = doc["ambient"]
        imm_doc = doc["immersion"]
    except KeyError as exc:
        raise ConfigProblem(f"config needs 'catalog' or both 'ambient' and 'immersion' (missing {exc})") from None
    cfg = AmbientConfig(
        int(amb["epsilon"]), amb["warp"], tuple(amb["interval"]), int(amb["fiber_dim"]),
        float(amb["fiber_curv"]), int(amb.get("fiber_index", 0)), amb.get("constants", {}),
    )
    imm = Immersion(
        tuple(imm_doc["components"]),
        tuple(tuple(b) for b in imm_doc["domain_box"]),
        tuple(imm_doc["params"]) if "params" in imm_doc else None,
        bool(imm_doc.get("hyperquadric_stage", False)),
        imm_doc.get("constants", {}),
    )
    region = imm_doc.get("sample_region")
    region = tuple(tuple(b) for b in region) if region else _shrunk(imm.domain_box)
    return catalog.CatalogEntry(doc.get("name", "custom"), cfg, imm, {}, region, "inline configuration",
                                declared_psi=doc.get("declared_psi"))


def _parse_tols(items):
    tols = {}
    for item in items or ():
        for part in item.split(","):
            if not part:
                continue
            name, sep, value = part.partition("=")
            if not sep:
                raise ConfigProblem(f"tolerance {part!r} is not NAME=VALUE")
            try:
                tols[name.strip()] = float(value)
            except ValueError:
                raise ConfigProblem(f"tolerance {part!r} has a non-numeric value") from None
    return tols


def build_run_config(args):
    doc = {}
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigProblem(f"cannot read config {args.config}: {exc}") from None
    if args.catalog:
        doc = dict(doc, catalog=args.catalog)
    if "catalog" not in doc and "ambient" not in doc:
        raise ConfigProblem("give --catalog NAME or --config FILE")
    entry = entry_from_json(doc)
    checks = args.checks.split(",") if args.checks else doc.get("checks", list(DEFAULT_CHECKS))
    points = args.points if args.points is not None else int(doc.get("points", 10))
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    if points < 1:
        raise ConfigProblem("--points must be at least 1")
    tols = {k: float(v) for k, v in doc.get("tolerances", {}).items()}
    tols.update(_parse_tols(args.tol))
    checks = expand_checks(checks)
    unknown = set(tols) - set(CHECKS)
    if unknown:
        raise ConfigProblem(f"tolerance given for unknown checks {sorted(unknown)}")
    return RunConfig(entry, tuple(checks), points, seed, tols, args.out or doc.get("out"))


# running ------------------------------------------------------------------------------


def sample_points(region, count, seed):
    """Scrambled Halton points scaled into the box ``region``."""
    lo = np.array([b[0] for b in region], dtype=float)
    hi = np.array([b[1] for b in region], dtype=float)
    unit = qmc.Halton(d=len(region), scramble=True, seed=seed).random(count)
    return lo + unit * (hi - lo)


def run(config):
    """Evaluate every check at every sample point; returns (report dict, all_passed)."""
    entry = config.entry
    pts = sample_points(entry.sample_region, config.points, config.seed)
    per_check = {name: [] for name in config.checks}
    for u in pts:
        try:
            data, derived = analyze(entry.imm, entry.cfg, u)
        except GeometryError as exc:
            for name in config.checks:
                per_check[name].append(idn.IdentityReport.failure(name, u, f"{type(exc).__name__}: {exc}", 0.0))
            continue
        for name in config.checks:
            fn, default_tol = CHECKS[name]
            tol = config.tolerances.get(name, default_tol)
            try:
                rep = fn(entry, data, derived, tol)
            except (GeometryError, PreconditionError) as exc:
                rep = idn.IdentityReport.failure(name, u, f"{type(exc).__name__}: {exc}", tol)
            per_check[name].append(rep)
    reports = []
    for name in config.checks:
        tol = config.tolerances.get(name, CHECKS[name][1])
        merged = idn.IdentityReport.merge(per_check[name]).with_tol(tol)
        merged.name = name
        reports.append(merged)
    ok = all(r.passed for r in reports)
    doc = {
        "entry": entry.name,
        "points": config.points,
        "seed": config.seed,
        "checks": [r.to_json() for r in reports],
        "pass": ok,
    }
    return doc, ok, reports


def dumps(doc):
    return json.dumps(_clean(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def _parser():
    p = argparse.ArgumentParser(prog="warpsimons", description="Verify submanifold identities in warped products.")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run identity checks at sample points")
    src = v.add_mutually_exclusive_group()
    src.add_argument("--catalog", metavar="NAME")
    src.add_argument("--config", metavar="FILE")
    v.add_argument("--checks", help="comma-separated check names (default: fundamental,simons)")
    v.add_argument("--points", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--tol", action="append", metavar="NAME=V")
    v.add_argument("--out", metavar="FILE")
    sub.add_parser("list-catalog", help="list built-in entries and their expected values")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.command == "list-catalog":
        sys.stdout.write(catalog.list_catalog())
        return 0
    try:
        config = build_run_config(args)
    except (ConfigProblem, GeometryError, KeyError, TypeError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2
    doc, ok, reports = run(config)
    text = dumps(doc)
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name} max_rel={r.max_rel:.3e} tol={r.tol:g}", file=sys.stderr)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
