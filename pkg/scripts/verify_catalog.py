"""Run every applicable check on every catalog entry and print a summary table.

    python3 scripts/verify_catalog.py [--points 10] [--seed 0] [--json out.json]
"""

import argparse
import json
import sys

from warpsimons import catalog
from warpsimons.ambient import constant_curvature
from warpsimons.cli import RunConfig, dumps, run
from warpsimons.extrinsic import extrinsic_at

PSEUDO_PARALLEL = {"veronese_RxS4", "hyperbolic_veronese_cylinder", "adS_product", "de_sitter_slice"}


def applicable_checks(entry):
    checks = ["gauss", "codazzi", "ricci", "structure", "weingarten", "simons", "expected"]
    cfg = entry.cfg
    probe = extrinsic_at(entry.imm, cfg, [0.5 * (lo + hi) for lo, hi in entry.sample_region])
    if probe.is_hypersurface:
        checks.append("simons_hypersurface")
        if constant_curvature(cfg) is not None:
            checks.append("simons_constant_curvature")
            if cfg.epsilon == 1 and cfg.fiber_index == 0:
                checks.append("nomizu_smyth")
    if entry.name == "veronese_RxS4":
        checks.append("simons_product_space")
    if entry.name in PSEUDO_PARALLEL:
        checks += ["psi_fit", "pp", "theorem2", "lemma_R"]
    return checks


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", metavar="FILE")
    args = p.parse_args(argv)
    docs, all_ok = [], True
    for name in catalog.names():
        entry = catalog.get_entry(name)
        doc, ok, reports = run(RunConfig(entry, tuple(applicable_checks(entry)), args.points, args.seed))
        docs.append(doc)
        all_ok &= ok
        for r in reports:
            print(f"{name:30s} {r.name:28s} {'PASS' if r.passed else 'FAIL'}  max_rel={r.max_rel:.2e}  tol={r.tol:g}")
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(dumps(docs))
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
