"""Command-line entry point: solve, sweep, verify, greens, appendix.

Exit codes: 0 success, 1 error, 2 stagnation-with-result (solve),
3 sweep finished with flagged failure rows.  No command writes outside
its --out directory; manifests record the config hash, seed, tool version,
timestamps and every emitted file.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

from . import __version__
from .domains import DomainSpec, build_grid, scale_domain
from .errors import SplabError
from .fieldio import dump_field
from .minimize import SolverOptions, minimize_constrained
from .reports import print_rows, write_report
from .sweeps import SweepConfig, run_sweep, write_csvs
from .verify import SUITES, run_suite

PRESETS = {
    "ball": lambda: DomainSpec.ball(radius=1.0),
    "box": lambda: DomainSpec.box(lo=(-2, -2, -2), hi=(2, 2, 2)),
    "annulus": lambda: DomainSpec.annulus(inner=1.0, outer=2.0),
    "torus": lambda: DomainSpec.solid_torus(major=2.0, minor=0.75),
}


def _parse_domain(text: str) -> DomainSpec:
    if text in PRESETS:
        return PRESETS[text]()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SplabError(f"--domain is neither a preset {sorted(PRESETS)} "
                         f"nor valid JSON: {exc}") from exc
    return DomainSpec.from_json(data)


class _Manifest:
    def __init__(self, out_dir, config_obj, seed):
        self.out_dir = out_dir
        self.data = {
            "tool_version": __version__,
            "config_hash": hashlib.sha256(
                json.dumps(config_obj, sort_keys=True).encode()).hexdigest()[:16],
            "config": config_obj,
            "seed": seed,
            "started_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "finished_at": None,
            "exit_status": None,
            "emitted_files": [],
            "complete": False,
        }

    def emit(self, path):
        rel = os.path.relpath(path, self.out_dir)
        if rel not in self.data["emitted_files"]:
            self.data["emitted_files"].append(rel)
        self.write()

    def finish(self, exit_status):
        self.data["finished_at"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        self.data["exit_status"] = exit_status
        self.data["complete"] = True
        self.write()

    def write(self):
        path = os.path.join(self.out_dir, "manifest.json")
        with open(path, "w") as f:
            json.dump(self.data, f, indent=2, sort_keys=True)
            f.write("\n")


def _solver_options(args) -> SolverOptions:
    return SolverOptions(
        max_iters=args.max_iters, grad_tol=args.grad_tol, step0=args.step0,
        armijo_c1=args.armijo_c1, backtrack=args.backtrack,
        restarts=args.restarts, seed=args.seed)


def _add_solver_flags(sub):
    sub.add_argument("--max-iters", type=int, default=4000, dest="max_iters")
    sub.add_argument("--grad-tol", type=float, default=1e-5, dest="grad_tol")
    sub.add_argument("--step0", type=float, default=1.0)
    sub.add_argument("--armijo-c1", type=float, default=1e-4, dest="armijo_c1")
    sub.add_argument("--backtrack", type=float, default=0.5)
    sub.add_argument("--restarts", type=int, default=1)
    sub.add_argument("--seed", type=int, default=0)


def cmd_solve(args) -> int:
    spec = _parse_domain(args.domain)
    if args.lam > 1:
        spec = scale_domain(spec, args.lam)
    config = {
        "domain": spec.to_json(), "p": args.p, "rho": args.rho,
        "lambda": args.lam, "resolution": args.resolution, "init": args.init,
        "seed": args.seed,
    }
    os.makedirs(args.out, exist_ok=True)
    manifest = _Manifest(args.out, config, args.seed)
    grid = build_grid(spec, cells_per_unit=args.resolution)
    res = minimize_constrained(grid, args.p, args.rho, init=args.init,
                               opts=_solver_options(args))
    result = {
        "energy": {
            "kinetic": res.energy.kinetic, "nonlocal": res.energy.nonlocal_,
            "power": res.energy.power, "total": res.energy.total,
            "mass": res.energy.mass,
        },
        "omega": res.omega.omega,
        "el_residual": res.omega.residual,
        "barycenter": [float(b) for b in res.barycenter],
        "iterations": res.iters,
        "grad_norm": res.grad_norm,
        "nonneg": res.nonneg,
        "flags": res.flags,
        "config": config,
    }
    result_path = os.path.join(args.out, "result.json")
    with open(result_path, "w") as f:
        json.dump(result, f, indent=2, sort_keys=True)
        f.write("\n")
    manifest.emit(result_path)
    field_path = os.path.join(args.out, "field.splf")
    dump_field(field_path, res.u, extra={"p": args.p, "rho": args.rho,
                                         "omega": res.omega.omega})
    manifest.emit(field_path)
    code = 2 if res.stagnated else 0
    manifest.finish(code)
    print(f"total={res.energy.total:.8g} omega={res.omega.omega:.6g} "
          f"iters={res.iters} flags={';'.join(res.flags) or '-'}")
    return code


def cmd_sweep(args) -> int:
    with open(args.config) as f:
        config = SweepConfig.from_json(json.load(f))
    os.makedirs(args.out, exist_ok=True)
    manifest = _Manifest(args.out, config.to_json(), config.seed)

    def progress(key, rec, err):
        status = "FAIL" if err else "ok"
        print(f"[{status}] {key} value={rec.value:.6g}", flush=True)

    records, reports = run_sweep(config, workers=args.workers, out_dir=args.out,
                                 resume=True, progress=progress)
    files = write_csvs(records, args.out, config)
    for path in files:
        manifest.emit(path)
    report_path = os.path.join(args.out, "report.json")
    write_report(report_path, reports, meta={"config_hash": config.config_hash()})
    manifest.emit(report_path)
    journal = os.path.join(args.out, "records.jsonl")
    if os.path.exists(journal):
        manifest.emit(journal)
    failed = any(any(f.startswith("error:") for f in rec.flags) for rec in records)
    code = 3 if failed else 0
    manifest.finish(code)
    print(f"{len(records)} records -> {args.out}")
    return code


def cmd_verify(args) -> int:
    t0 = time.time()
    rows = run_suite(args.suite, quick=args.quick, seed=args.seed)
    print_rows(rows)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        manifest = _Manifest(args.out, {"suite": args.suite, "quick": args.quick},
                             args.seed)
        path = os.path.join(args.out, "verify.json")
        write_report(path, rows, meta={"suite": args.suite, "quick": args.quick,
                                       "elapsed_s": time.time() - t0})
        manifest.emit(path)
        manifest.finish(0 if all(r.ok for r in rows) else 1)
    n_fail = sum(not r.ok for r in rows)
    print(f"{len(rows)} checks, {n_fail} failures, {time.time() - t0:.1f}s")
    if n_fail:
        first = next(r for r in rows if not r.ok)
        print(f"first failure: {first.property}", file=sys.stderr)
    return 0 if n_fail == 0 else 1


def cmd_greens(args) -> int:
    from .verify import run_greens

    rows = run_greens(quick=args.quick, seed=args.seed)
    print_rows(rows)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_report(os.path.join(args.out, "greens.json"), rows, meta={})
    return 0 if all(r.ok for r in rows) else 1


def cmd_appendix(args) -> int:
    from .verify import run_appendix

    rows = run_appendix(quick=args.quick, seed=args.seed)
    print_rows(rows)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_report(os.path.join(args.out, "appendix.json"), rows, meta={})
    return 0 if all(r.ok for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splab",
        description="Mass-constrained Schrodinger-Poisson ground states and "
                    "expanding-domain audits.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("solve", help="one constrained solve")
    sp.add_argument("--domain", default="ball",
                    help=f"preset {sorted(PRESETS)} or DomainSpec JSON")
    sp.add_argument("--p", type=float, default=2.5)
    sp.add_argument("--rho", type=float, default=0.5)
    sp.add_argument("--lambda", type=float, default=1.0, dest="lam")
    sp.add_argument("--resolution", type=float, default=8.0,
                    help="cells per unit length")
    sp.add_argument("--init", default="gaussian",
                    choices=["gaussian", "eigenfield", "random"])
    sp.add_argument("--out", required=True)
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_solve)

    sw = subs.add_parser("sweep", help="run a parameter sweep from a JSON config")
    sw.add_argument("--config", required=True)
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out", required=True)
    sw.set_defaults(func=cmd_sweep)

    sv = subs.add_parser("verify", help="run property suites")
    sv.add_argument("--suite", default="all", choices=sorted(SUITES) + ["all"])
    sv.add_argument("--quick", action="store_true", help="coarser grids")
    sv.add_argument("--seed", type=int, default=0)
    sv.add_argument("--out", default=None)
    sv.set_defaults(func=cmd_verify)

    gr = subs.add_parser("greens", help="Green's-function audits")
    gr.add_argument("--quick", action="store_true")
    gr.add_argument("--seed", type=int, default=0)
    gr.add_argument("--out", default=None)
    gr.set_defaults(func=cmd_greens)

    ap = subs.add_parser("appendix", help="embedding/positivity/divergence audits")
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None)
    ap.set_defaults(func=cmd_appendix)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SplabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
