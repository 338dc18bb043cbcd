"""Parameter studies over the expansion factor lambda and the mass rho.

A sweep reproduces the limit statements at desk scale: the radial and 3D
ball/domain infima approach the whole-space level from above as the domain
expands, the barycenter-pinned annulus level keeps a strict gap, the
sublevel threshold l(lambda) is populated, and multipliers turn negative.
Records regenerate bit-identically from (config, seed); individual task
failures become flagged rows and the sweep continues.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .domains import DomainSpec, build_grid, region, scale_domain
from .errors import SplabError
from .fields import RadialField
from .greens import sup_regular_part
from .minimize import (SolveResult, SolverOptions, minimize_constrained,
                       minimize_with_barycenter, radial_minimize)
from .topology import containment_audit, sublevel_threshold
from .reports import row as report_row


QUANTITIES = ("c_inf", "b_star", "b_lambda", "c_lambda", "a", "l",
              "containment", "convergence")


@dataclass(frozen=True)
class SweepConfig:
    omega: DomainSpec = field(default_factory=lambda: DomainSpec.box(
        lo=(-2.0, -2.0, -2.0), hi=(2.0, 2.0, 2.0)))
    r: float = 1.0
    R: float = 8.0
    p: float = 2.5
    rho_list: tuple = (0.25, 0.5, 1.0)
    lambda_list: tuple = (1.0, 2.0, 4.0, 8.0)
    radial_lambda_list: tuple = (4.0, 8.0, 16.0, 32.0, 64.0)
    quantities: tuple = QUANTITIES
    cells_per_unit: float = 2.0
    radial_points_per_unit: int = 48
    truncation_radius: float = 32.0
    annulus_R: float = 3.0
    annulus_lambda_list: tuple = (2.0, 4.0)
    margin_delta_factor: float = 0.1
    grad_tol_radial: float = 3e-6
    grad_tol_3d: float = 1e-5
    max_iters: int = 30_000
    seed: int = 0

    def __post_init__(self):
        if self.omega.signed_distance(np.zeros((1, 3)))[0] >= 0:
            raise SplabError("0 must lie in the interior of Omega")
        if self.omega.signed_distance(np.zeros((1, 3)))[0] > -self.r:
            raise SplabError(f"B_r with r={self.r} is not contained in Omega")
        if self.R <= self.omega.diameter():
            raise SplabError(
                f"R={self.R} must exceed diam(Omega)={self.omega.diameter():.3g}")
        for q in self.quantities:
            if q not in QUANTITIES:
                raise SplabError(f"unknown quantity {q!r}")

    def to_json(self) -> dict:
        d = asdict(self)
        d["omega"] = self.omega.to_json()
        for key in ("rho_list", "lambda_list", "radial_lambda_list",
                    "quantities", "annulus_lambda_list"):
            d[key] = list(d[key])
        return d

    @staticmethod
    def from_json(data: dict) -> "SweepConfig":
        data = dict(data)
        data["omega"] = DomainSpec.from_json(data["omega"])
        for key in ("rho_list", "lambda_list", "radial_lambda_list",
                    "quantities", "annulus_lambda_list"):
            if key in data:
                data[key] = tuple(data[key])
        return SweepConfig(**data)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def solver_options(self, three_d: bool) -> SolverOptions:
        tol = self.grad_tol_3d if three_d else self.grad_tol_radial
        iters = min(self.max_iters, 4000) if three_d else self.max_iters
        return SolverOptions(max_iters=iters, grad_tol=tol, seed=self.seed)


@dataclass
class SweepRecord:
    quantity: str
    lam: float
    rho: float
    p: float
    value: float
    omega: float
    iterations: int
    h: float
    kinetic: float = math.nan
    nonlocal_: float = math.nan
    power: float = math.nan
    mass: float = math.nan
    flags: tuple = ()

    def key(self) -> str:
        return f"{self.quantity}:{self.lam:g}:{self.rho:g}"

    def as_dict(self) -> dict:
        d = asdict(self)
        d["nonlocal"] = d.pop("nonlocal_")
        d["flags"] = ";".join(self.flags)
        return d

    @staticmethod
    def from_dict(d: dict) -> "SweepRecord":
        d = dict(d)
        d["nonlocal_"] = d.pop("nonlocal")
        flags = d.pop("flags")
        d["flags"] = tuple(f for f in flags.split(";") if f)
        return SweepRecord(**d)


CSV_COLUMNS = ("quantity", "lambda", "rho", "p", "value", "omega", "kinetic",
               "nonlocal", "power", "total", "mass", "iterations", "h",
               "gap_to_c_inf", "flags")


def _record_from_result(quantity, lam, rho, p, res: SolveResult, h, extra_flags=()):
    flags = tuple(res.flags) + tuple(extra_flags)
    return SweepRecord(
        quantity=quantity, lam=float(lam), rho=float(rho), p=float(p),
        value=res.energy.total, omega=res.omega.omega, iterations=res.iters,
        h=float(h), kinetic=res.energy.kinetic, nonlocal_=res.energy.nonlocal_,
        power=res.energy.power, mass=res.energy.mass, flags=flags)


# ----------------------------------------------------------------------
# individual tasks (module-level for pickling)

def _radial_mesh_points(cfg: SweepConfig, radius: float) -> int:
    return max(512, int(round(radius * cfg.radial_points_per_unit)))


def _task_c_inf(cfg: SweepConfig, rho: float):
    opts = cfg.solver_options(three_d=False)
    T0 = cfg.truncation_radius
    res0 = radial_minimize(T0, cfg.p, rho, _radial_mesh_points(cfg, T0),
                           opts=opts, potential="newton")
    u = res0.u.values
    supp = np.nonzero(np.abs(u) > 1e-8 * np.abs(u).max())[0]
    rsup = res0.u.r[supp[-1]] if len(supp) else T0
    T1 = max(T0, min(2.0 * rsup, 4 * T0))
    res1 = radial_minimize(T1, cfg.p, rho, _radial_mesh_points(cfg, T1),
                           opts=opts, potential="newton")
    drift = abs(res1.energy.total - res0.energy.total) / max(abs(res1.energy.total), 1e-300)
    rec = _record_from_result("c_inf", math.nan, rho, cfg.p, res1, res1.u.h,
                              extra_flags=(f"truncation_radius:{T1:g}",
                                           f"truncation_drift:{drift:.3e}"))
    return rec, res1


def _task_b_star(cfg: SweepConfig, lam: float, rho: float):
    a = lam * cfg.r
    res = radial_minimize(a, cfg.p, rho, _radial_mesh_points(cfg, a),
                          opts=cfg.solver_options(three_d=False),
                          potential="dirichlet")
    return _record_from_result("b_star", lam, rho, cfg.p, res, res.u.h), res


def _task_b_lambda(cfg: SweepConfig, lam: float, rho: float):
    spec = DomainSpec.ball(radius=cfg.r * lam)
    grid = build_grid(spec, cells_per_unit=cfg.cells_per_unit)
    res = minimize_constrained(grid, cfg.p, rho,
                               opts=cfg.solver_options(three_d=True))
    return _record_from_result("b_lambda", lam, rho, cfg.p, res, grid.spacing), res


def _task_c_lambda(cfg: SweepConfig, lam: float, rho: float):
    spec = scale_domain(cfg.omega, lam) if lam > 1 else cfg.omega
    grid = build_grid(spec, cells_per_unit=cfg.cells_per_unit)
    res = minimize_constrained(grid, cfg.p, rho,
                               opts=cfg.solver_options(three_d=True))
    return _record_from_result("c_lambda", lam, rho, cfg.p, res, grid.spacing), res


def _task_a(cfg: SweepConfig, lam: float, rho: float):
    spec = scale_domain(DomainSpec.annulus(inner=cfg.r, outer=cfg.annulus_R), lam)
    grid = build_grid(spec, cells_per_unit=cfg.cells_per_unit)
    res = minimize_with_barycenter(grid, cfg.p, rho, target=(0.0, 0.0, 0.0),
                                   opts=cfg.solver_options(three_d=True))
    flags = (f"annulus_R:{cfg.annulus_R:g}",)
    return _record_from_result("a", lam, rho, cfg.p, res, grid.spacing,
                               extra_flags=flags), res


_TASKS = {
    "c_inf": _task_c_inf,
    "b_star": _task_b_star,
    "b_lambda": _task_b_lambda,
    "c_lambda": _task_c_lambda,
    "a": _task_a,
}


def _run_task(args):
    cfg, quantity, lam, rho, keep_field = args
    key = f"{quantity}:{lam:g}:{rho:g}"
    try:
        if quantity == "c_inf":
            rec, res = _task_c_inf(cfg, rho)
        else:
            rec, res = _TASKS[quantity](cfg, lam, rho)
        payload = None
        if keep_field and quantity in ("c_lambda", "b_star", "c_inf"):
            payload = _field_payload(res)
        return key, rec, payload, None
    except Exception as exc:  # noqa: BLE001 - flagged-row contract
        rec = SweepRecord(quantity=quantity, lam=lam, rho=rho, p=cfg.p,
                          value=math.nan, omega=math.nan, iterations=0,
                          h=math.nan, flags=(f"error:{exc}",))
        return key, rec, None, str(exc)


def _field_payload(res: SolveResult):
    u = res.u
    if isinstance(u, RadialField):
        return {"kind": "radial", "values": u.values, "h": u.h,
                "beta": res.barycenter}
    return {"kind": "grid", "values": u.values, "beta": res.barycenter,
            "spec": u.grid.spec.to_json() if u.grid.spec else None,
            "cells_per_unit": 1.0 / u.grid.spacing}


# ----------------------------------------------------------------------

def run_sweep(config: SweepConfig, workers: int = 1, out_dir=None,
              resume: bool = True, progress=None):
    """Execute the sweep; returns (records, reports) and journals to out_dir.

    Derived quantities (l, containment, convergence) are assembled after the
    solve phase.  Records merge in deterministic (quantity, lambda, rho)
    order, so worker count does not change the output.
    """
    tasks = []
    keep_field = "convergence" in config.quantities or "containment" in config.quantities
    if "c_inf" in config.quantities:
        for rho in config.rho_list:
            tasks.append((config, "c_inf", math.nan, rho, keep_field))
    if "b_star" in config.quantities:
        for lam in config.radial_lambda_list:
            for rho in config.rho_list:
                tasks.append((config, "b_star", lam, rho, keep_field))
    if "b_lambda" in config.quantities:
        for lam in config.lambda_list:
            for rho in config.rho_list:
                tasks.append((config, "b_lambda", lam, rho, False))
    if "c_lambda" in config.quantities:
        for lam in config.lambda_list:
            for rho in config.rho_list:
                tasks.append((config, "c_lambda", lam, rho, keep_field))
    if "a" in config.quantities:
        for lam in config.annulus_lambda_list:
            for rho in config.rho_list:
                tasks.append((config, "a", lam, rho, False))

    journal_path = None
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        journal_path = os.path.join(out_dir, "records.jsonl")
    done_keys, done_records, done_payloads = _load_journal(journal_path, resume)

    results = {}
    payloads = {}
    pending = [t for t in tasks if _task_key(t) not in done_keys]
    completed = list(done_records.items())
    if workers > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_task, pending))
    else:
        outcomes = [_run_task(t) for t in pending]
    for (key, rec, payload, err) in outcomes:
        completed.append((key, rec))
        if payload is not None:
            payloads[key] = payload
        if journal_path:
            _append_journal(journal_path, key, rec, payload)
        if progress:
            progress(key, rec, err)
    results = dict(completed)
    payloads.update(done_payloads)

    records = sorted(results.values(),
                     key=lambda r: (r.quantity, _nan_key(r.lam), r.rho))
    derived, reports = _derive(config, records, payloads)
    records.extend(derived)
    records.sort(key=lambda r: (r.quantity, _nan_key(r.lam), r.rho))
    return records, reports


def _task_key(task) -> str:
    _, quantity, lam, rho, _ = task
    return f"{quantity}:{lam:g}:{rho:g}"


def _nan_key(x: float) -> float:
    return -1.0 if math.isnan(x) else x


def _load_journal(path, resume):
    keys, records, payloads = set(), {}, {}
    if not path or not resume or not os.path.exists(path):
        return keys, records, payloads
    with open(path) as f:
        for line in f:
            item = json.loads(line)
            rec = SweepRecord.from_dict(item["record"])
            keys.add(item["key"])
            records[item["key"]] = rec
            if item.get("payload") is not None:
                pl = dict(item["payload"])
                pl["values"] = np.asarray(pl["values"], float)
                pl["beta"] = np.asarray(pl.get("beta", [0, 0, 0]), float)
                payloads[item["key"]] = pl
    return keys, records, payloads


def _append_journal(path, key, rec, payload):
    item = {"key": key, "record": rec.as_dict()}
    if payload is not None:
        pl = dict(payload)
        pl["values"] = np.asarray(pl["values"], float).tolist()
        pl["beta"] = np.asarray(pl["beta"], float).tolist()
        item["payload"] = pl
    with open(path, "a") as f:
        f.write(json.dumps(item, sort_keys=True) + "\n")


# ----------------------------------------------------------------------
# derived quantities

def _derive(config: SweepConfig, records, payloads):
    by_quantity = {}
    for rec in records:
        by_quantity.setdefault(rec.quantity, {})[(rec.lam, rec.rho)] = rec
    c_inf = {rho: rec for (lam, rho), rec in by_quantity.get("c_inf", {}).items()}
    derived = []
    reports = []

    delta = config.margin_delta_factor * config.r
    ball_grid = build_grid(DomainSpec.ball(radius=config.r),
                           cells_per_unit=max(16, 2.5 / delta))
    M_delta = sup_regular_part(ball_grid, delta).M_D_delta

    if "l" in config.quantities and "b_star" in by_quantity:
        for (lam, rho), rec in sorted(by_quantity["b_star"].items()):
            if math.isnan(rec.value) or lam <= 1:
                continue
            thr = sublevel_threshold(rec.value, lam, rho, M_delta, delta=delta)
            derived.append(SweepRecord(
                quantity="l", lam=lam, rho=rho, p=config.p, value=thr.value,
                omega=math.nan, iterations=0, h=rec.h,
                flags=(f"M_delta:{M_delta:.6g}", f"delta:{delta:g}")))

    if "containment" in config.quantities and "c_lambda" in by_quantity:
        l_map = {(r.lam, r.rho): r for r in derived if r.quantity == "l"}
        for (lam, rho), rec in sorted(by_quantity["c_lambda"].items()):
            lrec = l_map.get((lam, rho))
            key = f"c_lambda:{lam:g}:{rho:g}"
            if lrec is None or key not in payloads or math.isnan(rec.value):
                continue
            pl = payloads[key]
            spec = scale_domain(config.omega, lam) if lam > 1 else config.omega
            dilated = region(spec, lam * config.r)
            beta = np.asarray(pl["beta"], float)
            h = rec.h

            class _Shim:
                energy = type("E", (), {"total": rec.value})()
                barycenter = beta

            audit = containment_audit([_Shim()], dilated, lrec.value, slack=2 * h)
            ok = audit.all_contained and audit.skipped == 0 if rec.value <= lrec.value \
                else audit.skipped == 1
            reports.append(report_row("sweep.containment", str(spec.kind), lam,
                                      rec.value, lrec.value, None, ok))

    # one-sided lower-bound chain: c_inf <= value + M rho^4 / (4 lam) + slack
    for quantity in ("b_star", "c_lambda", "a"):
        for (lam, rho), rec in sorted(by_quantity.get(quantity, {}).items()):
            ci = c_inf.get(rho)
            if ci is None or math.isnan(rec.value) or not (lam > 0):
                continue
            slack = M_delta * rho**4 / (4 * lam) + max(1e-4, 0.05 * abs(ci.value))
            reports.append(report_row(f"sweep.gap_{quantity}", "vs c_inf", lam,
                                      rec.value, ci.value, slack,
                                      ci.value <= rec.value + slack))

    if "convergence" in config.quantities and "c_lambda" in by_quantity and c_inf:
        reports.extend(_convergence_report(config, by_quantity, payloads, c_inf))
    return derived, reports


def _convergence_report(config, by_quantity, payloads, c_inf):
    rows = []
    for rho in config.rho_list:
        ci = c_inf.get(rho)
        ckey = f"c_inf:nan:{rho:g}"
        if ci is None or ckey not in payloads:
            continue
        w_inf = payloads[ckey]
        omega_inf = ci.omega
        lams = sorted({lam for (lam, r2) in by_quantity["c_lambda"] if r2 == rho})
        gaps = []
        for lam in lams:
            key = f"c_lambda:{lam:g}:{rho:g}"
            rec = by_quantity["c_lambda"][(lam, rho)]
            if key not in payloads or math.isnan(rec.value):
                continue
            gaps.append((lam, _profile_gap(config, payloads[key], w_inf, rho), rec))
        if not gaps:
            continue
        lam_max, gap_max, rec_max = gaps[-1]
        rows.append(report_row("convergence.omega_negative", "c_lambda", lam_max,
                               rec_max.omega, 0.0, None, rec_max.omega < 0))
        rel = abs(rec_max.omega - omega_inf) / max(abs(omega_inf), 1e-300)
        rows.append(report_row("convergence.omega_gap", f"rho={rho:g}", lam_max,
                               rec_max.omega, omega_inf, 0.10, rel <= 0.10))
        rows.append(report_row("convergence.energy_negative", f"rho={rho:g}",
                               lam_max, rec_max.value, 0.0, None, rec_max.value < 0))
        if len(gaps) >= 2:
            dec = all(g2 <= g1 + 1e-12 for (_, g1, _), (_, g2, _)
                      in zip(gaps, gaps[1:]))
            rows.append(report_row("convergence.profile_gap_decreasing",
                                   f"rho={rho:g}", lam_max, gaps[-1][1],
                                   gaps[0][1], None, dec))
        rows.append(report_row("convergence.profile_gap", f"rho={rho:g}",
                               lam_max, gap_max, 0.0, None, True))
    return rows


def _profile_gap(config, payload, w_inf, rho) -> float:
    """L2 distance between the recentered spherical average and w_inf, over rho."""
    spec = DomainSpec.from_json(payload["spec"]) if payload.get("spec") else None
    if spec is None or payload.get("kind") != "grid":
        return math.nan
    grid = build_grid(spec, cells_per_unit=payload["cells_per_unit"])
    beta = np.asarray(payload["beta"], float)
    rr = np.linalg.norm(grid.points - beta, axis=1)
    h = grid.spacing
    w = RadialField(np.asarray(w_inf["values"], float), w_inf["h"])
    nbin = int(rr.max() / h) + 1
    idx = np.minimum((rr / h).astype(int), nbin - 1)
    sums = np.bincount(idx, weights=payload["values"], minlength=nbin)
    counts = np.maximum(np.bincount(idx, minlength=nbin), 1)
    prof = sums / counts
    centers = (np.arange(nbin) + 0.5) * h
    wref = w.interp(centers)
    gap2 = float(np.sum((prof - wref) ** 2 * 4 * np.pi * centers**2 * h))
    return math.sqrt(gap2) / rho


# ----------------------------------------------------------------------
# CSV emission

def write_csvs(records, out_dir, config: SweepConfig):
    """One CSV per quantity with the gap column; returns the file list."""
    import csv

    by_quantity = {}
    for rec in records:
        by_quantity.setdefault(rec.quantity, []).append(rec)
    c_inf = {rec.rho: rec.value for rec in by_quantity.get("c_inf", [])}
    files = []
    for quantity in sorted(by_quantity):
        path = os.path.join(out_dir, f"{quantity}.csv")
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for rec in sorted(by_quantity[quantity],
                              key=lambda r: (_nan_key(r.lam), r.rho)):
                gap = ""
                if quantity in ("b_star", "c_lambda", "b_lambda", "a") \
                        and rec.rho in c_inf and not math.isnan(rec.value):
                    gap = f"{rec.value - c_inf[rec.rho]:.12g}"
                writer.writerow([
                    rec.quantity, f"{rec.lam:g}", f"{rec.rho:g}", f"{rec.p:g}",
                    _fmt(rec.value), _fmt(rec.omega), _fmt(rec.kinetic),
                    _fmt(rec.nonlocal_), _fmt(rec.power), _fmt(rec.value),
                    _fmt(rec.mass), rec.iterations, _fmt(rec.h), gap,
                    ";".join(rec.flags),
                ])
        files.append(path)
    return files


def _fmt(x) -> str:
    return "" if (isinstance(x, float) and math.isnan(x)) else f"{x:.12g}"
