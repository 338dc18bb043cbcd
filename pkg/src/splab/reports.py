"""Common audit-report rows and their JSON serialization.

Every property audit in the package reduces to rows with the same schema:
property, domain, lambda, lhs, rhs, tolerance, pass.
"""

from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass
class AuditRow:
    property: str
    domain: str
    lam: float | None
    lhs: float | None
    rhs: float | None
    tolerance: float | None
    ok: bool

    def as_dict(self) -> dict:
        return {
            "property": self.property,
            "domain": self.domain,
            "lambda": self.lam,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "tolerance": self.tolerance,
            "pass": bool(self.ok),
        }


def row(prop, domain, lam, lhs, rhs, tol, ok) -> AuditRow:
    return AuditRow(
        property=str(prop),
        domain=str(domain),
        lam=None if lam is None else float(lam),
        lhs=None if lhs is None else float(lhs),
        rhs=None if rhs is None else float(rhs),
        tolerance=None if tol is None else float(tol),
        ok=bool(ok),
    )


def rel_check(prop, domain, lam, lhs, rhs, tol) -> AuditRow:
    """Pass when |lhs - rhs| <= tol * max(|lhs|, |rhs|)."""
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return row(prop, domain, lam, lhs, rhs, tol, abs(lhs - rhs) <= tol * scale)


def write_report(path, rows, meta: dict | None = None):
    payload = {
        "meta": meta or {},
        "rows": [r.as_dict() for r in rows],
        "all_pass": all(r.ok for r in rows),
    }
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return payload


def print_rows(rows, out=None):
    import sys

    out = out or sys.stdout
    width = max((len(r.property) for r in rows), default=10)
    for r in rows:
        status = "PASS" if r.ok else "FAIL"
        lam = "" if r.lam is None else f" lam={r.lam:g}"
        lhs = "" if r.lhs is None else f" lhs={r.lhs:.6g}"
        rhs = "" if r.rhs is None else f" rhs={r.rhs:.6g}"
        tol = "" if r.tolerance is None else f" tol={r.tolerance:g}"
        print(f"[{status}] {r.property:<{width}} {r.domain}{lam}{lhs}{rhs}{tol}", file=out)
