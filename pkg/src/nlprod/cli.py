"""Command-line front end.

Exit status: 0 when the checked property holds, 2 when the check ran and the
property fails, 1 on usage or internal errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .densela import DEFAULT_TOL
from .families import FAMILY_NAMES, check_completeness, check_orthogonality, gen_main_family, get_family
from .locc import (
    attach_resource,
    basis2_demo,
    build_discrimination_protocol,
    run_protocol,
    subfamily_at,
)
from .opm import certify

OK, FAILED, ERROR = 0, 2, 1
EXPECTED_BASIS2_REST = ("ket_111", "ket_222", "phi_1", "phi_3", "phi_5", "phi_7", "phi_9", "phi_11")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ERROR, f"{self.prog}: error: {message}\n")


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _cnum(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _matrix(m: np.ndarray) -> list:
    return [[_cnum(z) for z in row] for row in m]


def _parse_range(text: str) -> list[int]:
    try:
        lo, hi = (int(x) for x in text.split(".."))
    except ValueError:
        raise UsageError(f"range must look like A..B, got {text!r}") from None
    if lo > hi:
        raise UsageError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


@dataclass
class RunConfig:
    command: str
    name: str = "main"
    n: int | None = None
    d: int | None = None
    tol: float = DEFAULT_TOL
    format: str = "json"
    out: str | None = None
    n_range: str = "3..6"
    d_range: str = "2..6"
    jobs: int = 1

    def validate(self):
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        needs_nd = self.command == "protocol" or (
            self.command in ("family", "ortho", "nonlocality") and self.name in ("main", "stopper")
        )
        if needs_nd:
            if self.n is None or self.d is None:
                raise UsageError("--n and --d are required")
            if self.n < 3:
                raise UsageError(f"--n must be at least 3, got {self.n}")
            if self.d < 2:
                raise UsageError(f"--d must be at least 2, got {self.d}")
        if self.name not in FAMILY_NAMES:
            raise UsageError(f"unknown family {self.name!r}; expected one of {', '.join(FAMILY_NAMES)}")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _family(cfg):
    return get_family(cfg.name, cfg.n, cfg.d)


def cmd_family(cfg: RunConfig):
    f = _family(cfg)
    if cfg.format == "csv":
        rows = []
        for lab, s in zip(f.labels, f.states):
            for t, (c, factors) in enumerate(s.terms):
                for p, ket in enumerate(factors):
                    amps = " ".join(f"{_num(z.real)}{float(z.imag):+.17g}j" for z in ket.amplitudes)
                    rows.append([lab, t, _num(c.real), _num(c.imag), p, amps])
        return _csv(["label", "term", "coefficient_re", "coefficient_im", "party", "amplitudes"], rows), OK
    doc = {
        "family": f.name,
        "dims": list(f.layout.dims),
        "count": len(f),
        "states": [
            {
                "label": lab,
                "terms": [
                    {"coefficient": _cnum(c), "factors": [[_cnum(z) for z in k.amplitudes] for k in fs]}
                    for c, fs in s.terms
                ],
            }
            for lab, s in zip(f.labels, f.states)
        ],
    }
    return doc, OK


def cmd_ortho(cfg: RunConfig):
    f = _family(cfg)
    rep = check_orthogonality(f)
    doc = {
        "family": f.name,
        "count": len(f),
        "max_overlap": rep.max_overlap,
        "worst_pair": list(rep.worst_pair) if rep.worst_pair else None,
        "max_norm_error": rep.max_norm_error,
        "tol": rep.tol,
        "passed": rep.passed,
        "complete": check_completeness(f),
    }
    status = OK if rep.passed else FAILED
    if cfg.format == "csv":
        keys = ["family", "count", "max_overlap", "max_norm_error", "passed", "complete"]
        row = [doc[k] if not isinstance(doc[k], float) else _num(doc[k]) for k in keys]
        return _csv(keys, [row]), status
    return doc, status


def nonlocality_doc(report, f, tol) -> dict:
    return {
        "family": report.family,
        "dims": list(f.layout.dims),
        "tol": tol,
        "certified": report.certified,
        "parties": [
            {
                "party": p.party,
                "dimension": p.dimension,
                "certified": p.certified,
                "identity_residual": p.identity_residual,
                "witness": None if p.witness is None else _matrix(p.witness.matrix),
            }
            for p in report.parties
        ],
    }


def cmd_nonlocality(cfg: RunConfig):
    f = _family(cfg)
    report = certify(f, cfg.tol)
    status = OK if report.certified else FAILED
    if cfg.format == "csv":
        rows = [[p.party, p.dimension, p.certified, _num(p.identity_residual)] for p in report.parties]
        return _csv(["party", "dimension", "certified", "identity_residual"], rows), status
    return nonlocality_doc(report, f, cfg.tol), status


def protocol_doc(report) -> dict:
    return {
        "family": report.family,
        "tol": report.tol,
        "perfect": report.perfect,
        "max_wrong_probability": report.max_wrong_probability,
        "max_residual_probability": report.max_residual_probability,
        "max_total_error": report.max_total_error,
        "states": [
            {
                "label": o.label,
                "success_probability": o.success_probability,
                "wrong_probability": o.wrong_probability,
                "residual_probability": o.residual_probability,
                "total_probability": o.total_probability,
                "paths": [
                    {"path": list(r.path), "probability": r.probability, "verdict": r.verdict}
                    for r in o.paths
                ],
            }
            for o in report.outcomes
        ],
    }


def _protocol_csv(report) -> str:
    rows = [
        [o.label, "-".join(map(str, r.path)), _num(r.probability), r.verdict]
        for o in report.outcomes
        for r in o.paths
    ]
    return _csv(["label", "path", "probability", "verdict"], rows)


def _protocol_report(n, d, tol):
    f = attach_resource(gen_main_family(n, d), n - 2, n - 1)
    return run_protocol(build_discrimination_protocol(n, d), f, tol)


def cmd_protocol(cfg: RunConfig):
    report = _protocol_report(cfg.n, cfg.d, cfg.tol)
    good = (
        report.perfect
        and report.max_wrong_probability <= cfg.tol
        and report.max_residual_probability <= cfg.tol
        and report.max_total_error <= cfg.tol
    )
    status = OK if good else FAILED
    doc = dict(protocol_doc(report), n=cfg.n, d=cfg.d)
    if cfg.format == "csv":
        return _protocol_csv(report), status
    return doc, status


def cmd_basis2_demo(cfg: RunConfig):
    from .families import gen_basis2

    demo = basis2_demo()
    f = gen_basis2()
    leaves = []
    leaf_perfect = True
    for path in sorted(demo.leaves):
        completed = demo.completed.get(path)
        if completed:
            sub = subfamily_at(demo.split, f, path)
            rep = run_protocol(demo.tree, f.subset(sub.labels), cfg.tol)
            leaf_perfect &= rep.perfect
        leaves.append({"path": list(path), "survivors": list(demo.leaves[path]), "completed": completed})
    rest = demo.leaves[(0, 0, 0)]
    good = (
        set(rest) == set(EXPECTED_BASIS2_REST)
        and all(demo.completed.values())
        and leaf_perfect
        and demo.max_overlap <= 1e-9
    )
    status = OK if good else FAILED
    if cfg.format == "csv":
        rows = [["-".join(map(str, lf["path"])), " ".join(lf["survivors"]), lf["completed"]] for lf in leaves]
        return _csv(["path", "survivors", "completed"], rows), status
    doc = {
        "family": "basis2",
        "leaves": leaves,
        "undecided_set": list(rest),
        "max_overlap": demo.max_overlap,
        "outcome2_leaves_perfect": leaf_perfect,
        "passed": good,
    }
    return doc, status


def scan_cell(args) -> dict:
    n, d, tol = args
    start = time.perf_counter()
    f = gen_main_family(n, d)
    ortho = check_orthogonality(f)
    report = certify(f, tol)
    proto = _protocol_report(n, d, tol)
    return {
        "n": n,
        "d": d,
        "family_size": len(f),
        "ortho_max_overlap": ortho.max_overlap,
        "party_dims": report.dimensions,
        "certified": report.certified,
        "perfect": proto.perfect,
        "wall_time_s": time.perf_counter() - start,
    }


def cmd_scan(cfg: RunConfig):
    cells = [(n, d, cfg.tol) for n in _parse_range(cfg.n_range) for d in _parse_range(cfg.d_range)]
    if any(n < 3 or d < 2 for n, d, _ in cells):
        raise UsageError("scan ranges need n >= 3 and d >= 2")
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(scan_cell, cells))
    else:
        rows = [scan_cell(c) for c in cells]
    status = OK if all(r["certified"] and r["perfect"] for r in rows) else FAILED
    if cfg.format == "csv":
        header = list(rows[0].keys())
        body = [
            [
                ";".join(map(str, r[k])) if isinstance(r[k], list) else _num(r[k]) if isinstance(r[k], float) else r[k]
                for k in header
            ]
            for r in rows
        ]
        return _csv(header, body), status
    doc = {
        "tol": cfg.tol,
        "rows": [{k: v for k, v in r.items() if k != "wall_time_s"} for r in rows],
        "timing": [{"n": r["n"], "d": r["d"], "wall_time_s": r["wall_time_s"]} for r in rows],
    }
    return doc, status


COMMANDS = {
    "family": cmd_family,
    "ortho": cmd_ortho,
    "nonlocality": cmd_nonlocality,
    "protocol": cmd_protocol,
    "basis2-demo": cmd_basis2_demo,
    "scan": cmd_scan,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nlprod", description="Orthogonal product-state nonlocality checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--name", default="main", help="family: " + ", ".join(FAMILY_NAMES))
        p.add_argument("--n", type=int)
        p.add_argument("--d", type=int)
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", metavar="PATH")
        if name == "scan":
            p.add_argument("--n-range", default="3..6")
            p.add_argument("--d-range", default="2..6")
            p.add_argument("--jobs", type=int, default=1)
    return parser


def run(cfg: RunConfig) -> tuple[str, int]:
    cfg.validate()
    payload, status = COMMANDS[cfg.command](cfg)
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n"
    return text, status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**vars(args))
    try:
        text, status = run(cfg)
    except (UsageError, ValueError) as exc:
        print(f"nlprod: error: {exc}", file=sys.stderr)
        return ERROR
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
