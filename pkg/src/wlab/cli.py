"""Batch front end.

    wlab <certify|solve|revolve|diagram|parallel|linop|blowup>
         --config <path> [--out <dir>] [--seed <u64>] [--set key=value ...]

Configs are JSON files; repeated --set overrides replace dotted keys, with
values parsed as JSON where possible (bare words fall back to strings).
Every command writes a deterministic summary JSON (sorted keys, seed
recorded, no timestamp; the wall-clock stamp goes to run_stamp.txt) plus
CSV artifacts next to it.

Exit codes: 0 ok, 1 I/O or parse error, 2 certification/validity failure,
3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagram as diagram_mod
from . import geometry, linop, solver
from .errors import WlabError
from .relation import RelationSpec, certify_ellipticity, relation_from_json, relation_to_json

EXIT_OK = 0
EXIT_IO = 1
EXIT_CERTIFICATION = 2
EXIT_SOLVER = 3

COMMANDS = ("certify", "solve", "revolve", "diagram", "parallel", "linop", "blowup")


@dataclass
class ExperimentConfig:
    """One experiment: the command's parameter record plus run metadata."""

    command: str
    params: dict
    out_dir: Path
    seed: int
    threads: int = field(default_factory=lambda: int(os.environ.get("WLAB_THREADS", "1")))

    def __post_init__(self):
        for key, value in self.params.items():
            if key.startswith("tol") and not (isinstance(value, (int, float)) and value > 0):
                raise ValueError(f"tolerance {key!r} must be positive, got {value!r}")

    def relation(self, key: str = "relation") -> RelationSpec:
        if key not in self.params:
            raise KeyError(f"config is missing {key!r}")
        spec = self.params[key]
        if isinstance(spec, str):
            with open(spec) as fh:
                spec = json.load(fh)
        return relation_from_json(spec)

    def write_summary(self, name: str, payload: dict):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        payload = dict(payload)
        payload["seed"] = self.seed
        payload["threads"] = self.threads
        with open(self.out_dir / name, "w") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
        with open(self.out_dir / "run_stamp.txt", "w") as fh:
            fh.write(datetime.datetime.now().isoformat() + "\n")


def _set_override(tree: dict, dotted: str, raw: str):
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    keys = dotted.split(".")
    node = tree
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ValueError(f"override path {dotted!r} crosses a non-object value")
    node[keys[-1]] = value


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_certify(cfg: ExperimentConfig) -> int:
    rel = cfg.relation()
    report = certify_ellipticity(rel, t_max=float(cfg.params.get("t_max", 1e4)),
                                 samples=int(cfg.params.get("samples", 10_000)))
    cfg.write_summary("certify_report.json", {
        "check": "ellipticity_certification",
        "relation": relation_to_json(rel),
        "report": report.to_json(),
    })
    return EXIT_OK if report.is_elliptic else EXIT_CERTIFICATION


def _boundary_data(spec):
    """Constant value, or {"kind": "affine", "coeffs": [a, b, c]} for a + b*x + c*y."""
    if isinstance(spec, dict):
        if spec.get("kind") != "affine":
            raise ValueError(f"unknown boundary kind {spec.get('kind')!r}")
        a, b, c = (float(v) for v in spec["coeffs"])
        return lambda x, y: a + b * x + c * y
    return float(spec)


def _build_patch(cfg: ExperimentConfig) -> solver.GraphPatch:
    dom = cfg.params["domain"]
    h = float(cfg.params["h"])
    bc = _boundary_data(cfg.params.get("boundary", cfg.params.get("boundary_value", 0.0)))
    init = cfg.params.get("init", 0.0)
    init = 0.0 if init == "zero" else float(init)
    if dom["type"] == "disk":
        return solver.GraphPatch.disk(tuple(dom.get("center", (0.0, 0.0))),
                                      float(dom["radius"]), h, boundary=bc, init=init)
    if dom["type"] == "rectangle":
        return solver.GraphPatch.rectangle(tuple(dom["bounds"]), h, boundary=bc, init=init)
    raise ValueError(f"unknown domain type {dom.get('type')!r}")


def _cmd_solve(cfg: ExperimentConfig) -> int:
    rel = cfg.relation()
    patch = _build_patch(cfg)
    outcome = solver.newton_solve(rel, patch,
                                  tol_res=float(cfg.params.get("tol_res", 1e-8)),
                                  max_iter=int(cfg.params.get("max_iter", 40)))
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    outcome.final_patch.save(cfg.out_dir / "solution.csv", cfg.out_dir / "solution_header.json")
    summary = {
        "check": "dirichlet_solve",
        "relation": relation_to_json(rel),
        "outcome": outcome.to_json(),
        "interior_nodes": int(outcome.final_patch.interior_mask().sum()),
    }
    bench = cfg.params.get("benchmark_center_value")
    if bench is not None and outcome.status == "converged":
        ny, nx = outcome.final_patch.shape
        center = outcome.final_patch.values[ny // 2, nx // 2]
        summary["center_value"] = float(center)
        summary["center_value_error"] = float(abs(center - float(bench)))
    cfg.write_summary("solve_report.json", summary)
    return EXIT_OK if outcome.status == "converged" else EXIT_SOLVER


def _cmd_revolve(cfg: ExperimentConfig) -> int:
    rel = cfg.relation()
    seed_state = tuple(float(v) for v in cfg.params["seed_state"])
    profile = geometry.rotational_profile(rel, seed_state,
                                          step=float(cfg.params.get("step", 1e-3)),
                                          s_max=float(cfg.params.get("s_max", 10.0)))
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    profile.save_csv(cfg.out_dir / "profile.csv")
    period = geometry.detect_period(profile) if cfg.params.get("detect_period", True) else None
    cfg.write_summary("revolve_report.json", {
        "check": "rotational_profile_generation",
        "relation": relation_to_json(rel),
        "samples": len(profile),
        "termination": profile.reason,
        "period": period,
    })
    return EXIT_OK


def _cmd_diagram(cfg: ExperimentConfig) -> int:
    if "mesh" in cfg.params:
        mesh = diagram_mod.load_obj(cfg.params["mesh"])
        diag = diagram_mod.mesh_diagram(mesh)
    elif "pairs_csv" in cfg.params:
        rows = np.loadtxt(cfg.params["pairs_csv"], delimiter=",", skiprows=1, ndmin=2)
        diag = diagram_mod.CurvatureDiagram(rows[:, :2], "synthetic")
    elif "pairs" in cfg.params:
        diag = diagram_mod.CurvatureDiagram(np.asarray(cfg.params["pairs"], dtype=float), "synthetic")
    else:
        raise KeyError("diagram config needs 'mesh', 'pairs_csv' or 'pairs'")
    report = diagram_mod.qc_classify(diag)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    diag.save_csv(cfg.out_dir / "diagram.csv")
    cfg.write_summary("diagram_report.json", {
        "check": "quasiconformality_classification",
        "source": diag.source,
        "sample_count": len(diag),
        "notes": diag.notes,
        "qc": report.to_json(),
    })
    return EXIT_OK


def _cmd_parallel(cfg: ExperimentConfig) -> int:
    rel = cfg.relation()
    a = float(cfg.params["a"])
    conj = geometry.conjugate_relation(rel, a)
    payload = {
        "check": "parallel_surface_conjugation",
        "relation": relation_to_json(rel),
        "offset": a,
        "conjugated": relation_to_json(conj),
    }
    pairs = cfg.params.get("pairs")
    if pairs:
        rows = []
        for k1, k2 in pairs:
            new_pair, factors = geometry.parallel_curvatures(geometry.CurvaturePair(k1, k2), a)
            rows.append([k1, k2, new_pair.k1, new_pair.k2, factors[0], factors[1]])
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        np.savetxt(cfg.out_dir / "parallel_pairs.csv", np.asarray(rows), delimiter=",",
                   header="k1,k2,k1_offset,k2_offset,metric_factor_1,metric_factor_2", comments="")
        payload["pairs_written"] = len(rows)
    cfg.write_summary("parallel_report.json", payload)
    return EXIT_OK


def _cmd_linop(cfg: ExperimentConfig) -> int:
    rel = cfg.relation()
    r0 = float(cfg.params["r0"])
    op = linop.cylinder_operator(rel, r0)
    L = float(cfg.params.get("L", 1.0))
    r = float(cfg.params.get("r", 1.0))
    critical_square = 0.5 * math.pi * math.sqrt((op.A + op.B) / op.C)
    cfg.write_summary("linop_report.json", {
        "check": "cylinder_linearized_operator",
        "relation": relation_to_json(rel),
        "operator": op.to_json(),
        "threshold": linop.perturbation_threshold(op, L, r),
        "box": [L, r],
        "critical_square_half_size": critical_square,
    })
    return EXIT_OK


def _cmd_blowup(cfg: ExperimentConfig) -> int:
    spec = cfg.params["patch"]
    if "load" in spec:
        patch = solver.GraphPatch.load(spec["load"]["csv"], spec["load"]["header"])
    else:
        sub = ExperimentConfig(cfg.command, spec["solve"], cfg.out_dir, cfg.seed)
        rel = sub.relation()
        patch = _build_patch(sub)
        outcome = solver.newton_solve(rel, patch,
                                      tol_res=float(spec["solve"].get("tol_res", 1e-8)),
                                      max_iter=int(spec["solve"].get("max_iter", 40)))
        if outcome.status != "converged":
            return EXIT_SOLVER
        patch = outcome.final_patch
    sigma = None
    synth = cfg.params.get("synthetic_sigma")
    if synth:
        sigma = np.where(patch.mask, float(synth.get("base", 1.0)), np.nan)
        for spike in synth.get("spikes", []):
            iy, ix = (int(v) for v in spike["node"])
            sigma[iy, ix] += float(spike["amplitude"])
    center = cfg.params.get("center")
    if center is None:
        ny, nx = patch.shape
        center = (ny // 2, nx // 2)
    sel = solver.blowup_select(patch, tuple(int(v) for v in center),
                               float(cfg.params["radius"]), sigma_field=sigma)
    cfg.write_summary("blowup_report.json", {
        "check": "blowup_maximizer_selection",
        "selection": sel.to_json(),
        "radius": float(cfg.params["radius"]),
        "synthetic_sigma": bool(synth),
    })
    return EXIT_OK


_DISPATCH = {
    "certify": _cmd_certify,
    "solve": _cmd_solve,
    "revolve": _cmd_revolve,
    "diagram": _cmd_diagram,
    "parallel": _cmd_parallel,
    "linop": _cmd_linop,
    "blowup": _cmd_blowup,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wlab",
        description="Numerical laboratory for elliptic Weingarten surfaces")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized sampling")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config entry (dotted key)")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            params = json.load(fh)
        if not isinstance(params, dict):
            raise ValueError("config root must be a JSON object")
        for item in args.overrides:
            key, _, raw = item.partition("=")
            if not _:
                raise ValueError(f"override {item!r} is not KEY=VALUE")
            _set_override(params, key, raw)
        cfg = ExperimentConfig(args.command, params, Path(args.out), args.seed)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"wlab: config error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        return _DISPATCH[args.command](cfg)
    except (KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"wlab: input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except WlabError as exc:
        print(f"wlab: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    except ValueError as exc:
        print(f"wlab: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
