"""Command-line harness: configuration, pipelines, artifact output.

Subcommands:
    eigen-check   sampled eigenstructure invariant suite -> JSON verdicts
    make-data     construct the seed family and initial state -> ELWV + CSV
    sobolev-scan  seed-norm eta sweep and scaling fit -> CSV + JSON
    evolve        one Eulerian run on a full-light-cone grid -> snapshots
    shock-scan    preset pipeline (optionally theta/eta sweeps) -> reports
    report        aggregate verdicts from an output tree -> report.json

Common flags: --config PATH (key = value overrides), --out DIR,
--workers N, --dump-preset.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import pipeline
from .checks import eigen_check_suite
from .config import (
    ConfigError,
    RunConfig,
    config_fingerprint,
    dump_config,
    parse_config,
    preset_paper_desk,
)
from .evolve import Grid1D, run
from .initial_data import reconstruct_phi0
from .pipeline import make_evolve_config, predicted_shock_time
from .snapshots import ArtifactWriter, write_data_csv
from .sobolev import scaling_fit, sweep_seed_norms


def _load_config(args) -> RunConfig:
    text = ""
    if getattr(args, "config", None):
        text = Path(args.config).read_text()
    for item in getattr(args, "set", None) or []:
        text += "\n" + item
    return parse_config(text)


def _writer(args) -> ArtifactWriter:
    return ArtifactWriter(args.out)


def cmd_eigen_check(args) -> int:
    cfg = _load_config(args)
    checks = eigen_check_suite(cfg.phys, seed=cfg.run.seed)
    aw = _writer(args)
    ok = checks["all_pass"]["pass"]
    aw.json("eigen_check.json", {"verdict": "PASS" if ok else "FAIL",
                                 "fingerprint": config_fingerprint(cfg),
                                 "checks": checks})
    aw.finalize()
    print(f"eigen-check: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_make_data(args) -> int:
    cfg = _load_config(args)
    eta = cfg.data.eta
    n = 8 * cfg.grid.points_per_eta_secondary + 1
    x = np.linspace(0.5 * eta, 2.5 * eta, n)
    df = reconstruct_phi0(cfg.data, cfg.phys, x, mode=cfg.mode)
    aw = _writer(args)
    aw.snapshot("data_phi0.elwv", float(x[0]), float(x[1] - x[0]), df.phi)
    p = aw.path("data_field.csv")
    write_data_csv(p, x, df.w, df.phi)
    aw.register(p)
    aw.json("data_summary.json", {
        "w0": df.w0, "z0": df.z0, "mode": df.mode,
        "fingerprint": config_fingerprint(cfg),
        "max_abs_phi": float(np.linalg.norm(df.phi, axis=0).max()),
    })
    aw.finalize()
    print(f"make-data: W0 = {df.w0:.6g} at z0 = {df.z0:.6g}")
    return 0


def cmd_sobolev_scan(args) -> int:
    cfg = _load_config(args)
    etas = [2.0**-k for k in range(6, 15)]
    reps = sweep_seed_norms(cfg.data.theta, cfg.data.alpha, cfg.data.delta,
                            etas, s=args.s, n_base=args.n_base)
    fit = scaling_fit(etas, [r.norm_sq for r in reps],
                      [r.converged for r in reps])
    aw = _writer(args)
    aw.csv("sobolev_scan.csv",
           ["eta", "s", "norm_sq", "d1", "d2", "d3", "d4",
            "refinement_level", "richardson_rel"],
           [np.array(etas), np.full(len(etas), args.s),
            np.array([r.norm_sq for r in reps]),
            np.array([r.d1 for r in reps]), np.array([r.d2 for r in reps]),
            np.array([r.d3 for r in reps]), np.array([r.d4 for r in reps]),
            np.array([r.refinement_level for r in reps]),
            np.array([r.richardson_rel for r in reps])])
    aw.json("sobolev_fit.json", {
        "slope": fit.slope, "intercept": fit.intercept,
        "residual_rms": fit.residual_rms, "converged": fit.converged,
        "fingerprint": config_fingerprint(cfg),
    })
    aw.finalize()
    print(f"sobolev-scan: slope = {fit.slope:.4f} "
          f"(converged = {fit.converged})")
    return 0


def cmd_evolve(args) -> int:
    cfg = _load_config(args)
    t_pred, w0, _ = predicted_shock_time(cfg)
    t_max = args.t_max if args.t_max is not None else 0.5
    grid = pipeline.cone_window(cfg, t_max, ppe=args.ppe)
    ecfg = make_evolve_config(cfg, t_max, t_pred, 0.0, 0)
    if args.m_stop_factor is not None:
        ecfg.m_stop = args.m_stop_factor
    df = reconstruct_phi0(cfg.data, cfg.phys, grid.x, mode=cfg.mode)
    traj = run(cfg.phys, ecfg, grid, df.phi)
    aw = _writer(args)
    stride = max(1, len(traj.times) // args.keep_snapshots)
    for j in range(0, len(traj.times), stride):
        aw.snapshot(f"snap_{j:06d}.elwv", grid.x_min, grid.dx,
                    traj.fields[j], time=float(traj.times[j]),
                    shift=traj.shift)
    aw.json("run_manifest.json", {
        "fingerprint": config_fingerprint(cfg),
        "grid": {"x_min": grid.x_min, "x_max": grid.x_max, "n": grid.n},
        "t_end": traj.t_end, "stop_reason": traj.stop_reason,
        "maxgrad_final": float(traj.maxgrad[-1]),
        "snapshots": len(traj.times),
    })
    aw.finalize()
    print(f"evolve: t_end = {traj.t_end:.6g} ({traj.stop_reason})")
    return 0


def cmd_shock_scan(args) -> int:
    cfg = _load_config(args)
    tasks = []
    if args.sweep in (None, "none"):
        tasks.append({"name": "preset", "kind": "preset",
                      "config": dump_config(cfg)})
    else:
        for name, text in pipeline.sweep_configs(cfg, args.sweep):
            tasks.append({"name": name, "kind": "preset", "config": text})
    results = pipeline.run_tasks_cached(tasks, workers=args.workers)
    aw = _writer(args)
    verdicts = {}
    for name, res in sorted(results.items()):
        aw.json(f"shock_{name.replace('=', '_')}.json", res)
        shock = res.get("shock", {})
        verdicts[name] = {
            "detected": shock.get("detected"),
            "T_num": shock.get("T_num"),
            "P": shock.get("product_P"),
        }
    aw.json("shock_scan_summary.json", {"runs": verdicts})
    aw.finalize()
    for name, v in sorted(verdicts.items()):
        print(f"{name}: detected={v['detected']} T_num={v['T_num']} "
              f"P={v['P']}")
    return 0 if all(v["detected"] for v in verdicts.values()) else 1


def cmd_report(args) -> int:
    root = Path(args.out)
    verdicts = {}
    for path in sorted(root.glob("**/*.json")):
        if path.name in ("manifest.json", "report.json"):
            continue
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError:
            verdicts[str(path)] = {"status": "FAIL",
                                   "reason": "unreadable JSON"}
            continue
        status = "PASS"
        reason = ""
        if "verdict" in doc:
            status = doc["verdict"]
        elif "shock" in doc:
            det = doc["shock"].get("detected")
            status = "PASS" if det else "FAIL"
            reason = doc["shock"].get("no_shock_reason") or ""
        elif "slope" in doc:
            status = "PASS" if doc.get("converged", False) else "FAIL"
        else:
            status = "SKIP"
            reason = "no recognised verdict fields"
        verdicts[str(path.relative_to(root))] = {"status": status,
                                                 "reason": reason}
    aw = ArtifactWriter(root)
    aw.json("report.json", {"verdicts": verdicts})
    n_fail = sum(1 for v in verdicts.values() if v["status"] == "FAIL")
    for name, v in verdicts.items():
        print(f"{v['status']:4s} {name}" +
              (f"  ({v['reason']})" if v["reason"] else ""))
    return 0 if n_fail == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="elwave",
        description="Planar elastic-wave shock-formation laboratory")
    ap.add_argument("--dump-preset", action="store_true",
                    help="print the paper-desk preset config and exit")
    sub = ap.add_subparsers(dest="command")

    def common(sp):
        sp.add_argument("--config", help="config file (key = value lines)")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="inline config override (repeatable)")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--workers", type=int, default=2)

    sp = sub.add_parser("eigen-check", help="eigenstructure invariant suite")
    common(sp)
    sp.set_defaults(func=cmd_eigen_check)

    sp = sub.add_parser("make-data", help="construct the initial data")
    common(sp)
    sp.set_defaults(func=cmd_make_data)

    sp = sub.add_parser("sobolev-scan", help="seed-norm eta sweep")
    common(sp)
    sp.add_argument("--s", type=float, default=0.75)
    sp.add_argument("--n-base", type=int, default=256)
    sp.set_defaults(func=cmd_sobolev_scan)

    sp = sub.add_parser("evolve", help="single full-cone Eulerian run")
    common(sp)
    sp.add_argument("--t-max", type=float, default=None)
    sp.add_argument("--ppe", type=int, default=None,
                    help="grid points per eta")
    sp.add_argument("--m-stop-factor", type=float, default=None,
                    help="absolute max|dx phi1| stop threshold")
    sp.add_argument("--keep-snapshots", type=int, default=24)
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("shock-scan", help="shock pipeline and sweeps")
    common(sp)
    sp.add_argument("--sweep", choices=["none", "theta", "eta"],
                    default="none")
    sp.set_defaults(func=cmd_shock_scan)

    sp = sub.add_parser("report", help="aggregate verdicts in an out tree")
    common(sp)
    sp.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.dump_preset:
        sys.stdout.write(dump_config(preset_paper_desk()))
        return 0
    if not getattr(args, "command", None):
        ap.print_help()
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print("invalid config:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
