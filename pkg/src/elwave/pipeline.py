"""Experiment orchestration: windowed runs, fans, measurements, sweeps.

A preset measurement splits into one short full-light-cone run (RUN F,
spec-shaped grid: all four strips coexist, used for strip separation and
the outside-strip norms) and four long comoving windows (RUN C_i, shifted
at lam_i(0)), each just wide enough to hold its strip plus margins and
absorbing sponges. All cross-family interactions happen while the other
strips are still inside each window (separation takes t0 = eta/sigma <<
window exit times), after which the departed waves carry no further
influence; this keeps the long-horizon cost at ~10^3 cells per run
instead of the ~|lam_4| t_max light cone.

The family-1 fan traced through RUN C1 supplies the shock measurements;
fans 2-4 through their own windows supply the exclusivity bounds. The
dissipation default follows a feature-preservation budget: the seed's
smallest scale (~0.07 eta) must lose only a few percent of amplitude over
the whole horizon, which forces eps ~ 1e-2 eta / T_pred at 192 cells per
eta (the nominal 0.02 would smear the data long before the shock).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .characteristics import (
    bichar_intersection,
    default_seeds,
    dz_rho,
    norm_series,
    refine_seeds,
    rho_from_flow_map,
    strip_separation,
    trace_fan,
)
from .config import RunConfig, config_fingerprint, dump_config, parse_config
from .eigen import (
    ball_sample,
    c111_closed_form,
    eigenvalues,
    lambda_max_bound,
    min_gap_sigma,
)
from .evolve import EvolveConfig, Grid1D, Trajectory, run
from .initial_data import compute_w0_z0, decompose_w, reconstruct_phi0
from .shock import (
    AnalysisParams,
    ShockReport,
    attach_exclusivity,
    bracket_check,
    detect_shock,
    h2_blowup_integral,
)

CODE_SALT = "elwave-pipeline-v3"


def predicted_shock_time(cfg: RunConfig) -> tuple[float, float, float]:
    """(T_pred, W0, z0) from the rest-state Lax coefficient."""
    w0, z0 = compute_w0_z0(cfg.data)
    c111 = abs(cfg.phys.c111_at_zero())
    return 1.0 / (c111 * w0), w0, z0


def auto_dissipation(cfg: RunConfig, t_pred: float) -> float:
    """Feature-preservation budget: a few % amplitude loss over the run."""
    if cfg.evolve.dissipation is not None:
        return cfg.evolve.dissipation
    return 1.0e-2 * cfg.data.eta / t_pred


def speed_spread(cfg: RunConfig, family: int, amp: float) -> float:
    """max |lam_i(Phi) - lam_i(0)| over states reachable by the run."""
    pts = ball_sample(min(1.5 * amp, 2.0 * cfg.phys.kappa), 512, seed=5)
    lam = eigenvalues(cfg.phys, pts[:, 0], pts[:, 1])
    lam0 = eigenvalues(cfg.phys, 0.0, 0.0)
    return float(np.abs(lam[family - 1] - lam0[family - 1]).max())


def data_amplitude(cfg: RunConfig) -> float:
    """max |Phi(., 0)| from a coarse reconstruction probe."""
    eta = cfg.data.eta
    x = np.linspace(0.8 * eta, 2.3 * eta, 800)
    df = reconstruct_phi0(cfg.data, cfg.phys, x, mode=cfg.mode)
    return float(np.linalg.norm(df.phi, axis=0).max())


def family_window(cfg: RunConfig, family: int, t_end: float, amp: float,
                  ppe: int | None = None,
                  sponge_cells: int | None = None) -> tuple[Grid1D, float, int]:
    """Comoving window (grid, shift, sponge_cells) for one family strip."""
    eta = cfg.data.eta
    ppe = cfg.grid.points_per_eta if ppe is None else ppe
    sponge = cfg.grid.sponge_cells if sponge_cells is None else sponge_cells
    dx = eta / ppe
    shift = float(eigenvalues(cfg.phys, 0.0, 0.0)[family - 1])
    drift = speed_spread(cfg, family, amp) * t_end + 2.0 * eta
    margin = cfg.grid.margin_eta * eta
    lo = eta - margin - drift - sponge * dx
    hi = 2.0 * eta + margin + drift + sponge * dx
    n = int(math.ceil((hi - lo) / dx)) + 1
    return Grid1D(lo, lo + dx * (n - 1), n), shift, sponge


def cone_window(cfg: RunConfig, t_end: float,
                ppe: int | None = None) -> Grid1D:
    """Unshifted grid containing the full forward light cone to t_end."""
    eta = cfg.data.eta
    ppe = cfg.grid.points_per_eta_secondary if ppe is None else ppe
    dx = eta / ppe
    lam_max = lambda_max_bound(cfg.phys)
    margin = 2.0 * eta
    lo = eta - lam_max * t_end - margin
    hi = 2.0 * eta + lam_max * t_end + margin
    n = int(math.ceil((hi - lo) / dx)) + 1
    return Grid1D(lo, lo + dx * (n - 1), n)


def make_evolve_config(cfg: RunConfig, t_end: float, t_pred: float,
                       shift: float, sponge: int,
                       dissipation: float | None = None,
                       snapshots: int | None = None) -> EvolveConfig:
    nsnap = cfg.evolve.snapshots if snapshots is None else snapshots
    t0 = cfg.data.eta / 0.8  # coarse separation-time scale; only a cadence aid
    return EvolveConfig(
        t_max=t_end,
        cfl=cfg.evolve.cfl,
        dissipation=auto_dissipation(cfg, t_pred) if dissipation is None
        else dissipation,
        m_stop=None,
        snap_dt=t_end / nsnap,
        snap_dt_early=min(t0 / 12.0, t_end / nsnap),
        t_early=min(4.0 * t0, 0.5 * t_end),
        comoving_speed=shift,
        sponge_cells=sponge,
    )


def run_family(cfg: RunConfig, family: int, t_end: float, t_pred: float,
               amp: float, dissipation: float | None = None,
               ppe: int | None = None) -> Trajectory:
    secondary = family != 1
    if ppe is None:
        ppe = (cfg.grid.points_per_eta_secondary if secondary
               else cfg.grid.points_per_eta)
    sponge = max(32, cfg.grid.sponge_cells // (4 if secondary else 1))
    grid, shift, sponge = family_window(cfg, family, t_end, amp, ppe=ppe,
                                        sponge_cells=sponge)
    ecfg = make_evolve_config(cfg, t_end, t_pred, shift, sponge,
                              dissipation=dissipation,
                              snapshots=cfg.evolve.snapshots //
                              (2 if secondary else 1))
    df = reconstruct_phi0(cfg.data, cfg.phys, grid.x, mode=cfg.mode)
    return run(cfg.phys, ecfg, grid, df.phi)


def measure_shock(cfg: RunConfig, traj: Trajectory, w0: float, z0: float,
                  dense: bool = True) -> dict:
    """Fan-1 measurements on a family-1 trajectory."""
    p = cfg.phys
    eta = cfg.data.eta
    c111_0 = p.c111_at_zero()
    seeds = default_seeds(eta, cfg.evolve.seeds_core, cfg.evolve.seeds_margin)
    fan1 = trace_fan(traj, p, 1, seeds, substeps=cfg.evolve.substeps)
    rep = detect_shock(fan1, traj, cfg.analysis, eta, w0, c111_0)
    out = {"report": rep, "fan1": fan1}
    # transport-vs-flow-map inverse density agreement while min_z rho > 0.05
    # (a time restriction: past it the front is sub-grid and dX/dz noisy)
    rho_fd = rho_from_flow_map(fan1)
    core = fan1.core_mask(eta)
    tsel = fan1.min_rho_series(eta) > 0.05
    sel = fan1.valid[tsel][:, core]
    rel = np.abs(rho_fd[tsel][:, core] - fan1.rho[tsel][:, core]) / \
        np.maximum(np.abs(fan1.rho[tsel][:, core]), 1e-30)
    out["rho_consistency_rel"] = float(rel[sel].max()) if np.any(sel) else None
    # v1 bracket at the maximizing seed, up to detection
    iz = fan1.seed_index(z0)
    tsel = fan1.t <= (rep.detection_time or fan1.t[-1]) + 1e-12
    vz = fan1.v[tsel, iz]
    out["v1_z0_min"] = float(vz.min())
    out["v1_z0_max"] = float(vz.max())
    # monotone seed order until detection
    Xs = fan1.X[tsel][:, core]
    out["seed_order_monotone"] = bool(np.all(np.diff(Xs, axis=1) > 0.0))
    if dense and rep.detected:
        seeds2 = default_seeds(eta, 2 * cfg.evolve.seeds_core,
                               cfg.evolve.seeds_margin)
        fan1d = trace_fan(traj, p, 1, seeds2,
                          substeps=cfg.evolve.substeps)
        out["fan1_dense"] = fan1d
        _, sup1 = dz_rho(fan1, t_end=rep.detection_time)
        _, sup2 = dz_rho(fan1d, t_end=rep.detection_time)
        out["dzrho_sup"] = sup1
        out["dzrho_sup_dense"] = sup2
        out["dzrho_rel_change"] = abs(sup2 - sup1) / max(sup1, 1e-30)
        ladder = h2_blowup_integral(fan1d, rep.z_shock, eta,
                                    t_eval=rep.detection_time,
                                    h_min=cfg.analysis.h_min)
        rep.blowup = ladder
        # ladder growth toward the shock time: I(h_fix, t) increasing
        hs = ladder.h[2]
        t_probe = np.array([0.5, 0.75, 1.0]) * rep.detection_time
        series = [h2_blowup_integral(fan1d, rep.z_shock, eta, t_eval=tp,
                                     h_ladder=np.array([hs])).integral[0]
                  for tp in t_probe]
        out["blowup_time_series"] = series
    return out


def run_preset(cfg: RunConfig) -> dict:
    """Full measurement pipeline for one (theta, eta) preset; JSON-safe."""
    t_start = time.time()
    p = cfg.phys
    eta = cfg.data.eta
    t_pred, w0, z0 = predicted_shock_time(cfg)
    t_end = cfg.evolve.t_end_factor * t_pred + 0.2
    sigma_rep = min_gap_sigma(p)
    amp = data_amplitude(cfg)
    summary: dict = {
        "fingerprint": config_fingerprint(cfg),
        "theta": cfg.data.theta, "eta": eta, "mode": cfg.mode,
        "w0": w0, "z0": z0, "c111_0": p.c111_at_zero(),
        "t_pred": t_pred, "t_end": t_end, "sigma": sigma_rep.sigma,
        "data_amplitude": amp,
        "dissipation": auto_dissipation(cfg, t_pred),
    }

    # RUN F: short full-cone window, all strips coexist
    t0_sep = eta / sigma_rep.sigma
    t_f = max(8.0 * t0_sep, 0.25)
    grid_f = cone_window(cfg, t_f)
    ecfg_f = make_evolve_config(cfg, t_f, t_pred, 0.0, 64,
                                snapshots=max(200, int(t_f / 2e-3)))
    df_f = reconstruct_phi0(cfg.data, cfg.phys, grid_f.x, mode=cfg.mode)
    traj_f = run(p, ecfg_f, grid_f, df_f.phi)
    seeds_f = default_seeds(eta, 128, 16)
    fans_f = {fam: trace_fan(traj_f, p, fam, seeds_f, substeps=2)
              for fam in (1, 2, 3, 4)}
    strips = strip_separation(fans_f, eta, sigma_rep.sigma)
    summary["separation_time"] = strips.separation_time
    summary["t0_analytic"] = strips.t0_analytic
    norms_f = norm_series(traj_f, fans_f, eta)
    # round-trip of the prescribed seeds through an independent decomposition
    # (literal mode only carries families 1, 4: its family-2/3 vectors vanish)
    w_rt = decompose_w(p, grid_f.x, traj_f.fields[0], regularized=True)
    fams = [0, 1, 2, 3] if cfg.mode == "regularized" else [0, 3]
    sup_seed = np.abs(df_f.w).max()
    summary["seed_roundtrip_err"] = float(
        np.abs(w_rt[fams] - df_f.w[fams]).max() / max(sup_seed, 1e-30))
    xi, ti = bichar_intersection(fans_f[1], fans_f[4], 1.3 * eta, 1.7 * eta)
    s1 = fans_f[1].x_of_t(1.3 * eta)
    s4 = fans_f[4].x_of_t(1.7 * eta)
    summary["bichar_residual"] = float(abs(s1(ti) - s4(ti)))
    summary["bichar_t"] = ti

    # RUN C1 and the shock measurements
    traj1 = run_family(cfg, 1, t_end, t_pred, amp)
    mm = measure_shock(cfg, traj1, w0, z0)
    rep: ShockReport = mm["report"]
    fan1 = mm["fan1"]

    # RUN C2..C4 for exclusivity and the S/J norms
    other_fans = {}
    wbar = {}
    for fam in (2, 3, 4):
        trajf = run_family(cfg, fam, t_end, t_pred, amp)
        seeds_s = default_seeds(eta, cfg.evolve.seeds_core_secondary,
                                cfg.evolve.seeds_margin_secondary)
        fan = trace_fan(trajf, p, fam, seeds_s,
                        substeps=cfg.evolve.substeps_secondary)
        other_fans[fam] = fan
        core = fan.core_mask(eta)
        tsel = fan.t <= (rep.detection_time or fan.t[-1]) + 1e-12
        wvals = np.abs(fan.v[tsel][:, core] /
                       np.maximum(fan.rho[tsel][:, core], 1e-30))
        wvals = np.where(fan.valid[tsel][:, core], wvals, 0.0)
        wbar[fam] = float(wvals.max())
    attach_exclusivity(rep, other_fans, eta)
    summary["wbar"] = wbar
    summary["shock"] = rep.as_dict()
    if rep.detected:
        summary["bracket"] = bracket_check(rep).__dict__

    # S/J on [0, 0.8 T_num]; V/U stitched from RUN F and the windows
    t_cut = 0.8 * (rep.T_num if rep.detected else t_end)
    s_sup, j_sup = 1.0, float(np.abs(fan1.v[0]).max())
    for fam, fan in {1: fan1, **other_fans}.items():
        core = fan.core_mask(eta)
        tsel = fan.t <= t_cut
        rho = np.where(fan.valid[tsel][:, core], fan.rho[tsel][:, core],
                       -np.inf)
        vv = np.where(fan.valid[tsel][:, core],
                      np.abs(fan.v[tsel][:, core]), -np.inf)
        s_sup = max(s_sup, float(rho.max()))
        j_sup = max(j_sup, float(vv.max()))
    summary["S_sup"] = s_sup
    summary["J_sup"] = j_sup
    fsel = norms_f.t <= t_cut
    v_sup = float(norms_f.V[fsel].max())
    u_sup = float(norms_f.U[fsel].max())
    # windowed late-time contribution to U (V away from strips is generated
    # only during the interaction phase, already covered by RUN F)
    u_sup = max(u_sup, float(traj1.max_abs_phi_series().max()))
    summary["V_sup"] = v_sup
    summary["U_sup"] = u_sup
    summary["norms_t"] = norms_f.t.tolist()
    summary["norms_S"] = norms_f.S.tolist()
    summary["norms_J"] = norms_f.J.tolist()
    summary["norms_V"] = norms_f.V.tolist()
    summary["norms_U"] = norms_f.U.tolist()
    for key in ("rho_consistency_rel", "v1_z0_min", "v1_z0_max",
                "seed_order_monotone", "dzrho_sup", "dzrho_sup_dense",
                "dzrho_rel_change", "blowup_time_series"):
        if key in mm:
            summary[key] = mm[key]
    summary["min_rho1_t"] = fan1.t.tolist()
    summary["min_rho1"] = fan1.min_rho_series(eta).tolist()
    summary["maxgrad_initial"] = float(traj1.maxgrad[:8].max())
    summary["maxgrad_final"] = float(traj1.maxgrad[-1])
    summary["wall_time_s"] = time.time() - t_start
    return _to_jsonable(summary)


def t_num_only(cfg: RunConfig, dissipation: float | None = None,
               ppe: int | None = None, unshifted: bool = False) -> dict:
    """Reduced pipeline: one family-1 run and the two shock estimators."""
    t_pred, w0, z0 = predicted_shock_time(cfg)
    t_end = cfg.evolve.t_end_factor * t_pred + 0.2
    amp = data_amplitude(cfg)
    if unshifted:
        # lab-frame solve over the family-1 cone; snapshots stored on a
        # window sliding at lam_1(0) so the tracer can sample along
        # characteristics without holding the full grid history
        eta = cfg.data.eta
        ppe_u = ppe or cfg.grid.points_per_eta
        dx = eta / ppe_u
        lam1 = float(eigenvalues(cfg.phys, 0.0, 0.0)[0])
        spread = speed_spread(cfg, 1, amp)
        sponge = 64
        margin = cfg.grid.margin_eta * eta
        lo = eta - margin - spread * t_end - sponge * dx
        hi = 2.0 * eta + (lam1 + spread) * t_end + margin + sponge * dx
        n = int(math.ceil((hi - lo) / dx)) + 1
        grid = Grid1D(lo, lo + dx * (n - 1), n)
        ecfg = make_evolve_config(cfg, t_end, t_pred, 0.0, sponge,
                                  dissipation=dissipation)
        ecfg.track_speed = lam1
        ecfg.track_window = (eta - margin - spread * t_end,
                             2.0 * eta + margin + spread * t_end)
        df = reconstruct_phi0(cfg.data, cfg.phys, grid.x, mode=cfg.mode)
        traj = run(cfg.phys, ecfg, grid, df.phi)
    else:
        traj = run_family(cfg, 1, t_end, t_pred, amp,
                          dissipation=dissipation, ppe=ppe)
    mm = measure_shock(cfg, traj, w0, z0, dense=False)
    rep: ShockReport = mm["report"]
    return _to_jsonable({
        "T_num": rep.T_num, "detected": rep.detected,
        "T_grad": rep.T_grad, "product_P": rep.product_P,
        "estimator_discrepancy": rep.estimator_discrepancy,
        "w0": w0, "t_pred": t_pred,
        "v1_z0_min": mm["v1_z0_min"], "v1_z0_max": mm["v1_z0_max"],
        "rho_consistency_rel": mm["rho_consistency_rel"],
    })


def simple_wave_crossing_time(cfg: RunConfig, n: int = 20001) -> float:
    """Straight-line crossing oracle for the scalar-reduction data.

    Dense family-1 characteristics launched at the initial speeds
    lam_1(Phi0(z)); earliest crossing of adjacent straight lines.
    """
    eta = cfg.data.eta
    x = np.linspace(0.9 * eta, 2.1 * eta, n)
    df = reconstruct_phi0(cfg.data, cfg.phys, x, mode="paper-literal")
    lam = eigenvalues(cfg.phys, df.phi[0], df.phi[1])[0]
    dz = x[1] - x[0]
    dlam = np.diff(lam)
    cross = np.where(dlam < 0.0, -dz / dlam, np.inf)
    return float(cross.min())


def convergence_study(cfg: RunConfig, t_probe: float = 0.6,
                      ppe_base: int = 96) -> dict:
    """Triple-grid self-convergence order in the pre-shock smooth window."""
    t_pred, _, _ = predicted_shock_time(cfg)
    eta = cfg.data.eta
    lam_max = lambda_max_bound(cfg.phys)
    lo = eta - lam_max * t_probe - 2 * eta
    hi = 2 * eta + lam_max * t_probe + 2 * eta
    diss0 = auto_dissipation(cfg, t_pred)
    finals = []
    for k in range(3):
        ppe = ppe_base * 2**k
        dx = eta / ppe
        n = int(math.ceil((hi - lo) / dx)) + 1
        grid = Grid1D(lo, lo + dx * (n - 1), n)
        ecfg = EvolveConfig(t_max=t_probe, cfl=cfg.evolve.cfl,
                            dissipation=diss0 / 2**k,
                            snap_dt=t_probe / 2)
        df = reconstruct_phi0(cfg.data, cfg.phys, grid.x, mode=cfg.mode)
        traj = run(cfg.phys, ecfg, grid, df.phi)
        finals.append(traj.fields[-1])
    e1 = float(np.sqrt(np.mean((finals[0] - finals[1][:, ::2]) ** 2)))
    e2 = float(np.sqrt(np.mean((finals[1] - finals[2][:, ::2]) ** 2)))
    return {"err_coarse": e1, "err_fine": e2,
            "order": math.log2(e1 / e2), "t_probe": t_probe,
            "ppe_levels": [ppe_base, 2 * ppe_base, 4 * ppe_base]}


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "as_dict"):
        return _to_jsonable(obj.as_dict())
    if hasattr(obj, "__dict__") and not isinstance(obj, type):
        return _to_jsonable({k: v for k, v in obj.__dict__.items()
                             if not k.startswith("_")})
    return obj


# --- cached task layer -----------------------------------------------------

def cache_dir() -> Path:
    d = Path(os.environ.get("ELWAVE_CACHE", ".elwave_cache"))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _task_key(name: str, cfg_text: str, extra: str = "") -> str:
    h = hashlib.sha256(f"{CODE_SALT}|{name}|{extra}|{cfg_text}".encode())
    return f"{name}-{h.hexdigest()[:20]}"


def run_task(task: dict) -> dict:
    """Dispatch a named pipeline task (multiprocessing-friendly)."""
    cfg = parse_config(task["config"])
    name = task["name"]
    kind = task["kind"]
    if kind == "preset":
        result = run_preset(cfg)
    elif kind == "t_num":
        result = t_num_only(cfg, dissipation=task.get("dissipation"),
                            ppe=task.get("ppe"),
                            unshifted=task.get("unshifted", False))
    elif kind == "convergence":
        result = convergence_study(cfg, ppe_base=task.get("ppe_base", 96))
    elif kind == "oracle_sw":
        result = {"T_sw": simple_wave_crossing_time(cfg)}
    else:
        raise ValueError(f"unknown task kind {kind!r}")
    result["task"] = name
    return result


def run_tasks_cached(tasks: list[dict], workers: int = 2,
                     verbose: bool = True) -> dict[str, dict]:
    """Execute tasks with on-disk caching keyed by config + task params."""
    out: dict[str, dict] = {}
    pending = []
    cdir = cache_dir()
    for task in tasks:
        extra = json.dumps({k: v for k, v in task.items()
                            if k not in ("config", "name")}, sort_keys=True)
        key = _task_key(task["name"], task["config"], extra)
        path = cdir / f"{key}.json"
        task = dict(task, _cache_path=str(path))
        if path.exists():
            out[task["name"]] = json.loads(path.read_text())
            if verbose:
                print(f"[cache] {task['name']}")
        else:
            pending.append(task)
    if pending:
        if workers > 1 and len(pending) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_run_and_store, pending))
        else:
            results = [_run_and_store(t) for t in pending]
        for task, res in zip(pending, results):
            out[task["name"]] = res
            if verbose:
                print(f"[done]  {task['name']} "
                      f"({res.get('wall_time_s', 0):.0f}s)"
                      if "wall_time_s" in res else f"[done]  {task['name']}")
    return out


def _run_and_store(task: dict) -> dict:
    res = run_task(task)
    Path(task["_cache_path"]).write_text(json.dumps(res, sort_keys=True))
    return res


def sweep_configs(cfg: RunConfig, sweep: str) -> list[tuple[str, str]]:
    """(name, config text) pairs for the standard theta/eta sweeps."""
    base = dump_config(cfg)
    out = []
    if sweep == "theta":
        for th in (0.1, 0.05, 0.02):
            out.append((f"theta={th}", base + f"\ndata.theta = {th!r}\n"))
    elif sweep == "eta":
        for eta in (0.05, 0.025, 0.0125):
            out.append((f"eta={eta}", base + f"\ndata.eta = {eta!r}\n"))
    else:
        raise ValueError(f"unknown sweep {sweep!r}")
    return out
