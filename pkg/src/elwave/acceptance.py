"""Acceptance suite: every headline criterion evaluated at its tolerance.

Builds the full task graph (theta sweep, eta sweep, scalar-reduction
oracle, refinement/dissipation/frame hygiene runs, convergence study),
executes it through the cached task layer, and reduces the results to
per-criterion verdicts. Tolerances are pinned here; the test module
asserts them one by one.
"""

from __future__ import annotations

import numpy as np

from .checks import eigen_check_suite
from .config import RunConfig, dump_config, parse_config, preset_paper_desk
from .initial_data import DataParams
from .pipeline import auto_dissipation, predicted_shock_time, run_tasks_cached
from .sobolev import scaling_fit, seed_norm_converged, sweep_seed_norms

THETA_SWEEP = (0.1, 0.05, 0.02)
ETA_SWEEP = (0.05, 0.025, 0.0125)


def _cfg_text(base: RunConfig, **data_overrides) -> str:
    text = dump_config(base)
    for key, val in data_overrides.items():
        text += f"\n{key} = {val!r}\n" if not isinstance(val, str) else \
            f"\n{key} = {val}\n"
    return text


def build_tasks(base: RunConfig | None = None) -> list[dict]:
    base = preset_paper_desk() if base is None else base
    t_pred, _, _ = predicted_shock_time(base)
    diss0 = auto_dissipation(base, t_pred)
    tasks = []
    for th in THETA_SWEEP:
        tasks.append({"name": f"preset-theta={th}", "kind": "preset",
                      "config": _cfg_text(base, **{"data.theta": th})})
    for eta in ETA_SWEEP[1:]:
        tasks.append({"name": f"preset-eta={eta}", "kind": "preset",
                      "config": _cfg_text(base, **{"data.eta": eta})})
    tasks.append({"name": "scalar-mode", "kind": "t_num",
                  "config": _cfg_text(base, mode="paper-literal")})
    tasks.append({"name": "scalar-oracle", "kind": "oracle_sw",
                  "config": _cfg_text(base, mode="paper-literal")})
    tasks.append({"name": "refine-x2", "kind": "t_num", "ppe": 384,
                  "dissipation": diss0 / 2.0, "config": dump_config(base)})
    tasks.append({"name": "diss-half", "kind": "t_num",
                  "dissipation": diss0 / 2.0, "config": dump_config(base)})
    tasks.append({"name": "frame-shifted", "kind": "t_num", "ppe": 96,
                  "config": dump_config(base)})
    tasks.append({"name": "frame-unshifted", "kind": "t_num", "ppe": 96,
                  "unshifted": True, "config": dump_config(base)})
    tasks.append({"name": "convergence", "kind": "convergence",
                  "ppe_base": 96, "config": dump_config(base)})
    return tasks


def run_acceptance(base: RunConfig | None = None, workers: int = 2,
                   verbose: bool = True) -> dict:
    """Execute all tasks and evaluate criteria; returns the full record."""
    base = preset_paper_desk() if base is None else base
    results = run_tasks_cached(build_tasks(base), workers=workers,
                               verbose=verbose)
    record = {"results": results}
    record["criteria"] = evaluate_criteria(base, results)
    return record


def _preset(results, theta=None, eta=None):
    if theta is not None:
        return results[f"preset-theta={theta}"]
    return results[f"preset-eta={eta}"]


def evaluate_criteria(base: RunConfig, results: dict) -> dict:
    crit: dict[str, dict] = {}
    main = _preset(results, theta=0.1)

    # 1. eigenstructure suite at the pinned sampling parameters
    checks = eigen_check_suite(n_sample=10000, seed=base.run.seed)
    crit["1_eigenstructure"] = {
        "pass": checks["all_pass"]["pass"],
        "duality": max(checks["duality_literal"]["value"],
                       checks["duality_regularized"]["value"]),
        "spectral": checks["spectral_residual"]["value"],
        "grad_fd": max(checks["grad_lambda_fd"]["value"],
                       checks["grad_rvec_fd"]["value"]),
        "c111_fd": checks["c111_zero_fd"]["value"],
        "checks": {k: v["pass"] for k, v in checks.items()},
    }

    # 2. Sobolev scaling law
    etas = [2.0**-k for k in range(6, 15)]
    reps = sweep_seed_norms(base.data.theta, base.data.alpha,
                            base.data.delta, etas, n_base=256)
    fit = scaling_fit(etas, [r.norm_sq for r in reps],
                      [r.converged for r in reps])
    dp = DataParams(theta=base.data.theta, alpha=base.data.alpha,
                    delta=base.data.delta, eta=0.05)
    full = seed_norm_converged(dp, n_base=128, levels=1)
    half = seed_norm_converged(
        DataParams(theta=base.data.theta / 2.0, alpha=base.data.alpha,
                   delta=base.data.delta, eta=0.05), n_base=128, levels=1)
    from scipy.integrate import quad
    w = 0.1
    n, L = 256, 1.6
    x = (np.arange(n) - n / 2 + 0.5) * (L / n)
    gx, gy = np.meshgrid(x, x, indexing="ij")
    from .sobolev import hdot_norm_sq, make_spectral_grid
    gauss = make_spectral_grid(np.exp(-(gx**2 + gy**2) / (2 * w**2)),
                               L / n, L / n)
    lattice = hdot_norm_sq(gauss, 0.75).norm_sq
    pref = (2 * np.pi * w**2) ** 2 * 2 * np.pi
    oracle = pref * quad(lambda k: k**2.5 * np.exp(-4 * np.pi**2 * w**2 * k**2),
                         0, np.inf)[0]
    gauss_rel = abs(lattice - oracle) / oracle
    crit["2_sobolev_scaling"] = {
        "pass": (all(np.isfinite(r.norm_sq) and r.norm_sq > 0 for r in reps)
                 and fit.converged and fit.slope <= -0.05
                 and half.norm_sq == full.norm_sq / 4.0
                 and gauss_rel < 0.01),
        "slope": fit.slope,
        "norms": [r.norm_sq for r in reps],
        "homogeneity_exact": half.norm_sq == full.norm_sq / 4.0,
        "gaussian_oracle_rel": gauss_rel,
    }

    # 3. shock-time bracket and the scalar-reduction oracle
    Ps = [_preset(results, theta=th)["shock"]["product_P"]
          for th in THETA_SWEEP]
    devs = [abs(p - 1.0) for p in Ps]
    sw = results["scalar-mode"]
    t_sw = results["scalar-oracle"]["T_sw"]
    sw_rel = abs(sw["T_num"] - t_sw) / sw["T_num"]
    crit["3_shock_bracket"] = {
        "pass": (all(0.7 <= p <= 1.4 for p in Ps)
                 and all(devs[i + 1] <= devs[i] + 1e-12
                         for i in range(len(devs) - 1))
                 and sw_rel <= 0.02),
        "P_values": dict(zip(map(str, THETA_SWEEP), Ps)),
        "abs_dev_from_1": devs,
        "scalar_T_num": sw["T_num"], "scalar_T_oracle": t_sw,
        "scalar_rel": sw_rel,
    }

    # 4. family exclusivity
    excl_ok, floors, wbar_spread = [], [], {}
    for th in THETA_SWEEP:
        pr = _preset(results, theta=th)
        rho_others = pr["shock"]["exclusivity_rho"]
        floors.append(min(rho_others.values()))
        excl_ok.append(pr["shock"]["detected"]
                       and min(pr["min_rho1"]) <= base.analysis.rho_floor)
    for fam in ("2", "3", "4"):
        ratios = [_preset(results, theta=th)["wbar"][fam] /
                  _preset(results, theta=th)["w0"] ** 2 for th in THETA_SWEEP]
        wbar_spread[fam] = max(ratios) / min(ratios)
    crit["4_family_exclusivity"] = {
        "pass": (all(excl_ok) and min(floors) >= 0.5
                 and max(wbar_spread.values()) < 3.0),
        "rho_other_floors": floors,
        "wbar_over_w0sq_spread": wbar_spread,
    }

    # 5. ill-posedness trend over the eta sweep
    T_by_eta, prod = {}, {}
    for eta in ETA_SWEEP:
        pr = _preset(results, theta=0.1) if eta == 0.05 else \
            _preset(results, eta=eta)
        T_by_eta[eta] = pr["shock"]["T_num"]
        prod[eta] = pr["shock"]["T_num"] * pr["w0"]
    T_list = [T_by_eta[e] for e in ETA_SWEEP]
    spread = max(prod.values()) / min(prod.values())
    crit["5_illposedness_trend"] = {
        "pass": all(T_list[i + 1] < T_list[i] for i in range(len(T_list) - 1))
        and spread < 1.15,
        "T_by_eta": {str(k): v for k, v in T_by_eta.items()},
        "T_w0_spread": spread,
    }

    # 6. H^2 blow-up surrogate
    blow = main["shock"]["blowup"]
    series = main.get("blowup_time_series")
    crit["6_h2_blowup"] = {
        "pass": (blow["r_squared"] > 0.98 and blow["fit_c"] > 0.0
                 and main["dzrho_rel_change"] < 0.05
                 and series == sorted(series)),
        "r_squared": blow["r_squared"],
        "fit_c": blow["fit_c"],
        "dzrho_rel_change": main["dzrho_rel_change"],
        "increasing_toward_shock": series == sorted(series),
    }

    # 7. numerical hygiene
    conv = results["convergence"]["order"]
    T0 = main["shock"]["T_num"]
    ref_rel = abs(results["refine-x2"]["T_num"] - T0) / T0
    diss_rel = abs(results["diss-half"]["T_num"] - T0) / T0
    frame_rel = abs(results["frame-unshifted"]["T_num"]
                    - results["frame-shifted"]["T_num"]) / \
        results["frame-shifted"]["T_num"]
    rho_cons = [r for r in (main["rho_consistency_rel"],) if r is not None]
    seps = []
    for eta in ETA_SWEEP:
        pr = _preset(results, theta=0.1) if eta == 0.05 else \
            _preset(results, eta=eta)
        seps.append(pr["separation_time"] / pr["t0_analytic"])
    crit["7_numerical_hygiene"] = {
        "pass": (conv >= 3.0 and ref_rel < 0.01 and diss_rel < 0.01
                 and frame_rel < 0.01
                 and all(r < 0.01 for r in rho_cons)
                 and all(s <= 1.1 for s in seps)),
        "convergence_order": conv,
        "refine_rel": ref_rel, "diss_half_rel": diss_rel,
        "frame_rel": frame_rel,
        "rho_consistency": rho_cons,
        "separation_over_t0": seps,
    }

    # 8. a priori norm surrogates
    s_ok = j_ok = True
    v_ratio, u_ratio = {}, {}
    for th in THETA_SWEEP:
        pr = _preset(results, theta=th)
        s_ok &= pr["S_sup"] <= 1.3
        j_ok &= pr["J_sup"] <= 1.3 * pr["w0"]
    for eta in ETA_SWEEP:
        pr = _preset(results, theta=0.1) if eta == 0.05 else \
            _preset(results, eta=eta)
        v_ratio[eta] = pr["V_sup"] / (eta * pr["w0"] ** 2)
        u_ratio[eta] = pr["U_sup"] / (eta * pr["w0"])
    v_spread = max(v_ratio.values()) / min(v_ratio.values())
    u_spread = max(u_ratio.values()) / min(u_ratio.values())
    crit["8_norm_surrogates"] = {
        "pass": bool(s_ok and j_ok and v_spread < 3.0 and u_spread < 3.0),
        "S_sup": {str(th): _preset(results, theta=th)["S_sup"]
                  for th in THETA_SWEEP},
        "J_over_w0": {str(th): _preset(results, theta=th)["J_sup"] /
                      _preset(results, theta=th)["w0"] for th in THETA_SWEEP},
        "V_ratio_spread": v_spread,
        "U_ratio_spread": u_spread,
        "V_ratios": {str(k): v for k, v in v_ratio.items()},
        "U_ratios": {str(k): v for k, v in u_ratio.items()},
    }

    crit["all"] = {"pass": all(v["pass"] for v in crit.values())}
    return crit
