"""Shock detection, analytic time bracket, trend checks, blow-up integral.

The family-1 inverse density at the maximizing seed obeys, up to factors
1 + O(eps),

    rho_1(z0, t) ~ 1 - |c^1_11(0)| W0 t,

so the shock time is bracketed by 1 / ((1 +- eps)^k |c^1_11(0)| W0)
(k = 3 lower, 4 upper) and the dimensionless product
P = T_num |c^1_11(0)| W0 tends to 1 as theta -> 0. T_num is measured by
linear extrapolation of min_z rho_1(z, t) to zero from the last decade
above the detection floor; the cross-estimator fits the Eulerian
max |dx phi1| ~ A / (T - t) over its resolved growth window.

The H^2 blow-up surrogate evaluates, at the last resolved time,

    I(h) = int_{z in [eta, 2 eta], |z - z0| >= h} (v1/rho1)^2 rho1
           sqrt((z - eta)(2 eta - z)) dz.

Since dz rho_1 is bounded and the slow |ln z|^alpha decay makes rho_1 grow
essentially linearly on the plateau side of z0, I(h) grows like
c ln(1/h) + d over the exclusion ladder.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .characteristics import CharFan
from .evolve import Trajectory


@dataclass(frozen=True)
class AnalysisParams:
    """Detection and reporting controls."""

    rho_floor: float = 1e-3
    epsilon: float = 0.01
    h_min: float | None = None
    grad_fit_window: tuple[float, float] = (3.0, 12.0)  # in units of initial

    def __post_init__(self):
        if not (0.0 < self.rho_floor < 0.1):
            raise ValueError(f"rho_floor must be in (0, 0.1), got {self.rho_floor}")
        if not (0.0 < self.epsilon <= 0.01):
            raise ValueError(f"epsilon must be in (0, 1/100], got {self.epsilon}")


def bracket_endpoints(epsilon: float, c111_0: float, w0: float):
    """[T_lo, T_hi] = 1/((1+eps)^3 |c| W0), 1/((1-eps)^4 |c| W0)."""
    scale = abs(c111_0) * w0
    return 1.0 / ((1.0 + epsilon) ** 3 * scale), \
        1.0 / ((1.0 - epsilon) ** 4 * scale)


@dataclass
class BlowupLadder:
    h: np.ndarray
    integral: np.ndarray
    t_eval: float
    fit_c: float
    fit_d: float
    r_squared: float

    def as_dict(self):
        return {"h": self.h.tolist(), "integral": self.integral.tolist(),
                "t_eval": self.t_eval, "fit_c": self.fit_c,
                "fit_d": self.fit_d, "r_squared": self.r_squared}


@dataclass
class ShockReport:
    """Measured shock time with analytic bracket and cross-checks."""

    detected: bool
    T_num: float | None
    z_shock: float | None
    T_lo: float
    T_hi: float
    epsilon: float
    bracket_alt: dict = field(default_factory=dict)  # eps -> (lo, hi)
    T_grad: float | None = None
    estimator_discrepancy: float | None = None
    rho_min_final: float | None = None
    detection_time: float | None = None
    exclusivity_rho: dict = field(default_factory=dict)   # family -> min rho
    exclusivity_ok: bool | None = None
    blowup: BlowupLadder | None = None
    w0: float = float("nan")
    c111_0: float = float("nan")
    product_P: float | None = None
    no_shock_reason: str | None = None

    def as_dict(self):
        d = {k: v for k, v in self.__dict__.items() if k != "blowup"}
        d["blowup"] = self.blowup.as_dict() if self.blowup else None
        d["bracket_alt"] = {str(k): list(v) for k, v in self.bracket_alt.items()}
        d["exclusivity_rho"] = {str(k): v for k, v in
                                self.exclusivity_rho.items()}
        return d


def fit_gradient_blowup(traj: Trajectory, window: tuple[float, float]):
    """Blow-up time from max |dx phi1| ~ A/(T - t): linear fit of 1/grad.

    The fit window [lo, hi] is in multiples of the initial gradient, kept
    inside the resolved-growth regime.
    """
    mg, mt = traj.maxgrad, traj.maxgrad_t
    if len(mg) < 16:
        return None
    m0 = mg[:8].max()
    sel = (mg >= window[0] * m0) & (mg <= window[1] * m0)
    if sel.sum() < 8:
        return None
    coef = np.polyfit(mt[sel], 1.0 / mg[sel], 1)
    if coef[0] >= 0.0:
        return None
    return float(-coef[1] / coef[0])


def detect_shock(fan1: CharFan, traj: Trajectory, ap: AnalysisParams,
                 eta: float, w0: float, c111_0: float) -> ShockReport:
    """Measure the family-1 shock time from the traced inverse density.

    T_num extrapolates min_z rho_1(z, t) linearly to zero from the window
    min rho in [rho_floor, 10 rho_floor]; detection requires the series to
    reach rho_floor inside the run. The gradient-fit estimator and the
    analytic brackets are attached for cross-checks.
    """
    t_lo, t_hi = bracket_endpoints(ap.epsilon, c111_0, w0)
    alt = {eps: bracket_endpoints(eps, c111_0, w0) for eps in (0.01, 0.1)}
    mr = fan1.min_rho_series(eta)
    tt = fan1.t
    rep = ShockReport(detected=False, T_num=None, z_shock=None, T_lo=t_lo,
                      T_hi=t_hi, epsilon=ap.epsilon, bracket_alt=alt,
                      w0=w0, c111_0=c111_0,
                      rho_min_final=float(mr[-1]))
    below = np.nonzero(mr <= ap.rho_floor)[0]
    if len(below) == 0:
        rep.no_shock_reason = (
            f"min rho_1 reached only {mr.min():.4g} > floor {ap.rho_floor} "
            f"by t = {tt[-1]:.6g} ({traj.stop_reason})")
        return rep
    k_det = int(below[0])
    rep.detection_time = float(np.interp(ap.rho_floor, mr[k_det - 1:k_det + 1][::-1],
                                         tt[k_det - 1:k_det + 1][::-1])) \
        if k_det > 0 else float(tt[k_det])
    sel = (mr >= ap.rho_floor) & (mr <= 10.0 * ap.rho_floor) & \
        (tt <= tt[k_det] + 1e-12)
    if sel.sum() < 4:
        # floor crossed too fast for a windowed fit; widen upward
        sel = (mr >= ap.rho_floor) & (mr <= 30.0 * ap.rho_floor)
    coef = np.polyfit(tt[sel], mr[sel], 1)
    if coef[0] >= 0.0:
        rep.no_shock_reason = "rho_1 not decreasing across the fit window"
        return rep
    rep.detected = True
    rep.T_num = float(-coef[1] / coef[0])
    core = fan1.core_mask(eta)
    rho_det = np.where(fan1.valid[k_det][core], fan1.rho[k_det][core], np.inf)
    rep.z_shock = float(fan1.z[core][int(np.argmin(rho_det))])
    rep.product_P = float(rep.T_num * abs(c111_0) * w0)
    rep.T_grad = fit_gradient_blowup(traj, ap.grad_fit_window)
    if rep.T_grad is not None:
        rep.estimator_discrepancy = abs(rep.T_num - rep.T_grad) / rep.T_num
    return rep


def h2_blowup_integral(fan1: CharFan, z0: float, eta: float,
                       t_eval: float | None = None,
                       h_ladder: np.ndarray | None = None,
                       h_min: float | None = None) -> BlowupLadder:
    """Exclusion-ladder integral I(h) at the last resolved time.

    Trapezoid sum over the seeds of (v1/rho1)^2 rho1 sqrt((z-eta)(2eta-z))
    with |z - z0| >= h. Raises when the innermost retained seeds are
    under-resolved (rho below 10 x seed spacing x sup |dz rho1|).
    """
    t_eval = float(fan1.t[-1]) if t_eval is None else float(t_eval)
    j = int(np.searchsorted(fan1.t, t_eval + 1e-12) - 1)
    j = min(max(j, 0), len(fan1.t) - 1)
    core = fan1.core_mask(eta)
    z = fan1.z[core]
    rho = fan1.rho[j][core]
    v = fan1.v[j][core]
    ok = fan1.valid[j][core]
    if not np.all(ok):
        warnings.warn("some core seeds exited before t_eval", stacklevel=2)
    dz = np.median(np.diff(z))
    weight = np.sqrt(np.maximum((z - eta) * (2.0 * eta - z), 0.0))
    integrand = np.where(ok & (rho > 0.0), v * v / np.maximum(rho, 1e-300)
                         * weight, 0.0)
    # seed-difference slope of rho; the resolution requirement is local to
    # the retained ring (the far-away steep transition does not control
    # the FD error of rho near z0)
    slope = np.zeros_like(rho)
    slope[1:-1] = np.abs(rho[2:] - rho[:-2]) / (z[2:] - z[:-2])

    def check_resolved(h, raise_on_fail):
        keep = np.abs(z - z0) >= h
        if not np.any(keep):
            return keep, True
        for side in (z < z0, z > z0):
            ring = keep & side
            if not np.any(ring):
                continue
            inner = np.abs(z[ring] - z0).min()
            ring &= np.abs(np.abs(z - z0) - inner) < 2.01 * dz
            local = float(slope[ring].max())
            if np.min(rho[ring]) < 10.0 * dz * local:
                if raise_on_fail:
                    raise RuntimeError(
                        f"h = {h:.3g} under-resolved: rho at innermost "
                        f"retained seeds below 10 * dz * |dz rho|_local = "
                        f"{10.0 * dz * local:.3g}")
                return ring, False
        return keep, True

    if h_ladder is None:
        # smallest resolved exclusion radius sets the default ladder
        lo = max(h_min if h_min is not None else 0.0, 4.0 * dz, 0.02 * eta)
        hi = 0.3 * eta
        for h_try in np.geomspace(lo, hi, 49):
            if check_resolved(h_try, raise_on_fail=False)[1]:
                lo = h_try
                break
        else:
            raise RuntimeError("no resolved exclusion radius below 0.3 eta")
        if hi / lo < 3.0:
            raise RuntimeError(
                f"resolved ladder span [{lo:.3g}, {hi:.3g}] too narrow")
        h_ladder = np.geomspace(lo, hi, 9)
    vals = []
    for h in h_ladder:
        keep, _ = check_resolved(h, raise_on_fail=True)
        vals.append(float(np.trapezoid(np.where(keep, integrand, 0.0), z)))
    vals = np.asarray(vals)
    if len(vals) >= 3:
        x = np.log(1.0 / np.asarray(h_ladder))
        coef = np.polyfit(x, vals, 1)
        pred = np.polyval(coef, x)
        ss_res = float(np.sum((vals - pred) ** 2))
        ss_tot = float(np.sum((vals - vals.mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
        coef = (float(coef[0]), float(coef[1]))
    else:
        coef = (float("nan"), float("nan"))
        r2 = 0.0
    return BlowupLadder(h=np.asarray(h_ladder), integral=vals, t_eval=t_eval,
                        fit_c=float(coef[0]), fit_d=float(coef[1]),
                        r_squared=float(r2))


@dataclass
class BracketVerdict:
    ok: bool
    product_P: float
    window: tuple[float, float]
    epsilon_bracket: tuple[float, float]


def bracket_check(rep: ShockReport, window=(0.7, 1.4)) -> BracketVerdict:
    """PASS iff P = T_num |c^1_11(0)| W0 lies in the desk-scale window."""
    if not rep.detected:
        raise ValueError("no shock detected; bracket check undefined")
    lo = 1.0 / (1.0 + rep.epsilon) ** 3
    hi = 1.0 / (1.0 - rep.epsilon) ** 4
    return BracketVerdict(ok=window[0] <= rep.product_P <= window[1],
                          product_P=rep.product_P, window=window,
                          epsilon_bracket=(lo, hi))


@dataclass
class TrendVerdict:
    ok: bool
    etas: list
    T_nums: list
    products: list          # T_num * W0(eta)
    monotone_decreasing: bool
    product_spread: float   # max/min of T_num * W0


def illposedness_trend(reports_by_eta: dict[float, ShockReport]) -> TrendVerdict:
    """T_num strictly decreasing in decreasing eta; T_num * W0 ~ constant."""
    if len(reports_by_eta) < 3:
        raise ValueError("need >= 3 eta values with detected shocks")
    etas = sorted(reports_by_eta, reverse=True)  # decreasing eta
    reps = [reports_by_eta[e] for e in etas]
    if not all(r.detected for r in reps):
        raise ValueError("all sweep members must detect a shock")
    T = [r.T_num for r in reps]
    prod = [r.T_num * r.w0 for r in reps]
    mono = all(T[i + 1] < T[i] for i in range(len(T) - 1))
    spread = max(prod) / min(prod)
    return TrendVerdict(ok=mono and spread < 1.15, etas=list(etas), T_nums=T,
                        products=prod, monotone_decreasing=mono,
                        product_spread=float(spread))


def attach_exclusivity(rep: ShockReport, other_fans: dict[int, CharFan],
                       eta: float, t_ref: float | None = None,
                       threshold: float = 0.5) -> None:
    """Record min rho for families 2-4 up to the detection time."""
    t_ref = rep.detection_time if t_ref is None else t_ref
    for fam, fan in other_fans.items():
        sel = fan.t <= (fan.t[-1] if t_ref is None else t_ref + 1e-9)
        core = fan.core_mask(eta)
        rho = np.where(fan.valid[sel][:, core], fan.rho[sel][:, core], np.inf)
        rep.exclusivity_rho[fam] = float(rho.min())
    if rep.exclusivity_rho:
        rep.exclusivity_ok = min(rep.exclusivity_rho.values()) >= threshold
