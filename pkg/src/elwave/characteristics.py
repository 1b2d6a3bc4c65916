"""Characteristic tracing: flow map, inverse densities, decomposed amplitudes.

Along the family-i characteristic X_i(z, t) (dX/dt = lam_i(Phi(X, t)),
X(z, 0) = z) the inverse density rho_i = dX_i/dz and the weighted amplitude
v_i = rho_i w_i satisfy

    d rho_i / dt = c^i_ii v_i + (sum_{m != i} c^i_im w_m) rho_i,
    d v_i  / dt  = (sum_{m != i} gamma^i_im w_m) v_i
                   + (sum_{k, m != i, k != m} gamma^i_km w_k w_m) rho_i,

with rho_i(z, 0) = 1, v_i(z, 0) = w_i(z, 0). The transversal amplitudes
w_m are read from the Eulerian trajectory (regularized decomposition,
cubic in x / linear in t, sub-grid-front guard on), so the fan needs no
cross-fan coupling; the own-family amplitude along the curve is v/rho.
rho_i -> 0 signals shock formation of family i.

Seeds span the data support [eta, 2 eta] plus margins; tracing advances
with RK4 at the snapshot cadence subdivided (default x4) and records at
snapshot times. Curves that exit a windowed trajectory are frozen and
masked rather than extrapolated.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .eigen import PhysParams, transport_coeffs
from .evolve import Trajectory


def default_seeds(eta: float, n_core: int = 512,
                  n_margin: int = 64) -> np.ndarray:
    """Uniform seeds over [eta, 2 eta] plus n_margin points per side."""
    dz = eta / (n_core - 1)
    core = np.linspace(eta, 2.0 * eta, n_core)
    left = eta - dz * np.arange(n_margin, 0, -1)
    right = 2.0 * eta + dz * np.arange(1, n_margin + 1)
    return np.concatenate([left, core, right])


def refine_seeds(seeds: np.ndarray, center: float, half_width: float,
                 factor: int = 8) -> np.ndarray:
    """Seed set densified by `factor` inside [center +- half_width]."""
    inside = (seeds >= center - half_width) & (seeds <= center + half_width)
    if not np.any(inside):
        return seeds.copy()
    lo = seeds[inside].min()
    hi = seeds[inside].max()
    n_dense = int(np.ceil((hi - lo) / (seeds[1] - seeds[0]) * factor)) + 1
    dense = np.linspace(lo, hi, n_dense)
    return np.unique(np.concatenate([seeds, dense]))


@dataclass
class CharFan:
    """Traced family fan: per-seed series of X, rho, v at recorded times."""

    family: int
    z: np.ndarray          # (ns,)
    t: np.ndarray          # (nt,)
    X: np.ndarray          # (nt, ns)
    rho: np.ndarray        # (nt, ns)
    v: np.ndarray          # (nt, ns)
    valid: np.ndarray      # (nt, ns) False once the curve left the window

    def w(self) -> np.ndarray:
        """Own-family amplitude along each curve, v / rho."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(np.abs(self.rho) > 1e-300, self.v / self.rho,
                            np.inf)

    def core_mask(self, eta: float) -> np.ndarray:
        return (self.z >= eta - 1e-12) & (self.z <= 2.0 * eta + 1e-12)

    def min_rho_series(self, eta: float | None = None) -> np.ndarray:
        sel = slice(None) if eta is None else self.core_mask(eta)
        rho = np.where(self.valid[:, sel], self.rho[:, sel], np.inf)
        return rho.min(axis=1)

    def seed_index(self, z: float) -> int:
        return int(np.argmin(np.abs(self.z - z)))

    def x_of_t(self, z: float):
        """Cubic-spline interpolant t -> X(z, t) for one seed."""
        from scipy.interpolate import CubicSpline

        j = self.seed_index(z)
        ok = self.valid[:, j]
        return CubicSpline(self.t[ok], self.X[ok, j])


class _FanStepper:
    def __init__(self, traj: Trajectory, p: PhysParams, family: int):
        self.traj = traj
        self.p = p
        self.family = family
        self.i = family - 1

    def rates(self, t, X, rho, v, active):
        i = self.i
        phi, wf, ok = self.traj.sample_at(X, t, guarded=True)
        lam_i, cc_i, g1_i, g2_i = transport_coeffs(self.p, self.family,
                                                   phi[0], phi[1])
        others = [m for m in range(4) if m != i]
        cross_c = sum(cc_i[m] * wf[m] for m in others)
        drho = cc_i[i] * v + cross_c * rho
        lin = sum(g1_i[m] * wf[m] for m in others)
        quad = sum(g2_i[k, m] * wf[k] * wf[m]
                   for k in others for m in others if k != m)
        dv = lin * v + quad * rho
        live = active & ok
        return (np.where(live, lam_i, 0.0), np.where(live, drho, 0.0),
                np.where(live, dv, 0.0), ok)


def trace_fan(traj: Trajectory, p: PhysParams, family: int,
              seeds: np.ndarray, substeps: int = 4,
              t_end: float | None = None) -> CharFan:
    """Trace the family fan through a trajectory's snapshot record.

    Integrates (X, rho, v) with RK4 at the snapshot cadence subdivided
    `substeps` times, recording at snapshot times. Warns when the tracer
    moves curves by more than one cell per substep (local tracer CFL).
    """
    if family not in (1, 2, 3, 4):
        raise ValueError("family must be 1..4")
    seeds = np.asarray(seeds, dtype=float)
    stepper = _FanStepper(traj, p, family)
    times = traj.times if t_end is None else \
        traj.times[traj.times <= t_end + 1e-12]
    if len(times) < 2:
        raise ValueError("trajectory too short to trace")
    ns = len(seeds)
    X = seeds.copy()
    rho = np.ones(ns)
    phi0, ok0 = traj.phi_at(seeds, 0.0)
    if not np.any(ok0):
        raise ValueError("no seed lies inside the trajectory window")
    wf0, _ = traj.w_at(seeds, 0.0, guarded=False)
    v = wf0[family - 1].copy()
    active = ok0.copy()

    nt = len(times)
    out_X = np.empty((nt, ns))
    out_rho = np.empty((nt, ns))
    out_v = np.empty((nt, ns))
    out_ok = np.zeros((nt, ns), dtype=bool)
    out_X[0], out_rho[0], out_v[0], out_ok[0] = X, rho, v, active

    max_jump = 0.0
    for j in range(nt - 1):
        t0, t1 = times[j], times[j + 1]
        h = (t1 - t0) / substeps
        for s in range(substeps):
            ta = t0 + s * h
            k1 = stepper.rates(ta, X, rho, v, active)
            k2 = stepper.rates(ta + 0.5 * h, X + 0.5 * h * k1[0],
                               rho + 0.5 * h * k1[1], v + 0.5 * h * k1[2],
                               active)
            k3 = stepper.rates(ta + 0.5 * h, X + 0.5 * h * k2[0],
                               rho + 0.5 * h * k2[1], v + 0.5 * h * k2[2],
                               active)
            k4 = stepper.rates(ta + h, X + h * k3[0], rho + h * k3[1],
                               v + h * k3[2], active)
            dX = (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            # window-relative move per substep gauges interpolation stress
            rel = np.abs(dX - traj.shift * h)[active] if np.any(active) else 0.0
            max_jump = max(max_jump, float(np.max(rel)) if np.size(rel) else 0.0)
            X = X + dX
            rho = rho + (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            v = v + (h / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
            active = active & k4[3]
        out_X[j + 1], out_rho[j + 1], out_v[j + 1] = X, rho, v
        out_ok[j + 1] = active
    if max_jump > traj.grid.dx * max(4.0, substeps):
        warnings.warn(
            f"tracer moved {max_jump:.3g} per substep vs cell {traj.grid.dx:.3g}; "
            "increase snapshot density or substeps", stacklevel=2)
    return CharFan(family=family, z=seeds, t=np.array(times), X=out_X,
                   rho=out_rho, v=out_v, valid=out_ok)


def rho_from_flow_map(fan: CharFan) -> np.ndarray:
    """Independent inverse-density estimate dX/dz by centered differences."""
    X, z = fan.X, fan.z
    out = np.empty_like(X)
    out[:, 1:-1] = (X[:, 2:] - X[:, :-2]) / (z[2:] - z[:-2])
    out[:, 0] = (X[:, 1] - X[:, 0]) / (z[1] - z[0])
    out[:, -1] = (X[:, -1] - X[:, -2]) / (z[-1] - z[-2])
    return out


def bichar_intersection(fan_i: CharFan, fan_j: CharFan, y_i: float,
                        y_j: float, rtol: float = 1e-10):
    """Meeting point (x, t) of the two transversal characteristics.

    Bisection on X_i(y_i, t) - X_j(y_j, t) (monotone for distinct speeds)
    against the cubic time-interpolants of the traced curves.
    """
    if fan_i.family == fan_j.family:
        raise ValueError("need transversal families")
    si = fan_i.x_of_t(y_i)
    sj = fan_j.x_of_t(y_j)
    t_lo = 0.0
    t_hi = float(min(fan_i.t[-1], fan_j.t[-1]))

    def gap(t):
        return float(si(t) - sj(t))

    g_lo, g_hi = gap(t_lo), gap(t_hi)
    if g_lo == 0.0:
        return float(si(0.0)), 0.0
    if g_lo * g_hi > 0.0:
        raise ValueError("characteristics do not intersect in the window")
    while (t_hi - t_lo) > rtol * max(t_hi, 1e-30):
        tm = 0.5 * (t_lo + t_hi)
        gm = gap(tm)
        if gm == 0.0:
            t_lo = t_hi = tm
            break
        if g_lo * gm < 0.0:
            t_hi = tm
        else:
            t_lo, g_lo = tm, gm
    t_star = 0.5 * (t_lo + t_hi)
    return float(si(t_star)), float(t_star)


@dataclass
class NormSeries:
    """Running sup-norms of the decomposed solution."""

    t: np.ndarray
    S: np.ndarray   # max_i sup rho_i, seeds in [eta, 2 eta]
    J: np.ndarray   # max_i sup |v_i|
    V: np.ndarray   # max_i sup |w_i| outside strip R_i (grid-based)
    U: np.ndarray   # sup |Phi|


def norm_series(traj: Trajectory, fans: dict[int, CharFan],
                eta: float) -> NormSeries:
    """Assemble S, J (fan-based) and V, U (grid-based) on the fan timeline.

    Strips R_i are masked by their traced boundary curves; families
    without a fan contribute to V unmasked (their strip is elsewhere).
    """
    some_fan = next(iter(fans.values()))
    t = some_fan.t
    nt = len(t)
    S = np.zeros(nt)
    J = np.zeros(nt)
    for fam, fan in fans.items():
        sel = fan.core_mask(eta)
        rho = np.where(fan.valid[:, sel], fan.rho[:, sel], -np.inf)
        vv = np.where(fan.valid[:, sel], np.abs(fan.v[:, sel]), -np.inf)
        S = np.maximum(S, rho.max(axis=1))
        J = np.maximum(J, vv.max(axis=1))
    S = np.maximum.accumulate(S)
    J = np.maximum.accumulate(J)

    V = np.zeros(nt)
    U = np.zeros(nt)
    xg = traj.grid.x
    for j, tj in enumerate(t):
        snap_idx = int(np.searchsorted(traj.times, tj + 1e-12) - 1)
        snap_idx = min(max(snap_idx, 0), len(traj.times) - 1)
        phi = traj.fields[snap_idx]
        U[j] = float(np.abs(np.linalg.norm(phi, axis=0)).max())
        wfield = traj._wfield(snap_idx)
        xl = xg + traj.shift * traj.times[snap_idx]
        vbest = 0.0
        for fam in range(1, 5):
            wabs = np.abs(wfield[fam - 1])
            if fam in fans:
                fan = fans[fam]
                jj = int(np.searchsorted(fan.t, tj + 1e-12) - 1)
                jj = min(max(jj, 0), len(fan.t) - 1)
                lo = fan.X[jj, fan.seed_index(eta)]
                hi = fan.X[jj, fan.seed_index(2.0 * eta)]
                mask = (xl < lo) | (xl > hi)
            else:
                mask = np.ones_like(xl, dtype=bool)
            if np.any(mask):
                vbest = max(vbest, float(wabs[mask].max()))
        V[j] = vbest
    V = np.maximum.accumulate(V)
    U = np.maximum.accumulate(U)
    return NormSeries(t=np.array(t), S=S, J=J, V=V, U=U)


@dataclass
class StripGeometry:
    """Traced strip boundaries and the measured full-separation time."""

    t: np.ndarray
    lower: dict        # family -> X_i(eta, t)
    upper: dict        # family -> X_i(2 eta, t)
    separation_time: float | None
    t0_analytic: float


def strip_separation(fans: dict[int, CharFan], eta: float,
                     sigma: float) -> StripGeometry:
    """First time every pair of strips is disjoint, vs t0 = eta / sigma."""
    if sorted(fans) != [1, 2, 3, 4]:
        raise ValueError("need all four fans")
    t = fans[1].t
    lower = {f: fans[f].X[:, fans[f].seed_index(eta)] for f in fans}
    upper = {f: fans[f].X[:, fans[f].seed_index(2.0 * eta)] for f in fans}
    # min over i<j of the gap between strip i (faster) and strip j (slower)
    gap = np.full(len(t), np.inf)
    for i in range(1, 5):
        for j in range(i + 1, 5):
            gap = np.minimum(gap, lower[i] - upper[j])
    sep_idx = np.nonzero(gap > 0.0)[0]
    if len(sep_idx) == 0:
        t_sep = None
    else:
        k = sep_idx[0]
        if k == 0:
            t_sep = 0.0
        else:
            # linear crossing between samples
            g0, g1 = gap[k - 1], gap[k]
            t_sep = float(t[k - 1] + (t[k] - t[k - 1]) * (-g0) / (g1 - g0))
    return StripGeometry(t=t, lower=lower, upper=upper, separation_time=t_sep,
                         t0_analytic=eta / sigma)


def dz_rho(fan: CharFan, t_end: float | None = None):
    """Seed-derivative of the inverse density: series and running sup.

    Returns (series (nt, ns), sup). Warns when neighbor differences sit at
    the round-off floor (seed spacing too fine to resolve d rho / dz).
    """
    sel = fan.t <= (fan.t[-1] if t_end is None else t_end + 1e-12)
    rho = fan.rho[sel]
    z = fan.z
    d = np.empty_like(rho)
    d[:, 1:-1] = (rho[:, 2:] - rho[:, :-2]) / (z[2:] - z[:-2])
    d[:, 0] = d[:, 1]
    d[:, -1] = d[:, -2]
    ok = fan.valid[sel]
    d = np.where(ok, d, 0.0)
    if np.abs(rho[:, 2:] - rho[:, :-2]).max() < 1e-12:
        warnings.warn("rho differences at round-off floor; seed spacing "
                      "under-resolves dz rho", stacklevel=2)
    return d, float(np.abs(d).max())
