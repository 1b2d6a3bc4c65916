"""Eulerian method-of-lines evolution of the planar system to gradient blow-up.

Semi-discretization: 4th-order central differences for d/dx, classical
4-stage Runge-Kutta in time, plus scale-selective 4th-difference dissipation

    rhs -= eps * v_ref / dx * D4[Phi],    D4 ~ dx^4 d^4/dx^4,

whose magnitude is eps * v_ref * dx^3 on smooth fields. Boundary cells use
constant-state extrapolation (the state is constant outside the light cone).
An optional comoving (Galilean) shift s evolves Phi(x - s t, t), turning the
speeds into lam_i - s; an optional sponge ramp relaxes the outermost cells
toward the initial edge states so that waves leaving a windowed domain are
absorbed instead of reflected.

The per-step max |dx phi1| series is recorded; runs stop at t_max or when it
crosses m_stop (inverse-density floors are applied downstream by the
characteristic tracer). Snapshots are stored on a uniform cadence, optionally
denser over an early interval (cross-family interactions) and over the final
tail (shock approach), and are interpolated cubically in x / linearly in t
by the trajectory accessors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigen import PhysParams, eigensystem, lambda_max_bound


class CFLError(ValueError):
    """Requested time step violates the CFL bound."""


class StateBallError(RuntimeError):
    """|Phi| left the strict-hyperbolicity ball 2*kappa (or went non-finite)."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with inclusive endpoints (refinement keeps nodes nested)."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("grid too small")
        if not self.x_max > self.x_min:
            raise ValueError("need x_max > x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    def refined(self) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, 2 * self.n - 1)

    def covers_cone(self, support: tuple[float, float], lam_max: float,
                    t_max: float, margin: float = 0.0) -> bool:
        """Forward-light-cone containment for an unshifted full run."""
        lo, hi = support
        return (self.x_max >= hi + lam_max * t_max + margin and
                self.x_min <= lo - lam_max * t_max - margin)


@dataclass
class EvolveConfig:
    """Solver controls; cfl in (0, 1), dissipation >= 0."""

    t_max: float
    cfl: float = 0.9
    dissipation: float = 0.02
    m_stop: float | None = None
    snap_dt: float | None = None
    snap_dt_early: float | None = None
    t_early: float = 0.0
    dense_tail_frac: float = 0.12
    dense_tail_factor: int = 4
    comoving_speed: float = 0.0
    sponge_cells: int = 0
    sponge_strength: float = 2.0
    ball_check_every: int = 25
    # store only a window sliding at track_speed (unshifted long runs);
    # track_window is the kept physical range at t = 0
    track_speed: float | None = None
    track_window: tuple[float, float] | None = None

    def __post_init__(self):
        if not (0.0 < self.cfl < 1.0):
            raise ValueError(f"cfl must be in (0, 1), got {self.cfl}")
        if self.dissipation < 0.0:
            raise ValueError("dissipation must be >= 0")
        if self.t_max <= 0.0:
            raise ValueError("t_max must be positive")


class _Workspace:
    def __init__(self, n: int):
        self.qe = np.empty((4, n + 4))
        self.k = [np.empty((4, n)) for _ in range(4)]
        self.tmp = np.empty((4, n))


def _fill_ghosts(qe: np.ndarray, q: np.ndarray) -> None:
    qe[:, 2:-2] = q
    qe[:, 0] = q[:, 0]
    qe[:, 1] = q[:, 0]
    qe[:, -1] = q[:, -1]
    qe[:, -2] = q[:, -1]


def _rhs(p: PhysParams, q, out, ws: _Workspace, dx: float, shift: float,
         diss_coef: float, mu, ref) -> float:
    """Window-frame right-hand side; returns max |dx phi1| of this state."""
    qe = ws.qe
    _fill_ghosts(qe, q)
    dq = (qe[:, :-4] - 8.0 * qe[:, 1:-3] + 8.0 * qe[:, 3:-1] - qe[:, 4:]) \
        * (1.0 / (12.0 * dx))
    a = p.c1 * p.c1 + (2.0 * p.sigma0) * q[0]
    b = p.c2 * p.c2 + (2.0 * p.sigma1) * q[0]
    c = (2.0 * p.sigma1) * q[1]
    out[0] = dq[2]
    out[1] = dq[3]
    out[2] = a * dq[0] + c * dq[1]
    out[3] = c * dq[0] + b * dq[1]
    if shift != 0.0:
        out += shift * dq
    if diss_coef != 0.0:
        d4 = (qe[:, :-4] - 4.0 * qe[:, 1:-3] + 6.0 * qe[:, 2:-2]
              - 4.0 * qe[:, 3:-1] + qe[:, 4:])
        out -= diss_coef * d4
    if mu is not None:
        out -= mu * (q - ref)
    return float(np.abs(dq[0]).max())


def max_frame_speed(p: PhysParams, shift: float = 0.0) -> float:
    """Bound for max_i |lam_i - shift| over the 2*kappa state ball."""
    return lambda_max_bound(p) + abs(shift)


def cfl_dt(p: PhysParams, grid: Grid1D, cfg: EvolveConfig) -> float:
    return cfg.cfl * grid.dx / max_frame_speed(p, cfg.comoving_speed)


def step(p: PhysParams, cfg: EvolveConfig, grid: Grid1D, state: np.ndarray,
         dt: float) -> np.ndarray:
    """One RK4 step of the semi-discretization (CFL-checked)."""
    if dt > cfl_dt(p, grid, cfg) * (1.0 + 1e-12):
        raise CFLError(
            f"dt = {dt:.3e} exceeds cfl*dx/max|lam - shift| = "
            f"{cfl_dt(p, grid, cfg):.3e}")
    state = np.asarray(state, dtype=float)
    ws = _Workspace(grid.n)
    mu, ref = _sponge_profile(p, cfg, grid, state)
    _rk4_step(p, state, dt, ws, grid.dx, cfg.comoving_speed,
              _diss_coef(p, cfg, grid), mu, ref)
    return state


def _diss_coef(p: PhysParams, cfg: EvolveConfig, grid: Grid1D) -> float:
    # reference speed is the physical max |lam| (frame-invariant results)
    if cfg.dissipation == 0.0:
        return 0.0
    return cfg.dissipation * lambda_max_bound(p) / grid.dx


def _sponge_profile(p: PhysParams, cfg: EvolveConfig, grid: Grid1D,
                    phi0: np.ndarray):
    if cfg.sponge_cells <= 0:
        return None, None
    w = cfg.sponge_cells
    n = grid.n
    if 2 * w >= n:
        raise ValueError("sponge zones overlap")
    vmax = max_frame_speed(p, cfg.comoving_speed)
    amp = cfg.sponge_strength * vmax / (w * grid.dx)
    ramp = np.linspace(1.0, 0.0, w)
    prof = (1.0 - np.cos(np.pi * ramp)) / 2.0  # smooth 1 -> 0 into interior
    mu = np.zeros(n)
    mu[:w] = amp * prof
    mu[-w:] = amp * prof[::-1]
    ref = np.empty((4, n))
    ref[:] = phi0[:, :1]
    right = phi0[:, -1:]
    ref[:, n // 2:] = right
    return mu, ref


def _rk4_step(p, q, dt, ws, dx, shift, diss_coef, mu, ref) -> float:
    k1, k2, k3, k4 = ws.k
    tmp = ws.tmp
    maxgrad = _rhs(p, q, k1, ws, dx, shift, diss_coef, mu, ref)
    np.multiply(k1, 0.5 * dt, out=tmp)
    tmp += q
    _rhs(p, tmp, k2, ws, dx, shift, diss_coef, mu, ref)
    np.multiply(k2, 0.5 * dt, out=tmp)
    tmp += q
    _rhs(p, tmp, k3, ws, dx, shift, diss_coef, mu, ref)
    np.multiply(k3, dt, out=tmp)
    tmp += q
    _rhs(p, tmp, k4, ws, dx, shift, diss_coef, mu, ref)
    k2 += k3
    k2 *= 2.0
    k1 += k4
    k1 += k2
    k1 *= dt / 6.0
    q += k1
    return maxgrad


def decompose_field(p: PhysParams, x: np.ndarray, phi: np.ndarray,
                    regularized: bool = True):
    """w_i = l_i . dx Phi on a sampled state; returns (w, residual).

    residual is the sup-norm defect of sum_k w_k r_k against the discrete
    dx Phi (an identity up to round-off, by duality).
    """
    n = phi.shape[1]
    dx = x[1] - x[0]
    qe = np.empty((4, n + 4))
    _fill_ghosts(qe, phi)
    dphi = (qe[:, :-4] - 8.0 * qe[:, 1:-3] + 8.0 * qe[:, 3:-1] - qe[:, 4:]) \
        / (12.0 * dx)
    sys = eigensystem(p, phi[0], phi[1], regularized=regularized)
    w = np.einsum("kcn,cn->kn", sys.lvec, dphi)
    recon = np.einsum("kn,kcn->cn", w, sys.rvec)
    residual = float(np.abs(recon - dphi).max())
    return w, residual


def resolution_guard(phi1: np.ndarray, cells: float = 8.0) -> np.ndarray:
    """Attenuation in [0, 1] flagging fronts narrower than ~`cells` cells.

    A front of width w cells advances |phi1| by ~swing/w per cell, so the
    per-cell increment relative to swing/cells detects sub-grid fronts,
    where aliasing injects spurious transversal wave components into the
    decomposition; evaluations there are damped toward their physical
    magnitude (~0). Refinement shrinks the flagged zone, so guarded
    quantities converge with the field.
    """
    n = len(phi1)
    swing = float(phi1.max() - phi1.min())
    thresh = swing / cells + 1e-300
    d1 = np.zeros(n)
    d1[1:-1] = 0.5 * np.abs(phi1[2:] - phi1[:-2])
    ratio = d1 / thresh
    att = 1.0 / (1.0 + ratio**6)
    # widen the flagged zone by three cells on each side
    for _ in range(3):
        att[1:-1] = np.minimum(att[1:-1], np.minimum(att[2:], att[:-2]))
    return att


def _interp_weights(f: np.ndarray):
    # Lagrange quintic on nodes {-2..3} at offset f in [0, 1). Cubic-x
    # sampling is not enough here: comoving-frame curves sit at a fixed
    # sub-cell phase, so the dx^4 interpolation bias never phase-averages
    # and the seed-difference dX/dz estimator amplifies it by 1/dx; the
    # dx^6 bias is below every tolerance in play.
    fm2, fm1, fp1, fp2, fp3 = f + 2.0, f + 1.0, f - 1.0, f - 2.0, f - 3.0
    w = (
        fm1 * f * fp1 * fp2 * fp3 / -120.0,
        fm2 * f * fp1 * fp2 * fp3 / 24.0,
        fm2 * fm1 * fp1 * fp2 * fp3 / -12.0,
        fm2 * fm1 * f * fp2 * fp3 / 12.0,
        fm2 * fm1 * f * fp1 * fp3 / -24.0,
        fm2 * fm1 * f * fp1 * fp2 / 120.0,
    )
    return w


@dataclass
class Trajectory:
    """Snapshot record of one run, with x/t interpolation accessors.

    Snapshots are stored in window coordinates xw = x - shift * t;
    accessors take lab-frame x. w-fields (regularized decomposition) and
    the resolution guard are computed lazily per snapshot and cached.
    """

    p: PhysParams
    grid: Grid1D
    shift: float
    times: np.ndarray
    fields: np.ndarray              # (ns, 4, n)
    maxgrad_t: np.ndarray           # per-step times
    maxgrad: np.ndarray             # per-step max |dx phi1|
    stop_reason: str
    config: EvolveConfig | None = None
    # per-snapshot storage origin in sampling coordinates: snapshot j's
    # cell i sits at lab x = origins[j] + shift*t_j + i*dx. Constant
    # x_min for frame-comoving runs; jitters by +-dx/2 for tracked storage
    # (integer-cell slices of an unshifted grid).
    origins: np.ndarray | None = None
    _wcache: dict = field(default_factory=dict, repr=False)
    _acache: dict = field(default_factory=dict, repr=False)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def snapshot(self, i: int) -> tuple[float, np.ndarray]:
        return float(self.times[i]), self.fields[i]

    def _wfield(self, i: int) -> np.ndarray:
        if i not in self._wcache:
            w, _ = decompose_field(self.p, self.grid.x, self.fields[i])
            if len(self._wcache) > 16:
                self._wcache.clear()
            self._wcache[i] = w
        return self._wcache[i]

    def _att(self, i: int) -> np.ndarray:
        if i not in self._acache:
            if len(self._acache) > 16:
                self._acache.clear()
            self._acache[i] = resolution_guard(self.fields[i][0])
        return self._acache[i]

    def _bracket(self, t: float) -> tuple[int, int, float]:
        ts = self.times
        t = min(max(t, ts[0]), ts[-1])
        j = int(np.searchsorted(ts, t, side="right") - 1)
        j = min(max(j, 0), len(ts) - 2)
        dt = ts[j + 1] - ts[j]
        return j, j + 1, float((t - ts[j]) / dt) if dt > 0 else 0.0

    def _origin(self, j: int) -> float:
        return self.grid.x_min if self.origins is None else \
            float(self.origins[j])

    def _nstore(self) -> int:
        return self.fields.shape[2]

    def _xw_index(self, x, t: float, j: int | None = None):
        xw = np.asarray(x, dtype=float) - self.shift * t
        origin = self.grid.x_min if j is None else self._origin(j)
        pos = (xw - origin) / self.grid.dx
        idx = np.floor(pos).astype(int)
        frac = pos - idx
        n = self._nstore()
        valid = (idx >= 2) & (idx <= n - 5)
        idx_c = np.clip(idx, 2, n - 5)
        return idx_c, frac, valid

    def _interp_snapshot(self, arr: np.ndarray, idx, frac):
        w = _interp_weights(frac)
        out = w[0] * arr[..., idx - 2]
        for k in range(1, 6):
            out += w[k] * arr[..., idx - 2 + k]
        return out

    def phi_at(self, x, t: float):
        """State at lab positions x, time t: quintic in x, linear in t.

        The time blend runs along the comoving line through (x, t): both
        snapshots are read at the query's window coordinate x - shift*t,
        along which the fields barely change. Blending along fixed-lab
        lines instead would sag by O(lam^2 d2Phi dt_snap^2) per interval,
        a one-signed error that traced flow maps accumulate.
        """
        j0, j1, th = self._bracket(t)
        i0, f0, v0 = self._xw_index(x, t, j0)
        i1, f1, v1 = self._xw_index(x, t, j1)
        a = self._interp_snapshot(self.fields[j0], i0, f0)
        b = self._interp_snapshot(self.fields[j1], i1, f1)
        return (1.0 - th) * a + th * b, v0 & v1

    def w_at(self, x, t: float, guarded: bool = True):
        """Decomposed wave amplitudes at lab positions x, time t.

        guarded=True applies the sub-grid-front attenuation, appropriate
        for transversal couplings along traced characteristics.
        """
        j0, j1, th = self._bracket(t)
        i0, f0, v0 = self._xw_index(x, t, j0)
        i1, f1, v1 = self._xw_index(x, t, j1)
        wa = self._interp_snapshot(self._wfield(j0), i0, f0)
        wb = self._interp_snapshot(self._wfield(j1), i1, f1)
        if guarded:
            wa = wa * self._interp_snapshot(self._att(j0), i0, f0)
            wb = wb * self._interp_snapshot(self._att(j1), i1, f1)
        return (1.0 - th) * wa + th * wb, v0 & v1

    def sample_at(self, x, t: float, guarded: bool = True):
        """(phi, w, valid) at lab positions x, sharing index work."""
        j0, j1, th = self._bracket(t)
        i0, f0, v0 = self._xw_index(x, t, j0)
        i1, f1, v1 = self._xw_index(x, t, j1)
        a = self._interp_snapshot(self.fields[j0], i0, f0)
        b = self._interp_snapshot(self.fields[j1], i1, f1)
        wa = self._interp_snapshot(self._wfield(j0), i0, f0)
        wb = self._interp_snapshot(self._wfield(j1), i1, f1)
        if guarded:
            wa = wa * self._interp_snapshot(self._att(j0), i0, f0)
            wb = wb * self._interp_snapshot(self._att(j1), i1, f1)
        om = 1.0 - th
        return om * a + th * b, om * wa + th * wb, v0 & v1

    def window_bounds(self, t: float, margin_cells: int = 2):
        off = self.shift * t
        return (self.grid.x_min + margin_cells * self.grid.dx + off,
                self.grid.x_max - margin_cells * self.grid.dx + off)

    def max_abs_phi_series(self):
        return np.array([np.abs(np.linalg.norm(f, axis=0)).max()
                         for f in self.fields])


def run(p: PhysParams, cfg: EvolveConfig, grid: Grid1D,
        phi0: np.ndarray) -> Trajectory:
    """Integrate until t_max or gradient threshold; record snapshots.

    phi0 is the initial state sampled on grid.x (window frame coincides
    with the lab frame at t = 0).
    """
    q = np.array(phi0, dtype=float)
    if q.shape != (4, grid.n):
        raise ValueError(f"phi0 must have shape (4, {grid.n})")
    ws = _Workspace(grid.n)
    dt = cfl_dt(p, grid, cfg)
    diss_coef = _diss_coef(p, cfg, grid)
    mu, ref = _sponge_profile(p, cfg, grid, q)
    if mu is not None and float(mu.max()) * dt > 0.5:
        raise ValueError("sponge too stiff for the explicit step")

    snap_dt = cfg.snap_dt if cfg.snap_dt is not None else cfg.t_max / 400.0
    tail_t = cfg.t_max * (1.0 - cfg.dense_tail_frac)

    def cadence(t):
        if cfg.snap_dt_early is not None and t < cfg.t_early:
            return cfg.snap_dt_early
        if t >= tail_t:
            return snap_dt / cfg.dense_tail_factor
        return snap_dt

    if cfg.track_speed is not None:
        lo, hi = cfg.track_window
        i_lo = max(int(np.floor((lo - grid.x_min) / grid.dx)), 0)
        i_hi = min(int(np.ceil((hi - grid.x_min) / grid.dx)) + 1, grid.n)
        n_keep = i_hi - i_lo
        sample_shift = cfg.track_speed

        def store(t):
            off = int(round((cfg.track_speed - cfg.comoving_speed) * t
                            / grid.dx))
            a = min(max(i_lo + off, 0), grid.n - n_keep)
            origin = grid.x_min + a * grid.dx - \
                (cfg.track_speed - cfg.comoving_speed) * t
            return q[:, a:a + n_keep].copy(), origin
    else:
        sample_shift = cfg.comoving_speed

        def store(t):
            return q.copy(), grid.x_min

    ball_sq = (2.0 * p.kappa) ** 2
    f0, o0 = store(0.0)
    times = [0.0]
    fields = [f0]
    origins = [o0]
    mg_t, mg = [], []
    t = 0.0
    next_snap = cadence(0.0)
    stop_reason = "t_max"
    istep = 0

    def snap(t):
        fj, oj = store(t)
        times.append(t)
        fields.append(fj)
        origins.append(oj)

    while t < cfg.t_max - 1e-14:
        h = min(dt, cfg.t_max - t)
        gmax = _rk4_step(p, q, h, ws, grid.dx, cfg.comoving_speed,
                         diss_coef, mu, ref)
        t += h
        istep += 1
        mg_t.append(t)
        mg.append(gmax)
        if cfg.m_stop is not None and gmax >= cfg.m_stop:
            stop_reason = "m_stop"
            snap(t)
            break
        if istep % cfg.ball_check_every == 0:
            nsq = float((q * q).sum(axis=0).max())
            if not np.isfinite(nsq) or nsq >= ball_sq:
                raise StateBallError(
                    f"|Phi| reached {np.sqrt(max(nsq, 0.0)):.4g} "
                    f">= 2*kappa = {2 * p.kappa} at t = {t:.6g}")
        if t >= next_snap - 1e-12:
            snap(t)
            next_snap = t + cadence(t)
    if times[-1] < t - 1e-14:
        snap(t)
    return Trajectory(p=p, grid=grid, shift=sample_shift,
                      times=np.array(times), fields=np.array(fields),
                      maxgrad_t=np.array(mg_t), maxgrad=np.array(mg),
                      stop_reason=stop_reason, config=cfg,
                      origins=np.array(origins))
