"""Sampled invariant suites with independent finite-difference oracles."""

from __future__ import annotations

import numpy as np

from .eigen import (
    PhysParams,
    _jacobians_r,
    ball_sample,
    c111_closed_form,
    c222_closed_form,
    coupling_coeffs,
    eigensystem,
    eigenvalues,
    grad_lambda,
    matrix_a,
    min_gap_sigma,
)


def _fd4_lambda(p, ph1, ph2, h=1e-5):
    """4th-order central differences of the speeds, vectorized."""

    def g(component):
        if component == 0:
            ev = lambda s: eigenvalues(p, ph1 + s, ph2)  # noqa: E731
        else:
            ev = lambda s: eigenvalues(p, ph1, ph2 + s)  # noqa: E731
        return (-ev(2 * h) + 8 * ev(h) - 8 * ev(-h) + ev(-2 * h)) / (12 * h)

    return np.stack([g(0), g(1)], axis=1)  # (4, 2, n)


def _fd4_rvec(p, ph1, ph2, regularized, h=1e-5):
    def g(component):
        if component == 0:
            ev = lambda s: eigensystem(p, ph1 + s, ph2,  # noqa: E731
                                       regularized=regularized).rvec
        else:
            ev = lambda s: eigensystem(p, ph1, ph2 + s,  # noqa: E731
                                       regularized=regularized).rvec
        return (-ev(2 * h) + 8 * ev(h) - 8 * ev(-h) + ev(-2 * h)) / (12 * h)

    return np.stack([g(0), g(1)], axis=2)  # (4, 4, 2, n)


def eigen_check_suite(p: PhysParams | None = None, n_sample: int = 10000,
                      seed: int = 0) -> dict:
    """Run the full eigenstructure invariant sample; per-check verdicts.

    States are drawn quasi-randomly from the (phi1, phi2) disk of radius
    2*kappa (the eigen-frame depends on those two components only); the
    regularized-frame sample includes phi2 = 0 exactly.
    """
    if p is None:
        p = PhysParams(c1=2.0, c2=1.0, sigma0=1.0, sigma1=-1.0, kappa=0.01)
    pts = ball_sample(2.0 * p.kappa, n_sample, dim=2, seed=seed)
    ph1, ph2 = pts[:, 0], pts[:, 1]
    nondeg = np.abs(ph2) > 1e-3
    checks: dict[str, dict] = {}

    def record(name, value, threshold, ok=None):
        ok = bool(value < threshold) if ok is None else bool(ok)
        checks[name] = {"pass": ok, "value": float(value),
                        "threshold": threshold}

    # duality, literal frame away from the degeneracy
    sys_l = eigensystem(p, ph1[nondeg], ph2[nondeg], regularized=False)
    dual = np.einsum("icn,jcn->ijn", sys_l.lvec, sys_l.rvec)
    dual -= np.eye(4)[:, :, None]
    record("duality_literal", np.abs(dual).max(), 1e-10)

    # duality, regularized frame, including phi2 = 0 exactly
    ph2_reg = ph2.copy()
    ph2_reg[: n_sample // 20] = 0.0
    sys_r = eigensystem(p, ph1, ph2_reg, regularized=True)
    dual_r = np.einsum("icn,jcn->ijn", sys_r.lvec, sys_r.rvec)
    dual_r -= np.eye(4)[:, :, None]
    record("duality_regularized", np.abs(dual_r).max(), 1e-10)

    # spectral residual A r = lam r (both frames)
    worst = 0.0
    for sys, p1v, p2v in ((sys_l, ph1[nondeg], ph2[nondeg]),
                          (sys_r, ph1, ph2_reg)):
        a = p.c1**2 + 2 * p.sigma0 * p1v
        b = p.c2**2 + 2 * p.sigma1 * p1v
        c = 2 * p.sigma1 * p2v
        r = sys.rvec
        res1 = -r[:, 2] - sys.lam * r[:, 0]
        res2 = -r[:, 3] - sys.lam * r[:, 1]
        res3 = -(a * r[:, 0] + c * r[:, 1]) - sys.lam * r[:, 2]
        res4 = -(c * r[:, 0] + b * r[:, 1]) - sys.lam * r[:, 3]
        res = np.sqrt(res1**2 + res2**2 + res3**2 + res4**2)
        norm = np.sqrt((r**2).sum(axis=1))
        worst = max(worst, float((res / norm).max()))
    record("spectral_residual", worst, 1e-10)

    # analytic speed gradients vs 4th-order FD (relative, sup over sample)
    sub = slice(0, min(n_sample, 4000))
    ga = grad_lambda(p, ph1[sub], ph2[sub])
    gf = _fd4_lambda(p, ph1[sub], ph2[sub])
    scale = np.abs(gf).max()
    record("grad_lambda_fd", np.abs(ga - gf).max() / scale, 1e-6)

    # analytic eigenvector Jacobians vs FD (both frames)
    worst = 0.0
    for reg in (True, False):
        m = slice(0, 800) if reg else (np.abs(ph2[:2000]) > 2e-3)
        p1v, p2v = ph1[:2000][m] if not reg else ph1[m], \
            ph2[:2000][m] if not reg else ph2[m]
        ja = _jacobians_r(p, p1v, p2v, reg)
        jf = _fd4_rvec(p, p1v, p2v, reg)
        worst = max(worst, float(np.abs(ja - jf).max() /
                                 max(np.abs(jf).max(), 1.0)))
    record("grad_rvec_fd", worst, 1e-6)

    # Lax coefficient at rest: closed form vs FD-contraction oracle
    c0 = float(c111_closed_form(p, 0.0, 0.0))
    gf0 = _fd4_lambda(p, np.array([0.0]), np.array([0.0]))
    r1 = eigensystem(p, 0.0, 0.0).rvec[0]
    c0_fd = float(gf0[0, 0, 0] * r1[0] + gf0[0, 1, 0] * r1[1])
    record("c111_zero_fd", abs(c0 - c0_fd) / abs(c0_fd), 1e-6)
    record("c111_zero_value", abs(c0 - p.c111_at_zero()), 1e-14)

    # closed forms vs contraction across the sample; family antisymmetry
    co = coupling_coeffs(p, ph1[nondeg], ph2[nondeg], regularized=False)
    record("c111_closed_contraction",
           np.abs(co.cc[0, 0] - c111_closed_form(p, ph1[nondeg],
                                                 ph2[nondeg])).max(), 1e-10)
    record("c222_closed_contraction",
           np.abs(co.cc[1, 1] - c222_closed_form(p, ph1[nondeg],
                                                 ph2[nondeg])).max(), 1e-10)
    record("c111_c444_antisymmetry",
           np.abs(co.cc[0, 0] + co.cc[3, 3]).max(), 1e-12)
    record("c222_c333_antisymmetry",
           np.abs(co.cc[1, 1] + co.cc[2, 2]).max(), 1e-12)

    lam = eigenvalues(p, ph1, ph2)
    record("speed_symmetry", max(np.abs(lam[0] + lam[3]).max(),
                                 np.abs(lam[1] + lam[2]).max()), 1e-15,
           ok=bool(np.all(lam[0] + lam[3] == 0.0)
                   and np.all(lam[1] + lam[2] == 0.0)))
    record("speed_ordering", 0.0, 1.0, ok=bool(np.all(np.diff(lam, axis=0) < 0)))

    # potentially singular couplings stay bounded toward phi2 -> 0
    seq = 10.0 ** -np.arange(2.0, 7.0, 0.5)
    g213 = [float(coupling_coeffs(p, 0.5 * p.kappa, s,
                                  regularized=False).g2[1, 0, 2]) for s in seq]
    record("gamma2_13_bounded", np.abs(g213).max(), 10.0)

    co_r = coupling_coeffs(p, ph1, ph2_reg, regularized=True)
    gamma_emp = max(float(np.abs(co_r.cc).max()), float(np.abs(co_r.g1).max()),
                    float(np.abs(co_r.g2).max()))
    checks["empirical_gamma"] = {"pass": bool(np.isfinite(gamma_emp)),
                                 "value": gamma_emp, "threshold": None}

    sig = min_gap_sigma(p)
    checks["sigma_gap"] = {"pass": sig.sigma > 0.0, "value": sig.sigma,
                           "threshold": 0.0,
                           "agreement": sig.agreement,
                           "per_pair": sig.per_pair}

    checks["all_pass"] = {"pass": all(v["pass"] for v in checks.values()),
                          "value": None, "threshold": None}
    return checks
