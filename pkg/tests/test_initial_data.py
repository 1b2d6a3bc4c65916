"""Seed-family construction, maximization, and reconstruction round-trips."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elwave.eigen import PhysParams, eigensystem
from elwave.initial_data import (
    DataParams,
    chi,
    compute_w0_z0,
    decompose_w,
    psi,
    reconstruct_phi0,
    seed_grid_2d,
    seed_w,
    smooth_step,
)

DP = DataParams(theta=0.1, alpha=0.25, delta=0.6, eta=0.05)
P = PhysParams(c1=2.0, c2=1.0, sigma0=1.0, sigma1=-1.0, kappa=0.05)

# frozen with 40-digit arithmetic: 0.1 * |ln 0.075|^(1/4)
SEED_AT_1P5_ETA = 0.12686333970331889
# 0.1 * |ln 0.06|^(1/4): seed value exactly at the left plateau edge
PLATEAU_EDGE_VALUE = 0.12951148537584263


class TestDataParams:
    def test_valid(self):
        DataParams(theta=0.05, alpha=0.3, delta=0.7, eta=0.025)

    @pytest.mark.parametrize("kw", [
        dict(alpha=0.6),              # alpha < 1/2 required
        dict(alpha=0.25, delta=0.4),  # 2 alpha - delta < 0 required
        dict(delta=-0.1),
        dict(eta=0.7),
        dict(theta=0.0),
    ])
    def test_invalid(self, kw):
        base = dict(theta=0.1, alpha=0.25, delta=0.6, eta=0.05)
        base.update(kw)
        with pytest.raises(ValueError):
            DataParams(**base)


class TestBumps:
    def test_chi_plateau_and_support(self):
        s = np.array([0.5, 1.0, 1.2, 1.5, 1.8, 2.0, 2.5])
        v = chi(s)
        np.testing.assert_allclose(v[[0, 1, 5, 6]], 0.0)
        np.testing.assert_allclose(v[[2, 3, 4]], 1.0)
        mid = chi(np.array([1.1, 1.9]))
        assert np.all((mid > 0) & (mid < 1))

    def test_psi_plateau_and_support(self):
        assert psi(0.0) == 1.0 and psi(0.25) == 1.0 and psi(-0.25) == 1.0
        assert psi(0.5) == 0.0 and psi(-0.7) == 0.0
        assert 0 < psi(0.375) < 1
        np.testing.assert_allclose(psi(0.3), psi(-0.3))

    def test_smooth_step_monotone_unit_range(self):
        t = np.linspace(-0.5, 1.5, 401)
        v = smooth_step(t)
        assert np.all(np.diff(v) >= 0)
        assert np.all((v >= 0) & (v <= 1))

    def test_smoothness_proxy_bounded_discrete_derivatives(self):
        # scaled 4th differences of the seed converge (no corner artifacts)
        sups = []
        for n in (4096, 8192):
            x = np.linspace(0.9 * DP.eta, 2.1 * DP.eta, n)
            h = x[1] - x[0]
            w = seed_w(DP, x, 0.0, 1)
            d4 = (w[:-4] - 4 * w[1:-3] + 6 * w[2:-2] - 4 * w[3:-1] + w[4:]) / h**4
            sups.append(np.abs(d4).max())
        assert sups[1] / sups[0] < 1.5


class TestSeedW:
    def test_support(self):
        xs = np.array([0.5 * DP.eta, DP.eta, 2 * DP.eta, 3 * DP.eta, -0.01])
        for fam in (1, 2, 3, 4):
            np.testing.assert_allclose(seed_w(DP, xs, 0.0, fam), 0.0)

    def test_plateau_value_family1(self):
        got = seed_w(DP, 1.5 * DP.eta, 0.0, 1)
        assert got == pytest.approx(SEED_AT_1P5_ETA, rel=1e-12)

    def test_families_2_to_4_amplitude(self):
        for fam in (2, 3, 4):
            got = seed_w(DP, 1.5 * DP.eta, 0.0, fam)
            assert got == pytest.approx(DP.theta**2, rel=1e-12)

    def test_psi_cutoff_in_x2(self):
        x = 1.5 * DP.eta
        ln = abs(np.log(x))
        x2_out = 0.51 * np.sqrt(x) / ln**DP.delta
        assert seed_w(DP, x, x2_out, 1) == 0.0
        x2_in = 0.2 * np.sqrt(x) / ln**DP.delta
        assert seed_w(DP, x, x2_in, 1) == pytest.approx(SEED_AT_1P5_ETA, rel=1e-12)


class TestW0Z0:
    def test_preset_values(self):
        w0, z0 = compute_w0_z0(DP)
        # true max sits just left of the plateau edge 6 eta/5, where the
        # chi log-slope balances the |ln x|^alpha decay
        assert DP.eta < z0 <= 1.21 * DP.eta
        assert w0 >= PLATEAU_EDGE_VALUE
        assert w0 == pytest.approx(PLATEAU_EDGE_VALUE, rel=5e-3)

    def test_oracle_agreement(self):
        # independent oracle: dense grid + scipy bounded minimizer
        from scipy.optimize import minimize_scalar

        xg = np.linspace(DP.eta, 2 * DP.eta, 20001)
        vals = seed_w(DP, xg, 0.0, 1)
        i = int(np.argmax(vals))
        res = minimize_scalar(lambda x: -seed_w(DP, x, 0.0, 1),
                              bounds=(xg[i - 2], xg[i + 2]), method="bounded",
                              options={"xatol": 1e-12})
        w0, z0 = compute_w0_z0(DP)
        assert w0 == pytest.approx(-res.fun, rel=1e-9)
        assert z0 == pytest.approx(res.x, abs=1e-6 * DP.eta)

    def test_linear_in_theta(self):
        w0a, z0a = compute_w0_z0(DP)
        half = DataParams(theta=0.05, alpha=0.25, delta=0.6, eta=0.05)
        w0b, z0b = compute_w0_z0(half)
        assert w0b == pytest.approx(0.5 * w0a, rel=1e-12)
        assert z0b == pytest.approx(z0a, abs=1e-9)

    def test_monotone_in_eta(self):
        w0a, _ = compute_w0_z0(DP)
        w0b, _ = compute_w0_z0(DataParams(theta=0.1, alpha=0.25, delta=0.6,
                                          eta=0.025))
        assert w0b > w0a


class TestReconstruct:
    def grid(self, n=1200):
        return np.linspace(0.8 * DP.eta, 2.3 * DP.eta, n)

    def test_zero_seeds_zero_state(self):
        tiny = DataParams(theta=1e-9, alpha=0.25, delta=0.6, eta=0.05)
        df = reconstruct_phi0(tiny, P, self.grid(400))
        assert np.abs(df.phi).max() < 1e-8

    def test_literal_mode_scalar_reduction(self):
        df = reconstruct_phi0(DP, P, self.grid(), mode="paper-literal")
        np.testing.assert_allclose(df.phi[1], 0.0)
        np.testing.assert_allclose(df.phi[3], 0.0)

    def test_regularized_round_trip(self):
        df = reconstruct_phi0(DP, P, self.grid(2000))
        wrec = decompose_w(P, df.x, df.phi, regularized=True)
        assert np.abs(wrec - df.w).max() < 1e-8

    def test_regularized_excites_phi2(self):
        df = reconstruct_phi0(DP, P, self.grid())
        assert np.abs(df.phi[1]).max() > 1e-4

    def test_constant_outside_support(self):
        df = reconstruct_phi0(DP, P, self.grid())
        left = df.x <= DP.eta
        right = df.x >= 2 * DP.eta
        np.testing.assert_allclose(df.phi[:, left], 0.0)
        rs = df.phi[:, right]
        assert np.abs(rs - rs[:, :1]).max() < 1e-13

    def test_theta_scaling_first_order(self):
        x = self.grid(1500)
        a = reconstruct_phi0(DataParams(theta=0.01, alpha=0.25, delta=0.6,
                                        eta=0.05), P, x)
        b = reconstruct_phi0(DataParams(theta=0.005, alpha=0.25, delta=0.6,
                                        eta=0.05), P, x)
        ga = np.abs(np.gradient(a.phi[0], x)).max()
        gb = np.abs(np.gradient(b.phi[0], x)).max()
        assert ga / gb == pytest.approx(2.0, rel=0.01)
        assert a.w0 / b.w0 == pytest.approx(2.0, rel=1e-12)

    def test_ball_exit_rejected(self):
        big = DataParams(theta=0.4, alpha=0.25, delta=0.6, eta=0.05)
        tight = PhysParams(c1=2.0, c2=1.0, sigma0=1.0, sigma1=-1.0, kappa=0.01)
        with pytest.raises(ValueError, match="ball|theta"):
            reconstruct_phi0(big, tight, self.grid())

    def test_bad_grid_rejected(self):
        with pytest.raises(ValueError):
            reconstruct_phi0(DP, P, np.linspace(1.5 * DP.eta, 3 * DP.eta, 50))

    @given(st.floats(0.02, 0.08), st.floats(0.1, 0.45))
    @settings(max_examples=10, deadline=None)
    def test_round_trip_property(self, theta, alpha):
        dp = DataParams(theta=theta, alpha=alpha, delta=2 * alpha + 0.2,
                        eta=0.05)
        x = np.linspace(0.8 * dp.eta, 2.3 * dp.eta, 1200)
        df = reconstruct_phi0(dp, P, x)
        wrec = decompose_w(P, x, df.phi, regularized=True)
        assert np.abs(wrec - df.w).max() < 1e-7 * max(1.0, df.w0 / 0.1)


class TestSeedGrid2D:
    def test_support_strictly_inside(self):
        vals, dx, dy = seed_grid_2d(DP, nx=128, ny=128)
        assert vals.shape == (128, 128)
        np.testing.assert_allclose(vals[0, :], 0.0)
        np.testing.assert_allclose(vals[-1, :], 0.0)
        np.testing.assert_allclose(vals[:, 0], 0.0)
        np.testing.assert_allclose(vals[:, -1], 0.0)
        assert vals.max() > 0.12
