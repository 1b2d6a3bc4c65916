"""Eigen-frame checks against independent linear-algebra and FD oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elwave.eigen import (
    EPS_DEGENERATE,
    DegenerateFrameError,
    HyperbolicityError,
    MaterialConstants,
    PhysParams,
    ball_sample,
    c111_closed_form,
    c222_closed_form,
    coupling_coeffs,
    eigensystem,
    eigenvalues,
    grad_lambda,
    material_to_phys,
    matrix_a,
    min_gap_sigma,
)

P = PhysParams(c1=2.0, c2=1.0, sigma0=1.0, sigma1=-1.0, kappa=0.01)


def fd4(f, x, h=1e-5):
    """4th-order central difference of a (vector of) scalar map(s)."""
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def grad_lambda_fd(p, phi1, phi2, h=1e-5):
    g1 = fd4(lambda s: eigenvalues(p, s, phi2), phi1, h)
    g2 = fd4(lambda s: eigenvalues(p, phi1, s), phi2, h)
    return np.stack([g1, g2], axis=1)  # (4, 2)


class TestMaterialToPhys:
    def test_reference_constants(self):
        m = MaterialConstants(gamma11=1.0, gamma2=-0.5, gamma111=0.0, gamma12=0.0)
        p = material_to_phys(m)
        assert p.c1 == pytest.approx(2.0)
        assert p.c2 == pytest.approx(1.0)
        assert p.sigma0 == pytest.approx(6.0)
        assert p.sigma1 == pytest.approx(2.0)
        assert p.sigma2 == pytest.approx(2.0 * (-0.5 - 2.0 + 0.0))

    def test_lame_violation_rejected(self):
        with pytest.raises(ValueError, match="Lame"):
            MaterialConstants(gamma11=1.0, gamma2=0.0)
        with pytest.raises(ValueError, match="Lame"):
            MaterialConstants(gamma11=1.0, gamma2=0.3)

    def test_mixed_sign_couplings(self):
        # gamma111 = -1/4 gives sigma0 = 5; gamma12 = 3/2 gives sigma1 = -1
        m = MaterialConstants(gamma11=1.0, gamma2=-0.5, gamma111=-0.25, gamma12=1.5)
        p = material_to_phys(m)
        assert p.sigma0 == pytest.approx(5.0)
        assert p.sigma1 == pytest.approx(-1.0)
        assert p.sigma0 * p.sigma1 < 0
        # genuine nonlinearity sign via the FD-contraction oracle
        sysr = eigensystem(p, 0.0, 0.0)
        g = grad_lambda_fd(p, 0.0, 0.0)
        c111_fd = g[0] @ sysr.rvec[0, :2]
        assert c111_fd < 0
        assert c111_fd == pytest.approx(p.c111_at_zero(), rel=1e-6)


class TestMatrixA:
    def test_rest_state_entries(self):
        A = matrix_a(P, np.zeros(4))
        assert A[2, 0] == -4.0 and A[3, 1] == -1.0
        assert A[0, 2] == -1.0 and A[1, 3] == -1.0
        assert A[2, 1] == 0.0 and A[3, 0] == 0.0

    def test_no_coupling_when_phi2_zero(self):
        A = matrix_a(P, [0.003, 0.0, 0.1, 0.2])
        assert A[2, 1] == 0.0 and A[3, 0] == 0.0

    def test_perturbed_entries_and_spectrum(self):
        A = matrix_a(P, [0.01, 0.02, 0.0, 0.0])
        assert A[2, 0] == pytest.approx(-4.02)
        assert A[3, 1] == pytest.approx(-0.98)
        assert A[2, 1] == pytest.approx(0.04)
        assert A[3, 0] == pytest.approx(0.04)
        # oracle: general-purpose eigensolver agrees with the closed form
        lam_oracle = np.sort(np.linalg.eigvals(A).real)[::-1]
        lam = eigenvalues(P, 0.01, 0.02)
        np.testing.assert_allclose(lam, lam_oracle, rtol=1e-12, atol=1e-12)


class TestEigenvalues:
    def test_rest_state(self):
        np.testing.assert_allclose(eigenvalues(P, 0.0, 0.0), [2, 1, -1, -2])

    def test_phi1_only(self):
        lam = eigenvalues(P, 0.01, 0.0)
        assert lam[0] == pytest.approx(np.sqrt(4.02))
        assert lam[1] == pytest.approx(np.sqrt(0.98))

    def test_biquadratic_symmetry_exact(self):
        pts = ball_sample(2 * P.kappa, 64, seed=3)
        lam = eigenvalues(P, pts[:, 0], pts[:, 1])
        assert np.all(lam[0] + lam[3] == 0.0)
        assert np.all(lam[1] + lam[2] == 0.0)

    def test_ordered_in_ball(self):
        pts = ball_sample(2 * P.kappa, 256, seed=4)
        lam = eigenvalues(P, pts[:, 0], pts[:, 1])
        assert np.all(np.diff(lam, axis=0) < 0)

    def test_outside_ball_rejected(self):
        with pytest.raises(HyperbolicityError):
            eigenvalues(P, 0.6, 0.0)  # b = c2^2 + 2 s1 phi1 < 0


class TestEigenvectors:
    def test_regularized_limits_at_zero(self):
        sysr = eigensystem(P, 0.0, 0.0, regularized=True)
        np.testing.assert_allclose(sysr.rvec[1], [0, 1, 0, -1], atol=1e-15)
        np.testing.assert_allclose(sysr.rvec[2], [0, 1, 0, 1], atol=1e-15)
        # family 1 at rest: ((c1^2-c2^2)/(2 s1), 0, -c1 (c1^2-c2^2)/(2 s1), 0)
        np.testing.assert_allclose(sysr.rvec[0], [-1.5, 0, 3.0, 0], atol=1e-15)

    def test_duality_literal(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            ph1, ph2 = rng.uniform(-0.02, 0.02, 2)
            if abs(ph2) < 1e-3:
                continue
            sysl = eigensystem(P, ph1, ph2, regularized=False)
            err = np.abs(sysl.lvec @ sysl.rvec.T - np.eye(4)).max()
            assert err < 1e-10

    def test_duality_regularized_including_zero(self):
        pts = ball_sample(2 * P.kappa, 256, seed=5)
        pts[0] = [0.004, 0.0]  # phi2 = 0 exactly
        for ph1, ph2 in pts:
            sysr = eigensystem(P, ph1, ph2, regularized=True)
            err = np.abs(sysr.lvec @ sysr.rvec.T - np.eye(4)).max()
            assert err < 1e-10

    def test_spectral_residual(self):
        sysl = eigensystem(P, 0.01, 0.02, regularized=False)
        A = matrix_a(P, [0.01, 0.02, 0.0, 0.0])
        for i in range(4):
            r = sysl.rvec[i]
            res = np.linalg.norm(A @ r - sysl.lam[i] * r) / np.linalg.norm(r)
            assert res < 1e-10

    def test_spectral_residual_regularized(self):
        pts = ball_sample(2 * P.kappa, 128, seed=6)
        pts[0] = [0.002, 0.0]
        for ph1, ph2 in pts:
            sysr = eigensystem(P, ph1, ph2, regularized=True)
            A = matrix_a(P, [ph1, ph2, 0.0, 0.0])
            for i in range(4):
                r = sysr.rvec[i]
                res = np.linalg.norm(A @ r - sysr.lam[i] * r) / np.linalg.norm(r)
                assert res < 1e-10

    def test_literal_degenerate_raises(self):
        with pytest.raises(DegenerateFrameError):
            eigensystem(P, 0.001, EPS_DEGENERATE / 10, regularized=False)

    @given(st.floats(-0.019, 0.019), st.floats(-0.019, 0.019))
    @settings(max_examples=80, deadline=None)
    def test_duality_property(self, ph1, ph2):
        r = np.hypot(ph1, ph2)
        if r > 2 * P.kappa:
            ph1, ph2 = ph1 * 0.019 / r, ph2 * 0.019 / r
        sysr = eigensystem(P, ph1, ph2, regularized=True)
        assert np.abs(sysr.lvec @ sysr.rvec.T - np.eye(4)).max() < 1e-10


class TestGradients:
    def test_grad_lambda_matches_fd(self):
        pts = ball_sample(2 * P.kappa, 64, seed=8)
        for ph1, ph2 in pts:
            ga = grad_lambda(P, ph1, ph2)
            gf = grad_lambda_fd(P, ph1, ph2)
            assert np.abs(ga - gf).max() / np.abs(gf).max() < 1e-6

    @pytest.mark.parametrize("regularized", [True, False])
    def test_jacobian_r_matches_fd(self, regularized):
        from elwave.eigen import _jacobians_r

        rng = np.random.default_rng(11)
        for _ in range(24):
            ph1, ph2 = rng.uniform(-0.015, 0.015, 2)
            if not regularized and abs(ph2) < 2e-3:
                continue
            ja = _jacobians_r(P, ph1, ph2, regularized)

            def rv(p1, p2):
                return eigensystem(P, p1, p2, regularized=regularized).rvec

            j1 = fd4(lambda s: rv(s, ph2), ph1)
            j2 = fd4(lambda s: rv(ph1, s), ph2)
            jf = np.stack([j1, j2], axis=-1)  # (4, 4, 2)
            scale = max(np.abs(jf).max(), 1.0)
            assert np.abs(ja - jf).max() / scale < 1e-6


class TestCouplings:
    def test_c111_closed_form_at_zero(self):
        assert c111_closed_form(P, 0.0, 0.0) == pytest.approx(-0.75, abs=1e-14)
        # oracle: FD of eigenvalues contracted with r1
        g = grad_lambda_fd(P, 0.0, 0.0)
        r1 = eigensystem(P, 0.0, 0.0).rvec[0]
        assert g[0] @ r1[:2] == pytest.approx(-0.75, rel=1e-6)

    def test_closed_forms_match_contraction(self):
        pts = ball_sample(2 * P.kappa, 128, seed=9)
        for ph1, ph2 in pts:
            if abs(ph2) < 1e-3:
                continue
            cc = coupling_coeffs(P, ph1, ph2, regularized=False).cc
            assert abs(cc[0, 0] - c111_closed_form(P, ph1, ph2)) < 1e-10
            assert abs(cc[1, 1] - c222_closed_form(P, ph1, ph2)) < 1e-10

    def test_family_antisymmetry(self):
        pts = ball_sample(2 * P.kappa, 128, seed=10)
        cc = coupling_coeffs(P, pts[:, 0], pts[:, 1]).cc
        np.testing.assert_allclose(cc[0, 0], -cc[3, 3], atol=1e-13)
        np.testing.assert_allclose(cc[1, 1], -cc[2, 2], atol=1e-13)

    def test_gamma_finite_through_degeneracy(self):
        # literal-frame gamma^2_13 stays O(1) along phi2 -> 0
        seq = 10.0 ** -np.arange(2, 7.5, 0.5)
        vals = [coupling_coeffs(P, 0.005, s, regularized=False).g2[1, 0, 2]
                for s in seq]
        vals = np.array(vals)
        assert np.all(np.isfinite(vals))
        assert np.abs(vals).max() < 10.0
        # and the regularized frame is finite at phi2 = 0 exactly
        g2 = coupling_coeffs(P, 0.005, 0.0, regularized=True).g2
        assert np.all(np.isfinite(g2))

    def test_empirical_gamma_bound_reported(self):
        # uniform coefficient bound over the ball: finite, order-one scale
        pts = ball_sample(2 * P.kappa, 512, seed=12)
        co = coupling_coeffs(P, pts[:, 0], pts[:, 1])
        gamma_emp = max(np.abs(co.cc).max(), np.abs(co.g1).max(),
                        np.abs(co.g2).max())
        assert np.isfinite(gamma_emp)
        assert gamma_emp < 100.0


class TestMinGapSigma:
    def test_small_ball_limit(self):
        p = PhysParams(c1=2.0, c2=1.0, sigma0=1.0, sigma1=-1.0, kappa=1e-7)
        rep = min_gap_sigma(p, n_base=512)
        assert rep.sigma == pytest.approx(1.0, abs=1e-5)

    def test_preset_kappa_value(self):
        rep = min_gap_sigma(P)
        assert 0.9 < rep.sigma < 1.0
        assert rep.agreement < 1e-3

    def test_gap_closure_rejected(self):
        p = PhysParams(c1=2.0, c2=1.0, sigma0=1.0, sigma1=-1.0, kappa=0.3)
        with pytest.raises((HyperbolicityError, RuntimeError)):
            min_gap_sigma(p, n_base=512)
