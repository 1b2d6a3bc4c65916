"""Closed-form eigenstructure of the planar elastic-wave system.

Under planar symmetry the displacement gradients/velocities
Phi = (phi1, phi2, phi3, phi4) = (dx u1, dx u2, dt u1, dt u2) satisfy
Phi_t + A(Phi) Phi_x = 0 with

    A(Phi) = [[ 0,  0, -1,  0],
              [ 0,  0,  0, -1],
              [-a, -c,  0,  0],
              [-c, -b,  0,  0]],

    a = c1^2 + 2 s0 phi1,  b = c2^2 + 2 s1 phi1,  c = 2 s1 phi2.

With Delta = (a-b)^2 + 4 c^2, the characteristic biquadratic
(lam^2 - a)(lam^2 - b) = c^2 gives the four speeds

    lam1 = sqrt((a+b)/2 + sqrt(Delta)/2) = -lam4,
    lam2 = sqrt((a+b)/2 - sqrt(Delta)/2) = -lam3,

strictly ordered lam4 < lam3 < lam2 < lam1 on the state ball |Phi| < 2 kappa.
Right eigenvectors are taken as

    r_i = (q_i/(2 s1), phi2, -+ lam_i q_i/(2 s1), -+ lam_i phi2),
    q_i = lam_i^2 - b,

(upper sign for families 1, 2; lower for 3, 4; q is q1 for families 1, 4
and q2 for 2, 3) and the left family is the exact dual l_i . r_j = delta_ij,
which fixes the normalizers

    K = (q1^2 + c^2)/(2 s1^2),   N = (q2^2 + c^2)/(2 s1^2).

Everything here is evaluated through the cancellation-free combinations

    q1 = ((a-b) + sqrt(Delta))/2,
    q2 = -2 c^2 / ((a-b) + sqrt(Delta)),

so duality and spectral residuals hold to machine precision even where
q2 = O(phi2^2) underflows the naive subtraction lam2^2 - b.

Families 2, 3 degenerate at phi2 = 0 (r vanishes, l blows up, N -> 0). The
regularized pair (r/phi2, phi2*l) extends continuously through phi2 = 0:
with u = q2/phi2 = -8 s1^2 phi2 / ((a-b) + sqrt(Delta)),

    r2~ = (u/(2 s1), 1, -lam2 u/(2 s1), -lam2),
    l2~ = 2 s1^2/(u^2 + 4 s1^2) * (u/(2 s1), 1, -u/(2 s1 lam2), -1/lam2),

and duality is preserved exactly. All solver-internal decompositions use the
regularized pair; the literal pair is available for |phi2| >= EPS_DEGENERATE.

Interaction coefficients for the transport system along characteristics
(ds_i = lam_i dx + dt):

    c^i_im     = grad_Phi lam_i . r_m
    gamma^i_im = -(lam_i - lam_m) l_i . (Dr_i[r_m] - Dr_m[r_i])
    gamma^i_km = -(lam_k - lam_m) l_i . (Dr_k[r_m]),   k, m != i,

with Dr_k[d] the Jacobian of r_k contracted with direction d. These formulas
hold for any smooth dual eigen-frame, so the regularized frame gives a valid
(and everywhere-finite) transport system. grad_Phi of every frame quantity is
analytic in (phi1, phi2); components 3, 4 vanish identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Literal left eigenvectors are ill-conditioned below this |phi2|.
EPS_DEGENERATE = 1e-8


class HyperbolicityError(ValueError):
    """State left the strict-hyperbolicity ball (lam2^2 <= 0 or gap closed)."""


class DegenerateFrameError(ValueError):
    """Literal family-2/3 eigenvectors requested at |phi2| < EPS_DEGENERATE."""


@dataclass(frozen=True)
class MaterialConstants:
    """Taylor coefficients of the storage energy (stress-free reference)."""

    gamma11: float
    gamma2: float
    gamma111: float = 0.0
    gamma12: float = 0.0

    def __post_init__(self):
        lame_shear = -2.0 * self.gamma2
        lame_first = 4.0 * (self.gamma11 + self.gamma2)
        if lame_shear <= 0.0 or lame_first <= 0.0:
            raise ValueError(
                "Lame positivity violated: need 4(gamma11+gamma2) > 0 and "
                f"-2*gamma2 > 0, got {lame_first:.6g}, {lame_shear:.6g}"
            )


@dataclass(frozen=True)
class PhysParams:
    """Wave speeds and quadratic coupling coefficients of the planar system.

    kappa is the state-ball radius: strict hyperbolicity is relied on for
    |Phi| < 2*kappa and solvers keep |Phi| < kappa.
    """

    c1: float
    c2: float
    sigma0: float
    sigma1: float
    kappa: float = 0.01
    sigma2: float | None = None  # metadata only; planar dynamics never uses it

    def __post_init__(self):
        if not (self.c1 > self.c2 > 0.0):
            raise ValueError(f"need c1 > c2 > 0, got c1={self.c1}, c2={self.c2}")
        if self.sigma0 * self.sigma1 == 0.0:
            raise ValueError("need sigma0*sigma1 != 0")
        if not (0.0 < self.kappa):
            raise ValueError("kappa must be positive")

    def c111_at_zero(self) -> float:
        """Genuine-nonlinearity coefficient of family 1 at the rest state."""
        return self.sigma0 * (self.c1**2 - self.c2**2) / (2.0 * self.sigma1 * self.c1)


def material_to_phys(m: MaterialConstants, kappa: float = 0.01) -> PhysParams:
    """Map storage-energy Taylor coefficients to planar wave parameters."""
    c1 = 2.0 * np.sqrt(m.gamma11)
    c2 = np.sqrt(-2.0 * m.gamma2)
    if not c1 > c2:
        raise ValueError(f"need c1 > c2, got c1={c1:.6g} <= c2={c2:.6g}")
    sigma0 = 6.0 * m.gamma11 + 4.0 * m.gamma111
    sigma1 = 2.0 * (m.gamma11 - m.gamma12)
    sigma2 = 2.0 * (m.gamma2 - 2.0 * m.gamma11 + 4.0 * m.gamma12)
    return PhysParams(c1=c1, c2=c2, sigma0=sigma0, sigma1=sigma1,
                      kappa=kappa, sigma2=sigma2)


def matrix_a(p: PhysParams, state) -> np.ndarray:
    """Coefficient matrix A(Phi) of the first-order system, shape (4, 4)."""
    phi1, phi2 = float(state[0]), float(state[1])
    a = p.c1**2 + 2.0 * p.sigma0 * phi1
    b = p.c2**2 + 2.0 * p.sigma1 * phi1
    c = 2.0 * p.sigma1 * phi2
    return np.array([
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [-a, -c, 0.0, 0.0],
        [-c, -b, 0.0, 0.0],
    ])


def _abc(p: PhysParams, phi1, phi2):
    a = p.c1**2 + 2.0 * p.sigma0 * phi1
    b = p.c2**2 + 2.0 * p.sigma1 * phi1
    c = 2.0 * p.sigma1 * phi2
    return a, b, c


def _core(p: PhysParams, phi1, phi2):
    """Shared scalars: (a, b, c, d, S, q1, q2, lam1, lam2). q2 stable."""
    a, b, c = _abc(p, phi1, phi2)
    d = a - b
    S = np.sqrt(d * d + 4.0 * c * c)
    dpS = d + S
    q1 = 0.5 * dpS
    q2 = -2.0 * c * c / dpS
    lam2sq = b + q2
    bad = np.any(lam2sq <= 0.0) or np.any(dpS <= 0.0)
    if bad:
        raise HyperbolicityError(
            "state outside hyperbolicity ball: lam2^2 <= 0 or a <= b branch"
        )
    lam1 = np.sqrt(b + q1)
    lam2 = np.sqrt(lam2sq)
    return a, b, c, d, S, q1, q2, lam1, lam2


def eigenvalues(p: PhysParams, phi1, phi2) -> np.ndarray:
    """Speeds (lam1, lam2, lam3, lam4), vectorized over states.

    Returns shape (4,) for scalars, (4, n) for arrays.
    """
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    _, _, _, _, _, _, _, lam1, lam2 = _core(p, phi1, phi2)
    return np.stack([lam1, lam2, -lam2, -lam1])


def eigenvalues_state(p: PhysParams, state) -> np.ndarray:
    """Speeds at a single 4-component state."""
    return eigenvalues(p, state[0], state[1])


@dataclass
class EigenSystem:
    """Eigen-frame at one or many states.

    lam has shape (4,) or (4, n); rvec/lvec have shape (4, 4) or (4, 4, n)
    indexed [family, component]. Rows of lvec are exact duals of rvec.
    """

    lam: np.ndarray
    rvec: np.ndarray
    lvec: np.ndarray
    K: np.ndarray
    N: np.ndarray
    regularized: bool


def eigensystem(p: PhysParams, phi1, phi2, regularized: bool = True) -> EigenSystem:
    """Right/left eigen-frame, vectorized over states.

    regularized=True replaces families 2, 3 by (r/phi2, phi2*l), continuous
    through phi2 = 0. regularized=False is the literal frame and raises
    DegenerateFrameError when any |phi2| < EPS_DEGENERATE.
    """
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    a, b, c, d, S, q1, q2, lam1, lam2 = _core(p, phi1, phi2)
    s1 = p.sigma1
    two_s1 = 2.0 * s1
    shape = np.broadcast(phi1, phi2).shape
    one = np.ones(shape) if shape else 1.0
    zero = np.zeros(shape) if shape else 0.0

    K = (q1 * q1 + c * c) / (2.0 * s1 * s1)
    r1 = np.stack([q1 / two_s1, phi2 * one, -lam1 * q1 / two_s1, -lam1 * phi2])
    r4 = np.stack([q1 / two_s1, phi2 * one, lam1 * q1 / two_s1, lam1 * phi2])
    l1 = np.stack([q1 / two_s1, phi2 * one, -q1 / (two_s1 * lam1),
                   -phi2 / lam1]) / K
    l4 = np.stack([q1 / two_s1, phi2 * one, q1 / (two_s1 * lam1),
                   phi2 / lam1]) / K

    if regularized:
        u = -8.0 * s1 * s1 * phi2 / (d + S)  # q2/phi2, smooth through phi2=0
        den = u * u + 4.0 * s1 * s1          # 2 s1^2 N / phi2^2
        r2 = np.stack([u / two_s1, one + zero, -lam2 * u / two_s1, -lam2 * one])
        r3 = np.stack([u / two_s1, one + zero, lam2 * u / two_s1, lam2 * one])
        scale = 2.0 * s1 * s1 / den
        l2 = scale * np.stack([u / two_s1, one + zero, -u / (two_s1 * lam2),
                               -one / lam2])
        l3 = scale * np.stack([u / two_s1, one + zero, u / (two_s1 * lam2),
                               one / lam2])
        N = (q2 * q2 + c * c) / (2.0 * s1 * s1)
    else:
        if np.any(np.abs(phi2) < EPS_DEGENERATE):
            raise DegenerateFrameError(
                "literal family-2/3 eigenvectors degenerate at phi2 ~ 0; "
                "use regularized=True"
            )
        N = (q2 * q2 + c * c) / (2.0 * s1 * s1)
        r2 = np.stack([q2 / two_s1, phi2 * one, -lam2 * q2 / two_s1, -lam2 * phi2])
        r3 = np.stack([q2 / two_s1, phi2 * one, lam2 * q2 / two_s1, lam2 * phi2])
        l2 = np.stack([q2 / two_s1, phi2 * one, -q2 / (two_s1 * lam2),
                       -phi2 / lam2]) / N
        l3 = np.stack([q2 / two_s1, phi2 * one, q2 / (two_s1 * lam2),
                       phi2 / lam2]) / N

    lam = np.stack([lam1, lam2, -lam2, -lam1])
    rvec = np.stack([r1, r2, r3, r4])
    lvec = np.stack([l1, l2, l3, l4])
    return EigenSystem(lam=lam, rvec=rvec, lvec=lvec, K=np.asarray(K),
                       N=np.asarray(N), regularized=regularized)


def grad_lambda(p: PhysParams, phi1, phi2) -> np.ndarray:
    """Analytic (d lam_i / d phi1, d lam_i / d phi2); components 3,4 vanish.

    Shape (4, 2) or (4, 2, n).
    """
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    a, b, c, d, S, q1, q2, lam1, lam2 = _core(p, phi1, phi2)
    s0, s1 = p.sigma0, p.sigma1
    d1 = 2.0 * (s0 - s1)  # d(a-b)/dphi1
    # dq/dphi1 = +-d1 q / S;  dq1/dphi2 = 4 s1 c / S = -dq2/dphi2
    dq1_1 = d1 * q1 / S
    dq2_1 = -d1 * q2 / S
    dq_2 = 4.0 * s1 * c / S
    g1 = np.stack([(2.0 * s1 + dq1_1) / (2.0 * lam1), dq_2 / (2.0 * lam1)])
    g2 = np.stack([(2.0 * s1 + dq2_1) / (2.0 * lam2), -dq_2 / (2.0 * lam2)])
    return np.stack([g1, g2, -g2, -g1])


def _jacobians_r(p: PhysParams, phi1, phi2, regularized: bool):
    """Jacobians dr_k/d(phi1, phi2): shape (4, 4, 2) or (4, 4, 2, n)."""
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    a, b, c, d, S, q1, q2, lam1, lam2 = _core(p, phi1, phi2)
    s0, s1 = p.sigma0, p.sigma1
    two_s1 = 2.0 * s1
    d1 = 2.0 * (s0 - s1)
    shape = np.broadcast(phi1, phi2).shape
    one = np.ones(shape) if shape else 1.0
    zero = np.zeros(shape) if shape else 0.0

    dq1 = np.stack([d1 * q1 / S, 4.0 * s1 * c / S])           # (2,...)
    dq2 = np.stack([-d1 * q2 / S, -4.0 * s1 * c / S])
    dlam1 = np.stack([(2.0 * s1 + dq1[0]) / (2.0 * lam1),
                      dq1[1] / (2.0 * lam1)])
    dlam2 = np.stack([(2.0 * s1 + dq2[0]) / (2.0 * lam2),
                      dq2[1] / (2.0 * lam2)])
    dphi2 = np.stack([zero + 0.0 * one, one + zero])          # grad of phi2

    def jac(q, dq, lam, dlam, sgn, second_comp, dsecond):
        # r = (q/2s1, second, sgn*lam*q/2s1, sgn*lam*second)
        row0 = dq / two_s1
        row1 = dsecond
        row2 = sgn * (dlam * q + lam * dq) / two_s1
        row3 = sgn * (dlam * second_comp + lam * dsecond)
        return np.stack([row0, row1, row2, row3])

    if regularized:
        dpS = d + S
        u = -8.0 * s1 * s1 * phi2 / dpS
        dS = np.stack([d1 * d / S, 8.0 * s1 * c / S])
        du0 = -u * (d1 + dS[0]) / dpS
        du1 = -8.0 * s1 * s1 / dpS - u * dS[1] / dpS
        du = np.stack([du0, du1])
        done = np.stack([zero + 0.0 * one, zero + 0.0 * one])
        j2 = jac(u, du, lam2, dlam2, -1.0, one + zero, done)
        j3 = jac(u, du, lam2, dlam2, +1.0, one + zero, done)
    else:
        j2 = jac(q2, dq2, lam2, dlam2, -1.0, phi2 * one, dphi2)
        j3 = jac(q2, dq2, lam2, dlam2, +1.0, phi2 * one, dphi2)
    j1 = jac(q1, dq1, lam1, dlam1, -1.0, phi2 * one, dphi2)
    j4 = jac(q1, dq1, lam1, dlam1, +1.0, phi2 * one, dphi2)
    return np.stack([j1, j2, j3, j4])


@dataclass
class CouplingCoeffs:
    """Interaction coefficients of the transport system at given states.

    cc[i, m]    = grad lam_i . r_m          (cc[i, i] is the Lax coefficient)
    g1[i, m]    = gamma^i_im  (m != i; diagonal zeroed)
    g2[i, k, m] = gamma^i_km  (k, m != i; i-slices zeroed)

    Shapes (4, 4[, n]) and (4, 4, 4[, n]). regularized marks the frame used.
    """

    cc: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    regularized: bool


def coupling_coeffs(p: PhysParams, phi1, phi2,
                    regularized: bool = True) -> CouplingCoeffs:
    """Speed-gradient and eigenvector-interaction coefficients.

    All values are finite on the hyperbolicity ball; with the regularized
    frame they are finite through phi2 = 0 as well.
    """
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    sys = eigensystem(p, phi1, phi2, regularized=regularized)
    glam = grad_lambda(p, phi1, phi2)          # (4, 2, ...)
    jr = _jacobians_r(p, phi1, phi2, regularized)  # (4, 4, 2, ...)
    lam, R, L = sys.lam, sys.rvec, sys.lvec

    # directions use only components 1, 2 of r_m (gradients vanish in 3, 4)
    cc = np.einsum('ic...,mc...->im...', glam, R[:, :2])
    # Dr_k[r_m]: (k, m, component, ...)
    drkm = np.einsum('kac...,mc...->kma...', jr, R[:, :2])
    # g2[i, k, m] = -(lam_k - lam_m) * l_i . Dr_k[r_m]
    ldr = np.einsum('ia...,kma...->ikm...', L, drkm)
    lam_diff = lam[:, None, ...] - lam[None, :, :, ...] if lam.ndim > 1 else \
        lam[:, None] - lam[None, :]
    g2 = -lam_diff[None, ...] * ldr
    # g1[i, m] = -(lam_i - lam_m) * l_i . (Dr_i[r_m] - Dr_m[r_i])
    anti = np.einsum('ia...,ima...->im...', L, drkm) - \
        np.einsum('ia...,mia...->im...', L, drkm)
    g1 = -lam_diff * anti

    idx = np.arange(4)
    g1[idx, idx] = 0.0
    for i in range(4):
        g2[i, i, :] = 0.0
        g2[i, :, i] = 0.0
    return CouplingCoeffs(cc=cc, g1=g1, g2=g2, regularized=regularized)


def transport_coeffs(p: PhysParams, family: int, phi1, phi2):
    """Coefficients needed by the family-i transport system (regularized).

    Returns (lam_i, cc_i, g1_i, g2_i): the family speed, the row
    c^i_m = grad lam_i . r_m (m = 0..3), gamma^i_im (zero at m = i), and
    gamma^i_km (zero where k = i, m = i or k = m). Equivalent to slicing
    coupling_coeffs but evaluated with direct contractions.
    """
    i = family - 1
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    sys = eigensystem(p, phi1, phi2, regularized=True)
    glam = grad_lambda(p, phi1, phi2)
    jr = _jacobians_r(p, phi1, phi2, True)
    R, L, lam = sys.rvec, sys.lvec, sys.lam
    li = L[i]
    shape = phi1.shape if phi1.shape else phi2.shape

    cc_i = np.empty((4,) + shape)
    for m in range(4):
        cc_i[m] = glam[i, 0] * R[m, 0] + glam[i, 1] * R[m, 1]

    def dr(k, m):
        # l_i . (Dr_k[r_m]) without materializing the 4-vector
        acc = 0.0
        for a in range(4):
            acc = acc + li[a] * (jr[k, a, 0] * R[m, 0] + jr[k, a, 1] * R[m, 1])
        return acc

    others = [m for m in range(4) if m != i]
    g1_i = np.zeros((4,) + shape)
    for m in others:
        g1_i[m] = -(lam[i] - lam[m]) * (dr(i, m) - dr(m, i))
    g2_i = np.zeros((4, 4) + shape)
    for k in others:
        for m in others:
            if k == m:
                continue
            g2_i[k, m] = -(lam[k] - lam[m]) * dr(k, m)
    return lam[i], cc_i, g1_i, g2_i


def c111_closed_form(p: PhysParams, phi1, phi2) -> np.ndarray:
    """Explicit c^1_11(Phi) = [2 s0 (a-b) q1 + (2 s0 + 6 s1) c^2]/(4 s1 lam1 sqrt(Delta)).

    Equals grad lam1 . r1 to round-off (and -c^4_44 by symmetry).
    """
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    a, b, c, d, S, q1, q2, lam1, lam2 = _core(p, phi1, phi2)
    s0, s1 = p.sigma0, p.sigma1
    return (2.0 * s0 * d * q1 + (2.0 * s0 + 6.0 * s1) * c * c) / \
        (4.0 * s1 * lam1 * S)


def c222_closed_form(p: PhysParams, phi1, phi2) -> np.ndarray:
    """Explicit c^2_22(Phi) = -[2 s0 (a-b) q2 + (2 s0 + 6 s1) c^2]/(4 s1 lam2 sqrt(Delta)).

    Equals grad lam2 . r2 (literal frame) to round-off and -c^3_33.
    """
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    a, b, c, d, S, q1, q2, lam1, lam2 = _core(p, phi1, phi2)
    s0, s1 = p.sigma0, p.sigma1
    return -(2.0 * s0 * d * q2 + (2.0 * s0 + 6.0 * s1) * c * c) / \
        (4.0 * s1 * lam2 * S)


def ball_sample(radius: float, n: int, dim: int = 2, seed: int = 0) -> np.ndarray:
    """Low-discrepancy (Sobol) sample of the closed disk/ball, shape (n, dim).

    Deterministic for fixed inputs; used for speed extrema and invariant
    sampling. Speeds depend on Phi only through (phi1, phi2), so dim=2
    covers the 4-ball extrema exactly.
    """
    from scipy.stats import qmc

    eng = qmc.Sobol(d=dim, scramble=True, seed=seed)
    batch = 1 << max(4, int(np.ceil(np.log2(max(n, 2) * 1.8))))
    pts = eng.random(batch) * 2.0 - 1.0
    pts = pts[np.sum(pts * pts, axis=1) <= 1.0]
    while len(pts) < n:  # rare top-up, keeps draws power-of-two
        extra = eng.random(batch) * 2.0 - 1.0
        extra = extra[np.sum(extra * extra, axis=1) <= 1.0]
        pts = np.concatenate([pts, extra])
    return radius * pts[:n]


@dataclass
class SigmaReport:
    """Uniform strict-hyperbolicity gap over the state ball."""

    sigma: float
    resolutions: tuple[int, int]
    agreement: float
    per_pair: dict = field(default_factory=dict)


def min_gap_sigma(p: PhysParams, n_base: int = 4096, seed: int = 0,
                  tol: float = 1e-3) -> SigmaReport:
    """min over i<j of (inf lam_i - sup lam_j) on the ball |Phi| <= 2 kappa.

    Extrema are taken over a dense low-discrepancy sample of the
    (phi1, phi2) disk of radius 2 kappa (the speeds do not depend on
    phi3, phi4) at two resolutions, with an agreement check.
    """
    radius = 2.0 * p.kappa
    vals = []
    for n in (n_base, 4 * n_base):
        pts = ball_sample(radius, n, dim=2, seed=seed)
        # include the boundary circle and the center explicitly
        ang = np.linspace(0.0, 2.0 * np.pi, 256, endpoint=False)
        ring = radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        pts = np.concatenate([pts, ring, [[0.0, 0.0]]])
        lam = eigenvalues(p, pts[:, 0], pts[:, 1])  # (4, npts)
        lo = lam.min(axis=1)
        hi = lam.max(axis=1)
        gaps = {(i, j): lo[i] - hi[j] for i in range(4) for j in range(i + 1, 4)}
        vals.append((min(gaps.values()), gaps))
    sigma_coarse, _ = vals[0]
    sigma_fine, gaps = vals[1]
    agreement = abs(sigma_fine - sigma_coarse)
    if agreement > tol * max(abs(sigma_fine), 1e-30):
        raise RuntimeError(
            f"sigma sampling did not converge: {sigma_coarse} vs {sigma_fine}"
        )
    if sigma_fine <= 0.0:
        raise HyperbolicityError(
            f"eigenvalue gap closed on the 2*kappa ball (sigma={sigma_fine:.3g}); "
            "kappa too large"
        )
    return SigmaReport(sigma=float(sigma_fine),
                       resolutions=(n_base, 4 * n_base),
                       agreement=float(agreement),
                       per_pair={f"{i+1},{j+1}": float(v)
                                 for (i, j), v in gaps.items()})


def lambda_max_bound(p: PhysParams, ball_radius: float | None = None,
                     n: int = 2048) -> float:
    """Upper bound for max |lam_i| over the state ball (CFL sizing)."""
    r = 2.0 * p.kappa if ball_radius is None else ball_radius
    pts = ball_sample(r, n, dim=2, seed=7)
    lam = eigenvalues(p, pts[:, 0], pts[:, 1])
    return float(np.abs(lam).max() * 1.001 + 1e-12)
