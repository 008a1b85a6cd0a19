"""Closed-form distortions of observed Wigner functions.

The observed Wigner function is the input smeared by the kernel

    kappa(q0, p0; q, p) = 2 / (rho0^2 pi dx^2 eta) exp(-2 |z0 eta - z|^2 / (rho0^2 dx^2 eta)),

where rho0^2 = q0^2 + p0^2, dx = 1/gamma0 and eta is the detector efficiency.
The peak width grows with distance from the origin.  This module collects the
closed forms for coherent, Fock and squeezed inputs, plus numerical kernel
application used to cross-check them.

Closed forms take rescaled coordinates (q', p') = (q, p)/eta unless stated.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .gaussian_core import mode_vector, projectors
from .states import CONTOUR_NODES, CONTOUR_RADIUS, SqueezeSpec, contour_nodes
from .tomography import WignerGrid

WEAK_SQUEEZING_THRESHOLD = 0.3
ORIGIN_MASS_WARN = 1e-3


@dataclass(frozen=True)
class KernelParams:
    dx: float
    eta: float = 1.0

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError("dx must be positive")
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")

    @classmethod
    def from_gamma0(cls, gamma0: float, eta: float = 1.0) -> "KernelParams":
        return cls(1.0 / gamma0, eta)


@dataclass(frozen=True)
class MismatchSpec:
    """Overlap mu of the state mode with the LO mode; nu is taken real and non-negative."""

    mu: complex

    def __post_init__(self):
        if abs(self.mu) > 1 + 1e-12:
            raise ValueError("|mu| must not exceed 1")

    @property
    def mu2(self) -> float:
        return min(abs(self.mu) ** 2, 1.0)

    @property
    def nu(self) -> float:
        return math.sqrt(1.0 - self.mu2)

    @property
    def omega(self) -> float:
        return 2.0 * self.mu2 - 1.0


def unscale(fn, eta: float):
    """Undo the eta rescaling: W(q, p) = W'(q/eta, p/eta)/eta^2."""
    return lambda q, p: fn(np.asarray(q) / eta, np.asarray(p) / eta) / eta**2


# --- the kernel -------------------------------------------------------------------------


def kappa(q0, p0, q, p, kp: KernelParams):
    q0, p0 = np.asarray(q0, float), np.asarray(p0, float)
    rho2 = q0**2 + p0**2
    if np.any(rho2 == 0):
        raise ValueError("kernel singular at origin")
    s2 = rho2 * kp.dx**2 * kp.eta
    return 2.0 / (np.pi * s2) * np.exp(-2.0 * ((q0 * kp.eta - q) ** 2 + (p0 * kp.eta - p) ** 2) / s2)


def kappa_approx(q0, p0, q, p, kp: KernelParams):
    """Kernel with rho0^2 replaced by (q^2 + p^2)/eta^2."""
    rho2 = (np.asarray(q, float) ** 2 + np.asarray(p, float) ** 2) / kp.eta**2
    s2 = rho2 * kp.dx**2 * kp.eta
    return 2.0 / (np.pi * s2) * np.exp(-2.0 * ((q0 * kp.eta - q) ** 2 + (p0 * kp.eta - p) ** 2) / s2)


def _as_closure(W0):
    if callable(W0):
        return W0
    if isinstance(W0, WignerGrid):
        spline = RectBivariateSpline(W0.q, W0.p, W0.values, kx=3, ky=3)
        qlo, qhi, plo, phi_ = W0.q[0], W0.q[-1], W0.p[0], W0.p[-1]

        def fn(q, p):
            q, p = np.asarray(q, float), np.asarray(p, float)
            out = spline.ev(q, p)
            return np.where((q >= qlo) & (q <= qhi) & (p >= plo) & (p <= phi_), out, 0.0)

        return fn
    raise TypeError("W0 must be a WignerGrid or a callable of (q, p)")


def _axes(W0, q, p):
    if q is None:
        q = W0.q if isinstance(W0, WignerGrid) else np.linspace(-6, 6, 241)
    if p is None:
        p = W0.p if isinstance(W0, WignerGrid) else q
    return np.asarray(q, float), np.asarray(p, float)


def approx_convolve(W0, kp: KernelParams, q=None, p=None, nodes: int = 20) -> WignerGrid:
    """Apply the approximate kernel: a Gaussian of variance rho^2 dx^2/(4 eta^3) per axis around z/eta.

    Evaluated by Gauss-Hermite quadrature, which is exact at the origin where the
    kernel collapses to a point.
    """
    fn = _as_closure(W0)
    q, p = _axes(W0, q, p)
    Q, P = np.meshgrid(q, p, indexing="ij")
    t, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / np.sqrt(2 * np.pi)
    sd = np.hypot(Q, P) * kp.dx / (2.0 * kp.eta**1.5)
    acc = np.zeros(Q.shape)
    for ta, wa in zip(t, w):
        for tb, wb in zip(t, w):
            acc += wa * wb * fn(Q / kp.eta + sd * ta, P / kp.eta + sd * tb)
    return WignerGrid(q, p, acc / kp.eta**2, metadata={"operation": "approx_convolve", "dx": kp.dx, "eta": kp.eta})


def superpose(W0, kp: KernelParams, q=None, p=None, *, eps_factor: float = 3.0, nodes: int = 48, chunk: int = 1024) -> WignerGrid:
    """W'(q, p) = integral of kappa(q0, p0; q, p) W0(q0, p0) over the plane minus a disk around the origin.

    The disk has radius eps_factor * dx.  Each output point integrates over a
    window around (q, p)/eta that holds the kernel peak, with Gauss-Legendre nodes.
    """
    fn = _as_closure(W0)
    q, p = _axes(W0, q, p)
    eps = eps_factor * kp.dx
    _origin_mass_check(fn, eps, q, p)
    Q, P = np.meshgrid(q, p, indexing="ij")
    cq, cp = Q.ravel() / kp.eta, P.ravel() / kp.eta
    rho_c = np.hypot(cq, cp)
    rel = kp.dx / (2.0 * math.sqrt(kp.eta))
    if 9.0 * rel >= 1.0:
        raise ValueError("dx too large for the local kernel window")
    half = 9.0 * rel * rho_c / (1.0 - 9.0 * rel)
    t, w = np.polynomial.legendre.leggauss(nodes)
    out = np.zeros(cq.size)
    for start in range(0, cq.size, chunk):
        sl = slice(start, start + chunk)
        h = half[sl][:, None, None]
        q0 = cq[sl][:, None, None] + h * t[None, :, None]
        p0 = cp[sl][:, None, None] + h * t[None, None, :]
        rho0 = np.hypot(q0, p0)
        live = rho0 >= eps
        with np.errstate(divide="ignore", invalid="ignore"):
            k = kappa(np.where(live, q0, 1.0), np.where(live, p0, 0.0), Q.ravel()[sl][:, None, None], P.ravel()[sl][:, None, None], kp)
        vals = np.where(live, k * fn(q0, p0), 0.0)
        out[sl] = np.einsum("nab,a,b->n", vals, w, w) * half[sl] ** 2
    return WignerGrid(q, p, out.reshape(Q.shape), metadata={"operation": "superpose", "dx": kp.dx, "eta": kp.eta, "eps": eps})


def _origin_mass_check(fn, eps, q, p):
    r, wr = np.polynomial.legendre.leggauss(24)
    r = 0.5 * eps * (r + 1)
    wr = 0.5 * eps * wr
    ang = 2 * np.pi * np.arange(48) / 48
    R, A = np.meshgrid(r, ang, indexing="ij")
    disk = np.sum(np.abs(fn(R * np.cos(A), R * np.sin(A))) * (wr * r)[:, None]) * (2 * np.pi / 48)
    Q, P = np.meshgrid(q, p, indexing="ij")
    total = np.trapezoid(np.trapezoid(np.abs(fn(Q, P)), p, axis=1), q)
    if total > 0 and disk / total > ORIGIN_MASS_WARN:
        warnings.warn(f"origin-singular contribution significant: excluded disk holds {disk / total:.2e} of |W0|", RuntimeWarning)
    return disk / total if total > 0 else 0.0


# --- coherent states ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianWigner:
    """2/(1 + dw) exp(-2 |alpha' - alpha1|^2 / (1 + dw)) in rescaled coordinates."""

    alpha1: complex
    dw: float
    eta: float = 1.0

    def __call__(self, q, p):
        q1, p1 = math.sqrt(2) * self.alpha1.real, math.sqrt(2) * self.alpha1.imag
        s = 1.0 + self.dw
        return 2.0 / s * np.exp(-((np.asarray(q) - q1) ** 2 + (np.asarray(p) - p1) ** 2) / s)

    def observed(self, q, p):
        """Same function before the eta rescaling, as reconstructed."""
        return unscale(self, self.eta)(q, p)

    @property
    def purity(self) -> float:
        return 1.0 / (1.0 + self.dw)

    @property
    def sigma(self) -> float:
        return math.sqrt((1.0 + self.dw) / 2.0)


def coherent_bucket_observed(phi, Gamma, kp: KernelParams) -> GaussianWigner:
    """Width inflation driven by the photons outside the LO mode: dw = |Q phi|^2 dx^2 / eta."""
    phi = mode_vector(phi)
    P, Q = projectors(Gamma)
    alpha1 = complex(np.vdot(Gamma, phi))
    out = Q @ phi
    return GaussianWigner(alpha1, float(np.vdot(out, out).real) * kp.dx**2 / kp.eta, kp.eta)


def coherent_single_mode_observed(phi, Gamma, kp: KernelParams) -> GaussianWigner:
    """Width inflation driven by the in-mode photons, dw = |alpha1|^2 dx^2 / eta."""
    phi = mode_vector(phi)
    Gamma = mode_vector(Gamma, phi.shape[0], normalized=True)
    alpha1 = complex(np.vdot(Gamma, phi))
    return GaussianWigner(alpha1, abs(alpha1) ** 2 * kp.dx**2 / kp.eta, kp.eta)


# --- Fock states ---------------------------------------------------------------------------------


def laguerre(n: int, x):
    """L_n(x) by the three-term recurrence."""
    if n < 0:
        raise ValueError("order must be >= 0")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), 1.0 - x
    if n == 0:
        return prev if prev.ndim else float(prev)
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def fock_traced_generating(mu: MismatchSpec, J):
    """Generating function over n of the LO-mode part of the n-photon state; returns f(|alpha0|^2)."""
    den = 1.0 + J * mu.omega
    if den == 0:
        raise ZeroDivisionError("pole at 1 + J omega = 0")

    def fn(abs_alpha_sq):
        a2 = np.asarray(abs_alpha_sq)
        return 2.0 * np.exp(-2.0 * a2) / den * np.exp(4.0 * J * mu.mu2 * a2 / den)

    return fn


def fock_observed_wigner(n: int, mu: MismatchSpec, eta: float = 1.0, *, normalized: bool = True):
    """Observed n-photon Wigner function in rescaled coordinates.

    Equals (1 - 2|mu|^2)^n exp(-2|a|^2) L_n(4|mu|^2 |a|^2/(2|mu|^2 - 1)) times 2 when
    ``normalized``.  Near |mu|^2 = 1/2 the product is expanded as a polynomial.
    """
    if n < 0:
        raise ValueError("photon number must be >= 0")
    m2 = mu.mu2
    d = 1.0 - 2.0 * m2
    pref = 2.0 if normalized else 1.0

    def fn(q, p):
        a2 = (np.asarray(q, float) ** 2 + np.asarray(p, float) ** 2) / 2.0
        if abs(d) > 1e-3:
            poly = d**n * laguerre(n, 4.0 * m2 * a2 / (-d))
        else:
            y = 4.0 * m2 * a2
            poly = sum(math.comb(n, k) * y**k * d ** (n - k) / math.factorial(k) for k in range(n + 1))
        return pref * poly * np.exp(-2.0 * a2)

    fn.observed = unscale(fn, eta)
    return fn


def fock_observed_generating(abs_alpha_sq, J, mu: MismatchSpec, kp: KernelParams):
    """Generating function of the kernel-smeared Fock states, before rescaling, in |alpha|^2."""
    a2 = np.asarray(abs_alpha_sq, float)
    eta3 = kp.eta**3
    den = (1.0 + J * mu.omega) * eta3 + (1.0 - J) * a2 * kp.dx**2
    return 2.0 * kp.eta / den * np.exp(-2.0 * (1.0 - J) * kp.eta * a2 / den)


def fock_observed_smeared(n: int, mu: MismatchSpec, kp: KernelParams, nodes: int = CONTOUR_NODES, radius: float = CONTOUR_RADIUS):
    """n-th coefficient of ``fock_observed_generating`` as a closure of (q, p), before rescaling."""
    Js = contour_nodes(nodes, radius)

    def fn(q, p):
        a2 = (np.asarray(q, float) ** 2 + np.asarray(p, float) ** 2) / 2.0
        acc = sum(fock_observed_generating(a2, J, mu, kp) * J ** (-n) for J in Js) / nodes
        return acc.real

    return fn


def _marginal_generating(q, J, mu: MismatchSpec, naive: bool):
    q2 = np.asarray(q, float) ** 2
    m2 = mu.mu2
    if naive:
        return np.exp(-q2 + 2 * J * m2 * q2 / (1 + J)) / np.sqrt(np.pi * (1 + J) * (1 - J * mu.omega))
    return np.exp(-q2 + 2 * J * m2 * q2 / (1 + J * mu.omega)) / np.sqrt(np.pi * (1 - J) * (1 + J * mu.omega))


@dataclass(frozen=True)
class FockMarginals:
    correct: object
    naive: object


def fock_marginals(mu: MismatchSpec, n: int = 1, nodes: int = CONTOUR_NODES, radius: float = CONTOUR_RADIUS) -> FockMarginals:
    """Quadrature marginals of the observed n-photon state and of its naive counterpart."""
    m2 = mu.mu2
    if n == 1:
        return FockMarginals(
            lambda q: np.exp(-np.asarray(q) ** 2) / np.sqrt(np.pi) * (2 * m2 * np.asarray(q) ** 2 + 1 - m2),
            lambda q: np.exp(-np.asarray(q) ** 2) / np.sqrt(np.pi) * (2 * m2 * np.asarray(q) ** 2 - 1 + m2),
        )
    Js = contour_nodes(nodes, radius)

    def coeff(naive):
        # the generating functions carry 1/(1 - J)-type sums; coefficient of J^n directly
        return lambda q: (sum(_marginal_generating(q, J, mu, naive) * J ** (-n) for J in Js) / nodes).real

    return FockMarginals(coeff(False), coeff(True))


def fock_marginal_generating(q, J, mu: MismatchSpec, *, naive: bool = False):
    return _marginal_generating(q, J, mu, naive)


# --- squeezed vacuum ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class SqueezeSeparation:
    U: np.ndarray
    V: np.ndarray
    A_q: np.ndarray
    B_qq: np.ndarray
    gA: complex
    gB: complex

    @property
    def gE(self) -> complex:
        return self.gA - 1.0


def squeezed_separation(spec: SqueezeSpec, Gamma) -> SqueezeSeparation:
    """Split the squeezing kernels into the LO mode and its complement."""
    A, B = spec.kernels()
    m = A.shape[0]
    Gamma = mode_vector(Gamma, m, normalized=True)
    _, Q = projectors(Gamma)
    E = A - np.eye(m)
    U = Q @ E @ Gamma
    V = Q @ B @ Gamma.conj()
    A_q = np.eye(m) + Q @ E @ Q
    B_qq = Q @ B @ Q.conj()
    gA = complex(Gamma.conj() @ A @ Gamma)
    gB = complex(Gamma.conj() @ B @ Gamma.conj())
    return SqueezeSeparation(U, V, A_q, B_qq, gA, gB)


@dataclass(frozen=True)
class SqueezeDistortion:
    """Overlaps and trace-induced coefficients of a squeezed vacuum seen through the LO mode.

    The complement trace multiplies the LO-mode part by
    n_beta exp(2|a0|^2 hA + conj(a0)^2 hB + a0^2 conj(hB)).
    """

    gA: complex
    gB: complex
    gU: float
    gV: float
    hA: complex
    hB: complex
    n_beta: float
    psi_u: np.ndarray
    psi_v: np.ndarray

    @property
    def gE(self) -> complex:
        return self.gA - 1.0

    @property
    def a_eff(self) -> float:
        return float((self.gA - self.hA).real)

    @property
    def b_eff(self) -> complex:
        return self.gB - self.hB

    @property
    def gC(self) -> float:
        a = self.a_eff
        return (a * a - abs(self.b_eff) ** 2) / (2 * a)

    def gD(self, abs_alpha_sq, dx2: float):
        """``dx2`` is the kernel variance scale, dx^2/eta in rescaled coordinates."""
        return 1.0 + 2.0 * np.asarray(abs_alpha_sq) * self.a_eff * dx2


def squeezed_trace_coeffs(sep: SqueezeSeparation) -> SqueezeDistortion:
    """Trace over the complement of the LO mode in closed form."""
    A_inv = np.linalg.inv(sep.A_q)
    K = sep.A_q.conj() - sep.B_qq.conj() @ A_inv @ sep.B_qq
    if abs(np.linalg.det(K)) < 1e-14:
        raise np.linalg.LinAlgError("singular squeezed-trace kernel")
    K_inv = np.linalg.inv(K)
    U, V = sep.U, sep.V
    psi_u = sep.B_qq.conj() @ A_inv @ U - V.conj()
    psi_v = sep.B_qq.conj() @ A_inv @ V - U.conj()
    total = U.conj() @ A_inv @ U + V.conj() @ A_inv @ V + psi_u.conj() @ K_inv @ psi_u + psi_v.conj() @ K_inv @ psi_v
    hB = U.conj() @ A_inv @ V + psi_u.conj() @ K_inv @ psi_v
    n_beta = (np.linalg.det(sep.A_q) * np.linalg.det(K)) ** -0.5
    return SqueezeDistortion(
        sep.gA,
        sep.gB,
        float(np.linalg.norm(U)),
        float(np.linalg.norm(V)),
        complex(0.5 * total),
        complex(hB),
        float(n_beta.real),
        psi_u,
        psi_v,
    )


def gv2_second_order(gA, gB) -> float:
    """2 g_E - |g_B|^2, the second-order estimate of |g_V|^2; O(xi^4) and of either sign."""
    return float(2.0 * (complex(gA).real - 1.0) - abs(gB) ** 2)


def weak_squeezing_gv2(gA, gB, xi: float) -> float:
    """|g_V|^2 for the weak-squeezing branch: neglected below the threshold."""
    if xi < WEAK_SQUEEZING_THRESHOLD:
        return 0.0
    return gv2_second_order(gA, gB)


def squeezed_observed(coeffs: SqueezeDistortion, kp: KernelParams | None = None):
    """Observed squeezed-vacuum Wigner function in rescaled coordinates; Delta x^4 terms dropped."""
    a, b = coeffs.a_eff, coeffs.b_eff
    if not a > abs(b):
        raise ValueError("unphysical distortion coefficients")
    dx2 = 0.0 if kp is None else kp.dx**2 / kp.eta
    gC = coeffs.gC

    def fn(q, p):
        alpha = (np.asarray(q, float) + 1j * np.asarray(p, float)) / math.sqrt(2)
        a2 = np.abs(alpha) ** 2
        gD = coeffs.gD(a2, dx2)
        cross = (np.conj(alpha) ** 2 * b + alpha**2 * np.conj(b)).real
        expo = -2 * a2 * gC - 2 * a2 * (a - gC) / gD - cross / gD
        return 2 * coeffs.n_beta / np.sqrt(gD) * np.exp(expo)

    return fn


def single_mode_squeezed_observed(xi: float, mu: MismatchSpec):
    """Observed Wigner function of single-mode squeezed vacuum in mode mu Gamma + nu Lambda."""
    if xi < 0:
        raise ValueError("squeezing parameter must be >= 0")
    m2 = mu.mu2
    s2 = math.sinh(xi / 2) ** 2
    den = 1.0 + 4.0 * m2 * (1.0 - m2) * s2
    cA = (1.0 + 2.0 * m2 * s2) / den
    cB = complex(mu.mu) ** 2 * math.sinh(xi) / den

    def fn(q, p):
        alpha = (np.asarray(q, float) + 1j * np.asarray(p, float)) / math.sqrt(2)
        cross = (np.conj(alpha) ** 2 * cB + alpha**2 * np.conj(cB)).real
        return 2.0 / math.sqrt(den) * np.exp(-2 * np.abs(alpha) ** 2 * cA - cross)

    return fn


def naive_squeezed(gA: float, gB: complex):
    """Squeezed vacuum seen with no mode mismatch: 2 exp(-2|a|^2 gA - conj(a)^2 gB - a^2 conj(gB))."""

    def fn(q, p):
        alpha = (np.asarray(q, float) + 1j * np.asarray(p, float)) / math.sqrt(2)
        cross = (np.conj(alpha) ** 2 * gB + alpha**2 * np.conj(gB)).real
        return 2.0 * np.exp(-2 * np.abs(alpha) ** 2 * gA - cross)

    return fn


def purity(xi, mu: MismatchSpec):
    m2 = mu.mu2
    return (1.0 + 4.0 * m2 * (1.0 - m2) * np.sinh(np.asarray(xi) / 2) ** 2) ** -0.5


def sigma_min(xi, mu: MismatchSpec):
    m2 = mu.mu2
    return np.sqrt(1.0 - m2 + m2 * np.exp(-np.asarray(xi))) / math.sqrt(2)


# --- grid statistics -----------------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentStats:
    normalization: float
    purity: float
    sigma_min: float
    sigma_max: float
    centroid: tuple[float, float]


def moment_stats(W, q=None, p=None) -> MomentStats:
    """Moments of a Wigner grid (or closure sampled on q, p) without any Gaussian fit."""
    if not isinstance(W, WignerGrid):
        q = np.linspace(-6, 6, 241) if q is None else np.asarray(q, float)
        p = q if p is None else np.asarray(p, float)
        W = WignerGrid.from_function(W, q, p)
    Q, P = np.meshgrid(W.q, W.p, indexing="ij")

    def integ(f):
        return np.trapezoid(np.trapezoid(f, W.p, axis=1), W.q) / (2 * np.pi)

    norm = integ(W.values)
    if not np.isfinite(norm) or norm <= 0:
        raise ValueError("grid is not normalizable")
    mq = integ(Q * W.values) / norm
    mp = integ(P * W.values) / norm
    cqq = integ((Q - mq) ** 2 * W.values) / norm
    cpp = integ((P - mp) ** 2 * W.values) / norm
    cqp = integ((Q - mq) * (P - mp) * W.values) / norm
    ev = np.linalg.eigvalsh(np.array([[cqq, cqp], [cqp, cpp]]))
    pur = integ(W.values**2) / norm**2
    return MomentStats(float(norm), float(pur), float(np.sqrt(max(ev[0], 0))), float(np.sqrt(ev[1])), (float(mq), float(mp)))
