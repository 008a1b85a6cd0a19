"""Balanced homodyne measurement chain.

The photon-count difference m = n_a - n_b of the two detectors behind a 50:50
beamsplitter has generating function W_H(K) = sum_m K^m R(m).  For a Gaussian
input it is a closed-form Gaussian integral; R(m) then follows from a uniform
phase quadrature on K = exp(i phi), done with an FFT.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .gaussian_core import (
    GaussianForm,
    GaussianState,
    NotTraceNormalizable,
    complex_basis,
    mode_vector,
    realify,
)
from .states import FockState

DEFAULT_N_PHI = 4096
DEFAULT_X_MAX = 12.0
CONVERGENCE_TOL = 1e-9
IMAG_TOL = 1e-9


class QuadratureConvergenceError(RuntimeError):
    """R(n) changed by more than the tolerance when the phase grid was doubled."""


# --- data types --------------------------------------------------------------------


@dataclass(frozen=True)
class DetectorModel:
    """Both detectors of the pair: ``bucket`` (D = eta 1) or ``single-mode`` (D = eta M M^dag)."""

    kind: str = "single-mode"
    eta: float = 1.0
    mode: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("bucket", "single-mode"):
            raise ValueError(f"unknown detector kind {self.kind!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("detector efficiency must lie in [0, 1]")
        if self.mode is not None:
            object.__setattr__(self, "mode", mode_vector(self.mode, normalized=True))

    def kernel(self, dim: int, default_mode=None) -> np.ndarray:
        if self.kind == "bucket":
            return self.eta * np.eye(dim, dtype=complex)
        mode = self.mode if self.mode is not None else default_mode
        if mode is None:
            raise ValueError("single-mode detector needs a mode")
        mode = mode_vector(mode, dim, normalized=True)
        return self.eta * np.outer(mode, mode.conj())


@dataclass(frozen=True)
class LocalOscillator:
    gamma0: float
    theta: float = 0.0
    Gamma: np.ndarray = field(default_factory=lambda: np.array([1.0 + 0j]))

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise ValueError("local oscillator amplitude must be positive")
        object.__setattr__(self, "Gamma", mode_vector(self.Gamma, normalized=True))

    @property
    def dx(self) -> float:
        return 1.0 / self.gamma0

    @property
    def gamma(self) -> np.ndarray:
        return self.gamma0 * np.exp(1j * self.theta) * self.Gamma

    def with_theta(self, theta: float) -> "LocalOscillator":
        return LocalOscillator(self.gamma0, theta, self.Gamma)


@dataclass(frozen=True)
class PhotonDistribution:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        if p.sum() > 1 + 1e-9:
            raise ValueError("probabilities sum above one")
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def poisson(cls, mean: float, n_max: int) -> "PhotonDistribution":
        from scipy.stats import poisson

        return cls(poisson.pmf(np.arange(n_max + 1), mean))

    def generating(self, K):
        return np.polynomial.polynomial.polyval(K, self.probabilities)


@dataclass(frozen=True)
class QuadratureDistribution:
    """Samples of R(x, theta) on the grid x = n dx."""

    theta: float
    x: np.ndarray
    R: np.ndarray
    gamma0: float

    @property
    def dx(self) -> float:
        return 1.0 / self.gamma0

    def normalization(self) -> float:
        return float(np.sum(self.R) * self.dx)

    def mean(self) -> float:
        return float(np.sum(self.x * self.R) * self.dx / self.normalization())

    def variance(self) -> float:
        mu = self.mean()
        return float(np.sum((self.x - mu) ** 2 * self.R) * self.dx / self.normalization())


# --- distributions and generating functions ----------------------------------------------


def cross_correlate(P1: PhotonDistribution, P2: PhotonDistribution) -> tuple[np.ndarray, np.ndarray]:
    """R(m) = sum_n P1(n) P2(n + m), returned as (m, R)."""
    p1, p2 = P1.probabilities, P2.probabilities
    R = np.convolve(p2, p1[::-1])
    m = np.arange(R.shape[0]) - (p1.shape[0] - 1)
    return m, R


def generating_product(G1, G2, K):
    """Generating function sum_m K^m R(m) of the cross-correlation of P1 and P2.

    ``G1`` and ``G2`` evaluate the generating functions of P1 and P2; the first
    detector enters with 1/K because its count is subtracted.
    """
    K = np.asarray(K, dtype=complex)
    if np.any(K == 0):
        raise ZeroDivisionError("generating parameter K = 0")
    return G1(1.0 / K) * G2(K)


def mk_jk(K):
    """(4K/(1+K)^2, (1-K)/(1+K))."""
    K = np.asarray(K, dtype=complex)
    if np.any(K == -1):
        raise ZeroDivisionError("pole of the generating function at K = -1")
    out = (4.0 * K / (1.0 + K) ** 2, (1.0 - K) / (1.0 + K))
    return (complex(out[0]), complex(out[1])) if K.ndim == 0 else out


# --- closed forms --------------------------------------------------------------------


def beamsplitter_matrix(m: int) -> np.ndarray:
    """Real matrix of (alpha, beta) -> ((alpha + i beta)/sqrt 2, (beta + i alpha)/sqrt 2)."""
    I = np.eye(m)
    Z = np.block([[I, 1j * I], [1j * I, I]]) / np.sqrt(2.0)
    return realify(Z)


def detector_pair_form(K: complex, D) -> GaussianForm:
    """Weyl symbol of K^(n_a - n_b) over the two detector inputs (alpha, beta)."""
    D = np.asarray(D, dtype=complex)
    m = D.shape[0]
    M_K, J_K = mk_jk(K)
    Z = np.zeros_like(D)
    A = J_K * np.block([[D, Z], [Z, -D]])
    lam = np.trace(D).real
    return GaussianForm.from_complex(A=A, c=lam * np.log(M_K), m=2 * m)


def homodyne_operator_form(K: complex, lo: LocalOscillator, det: DetectorModel, dim: int) -> GaussianForm:
    """Symbol of the measured operator on the signal after tracing out the local oscillator."""
    data = _DetectorData(det, lo.Gamma, dim)
    M_K, J_K = mk_jk(K)
    H = -4.0 * J_K**2 * data.Dr
    j = -4.0 * J_K * lo.gamma0 * (np.cos(lo.theta) * data.v1 + np.sin(lo.theta) * data.v2)
    return GaussianForm(H, j, data.lam * np.log(M_K))


def homodyne_generating(state, lo: LocalOscillator, det: DetectorModel, K):
    """W_H(K) = sum_m K^m R(m) for a Gaussian or Fock input."""
    K = np.asarray(K, dtype=complex)
    flat = K.ravel()
    out = np.empty(flat.shape, dtype=complex)
    for i, k in enumerate(flat):
        if isinstance(state, FockState):
            out[i] = state.combine(lambda s: _generating_one(s, lo, det, k))
        else:
            out[i] = _generating_one(state, lo, det, k)
    return out.reshape(K.shape) if K.ndim else complex(out[0])


def _generating_one(state: GaussianState, lo, det, K) -> complex:
    op = homodyne_operator_form(K, lo, det, state.dim)
    try:
        return (state.form() * op).integral()
    except NotTraceNormalizable as exc:
        raise NotTraceNormalizable(f"homodyne integral diverges at K = {K!r}: {exc}") from None


# --- phase quadrature -----------------------------------------------------------------------


class _DetectorData:
    def __init__(self, det: DetectorModel, Gamma, dim: int):
        D = det.kernel(dim, Gamma)
        T = complex_basis(dim)
        C = T.conj().T @ D @ T
        self.Dr = 0.5 * (C + C.T).real
        self.lam = float(np.trace(D).real)
        z = T.T @ (D @ mode_vector(Gamma, dim)).conj()
        # (gamma^dag D alpha - alpha^dag D gamma) / (2i) = gamma0 (cos th v1 + sin th v2) . x
        self.v1 = z.imag
        self.v2 = -z.real


def phase_grid(n_phi: int) -> np.ndarray:
    """Uniform offset grid on (-pi, pi) that avoids the pole at phi = pi."""
    return -np.pi + 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi


def _log_generating_on_circle(form: GaussianForm, data: _DetectorData, gamma0: float, phi, thetas):
    """log W_H(exp(i phi)) for a single Gaussian functional, shape (len(thetas), len(phi))."""
    t = np.tan(0.5 * phi)
    H = form.H[None, :, :] + 4.0 * (t**2)[:, None, None] * data.Dr[None, :, :]
    rhs = np.column_stack([form.j, data.v1, data.v2]).astype(np.result_type(H, form.j))
    X = np.linalg.solve(H, np.broadcast_to(rhs, (phi.shape[0],) + rhs.shape))
    G = np.einsum("ia,nib->nab", rhs, X)
    if np.iscomplexobj(H):
        logdet = np.sum(np.log(np.linalg.eigvals(H)), axis=-1)
    else:
        sign, logdet = np.linalg.slogdet(H)
        if np.any(sign <= 0):
            raise NotTraceNormalizable("state not trace-normalizable")
    thetas = np.atleast_1d(thetas)
    a = 4j * gamma0 * np.outer(np.cos(thetas), t)
    b = 4j * gamma0 * np.outer(np.sin(thetas), t)
    quad = (
        G[None, :, 0, 0]
        + 2 * a * G[None, :, 0, 1]
        + 2 * b * G[None, :, 0, 2]
        + a**2 * G[None, :, 1, 1]
        + 2 * a * b * G[None, :, 1, 2]
        + b**2 * G[None, :, 2, 2]
    )
    log_m = -2.0 * np.log(np.cos(0.5 * phi))
    return form.c + data.lam * log_m[None, :] - 0.5 * logdet[None, :] + 0.5 * quad


def generating_on_circle(state, lo: LocalOscillator, det: DetectorModel, phi, thetas) -> np.ndarray:
    """W_H(exp(i phi)) for arrays of phases and LO angles, shape (len(thetas), len(phi))."""
    phi = np.asarray(phi, dtype=float)
    if np.any(np.abs(phi) >= np.pi):
        raise ZeroDivisionError("phase grid must avoid the pole at phi = pi")
    data = _DetectorData(det, lo.Gamma, state.dim)
    if isinstance(state, FockState):
        Js, w = state.weights()
        total = 0.0
        for J, wk in zip(Js, w):
            form = state.family(J).form()
            total = total + wk * np.exp(_log_generating_on_circle(form, data, lo.gamma0, phi, thetas))
        return total
    form = state.form()
    form.check_integrable()
    return np.exp(_log_generating_on_circle(form, data, lo.gamma0, phi, thetas))


def _phase_fft(state, lo, det, thetas, n_phi: int) -> np.ndarray:
    """R(n) for n = -n_phi/2 .. n_phi/2 - 1, one row per LO angle."""
    phi = phase_grid(n_phi)
    vals = generating_on_circle(state, lo, det, phi, thetas)
    n = np.arange(-n_phi // 2, n_phi // 2)
    spec = np.fft.fft(vals, axis=-1) / n_phi
    # exp(-i n phi_k) = exp(-i n phi_0) exp(-2 pi i n k / N)
    phase = np.exp(-1j * n * phi[0])
    return spec[:, n % n_phi] * phase[None, :]


def _checked_counts(state, lo, det, thetas, n_phi: int, n_keep: int, tol: float) -> np.ndarray:
    if n_keep >= n_phi // 2:
        raise ValueError("phase grid too coarse for the requested count range")
    coarse = _phase_fft(state, lo, det, thetas, n_phi)
    fine = _phase_fft(state, lo, det, thetas, 2 * n_phi)
    c0, f0 = n_phi // 2, n_phi
    sl_c = coarse[:, c0 - n_keep : c0 + n_keep + 1]
    sl_f = fine[:, f0 - n_keep : f0 + n_keep + 1]
    change = np.max(np.abs(sl_c - sl_f))
    if change > tol:
        raise QuadratureConvergenceError(
            f"R(n) changed by {change:.3e} when the phase grid was doubled from {n_phi}; increase n_phi"
        )
    imag = np.max(np.abs(sl_f.imag))
    if imag > IMAG_TOL * max(1.0, np.max(np.abs(sl_f))):
        raise QuadratureConvergenceError(f"R(n) has imaginary residue {imag:.3e}")
    return sl_f.real


def extract_R(state, lo: LocalOscillator, det: DetectorModel, n, *, n_phi: int = DEFAULT_N_PHI, tol: float = CONVERGENCE_TOL):
    """R(n) = (1/2 pi) integral of exp(-i n phi) W_H(exp(i phi)) over one period."""
    n_arr = np.atleast_1d(np.asarray(n, dtype=int))
    n_keep = int(np.max(np.abs(n_arr)))
    while n_keep >= n_phi // 2:
        n_phi *= 2
    R = _checked_counts(state, lo, det, [lo.theta], n_phi, n_keep, tol)[0]
    out = R[n_arr + n_keep]
    return float(out[0]) if np.ndim(n) == 0 else out


def default_n_phi(n_max: int, n_phi: int | None = None) -> int:
    base = DEFAULT_N_PHI if n_phi is None else int(n_phi)
    need = 1 << int(np.ceil(np.log2(2 * (n_max + 1))))
    return max(base, need)


def quadrature_distributions(
    state,
    lo: LocalOscillator,
    det: DetectorModel,
    thetas,
    *,
    x_max: float = DEFAULT_X_MAX,
    n_phi: int | None = None,
    tol: float = CONVERGENCE_TOL,
) -> list[QuadratureDistribution]:
    """Quadrature distributions R(x, theta) = gamma0 R(n) at x = n / gamma0."""
    n_max = int(np.ceil(x_max * lo.gamma0))
    n_phi = default_n_phi(n_max, n_phi)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    R = _checked_counts(state, lo, det, thetas, n_phi, n_max, tol)
    if np.min(R) < -1e-9:
        warnings.warn(f"count distribution has negative entries down to {np.min(R):.3e}", RuntimeWarning)
    x = np.arange(-n_max, n_max + 1) / lo.gamma0
    return [QuadratureDistribution(float(th), x, lo.gamma0 * R[i], lo.gamma0) for i, th in enumerate(thetas)]


def quadrature_distribution(state, lo: LocalOscillator, det: DetectorModel, theta: float | None = None, **kwargs) -> QuadratureDistribution:
    theta = lo.theta if theta is None else theta
    return quadrature_distributions(state, lo, det, [theta], **kwargs)[0]
