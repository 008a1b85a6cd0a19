"""Finite-mode linear algebra and closed-form Gaussian integrals.

Phase-space points are M complex amplitudes alpha = (q + i p)/sqrt(2).  Every
Gaussian functional is also kept in a real form over x = (q_1..q_M, p_1..p_M),

    exp(-x^T H x / 2 + j^T x + c),

integrated against the measure prod_k dq_k dp_k / (2 pi).  In this measure the
vacuum Wigner function 2^M exp(-2|alpha|^2) integrates to one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITIAN_TOL = 1e-12
IDEMPOTENT_TOL = 1e-10
NORM_TOL = 1e-12
PD_THRESHOLD = 1e-10


class NotTraceNormalizable(ValueError):
    """The quadratic form of a Gaussian functional is not positive definite."""


# --- mode space --------------------------------------------------------------


@dataclass(frozen=True)
class ModeSpace:
    dim: int = 4

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError("mode space dimension must be >= 1")

    def basis(self, k: int) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[k] = 1.0
        return e

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def complement(self, gamma) -> np.ndarray:
        """A normalized vector orthogonal to ``gamma``."""
        return orthogonal_complement(mode_vector(gamma, self.dim))[:, 0]


def mode_vector(v, dim: int | None = None, *, normalized: bool = False) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    if v.ndim != 1:
        raise ValueError("mode vector must be one-dimensional")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"mode vector has {v.shape[0]} components, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError("mode vector has non-finite components")
    if normalized and abs(np.linalg.norm(v) - 1.0) >= NORM_TOL:
        raise ValueError(f"mode vector is not normalized (norm {np.linalg.norm(v)!r})")
    return v


def kernel(K, dim: int | None = None, *, hermitian: bool = False, idempotent: bool = False) -> np.ndarray:
    K = np.asarray(K, dtype=complex)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("kernel must be a square matrix")
    if dim is not None and K.shape[0] != dim:
        raise ValueError(f"kernel has size {K.shape[0]}, expected {dim}")
    if hermitian and np.max(np.abs(K - K.conj().T)) >= HERMITIAN_TOL:
        raise ValueError("kernel is not hermitian")
    if idempotent and np.max(np.abs(K @ K - K)) >= IDEMPOTENT_TOL:
        raise ValueError("kernel is not idempotent")
    return K


def orthogonal_complement(gamma) -> np.ndarray:
    """Columns form an orthonormal basis of the complement of ``gamma``."""
    gamma = mode_vector(gamma)
    m = gamma.shape[0]
    if m == 1:
        return np.zeros((1, 0), dtype=complex)
    q, _ = np.linalg.qr(np.column_stack([gamma, np.eye(m, dtype=complex)]))
    return q[:, 1:m]


def diamond(a, K, b) -> complex:
    """Sum over i, j of conj(a_i) K_ij b_j."""
    a = mode_vector(a)
    b = mode_vector(b)
    K = np.asarray(K, dtype=complex)
    if K.shape != (a.shape[0], b.shape[0]):
        raise ValueError(f"dimension mismatch: {a.shape[0]}, {K.shape}, {b.shape[0]}")
    return complex(a.conj() @ K @ b)


def projectors(gamma) -> tuple[np.ndarray, np.ndarray]:
    """Projector onto ``gamma`` and onto its orthogonal complement."""
    gamma = mode_vector(gamma, normalized=True)
    P = np.outer(gamma, gamma.conj())
    return P, np.eye(gamma.shape[0], dtype=complex) - P


def rank1_det_inv(c: complex, v) -> tuple[complex, np.ndarray]:
    """Determinant and inverse of 1 + c v v^dagger (Sherman-Morrison)."""
    v = mode_vector(v)
    s = 1.0 + c * np.vdot(v, v)
    if abs(s) < 1e-14:
        raise ZeroDivisionError("singular rank-one update: 1 + c|v|^2 = 0")
    inv = np.eye(v.shape[0], dtype=complex) - c * np.outer(v, v.conj()) / s
    return complex(s), inv


# --- real form -----------------------------------------------------------------


def complex_basis(m: int) -> np.ndarray:
    """Matrix T with alpha = T x."""
    return np.hstack([np.eye(m), 1j * np.eye(m)]) / np.sqrt(2.0)


def realify(Z) -> np.ndarray:
    """Real 2n x 2n matrix of the complex-linear map alpha -> Z alpha."""
    Z = np.asarray(Z, dtype=complex)
    return np.block([[Z.real, -Z.imag], [Z.imag, Z.real]])


def to_real_coords(alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=complex)
    return np.sqrt(2.0) * np.concatenate([alpha.real, alpha.imag], axis=-1)


def _sym(C):
    return 0.5 * (C + C.T)


def _maybe_real(a, tol=1e-13):
    a = np.asarray(a)
    if np.iscomplexobj(a) and np.all(np.abs(a.imag) <= tol * (1.0 + np.abs(a.real))):
        return a.real.copy()
    return a


def _log_sqrt_det(H) -> complex:
    """log det(H)^(1/2) on the branch continued from positive definite matrices."""
    if np.isrealobj(H):
        sign, logdet = np.linalg.slogdet(H)
        if sign <= 0:
            raise NotTraceNormalizable("state not trace-normalizable")
        return 0.5 * logdet
    return 0.5 * np.sum(np.log(np.linalg.eigvals(H)))


@dataclass(frozen=True)
class GaussianForm:
    """exp(-x^T H x / 2 + j^T x + c) over real phase-space coordinates."""

    H: np.ndarray
    j: np.ndarray
    c: complex = 0.0

    @property
    def ndim(self) -> int:
        return self.H.shape[0]

    @classmethod
    def from_complex(cls, A=None, B=None, B_tilde=None, a=None, b=None, c=0.0, *, m=None):
        """Real form of exp(-2 a^dag A a - a^dag B conj(a) - a^T B~ a + a_lin^T a + b_lin^T conj(a) + c)."""
        for x in (A, B, B_tilde):
            if x is not None:
                m = np.asarray(x).shape[0]
        for x in (a, b):
            if x is not None:
                m = np.asarray(x).shape[0]
        if m is None:
            raise ValueError("cannot infer mode count")
        T = complex_basis(m)
        Hc = np.zeros((2 * m, 2 * m), dtype=complex)
        if A is not None:
            Hc += 2.0 * (T.conj().T @ np.asarray(A, dtype=complex) @ T)
        if B is not None:
            Hc += T.conj().T @ np.asarray(B, dtype=complex) @ T.conj()
        if B_tilde is not None:
            Hc += T.T @ np.asarray(B_tilde, dtype=complex) @ T
        H = 2.0 * _sym(Hc)
        j = np.zeros(2 * m, dtype=complex)
        if a is not None:
            j += T.T @ np.asarray(a, dtype=complex)
        if b is not None:
            j += T.conj().T @ np.asarray(b, dtype=complex)
        return cls(_maybe_real(H), _maybe_real(j), complex(c))

    def __mul__(self, other: "GaussianForm") -> "GaussianForm":
        return GaussianForm(_maybe_real(self.H + other.H), _maybe_real(self.j + other.j), self.c + other.c)

    def transform(self, S) -> "GaussianForm":
        """Substitute x -> S x."""
        S = np.asarray(S)
        return GaussianForm(_maybe_real(S.T @ self.H @ S), _maybe_real(S.T @ self.j), self.c)

    def shift(self, x0) -> "GaussianForm":
        """Substitute x -> x - x0."""
        x0 = np.asarray(x0)
        return GaussianForm(
            self.H,
            _maybe_real(self.j + self.H @ x0),
            self.c - 0.5 * x0 @ self.H @ x0 - self.j @ x0,
        )

    def check_integrable(self):
        Hr = self.H.real if np.iscomplexobj(self.H) else self.H
        ev = np.linalg.eigvalsh(_sym(Hr))
        if ev.min() <= PD_THRESHOLD:
            raise NotTraceNormalizable(
                f"state not trace-normalizable (smallest eigenvalue {ev.min():.3e})"
            )

    def log_integral(self) -> complex:
        self.check_integrable()
        sol = np.linalg.solve(self.H, self.j)
        return complex(self.c + 0.5 * self.j @ sol - _log_sqrt_det(self.H))

    def integral(self) -> complex:
        return complex(np.exp(self.log_integral()))

    def marginalize(self, keep) -> "GaussianForm":
        """Integrate out every coordinate not listed in ``keep``."""
        keep = np.asarray(keep)
        drop = np.setdiff1d(np.arange(self.ndim), keep)
        Hkk = self.H[np.ix_(keep, keep)]
        Hkd = self.H[np.ix_(keep, drop)]
        Hdd = self.H[np.ix_(drop, drop)]
        GaussianForm(Hdd, self.j[drop]).check_integrable()
        X = np.linalg.solve(Hdd, np.column_stack([Hkd.T, self.j[drop]]))
        Hn = Hkk - Hkd @ X[:, :-1]
        jn = self.j[keep] - Hkd @ X[:, -1]
        cn = self.c + 0.5 * self.j[drop] @ X[:, -1] - _log_sqrt_det(Hdd)
        return GaussianForm(_maybe_real(_sym(Hn)), _maybe_real(jn), cn)

    def log_value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        quad = np.einsum("...i,ij,...j->...", x, self.H, x)
        return -0.5 * quad + x @ self.j + self.c

    def value(self, x) -> np.ndarray:
        return np.exp(self.log_value(x))


# --- Gaussian states -------------------------------------------------------------


@dataclass(frozen=True)
class GaussianState:
    """W(alpha) = exp(log_prefactor - 2 d^dag A d - d^dag B conj(d) - c.c.), d = alpha - displacement.

    ``log_prefactor`` includes the 2^M normalization, so the vacuum has
    quad_a = 1, quad_b = 0 and log_prefactor = M log 2.
    """

    quad_a: np.ndarray
    quad_b: np.ndarray
    displacement: np.ndarray
    log_prefactor: complex

    @property
    def dim(self) -> int:
        return self.quad_a.shape[0]

    def check(self):
        """Validate the invariants of a real-valued Wigner functional."""
        A, B = self.quad_a, self.quad_b
        if np.max(np.abs(A - A.conj().T)) >= HERMITIAN_TOL:
            raise ValueError("quad_a is not hermitian")
        if np.max(np.abs(B - B.T)) >= HERMITIAN_TOL:
            raise ValueError("quad_b is not symmetric")
        self.form().check_integrable()
        return self

    def form(self) -> GaussianForm:
        base = GaussianForm.from_complex(
            A=self.quad_a, B=self.quad_b, B_tilde=self.quad_b.conj(), c=self.log_prefactor, m=self.dim
        )
        d = np.asarray(self.displacement, dtype=complex)
        if np.any(d != 0):
            base = base.shift(to_real_coords(d))
        return base

    def trace(self) -> complex:
        return self.form().integral()

    def wigner(self, alpha) -> np.ndarray:
        """Evaluate at complex amplitudes of shape (..., M)."""
        return self.form().value(to_real_coords(alpha))

    def covariance(self) -> np.ndarray:
        """Covariance of (q, p) for a real, positive state."""
        return np.linalg.inv(self.form().H)


def overlap(s1: GaussianState, s2: GaussianState) -> complex:
    """Integral of W1 W2, which is tr(rho1 rho2) in this measure."""
    return (s1.form() * s2.form()).integral()


def vacuum_state(m: int) -> GaussianState:
    return GaussianState(
        np.eye(m, dtype=complex), np.zeros((m, m), dtype=complex), np.zeros(m, dtype=complex), m * np.log(2.0)
    )


# --- closed-form integral with separate sources --------------------------------------


@dataclass(frozen=True)
class GaussianIntegral:
    amplitude: complex
    first: complex
    second: complex
    A_inv: np.ndarray = field(repr=False)
    K_inv: np.ndarray = field(repr=False)

    @property
    def exponent(self) -> complex:
        return self.first + self.second

    @property
    def log_amplitude(self) -> complex:
        return complex(np.log(self.amplitude))

    @property
    def value(self) -> complex:
        return self.amplitude * np.exp(self.exponent)


def gaussian_integral(A, B, u=None, v=None) -> GaussianIntegral:
    """Closed form of the integral of

        2^M exp(-2 b^dag A b + b^dag B conj(b) + b^T conj(B) b + conj(u)^T b + b^dag v)

    over the normalized measure.  The amplitude is (det A det K)^(-1/2) with
    K = conj(A) - conj(B) A^-1 B, and the exponent splits as

        first  = conj(u)^T A^-1 v / 4
        second = (v^T + conj(u)^T A^-1 B) K^-1 (conj(u) + conj(B) A^-1 v) / 4.

    With u = v = -2i psi the two pieces read psi^dag A^-1 psi and
    (psi^T - psi^dag A^-1 B) K^-1 (conj(psi) - conj(B) A^-1 psi).
    """
    A = kernel(A)
    m = A.shape[0]
    B = np.zeros_like(A) if B is None else kernel(B, m)
    u = np.zeros(m, dtype=complex) if u is None else mode_vector(u, m)
    v = np.zeros(m, dtype=complex) if v is None else mode_vector(v, m)

    GaussianForm.from_complex(A=A, B=-B, B_tilde=-B.conj(), m=m).check_integrable()
    A_inv = np.linalg.inv(A)
    K = A.conj() - B.conj() @ A_inv @ B
    K_inv = np.linalg.inv(K)
    amp = 1.0 / np.sqrt(np.linalg.det(A) * np.linalg.det(K))
    ub = u.conj()
    first = ub @ A_inv @ v / 4.0
    second = (v + ub @ A_inv @ B) @ K_inv @ (ub + B.conj() @ A_inv @ v) / 4.0
    return GaussianIntegral(complex(amp), complex(first), complex(second), A_inv, K_inv)
