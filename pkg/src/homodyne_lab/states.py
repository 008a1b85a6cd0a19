"""Input states: coherent, vacuum, Fock (through a generating parameter) and squeezed vacuum."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gaussian_core import GaussianState, mode_vector, overlap, vacuum_state

CONTOUR_NODES = 32
CONTOUR_RADIUS = 0.5


@dataclass(frozen=True)
class CoherentSpec:
    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "phi", mode_vector(self.phi))


@dataclass(frozen=True)
class FockSpec:
    F: np.ndarray
    J: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "F", mode_vector(self.F, normalized=True))
        if abs(self.J) >= 1:
            raise ValueError("generating parameter must satisfy |J| < 1")


@dataclass(frozen=True)
class SqueezeSpec:
    """Single-mode squeezing (xi, theta) or explicit kernels (A, B)."""

    xi: float = 0.0
    theta: np.ndarray | None = None
    A: np.ndarray | None = None
    B: np.ndarray | None = None

    def __post_init__(self):
        if self.xi < 0:
            raise ValueError("squeezing parameter must be >= 0")
        if self.theta is not None:
            object.__setattr__(self, "theta", mode_vector(self.theta, normalized=True))
        if (self.A is None) != (self.B is None):
            raise ValueError("explicit squeezing needs both A and B")
        if self.A is None and self.theta is None:
            raise ValueError("squeezing needs a mode theta or explicit kernels")

    def kernels(self) -> tuple[np.ndarray, np.ndarray]:
        if self.A is not None:
            return np.asarray(self.A, dtype=complex), np.asarray(self.B, dtype=complex)
        t = self.theta
        A = np.eye(t.shape[0], dtype=complex) + 2.0 * np.sinh(self.xi / 2) ** 2 * np.outer(t, t.conj())
        B = np.sinh(self.xi) * np.outer(t, t)
        return A, B


def vacuum(m: int) -> GaussianState:
    return vacuum_state(m)


def coherent_wigner(spec: CoherentSpec) -> GaussianState:
    m = spec.phi.shape[0]
    return GaussianState(np.eye(m, dtype=complex), np.zeros((m, m), dtype=complex), spec.phi.copy(), m * np.log(2.0))


def fock_generating(spec: FockSpec) -> GaussianState:
    """Generating family: sum over n of J^n times the n-photon Wigner function in mode F.

    Each term has unit trace, so the family itself has trace 1/(1 - J).
    """
    J = spec.J
    m = spec.F.shape[0]
    h = 2.0 * J / (1.0 + J)
    A = np.eye(m, dtype=complex) - h * np.outer(spec.F, spec.F.conj())
    return GaussianState(A, np.zeros((m, m), dtype=complex), np.zeros(m, dtype=complex), m * np.log(2.0) - np.log(1.0 + J))


def squeezed_vacuum(spec: SqueezeSpec) -> GaussianState:
    A, B = spec.kernels()
    m = A.shape[0]
    return GaussianState(A, B, np.zeros(m, dtype=complex), m * np.log(2.0))


def contour_nodes(nodes: int = CONTOUR_NODES, radius: float = CONTOUR_RADIUS) -> np.ndarray:
    return radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)


def taylor_coefficient(fn: Callable, n: int, nodes: int = CONTOUR_NODES, radius: float = CONTOUR_RADIUS):
    """Coefficient of J^n of an analytic ``fn`` by trapezoidal contour quadrature.

    ``fn`` takes one complex J and may return an array; the weighted sum is
    taken over its values.
    """
    if n < 0:
        raise ValueError("coefficient order must be >= 0")
    if n >= nodes:
        raise ValueError("contour needs more nodes than the coefficient order")
    Js = contour_nodes(nodes, radius)
    acc = 0.0
    for J in Js:
        acc = acc + np.asarray(fn(J)) * J ** (-n)
    return acc / nodes


@dataclass(frozen=True)
class FockState:
    """The n-photon state in mode F, represented through its generating family."""

    F: np.ndarray
    n: int
    nodes: int = CONTOUR_NODES
    radius: float = CONTOUR_RADIUS

    def __post_init__(self):
        object.__setattr__(self, "F", mode_vector(self.F, normalized=True))
        if self.n < 0:
            raise ValueError("photon number must be >= 0")

    @property
    def dim(self) -> int:
        return self.F.shape[0]

    def weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Contour points J_k and weights w_k with state = sum_k w_k family(J_k)."""
        Js = contour_nodes(self.nodes, self.radius)
        # (1 - J) family(J) has constant trace, so summing its first n + 1
        # coefficients gives the n-photon term with no contour aliasing in the trace
        powers = Js[None, :] ** (-np.arange(self.n + 1)[:, None])
        w = (1.0 - Js) * powers.sum(axis=0) / self.nodes
        return Js, w

    def family(self, J) -> GaussianState:
        return fock_generating(FockSpec(self.F, J))

    def combine(self, fn: Callable):
        """sum_k w_k fn(family(J_k)) for a function linear in the state."""
        Js, w = self.weights()
        return sum(wk * np.asarray(fn(self.family(J))) for J, wk in zip(Js, w))

    def wigner(self, alpha) -> np.ndarray:
        return np.real(self.combine(lambda s: s.wigner(alpha)))

    def trace(self) -> complex:
        return self.combine(lambda s: s.trace())

    def purity(self) -> complex:
        Js, w = self.weights()
        fams = [self.family(J) for J in Js]
        return sum(w[a] * w[b] * overlap(fams[a], fams[b]) for a in range(len(Js)) for b in range(len(Js)))


def gaussian_purity(state: GaussianState) -> float:
    """tr(rho^2) = integral of W^2 in this measure, divided by the squared trace."""
    return float(np.real(overlap(state, state) / state.trace() ** 2))
