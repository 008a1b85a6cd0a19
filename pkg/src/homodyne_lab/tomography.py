"""Inverse Radon reconstruction of the observed Wigner function.

A quadrature distribution R(x, theta) Fourier transforms into a slice
chi(r, theta) of the characteristic function.  The slices sit on the
(xi, zeta) plane at zeta = sqrt(2) r cos(theta), xi = sqrt(2) r sin(theta),
and the Wigner function is

    W(q, p) = (1/2 pi) integral of chi(xi, zeta) exp(i q xi - i p zeta) dxi dzeta.

In polar form this is filtered back-projection with a ramp filter 2|r|.
"""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .homodyne import DEFAULT_X_MAX, DetectorModel, LocalOscillator, QuadratureDistribution, quadrature_distributions

SCHEMA_VERSION = 1
CONVENTION = "vacuum = 2 exp(-(q^2 + p^2)); integral of W dq dp / (2 pi) = 1"
CLIP_WARN = 1e-3
APODIZE_THRESHOLD = 1e-8
IMAG_WARN = 1e-6


class AngularAliasingError(RuntimeError):
    """Too few LO angles for the angular bandwidth of the characteristic function."""


# --- data types ---------------------------------------------------------------------


@dataclass(frozen=True)
class CharacteristicSlice:
    theta: float
    r: np.ndarray
    values: np.ndarray
    boundary: float = np.inf
    clipped_fraction: float = 0.0

    @property
    def dr(self) -> float:
        return float(self.r[1] - self.r[0])


@dataclass(frozen=True)
class WignerGrid:
    """Values W[i, k] = W(q[i], p[k])."""

    q: np.ndarray
    p: np.ndarray
    values: np.ndarray
    convention: str = CONVENTION
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_function(cls, fn, q, p, **metadata) -> "WignerGrid":
        Q, P = np.meshgrid(q, p, indexing="ij")
        return cls(np.asarray(q, float), np.asarray(p, float), np.asarray(fn(Q, P), float), metadata=metadata)

    @property
    def dq(self) -> float:
        return float(self.q[1] - self.q[0])

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    def normalization(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.values, self.p, axis=1), self.q) / (2 * np.pi))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q", "p", "W"])
        for i, qv in enumerate(self.q):
            for k, pv in enumerate(self.p):
                w.writerow([fmt17(qv), fmt17(pv), fmt17(self.values[i, k])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "WignerGrid":
        rows = list(csv.reader(io.StringIO(text)))
        if rows[0] != ["q", "p", "W"]:
            raise ValueError("unexpected CSV header")
        data = np.array([[float(v) for v in row] for row in rows[1:]])
        q = np.unique(data[:, 0])
        p = np.unique(data[:, 1])
        return cls(q, p, data[:, 2].reshape(q.size, p.size))

    def to_json(self) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "convention": self.convention,
            "metadata": self.metadata,
            "q": [fmt17(v) for v in self.q],
            "p": [fmt17(v) for v in self.p],
            "values": [fmt17(v) for v in self.values.ravel()],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "WignerGrid":
        doc = json.loads(text)
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {doc.get('schema_version')!r}")
        q = np.array([float(v) for v in doc["q"]])
        p = np.array([float(v) for v in doc["p"]])
        vals = np.array([float(v) for v in doc["values"]]).reshape(q.size, p.size)
        return cls(q, p, vals, doc["convention"], doc.get("metadata", {}))


def fmt17(v) -> str:
    return format(float(v), ".17g")


@dataclass(frozen=True)
class GridParams:
    q_range: float = 6.0
    points: int = 241
    n_theta: int = 64
    x_max: float = DEFAULT_X_MAX
    r_max: float = 16.0
    dr: float = 0.01
    n_phi: int | None = None
    method: str = "fbp"

    def axis(self) -> np.ndarray:
        return np.linspace(-self.q_range, self.q_range, self.points)

    def thetas(self) -> np.ndarray:
        return np.arange(self.n_theta) * np.pi / self.n_theta


# --- slices ---------------------------------------------------------------------------


def characteristic_from_marginal(Rx: QuadratureDistribution, r_max: float = 16.0, dr: float = 0.01) -> CharacteristicSlice:
    """chi(r) = integral of R(x) exp(i x r) dx on a symmetric r grid, normalized so chi(0) = 1."""
    return characteristic_slices([Rx], r_max, dr)[0]


def characteristic_slices(dists, r_max: float = 16.0, dr: float = 0.01) -> list[CharacteristicSlice]:
    """Batched ``characteristic_from_marginal`` for distributions sharing one x grid."""
    x = dists[0].x
    for d in dists:
        if d.x.shape != x.shape or np.max(np.abs(d.x - x)) > 1e-12:
            raise ValueError("distributions must share one x grid")
    n = int(round(r_max / dr))
    r_pos = np.arange(n + 1) * dr
    weights = np.stack([d.R * d.dx for d in dists], axis=1)
    chi_pos = np.empty((n + 1, len(dists)), dtype=complex)
    for start in range(0, n + 1, 256):
        rows = slice(start, min(start + 256, n + 1))
        chi_pos[rows] = np.exp(1j * np.outer(r_pos[rows], x)) @ weights
    chi_pos /= chi_pos[0]
    r = np.concatenate([-r_pos[:0:-1], r_pos])
    out = []
    for k, d in enumerate(dists):
        values = np.concatenate([chi_pos[:0:-1, k].conj(), chi_pos[:, k]])
        if abs(values[-1]) > CLIP_WARN:
            warnings.warn(f"characteristic function clipped: |chi(r_max)| = {abs(values[-1]):.2e}", RuntimeWarning)
        out.append(CharacteristicSlice(d.theta, r, values))
    return out


def clip_boundary(sl: CharacteristicSlice, gamma0: float) -> CharacteristicSlice:
    """Zero the slice where |r| >= pi gamma0 and record the removed share of sum |chi|^2."""
    bound = np.pi * gamma0
    outside = np.abs(sl.r) >= bound
    if not np.any(outside):
        return replace(sl, boundary=min(sl.boundary, bound))
    energy = np.sum(np.abs(sl.values) ** 2)
    removed = np.sum(np.abs(sl.values[outside]) ** 2)
    vals = np.where(outside, 0.0, sl.values)
    return replace(sl, values=vals, boundary=min(sl.boundary, bound), clipped_fraction=float(removed / energy))


# --- inversion --------------------------------------------------------------------------


def _check_angles(thetas: np.ndarray) -> float:
    n = thetas.size
    if n < 2:
        raise AngularAliasingError("need at least two LO angles")
    step = np.diff(thetas)
    if np.max(np.abs(step - step[0])) > 1e-9 or abs(thetas[0]) > 1e-12:
        raise ValueError("LO angles must be uniform starting at 0")
    span = n * step[0]
    if not (abs(span - np.pi) < 1e-9 or abs(span - 2 * np.pi) < 1e-9):
        raise ValueError("LO angles must cover [0, pi) or [0, 2 pi) uniformly")
    return span


def _window(sl: CharacteristicSlice, apodize: bool) -> np.ndarray:
    if not apodize or not np.isfinite(sl.boundary):
        return sl.values
    r = np.abs(sl.r)
    w = np.where(r < sl.boundary, np.cos(0.5 * np.pi * r / sl.boundary) ** 2, 0.0)
    return sl.values * w


def _cubic_uniform(y: np.ndarray, x0: float, h: float, xq: np.ndarray) -> np.ndarray:
    """Four-point Lagrange interpolation of samples y[k] = f(x0 + k h); zero outside."""
    t = (xq - x0) / h
    k = np.floor(t).astype(int)
    s = t - k
    n = y.shape[0]
    inside = (k >= 1) & (k <= n - 3)
    k = np.clip(k, 1, n - 3)
    w0 = -s * (s - 1) * (s - 2) / 6
    w1 = (s + 1) * (s - 1) * (s - 2) / 2
    w2 = -(s + 1) * s * (s - 2) / 2
    w3 = (s + 1) * s * (s - 1) / 6
    out = w0 * y[k - 1] + w1 * y[k] + w2 * y[k + 1] + w3 * y[k + 2]
    return np.where(inside, out, 0.0)


def _filtered_projections(slices, s: np.ndarray, apodize: bool) -> np.ndarray:
    """g(s) = integral of |r| chi(r) exp(-i r s) dr for every slice, shape (n_theta, len(s))."""
    r_all = slices[0].r
    mid = r_all.size // 2
    h = slices[0].dr
    r = r_all[mid:]
    vals = np.stack([_window(sl, apodize) for sl in slices], axis=1)
    fwd, bwd = vals[mid:], vals[mid::-1]
    wts = np.full(r.size, h)
    wts[0] = wts[-1] = 0.5 * h
    a = (fwd + bwd) * (r * wts)[:, None]
    b = (fwd - bwd) * (r * wts)[:, None]
    g = np.cos(np.outer(s, r)) @ a - 1j * (np.sin(np.outer(s, r)) @ b)
    # trapezoid end correction at the kink of |r|: the integrand has slope 2 chi(0) there
    g += h * h / 6.0 * vals[mid][None, :]
    if np.max(np.abs(g.imag)) > IMAG_WARN:
        warnings.warn("filtered projection has an imaginary part; marginal not real?", RuntimeWarning)
    return g.real.T


def _back_project(g: np.ndarray, thetas: np.ndarray, s0: float, ds: float, Q, P) -> np.ndarray:
    acc = np.zeros(Q.shape)
    for gi, th in zip(g, thetas):
        x = np.sqrt(2.0) * (P * np.cos(th) - Q * np.sin(th))
        acc += _cubic_uniform(gi, s0, ds, x)
    return acc / len(thetas)


def _fbp(slices, q, p, apodize, alias_tol):
    thetas = np.array([sl.theta for sl in slices])
    Q, P = np.meshgrid(q, p, indexing="ij")
    s_max = np.sqrt(2.0) * np.max(np.hypot(Q, P)) + 0.1
    ds = 0.01
    s = np.arange(-s_max, s_max + ds / 2, ds)
    g = _filtered_projections(slices, s, apodize)
    W = _back_project(g, thetas, s[0], ds, Q, P)
    n = len(slices)
    if alias_tol is not None and n >= 8 and n % 2 == 0:
        half = _back_project(g[::2], thetas[::2], s[0], ds, Q, P)
        change = np.max(np.abs(W - half))
        if change > alias_tol * np.max(np.abs(W)):
            raise AngularAliasingError(
                f"reconstruction changes by {change:.3e} between {n // 2} and {n} angles; use more LO angles"
            )
    return W


def _cartesian(slices, q, p, apodize, d_xi=0.08):
    """Interpolate chi onto a Cartesian (xi, zeta) grid, then Fourier sum to (q, p)."""
    thetas = np.array([sl.theta for sl in slices])
    n = len(slices)
    dth = thetas[1] - thetas[0]
    span = n * dth
    # extend to a full turn with chi(r, theta + pi) = chi(-r, theta)
    vals = [_window(sl, apodize) for sl in slices]
    if abs(span - np.pi) < 1e-9:
        vals = vals + [v[::-1] for v in vals]
    ang = np.stack(vals)  # (n_full, n_r)
    n_full = ang.shape[0]
    r = slices[0].r
    h = slices[0].dr
    mag = np.max(np.abs(ang), axis=0)
    live = r[mag > 1e-10]
    rho_max = np.sqrt(2.0) * (np.max(np.abs(live)) + 2 * h)
    k = np.arange(-np.ceil(rho_max / d_xi), np.ceil(rho_max / d_xi) + 1)
    xi = k * d_xi
    XI, ZE = np.meshgrid(xi, xi, indexing="ij")
    rad = np.hypot(XI, ZE) / np.sqrt(2.0)
    phase = np.mod(np.arctan2(XI, ZE), 2 * np.pi)
    radial = np.stack([_cubic_uniform(ang[j], r[0], h, rad.ravel()) for j in range(n_full)])
    # periodic four-point interpolation in angle
    t = phase.ravel() / dth
    kk = np.floor(t).astype(int)
    sft = t - kk
    w = [
        -sft * (sft - 1) * (sft - 2) / 6,
        (sft + 1) * (sft - 1) * (sft - 2) / 2,
        -(sft + 1) * sft * (sft - 2) / 2,
        (sft + 1) * sft * (sft - 1) / 6,
    ]
    cols = np.arange(rad.size)
    chi = sum(wi * radial[(kk + off) % n_full, cols] for wi, off in zip(w, (-1, 0, 1, 2)))
    chi = chi.reshape(rad.shape)
    Eq = np.exp(1j * np.outer(q, xi))
    Ep = np.exp(-1j * np.outer(p, xi))
    W = Eq @ chi @ Ep.T * d_xi * d_xi / (2 * np.pi)
    return W


def symplectic_fourier(
    slices,
    q=None,
    p=None,
    *,
    method: str = "fbp",
    apodize: bool | None = None,
    alias_tol: float | None = 0.05,
) -> WignerGrid:
    """Wigner function on the (q, p) grid from slices uniformly spaced in theta."""
    slices = sorted(slices, key=lambda sl: sl.theta)
    thetas = np.array([sl.theta for sl in slices])
    _check_angles(thetas)
    r0 = slices[0].r
    for sl in slices:
        if sl.r.shape != r0.shape or np.max(np.abs(sl.r - r0)) > 1e-12:
            raise ValueError("slices must share one r grid")
    if r0.size % 2 == 0 or abs(r0[r0.size // 2]) > 1e-12:
        raise ValueError("r grid must be symmetric about 0")
    q = np.linspace(-6, 6, 241) if q is None else np.asarray(q, float)
    p = q if p is None else np.asarray(p, float)
    clipped = max(sl.clipped_fraction for sl in slices)
    if apodize is None:
        apodize = clipped >= APODIZE_THRESHOLD
    if method == "fbp":
        W = _fbp(slices, q, p, apodize, alias_tol)
    elif method == "cartesian":
        Wc = _cartesian(slices, q, p, apodize)
        if np.max(np.abs(Wc.imag)) > IMAG_WARN:
            warnings.warn(f"discarding imaginary residue {np.max(np.abs(Wc.imag)):.2e}", RuntimeWarning)
        W = Wc.real
    else:
        raise ValueError(f"unknown inversion method {method!r}")
    meta = {"method": method, "n_theta": len(slices), "clipped_fraction": clipped, "apodized": bool(apodize)}
    return WignerGrid(q, p, W, metadata=meta)


# --- end to end ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TomographyResult:
    distributions: list
    slices: list
    grid: WignerGrid


def run_tomography(state, lo: LocalOscillator, det: DetectorModel, params: GridParams = GridParams()) -> TomographyResult:
    thetas = params.thetas()
    dists = quadrature_distributions(state, lo, det, thetas, x_max=params.x_max, n_phi=params.n_phi)
    slices = [clip_boundary(sl, lo.gamma0) for sl in characteristic_slices(dists, params.r_max, params.dr)]
    axis = params.axis()
    grid = symplectic_fourier(slices, axis, axis, method=params.method)
    grid.metadata.update({"gamma0": lo.gamma0, "eta": det.eta, "detector": det.kind})
    return TomographyResult(dists, slices, grid)


def reconstruct(state, lo: LocalOscillator, det: DetectorModel, params: GridParams = GridParams()) -> WignerGrid:
    """Observed Wigner function W'(q, p) before any eta rescaling."""
    return run_tomography(state, lo, det, params).grid
