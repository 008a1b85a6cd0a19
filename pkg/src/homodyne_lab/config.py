"""Experiment configuration: YAML file to validated dataclasses."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .distortion import KernelParams
from .gaussian_core import orthogonal_complement
from .homodyne import DetectorModel, LocalOscillator
from .states import CoherentSpec, FockState, SqueezeSpec, coherent_wigner, squeezed_vacuum, vacuum
from .tomography import GridParams


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class StateConfig:
    kind: str = "vacuum"
    modes: int = 2
    phi: list | None = None
    n: int = 1
    mode: list | None = None
    mu: float | None = None
    xi: float = 1.0


@dataclass
class LOConfig:
    gamma0: float = 200.0
    Gamma: list | None = None
    n_theta: int = 64


@dataclass
class DetectorConfig:
    kind: str = "single-mode"
    eta: float = 1.0
    mode: list | None = None


@dataclass
class GridConfig:
    range: float = 6.0
    points: int = 241


@dataclass
class NumericsConfig:
    n_phi: int | None = None
    x_max: float = 12.0
    r_max: float = 16.0
    dr: float = 0.01
    epsilon_reg: float = 3.0
    method: str = "fbp"


@dataclass
class AnalyticConfig:
    fock_n: int = 1
    mu_values: list = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    curve_q_max: float = 4.0
    curve_points: int = 161
    purity_mu2: float = 0.5
    xi_max: float = 4.0
    xi_points: int = 81
    sigma_mu_values: list = field(default_factory=lambda: [0.0, 0.5, 0.75, 1.0])


@dataclass
class CompareConfig:
    sup_tol: float = 1e-2
    norm_tol: float = 1e-3


@dataclass
class ExperimentConfig:
    state: StateConfig = field(default_factory=StateConfig)
    lo: LOConfig = field(default_factory=LOConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    analytic: AnalyticConfig = field(default_factory=AnalyticConfig)
    compare: CompareConfig = field(default_factory=CompareConfig)


def _build(cls, data, path: str):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(path, "expected a mapping")
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        name = f"{path}.{key}" if path else str(key)
        if key not in known:
            raise ConfigError(name, "unknown key")
        sub = known[key].default_factory if known[key].default_factory is not dataclasses.MISSING else None
        if sub is not None and dataclasses.is_dataclass(sub):
            kwargs[key] = _build(sub, value, name)
        else:
            kwargs[key] = value
    return cls(**kwargs)


def parse_config(data) -> ExperimentConfig:
    cfg = _build(ExperimentConfig, data or {}, "")
    validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"not valid YAML: {exc}") from exc
    return parse_config(data)


def parse_vector(value, name: str, dim: int | None = None) -> np.ndarray:
    try:
        vec = np.array([complex(v) for v in value], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, "expected a list of numbers or complex strings like '1+2j'") from exc
    if dim is not None and vec.shape[0] != dim:
        raise ConfigError(name, f"expected {dim} entries, got {vec.shape[0]}")
    return vec


def _number(value, name: str, *, positive=False, integer=False, lo=None, hi=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, "expected a number")
    if integer and int(value) != value:
        raise ConfigError(name, "expected an integer")
    if positive and not value > 0:
        raise ConfigError(name, "must be positive")
    if lo is not None and value < lo:
        raise ConfigError(name, f"must be >= {lo}")
    if hi is not None and value > hi:
        raise ConfigError(name, f"must be <= {hi}")
    return value


def validate(cfg: ExperimentConfig) -> None:
    """Check every field against the module preconditions; raises ConfigError."""
    s = cfg.state
    if s.kind not in ("vacuum", "coherent", "fock", "squeezed"):
        raise ConfigError("state.kind", f"unknown state kind {s.kind!r}")
    _number(s.modes, "state.modes", integer=True, lo=1)
    _number(s.n, "state.n", integer=True, lo=0)
    _number(s.xi, "state.xi", lo=0)
    if s.mu is not None:
        _number(s.mu, "state.mu", lo=0, hi=1)
        if s.modes < 2 and s.mu < 1:
            raise ConfigError("state.mu", "mode mismatch needs at least two modes")
    if s.kind == "coherent" and s.phi is None:
        raise ConfigError("state.phi", "coherent state needs an amplitude vector")
    if s.phi is not None:
        parse_vector(s.phi, "state.phi", s.modes)
    if s.mode is not None:
        m = parse_vector(s.mode, "state.mode", s.modes)
        if np.linalg.norm(m) == 0:
            raise ConfigError("state.mode", "mode vector must be non-zero")
    _number(cfg.lo.gamma0, "lo.gamma0", positive=True)
    _number(cfg.lo.n_theta, "lo.n_theta", integer=True, lo=2)
    if cfg.lo.Gamma is not None:
        g = parse_vector(cfg.lo.Gamma, "lo.Gamma", s.modes)
        if np.linalg.norm(g) == 0:
            raise ConfigError("lo.Gamma", "mode vector must be non-zero")
    d = cfg.detector
    if d.kind not in ("bucket", "single-mode"):
        raise ConfigError("detector.kind", f"unknown detector kind {d.kind!r}")
    _number(d.eta, "detector.eta", positive=True, hi=1)
    if d.mode is not None:
        parse_vector(d.mode, "detector.mode", s.modes)
    _number(cfg.grid.range, "grid.range", positive=True)
    _number(cfg.grid.points, "grid.points", integer=True, lo=2)
    n = cfg.numerics
    if n.n_phi is not None:
        _number(n.n_phi, "numerics.n_phi", integer=True, lo=8)
    _number(n.x_max, "numerics.x_max", positive=True)
    _number(n.r_max, "numerics.r_max", positive=True)
    _number(n.dr, "numerics.dr", positive=True)
    _number(n.epsilon_reg, "numerics.epsilon_reg", positive=True)
    if n.method not in ("fbp", "cartesian"):
        raise ConfigError("numerics.method", f"unknown method {n.method!r}")
    a = cfg.analytic
    _number(a.fock_n, "analytic.fock_n", integer=True, lo=0)
    for i, v in enumerate(a.mu_values):
        _number(v, f"analytic.mu_values[{i}]", lo=0, hi=1)
    for i, v in enumerate(a.sigma_mu_values):
        _number(v, f"analytic.sigma_mu_values[{i}]", lo=0, hi=1)
    _number(a.purity_mu2, "analytic.purity_mu2", lo=0, hi=1)
    _number(a.xi_max, "analytic.xi_max", positive=True)
    _number(a.xi_points, "analytic.xi_points", integer=True, lo=2)
    _number(a.curve_q_max, "analytic.curve_q_max", positive=True)
    _number(a.curve_points, "analytic.curve_points", integer=True, lo=2)
    _number(cfg.compare.sup_tol, "compare.sup_tol", positive=True)
    _number(cfg.compare.norm_tol, "compare.norm_tol", positive=True)


# --- objects ---------------------------------------------------------------------------------


def lo_mode(cfg: ExperimentConfig) -> np.ndarray:
    m = cfg.state.modes
    if cfg.lo.Gamma is None:
        g = np.zeros(m, dtype=complex)
        g[0] = 1.0
        return g
    g = parse_vector(cfg.lo.Gamma, "lo.Gamma", m)
    return g / np.linalg.norm(g)


def state_mode(cfg: ExperimentConfig) -> np.ndarray:
    """Mode of a Fock or squeezed state: explicit, or mu Gamma + nu Lambda with Lambda orthogonal to Gamma."""
    s = cfg.state
    gamma = lo_mode(cfg)
    if s.mode is not None:
        v = parse_vector(s.mode, "state.mode", s.modes)
        return v / np.linalg.norm(v)
    mu = 1.0 if s.mu is None else float(s.mu)
    if mu >= 1.0:
        return gamma
    lam = orthogonal_complement(gamma)[:, 0]
    return mu * gamma + np.sqrt(1.0 - mu * mu) * lam


def build_state(cfg: ExperimentConfig):
    s = cfg.state
    if s.kind == "vacuum":
        return vacuum(s.modes)
    if s.kind == "coherent":
        return coherent_wigner(CoherentSpec(parse_vector(s.phi, "state.phi", s.modes)))
    if s.kind == "fock":
        return FockState(state_mode(cfg), int(s.n))
    return squeezed_vacuum(SqueezeSpec(float(s.xi), state_mode(cfg)))


def build_lo(cfg: ExperimentConfig) -> LocalOscillator:
    return LocalOscillator(float(cfg.lo.gamma0), 0.0, lo_mode(cfg))


def build_detector(cfg: ExperimentConfig) -> DetectorModel:
    d = cfg.detector
    mode = None if d.mode is None else parse_vector(d.mode, "detector.mode", cfg.state.modes)
    return DetectorModel(d.kind, float(d.eta), mode)


def build_grid(cfg: ExperimentConfig) -> GridParams:
    n = cfg.numerics
    return GridParams(
        q_range=float(cfg.grid.range),
        points=int(cfg.grid.points),
        n_theta=int(cfg.lo.n_theta),
        x_max=float(n.x_max),
        r_max=float(n.r_max),
        dr=float(n.dr),
        n_phi=None if n.n_phi is None else int(n.n_phi),
        method=n.method,
    )


def build_kernel(cfg: ExperimentConfig) -> KernelParams:
    return KernelParams.from_gamma0(float(cfg.lo.gamma0), float(cfg.detector.eta))
