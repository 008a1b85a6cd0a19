"""Command-line front end.

    homodyne-lab analytic CONFIG --out DIR
    homodyne-lab simulate CONFIG --out DIR
    homodyne-lab compare  CONFIG --out DIR
    homodyne-lab figures [CONFIG] --out DIR

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure or a failed comparison.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .config import (
    ConfigError,
    ExperimentConfig,
    build_detector,
    build_grid,
    build_kernel,
    build_lo,
    build_state,
    load_config,
    lo_mode,
    state_mode,
    parse_vector,
)
from .distortion import (
    MismatchSpec,
    coherent_bucket_observed,
    coherent_single_mode_observed,
    fock_observed_smeared,
    fock_observed_wigner,
    moment_stats,
    purity,
    sigma_min,
    squeezed_observed,
    squeezed_separation,
    squeezed_trace_coeffs,
    unscale,
)
from .gaussian_core import NotTraceNormalizable
from .homodyne import QuadratureConvergenceError
from .states import SqueezeSpec
from .tomography import SCHEMA_VERSION, AngularAliasingError, WignerGrid, fmt17, run_tomography

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2
NUMERICAL_ERRORS = (
    QuadratureConvergenceError,
    AngularAliasingError,
    NotTraceNormalizable,
    np.linalg.LinAlgError,
    ZeroDivisionError,
    FloatingPointError,
)


class ComparisonFailed(RuntimeError):
    pass


# --- analytic side --------------------------------------------------------------------------------


def analytic_closure(cfg: ExperimentConfig):
    """Closed-form observed Wigner function W'(q, p) in reconstructed (unscaled) coordinates."""
    kp = build_kernel(cfg)
    gamma = lo_mode(cfg)
    kind = cfg.state.kind
    if kind in ("vacuum", "coherent"):
        phi = np.zeros(cfg.state.modes, complex) if kind == "vacuum" else parse_vector(cfg.state.phi, "state.phi")
        if cfg.detector.kind == "bucket":
            return coherent_bucket_observed(phi, gamma, kp).observed
        return coherent_single_mode_observed(phi, gamma, kp).observed
    mu = MismatchSpec(complex(np.vdot(gamma, state_mode(cfg))))
    if kind == "fock":
        return fock_observed_smeared(int(cfg.state.n), mu, kp)
    coeffs = squeezed_trace_coeffs(squeezed_separation(SqueezeSpec(float(cfg.state.xi), state_mode(cfg)), gamma))
    return unscale(squeezed_observed(coeffs, kp), kp.eta)


def analytic_grid(cfg: ExperimentConfig) -> WignerGrid:
    axis = build_grid(cfg).axis()
    grid = WignerGrid.from_function(analytic_closure(cfg), axis, axis, source="closed form", state=cfg.state.kind)
    grid.metadata.update({"gamma0": float(cfg.lo.gamma0), "eta": float(cfg.detector.eta), "detector": cfg.detector.kind})
    return grid


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt17(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def figure_curves(cfg: ExperimentConfig) -> dict[str, str]:
    """Curve CSVs: observed Fock family, purity and minimum standard deviation of squeezed vacuum."""
    a = cfg.analytic
    q = np.linspace(-a.curve_q_max, a.curve_q_max, int(a.curve_points))
    rows = []
    for m in a.mu_values:
        w = fock_observed_wigner(int(a.fock_n), MismatchSpec(float(m)))(q, np.zeros_like(q))
        rows += [(m, qi, wi) for qi, wi in zip(q, w)]
    xi = np.linspace(0.0, a.xi_max, int(a.xi_points))
    mu_p = MismatchSpec(float(np.sqrt(a.purity_mu2)))
    sig_rows = []
    for m in a.sigma_mu_values:
        sig_rows += [(m, x, s) for x, s in zip(xi, sigma_min(xi, MismatchSpec(float(m))))]
    return {
        "fock_family.csv": _csv(("mu", "q", "W"), rows),
        "squeezed_purity.csv": _csv(("xi", "purity"), zip(xi, purity(xi, mu_p))),
        "squeezed_sigma_min.csv": _csv(("mu", "xi", "sigma_min"), sig_rows),
    }


# --- comparison report ------------------------------------------------------------------------------


@dataclass
class ComparisonReport:
    sup_error: float | None = None
    l2_error: float | None = None
    normalization_residual_simulated: float | None = None
    normalization_residual_analytic: float | None = None
    stats_simulated: dict | None = None
    stats_analytic: dict | None = None
    tolerances: dict = field(default_factory=dict)
    passed: bool = False
    failure: dict | None = None
    warnings: list = field(default_factory=list)

    def to_json(self) -> str:
        def enc(v):
            if isinstance(v, float):
                return fmt17(v)
            if isinstance(v, dict):
                return {k: enc(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            return v

        body = {"schema_version": SCHEMA_VERSION, **{k: enc(v) for k, v in asdict(self).items()}}
        return json.dumps(body, indent=1, sort_keys=True) + "\n"


def _stats(grid: WignerGrid) -> dict:
    s = moment_stats(grid)
    return {"purity": s.purity, "sigma_min": s.sigma_min, "sigma_max": s.sigma_max, "centroid": list(s.centroid), "normalization": s.normalization}


def compare_grids(sim: WignerGrid, ana: WignerGrid, cfg: ExperimentConfig) -> ComparisonReport:
    diff = sim.values - ana.values
    l2 = np.sqrt(np.trapezoid(np.trapezoid(diff**2, sim.p, axis=1), sim.q) / (2 * np.pi))
    rep = ComparisonReport(
        sup_error=float(np.max(np.abs(diff))),
        l2_error=float(l2),
        normalization_residual_simulated=float(sim.normalization() - 1.0),
        normalization_residual_analytic=float(ana.normalization() - 1.0),
        stats_simulated=_stats(sim),
        stats_analytic=_stats(ana),
        tolerances={"sup_error": float(cfg.compare.sup_tol), "normalization": float(cfg.compare.norm_tol)},
    )
    rep.passed = rep.sup_error <= cfg.compare.sup_tol and abs(rep.normalization_residual_simulated) <= cfg.compare.norm_tol
    return rep


# --- commands -----------------------------------------------------------------------------------------


def _write(out: Path, files: dict[str, str]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name in sorted(files):
        (out / name).write_text(files[name])


def _grid_files(prefix: str, grid: WignerGrid) -> dict[str, str]:
    return {f"{prefix}.csv": grid.to_csv(), f"{prefix}.json": grid.to_json()}


def cmd_analytic(cfg: ExperimentConfig, out: Path) -> int:
    files = _grid_files("analytic_wigner", analytic_grid(cfg))
    files.update(figure_curves(cfg))
    _write(out, files)
    return EXIT_OK


def cmd_figures(cfg: ExperimentConfig, out: Path) -> int:
    _write(out, figure_curves(cfg))
    return EXIT_OK


def _simulate(cfg: ExperimentConfig):
    return run_tomography(build_state(cfg), build_lo(cfg), build_detector(cfg), build_grid(cfg))


def _simulation_files(result) -> dict[str, str]:
    files = _grid_files("reconstructed_wigner", result.grid)
    for k, d in enumerate(result.distributions):
        files[f"quadrature_theta_{k:03d}.csv"] = _csv(("theta", "x", "R"), ((d.theta, x, r) for x, r in zip(d.x, d.R)))
    return files


def cmd_simulate(cfg: ExperimentConfig, out: Path) -> int:
    _write(out, _simulation_files(_simulate(cfg)))
    return EXIT_OK


def cmd_compare(cfg: ExperimentConfig, out: Path) -> int:
    files = {}
    caught = []
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result = _simulate(cfg)
            ana = analytic_grid(cfg)
        files.update(_simulation_files(result))
        files.update(_grid_files("analytic_wigner", ana))
        report = compare_grids(result.grid, ana, cfg)
    except NUMERICAL_ERRORS as exc:
        report = ComparisonReport(failure={"type": type(exc).__name__, "message": str(exc)})
    report.warnings = sorted({str(w.message) for w in caught})
    files["comparison_report.json"] = report.to_json()
    _write(out, files)
    if report.failure is not None:
        raise ComparisonFailed(f"pipeline failed: {report.failure['type']}: {report.failure['message']}")
    if not report.passed:
        raise ComparisonFailed(f"comparison failed: sup error {report.sup_error:.3e}, normalization residual {report.normalization_residual_simulated:.3e}")
    return EXIT_OK


COMMANDS = {"analytic": cmd_analytic, "simulate": cmd_simulate, "compare": cmd_compare, "figures": cmd_figures}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homodyne-lab", description="Homodyne tomography with finite local-oscillator power.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", nargs="?" if name == "figures" else None, help="YAML experiment configuration")
        p.add_argument("--out", required=True, type=Path, help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        return COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ComparisonFailed as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NUMERICAL
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
