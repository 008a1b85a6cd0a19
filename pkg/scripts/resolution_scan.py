"""Reconstruction error of a coherent state as the local-oscillator amplitude grows.

For each gamma0 the reconstructed grid is compared with the finite-resolution
closed form and with the undistorted coherent state.  Output: CSV on stdout.

    python3 scripts/resolution_scan.py [--gamma0 25 50 100 200] [--alpha 2]
"""
import argparse

import numpy as np

from homodyne_lab import CoherentSpec, DetectorModel, GridParams, KernelParams, LocalOscillator, coherent_wigner, reconstruct
from homodyne_lab.distortion import coherent_single_mode_observed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma0", type=float, nargs="+", default=[25.0, 50.0, 100.0, 200.0])
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--eta", type=float, default=1.0)
    args = ap.parse_args()
    gamma = np.array([1.0, 0.0])
    phi = np.array([args.alpha, 0.5])
    state = coherent_wigner(CoherentSpec(phi))
    det = DetectorModel("single-mode", args.eta)
    print("gamma0,dx,sup_error_finite_dx,sup_error_zero_dx,normalization")
    for g0 in args.gamma0:
        grid = reconstruct(state, LocalOscillator(g0, 0.0, gamma), det, GridParams())
        Q, P = np.meshgrid(grid.q, grid.p, indexing="ij")
        finite = coherent_single_mode_observed(phi, gamma, KernelParams.from_gamma0(g0, args.eta)).observed(Q, P)
        ideal = coherent_single_mode_observed(phi, gamma, KernelParams(1e-12, args.eta)).observed(Q, P)
        e1 = np.max(np.abs(grid.values - finite))
        e0 = np.max(np.abs(grid.values - ideal))
        print(f"{g0:g},{1 / g0:.6g},{e1:.6e},{e0:.6e},{grid.normalization():.12f}")


if __name__ == "__main__":
    main()
