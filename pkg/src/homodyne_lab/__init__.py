"""Homodyne tomography with a finite-power local oscillator.

Forward model from input Wigner functionals to quadrature distributions,
tomographic inversion, and the closed-form distortions of coherent, Fock and
squeezed inputs.
"""
from .distortion import KernelParams, MismatchSpec
from .gaussian_core import GaussianForm, GaussianState
from .homodyne import DetectorModel, LocalOscillator, extract_R, quadrature_distributions
from .states import CoherentSpec, FockState, SqueezeSpec, coherent_wigner, squeezed_vacuum, vacuum
from .tomography import GridParams, WignerGrid, reconstruct, symplectic_fourier

__all__ = [
    "CoherentSpec",
    "DetectorModel",
    "FockState",
    "GaussianForm",
    "GaussianState",
    "GridParams",
    "KernelParams",
    "LocalOscillator",
    "MismatchSpec",
    "SqueezeSpec",
    "WignerGrid",
    "coherent_wigner",
    "extract_R",
    "quadrature_distributions",
    "reconstruct",
    "squeezed_vacuum",
    "symplectic_fourier",
    "vacuum",
]
