"""Numerical laboratory for uniform L^p resolvent estimates of higher-order
elliptic operators on compact manifolds.

Modules:
    region      sector geometry of the spectral parameter z and zeta = z^m
    residue     residue / partial-fraction identities for 1/(tau^m - z^m)
    spectra     explicit model spectra (flat torus, Zoll spheres, custom files)
    multiplier  spectral multipliers, kernels, localized/nonlocal splitting
    probe       operator-norm probes and blow-up sequences
    oscint      cosphere convexity and oscillatory integrals
    acceptance  acceptance checks grouped into suites
    cli         command line entry point
    quad        vectorized adaptive Gauss-Legendre quadrature
    parallel    order-preserving parallel map
"""

__version__ = "0.1.0"


class LabError(Exception):
    """Base class for errors raised by the laboratory's operations."""


class SpectralCollision(LabError):
    pass


class CutoffProximity(LabError):
    pass


class QuadratureError(LabError):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved
