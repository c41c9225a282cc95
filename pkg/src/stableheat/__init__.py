"""Simulation and verification toolkit for the stochastic heat equation

    dX = (1/2) Lap X dt + G(X) dt + H(X-) dL

on a periodic 1-D grid, where L is a one-sided alpha-stable space-time
noise (1 < alpha < 2, no negative jumps), G is Lipschitz and H is
beta-Hoelder and nondecreasing.

Subpackages
-----------
noise         noise models, exact stable sampling, jump streams, thinning
kernel        heat kernel and semigroup operations on the periodic grid
coefficients  (G, H) pairs, parameter sets, uniqueness gate
integrator    splitting scheme, single and coupled (shared-noise) runs
yamada_watanabe  smoothed absolute-value test functions and mollifiers
experiments   statistical estimators and monitors
acceptance    the executable acceptance suite
cli           command line entry point
"""

__version__ = "0.1.0"

from . import noise, kernel, coefficients, integrator, yamada_watanabe, experiments

__all__ = [
    "noise",
    "kernel",
    "coefficients",
    "integrator",
    "yamada_watanabe",
    "experiments",
    "__version__",
]
