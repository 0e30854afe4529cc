"""Entropy-stable discontinuous Galerkin solver for compressible flow.

High-order flux-differencing discretizations of the compressible Euler and
Navier-Stokes equations on summation-by-parts nodes, blended with a sparse
positivity-preserving low-order scheme through elementwise and convex
flux-correction limiters.
"""

__version__ = "0.1.0"
