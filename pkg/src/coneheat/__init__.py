"""coneheat: heat-equation numerics on exact Riemannian cones.

Link spectra, indicial/Fredholm combinatorics, discrete-asymptotics model
spaces, Bessel-mode heat kernels, graded-mesh Cauchy solvers, and weighted
norm diagnostics.
"""

__version__ = "0.1.0"
