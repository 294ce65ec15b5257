"""Gaussian analytic functions with inverse-Toeplitz coefficient covariance.

Zero sets of ``f(z) = sum_n xi_n z^(n-1)`` on the unit disc, where the
coefficient covariance is the inverse of a hermitian positive definite
Toeplitz matrix, together with the kernel, intensity and Monte Carlo
machinery needed to check them against the Bergman determinantal law.
"""

from gafzeros.model import DomainError, ModelSpec, NotPositiveDefiniteError

__version__ = "0.1.0"

__all__ = ["DomainError", "ModelSpec", "NotPositiveDefiniteError", "__version__"]
