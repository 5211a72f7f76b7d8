"""Standard normal density and distribution function.

``norm_cdf`` goes through the complementary error function so that the lower
tail keeps full relative precision; ``0.5 * (1 + erf(z / sqrt 2))`` would lose
it to cancellation for very negative ``z``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def norm_cdf(z):
    """Standard normal CDF, scalar or array."""
    if np.ndim(z) == 0:
        return 0.5 * math.erfc(-float(z) / SQRT2)
    return 0.5 * special.erfc(-np.asarray(z, dtype=float) / SQRT2)


def norm_pdf(z):
    if np.ndim(z) == 0:
        return INV_SQRT_2PI * math.exp(-0.5 * float(z) ** 2)
    z = np.asarray(z, dtype=float)
    return INV_SQRT_2PI * np.exp(-0.5 * z * z)


def normal_density(y, mean, var):
    """Density of N(mean, var) at ``y``."""
    sd = np.sqrt(var)
    return norm_pdf((np.asarray(y, dtype=float) - mean) / sd) / sd
