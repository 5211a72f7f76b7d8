"""Minorization of the Gaussian x-chain on a quadratic small set.

For the Gaussian model the x-chain is an AR(1) process,
``Y | x ~ N(rho x + offset, s2)``.  On ``C = {x : (x - u)^2 <= w}`` the
conditional mean ranges over an interval of half-width ``rho sqrt(w)`` around
``m0 = rho u + offset``, so the pointwise infimum of the transition density is

    g(y) = N(|y - m0| + rho sqrt(w); 0, s2)

with total mass ``eps = 2 Phi(-rho sqrt(w) / sqrt(s2))``.  The residual law is
``q = g / eps``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridConstructionError, InapplicableBoundError, InvalidSmallSetError
from .models import ModelSpec, moments_gaussian
from .normal import norm_cdf, normal_density

# membership slack for grid points placed exactly on the small-set boundary
_BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class Ar1Law:
    """One-step law ``Y | x ~ N(rho * x + offset, s2)``."""

    rho: float
    offset: float
    s2: float

    def __post_init__(self):
        if not self.s2 > 0:
            raise ValueError(f"s2 must be positive, got {self.s2}")

    @classmethod
    def from_model(cls, model: ModelSpec) -> "Ar1Law":
        if model.family != "gaussian":
            raise InapplicableBoundError(
                f"the AR(1) representation exists only for the gaussian family, not {model.family}"
            )
        sigma2, tau2 = model["sigma2"], model["tau2"]
        mc = moments_gaussian(model["nu"], sigma2, tau2)
        return cls(rho=mc.f, offset=mc.g, s2=sigma2 + sigma2 * tau2 / (sigma2 + tau2))

    @property
    def sd(self) -> float:
        return math.sqrt(self.s2)

    @property
    def stationary_mean(self) -> float:
        return self.offset / (1.0 - self.rho)

    @property
    def stationary_variance(self) -> float:
        return self.s2 / (1.0 - self.rho**2)


def transition_density(law: Ar1Law, x, y):
    return normal_density(y, law.rho * np.asarray(x, dtype=float) + law.offset, law.s2)


@dataclass(frozen=True)
class MinorizationCertificate:
    w: float
    u: float
    eps: float
    rho: float
    offset: float
    s2: float

    @property
    def radius(self) -> float:
        return math.sqrt(self.w)

    @property
    def center_mean(self) -> float:
        return self.rho * self.u + self.offset

    def in_small_set(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x - self.u) ** 2 <= self.w * (1.0 + _BOUNDARY_RTOL)

    def minorant(self, y):
        """Unnormalized residual ``g(y) = eps * q(y)``."""
        y = np.asarray(y, dtype=float)
        dist = np.abs(y - self.center_mean) + self.rho * self.radius
        return normal_density(dist, 0.0, self.s2)

    @property
    def mass(self) -> float:
        """Total mass of the minorant, recomputed from ``(rho, w, s2)``."""
        return 2.0 * norm_cdf(-self.rho * self.radius / math.sqrt(self.s2))

    def residual_density(self, y):
        """Normalized residual ``q``; independent of the stored ``eps``."""
        return self.minorant(y) / self.mass

    def as_dict(self) -> dict[str, float]:
        return {
            "u": self.u, "w": self.w, "eps": self.eps,
            "rho": self.rho, "offset": self.offset, "s2": self.s2,
        }


def minorization_mass(law: Ar1Law, w: float) -> float:
    return 2.0 * norm_cdf(-law.rho * math.sqrt(w) / law.sd)


def build_minorization(law: Ar1Law, u: float, w: float) -> MinorizationCertificate:
    if not w > 0:
        raise InvalidSmallSetError(f"small-set parameter w must be positive, got {w}")
    eps = minorization_mass(law, w)
    return MinorizationCertificate(
        w=float(w), u=float(u), eps=eps, rho=law.rho, offset=law.offset, s2=law.s2
    )


@dataclass(frozen=True)
class DominationReport:
    margin: float
    x: float
    y: float

    @property
    def passed(self) -> bool:
        return self.margin >= -1e-12


def check_domination(
    cert: MinorizationCertificate, law: Ar1Law, x_grid, y_grid
) -> DominationReport:
    """Worst ``k_x(y) - eps q(y)`` over the grid and where it occurs."""
    x = np.asarray(x_grid, dtype=float).ravel()
    y = np.asarray(y_grid, dtype=float).ravel()
    outside = ~cert.in_small_set(x)
    if np.any(outside):
        raise GridConstructionError(
            f"x grid leaves the small set (u={cert.u}, w={cert.w}): {x[outside][:5]}"
        )
    k = transition_density(law, x[:, None], y[None, :])
    margin = k - cert.eps * cert.residual_density(y)[None, :]
    i, jdx = np.unravel_index(np.argmin(margin), margin.shape)
    return DominationReport(float(margin[i, jdx]), float(x[i]), float(y[jdx]))
