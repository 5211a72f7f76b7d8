"""Conjugate exponential-family models for the two-block Gibbs sampler.

Each model describes a pair ``X | theta`` (likelihood) and ``theta`` (conjugate
prior).  The Gibbs scan draws ``theta | x`` from the posterior and then a fresh
``Y | theta`` from the likelihood, which makes ``x -> Y`` a Markov chain on the
data space whose stationary law is the prior predictive (marginal) of ``X``.

For all conjugate pairs handled here the first two conditional moments are
polynomials::

    E(X | theta)   = a theta + b          E(theta | X)   = f X + g
    E(X^2 | theta) = c theta^2 + d theta + e
    E(theta^2 | X) = h X^2 + j X + k

and :class:`MomentConstants` stores the ten coefficients.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np
from scipy import stats

from .errors import DomainError, InvalidHyperparameterError

FAMILIES = ("gaussian", "beta_binomial", "poisson_gamma")

_HYPERPARAMETERS = {
    "gaussian": ("nu", "sigma2", "tau2"),
    "beta_binomial": ("n", "alpha", "beta"),
    "poisson_gamma": ("alpha", "beta"),
}


@dataclass(frozen=True)
class MomentConstants:
    """Polynomial coefficients of the conditional first and second moments.

    ``a``-``e`` describe the likelihood moments in ``theta``; ``f``-``k`` the
    posterior moments in ``X``.  Families other than the three built in can be
    handled by filling these in by hand.
    """

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    g: float
    h: float
    j: float
    k: float

    @property
    def ch(self) -> float:
        return self.c * self.h

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    def check_valid(self, theta_grid, x_grid, atol: float = 1e-12) -> None:
        """Raise if either conditional variance is negative somewhere on the grids."""
        if self.c < 0 or self.h < 0:
            raise InvalidHyperparameterError(
                f"c and h must be nonnegative, got c={self.c}, h={self.h}"
            )
        t = np.asarray(theta_grid, dtype=float)
        var_x = self.c * t**2 + self.d * t + self.e - (self.a * t + self.b) ** 2
        if np.any(var_x < -atol):
            bad = t[np.argmin(var_x)]
            raise InvalidHyperparameterError(f"Var(X | theta) < 0 at theta={bad}")
        x = np.asarray(x_grid, dtype=float)
        var_t = self.h * x**2 + self.j * x + self.k - (self.f * x + self.g) ** 2
        if np.any(var_t < -atol):
            bad = x[np.argmin(var_t)]
            raise InvalidHyperparameterError(f"Var(theta | X) < 0 at X={bad}")


@dataclass(frozen=True)
class ModelSpec:
    """A conjugate model: family tag plus its hyperparameters.

    Gaussian: ``nu`` (prior mean), ``sigma2`` (likelihood variance), ``tau2``
    (prior variance).  Beta/Binomial: ``n`` trials, ``alpha``, ``beta``.
    Poisson/Gamma: prior shape ``alpha`` and rate ``beta``.
    """

    family: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidHyperparameterError(
                f"unknown family {self.family!r}; expected one of {FAMILIES}"
            )
        expected = set(_HYPERPARAMETERS[self.family])
        if set(self.params) != expected:
            raise InvalidHyperparameterError(
                f"{self.family} needs hyperparameters {sorted(expected)}, "
                f"got {sorted(self.params)}"
            )
        clean = {}
        for key, value in self.params.items():
            value = float(value)
            if not math.isfinite(value):
                raise InvalidHyperparameterError(f"{key} must be finite, got {value}")
            if key != "nu" and value <= 0:
                raise InvalidHyperparameterError(f"{key} must be positive, got {value}")
            clean[key] = value
        if self.family == "beta_binomial":
            n = clean["n"]
            if n != int(n):
                raise InvalidHyperparameterError(f"n must be an integer, got {n}")
            clean["n"] = int(n)
        object.__setattr__(self, "params", clean)

    @classmethod
    def gaussian(cls, nu: float, sigma2: float, tau2: float) -> "ModelSpec":
        return cls("gaussian", {"nu": nu, "sigma2": sigma2, "tau2": tau2})

    @classmethod
    def beta_binomial(cls, n: int, alpha: float, beta: float) -> "ModelSpec":
        return cls("beta_binomial", {"n": n, "alpha": alpha, "beta": beta})

    @classmethod
    def poisson_gamma(cls, alpha: float, beta: float) -> "ModelSpec":
        return cls("poisson_gamma", {"alpha": alpha, "beta": beta})

    def __getitem__(self, key):
        return self.params[key]

    @property
    def is_discrete(self) -> bool:
        return self.family != "gaussian"

    def describe(self) -> str:
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family}({inner})"


WORKED_MODEL = ModelSpec.gaussian(0.0, 0.25, 0.25)


def moments_gaussian(nu: float, sigma2: float, tau2: float) -> MomentConstants:
    if not sigma2 > 0 or not tau2 > 0:
        raise InvalidHyperparameterError(
            f"variances must be positive, got sigma2={sigma2}, tau2={tau2}"
        )
    total = sigma2 + tau2
    f = tau2 / total
    g = sigma2 * nu / total
    post_var = sigma2 * tau2 / total
    return MomentConstants(
        a=1.0, b=0.0, c=1.0, d=0.0, e=sigma2,
        f=f, g=g, h=f * f, j=2.0 * f * g, k=g * g + post_var,
    )


def moments_beta_binomial(n: int, alpha: float, beta: float) -> MomentConstants:
    if n < 1 or n != int(n) or not alpha > 0 or not beta > 0:
        raise InvalidHyperparameterError(
            f"need integer n >= 1 and alpha, beta > 0; got n={n}, alpha={alpha}, beta={beta}"
        )
    s = alpha + beta + n
    s2 = s * (s + 1.0)
    return MomentConstants(
        a=float(n), b=0.0, c=float(n * (n - 1)), d=float(n), e=0.0,
        f=1.0 / s, g=alpha / s,
        h=1.0 / s2, j=(2.0 * alpha + 1.0) / s2, k=alpha * (alpha + 1.0) / s2,
    )


def moments_poisson_gamma(alpha: float, beta: float) -> MomentConstants:
    if not alpha > 0 or not beta > 0:
        raise InvalidHyperparameterError(
            f"alpha and beta must be positive, got alpha={alpha}, beta={beta}"
        )
    rate = beta + 1.0
    r2 = rate * rate
    return MomentConstants(
        a=1.0, b=0.0, c=1.0, d=1.0, e=0.0,
        f=1.0 / rate, g=alpha / rate,
        h=1.0 / r2, j=(2.0 * alpha + 1.0) / r2, k=alpha * (alpha + 1.0) / r2,
    )


def moment_constants(model: ModelSpec) -> MomentConstants:
    p = model.params
    if model.family == "gaussian":
        return moments_gaussian(p["nu"], p["sigma2"], p["tau2"])
    if model.family == "beta_binomial":
        return moments_beta_binomial(p["n"], p["alpha"], p["beta"])
    return moments_poisson_gamma(p["alpha"], p["beta"])


@dataclass(frozen=True)
class MarginalLaw:
    """Stationary law of the x-chain (the prior predictive of ``X``).

    ``dist`` is a frozen scipy distribution: normal for the Gaussian model,
    beta-binomial for Beta/Binomial and negative binomial for Poisson/Gamma.
    """

    family: str
    dist: object

    @property
    def discrete(self) -> bool:
        return self.family != "gaussian"

    @property
    def mean(self) -> float:
        return float(self.dist.mean())

    @property
    def variance(self) -> float:
        return float(self.dist.var())

    def density(self, x):
        """Density (continuous) or pmf (discrete) at ``x``."""
        if self.discrete:
            return self.dist.pmf(x)
        return self.dist.pdf(x)

    def cdf(self, x):
        return self.dist.cdf(x)

    def sample(self, rng: np.random.Generator, size=None):
        return self.dist.rvs(size=size, random_state=rng)


def marginal_law(model: ModelSpec) -> MarginalLaw:
    p = model.params
    if model.family == "gaussian":
        dist = stats.norm(loc=p["nu"], scale=math.sqrt(p["sigma2"] + p["tau2"]))
    elif model.family == "beta_binomial":
        dist = stats.betabinom(p["n"], p["alpha"], p["beta"])
    else:
        # Gamma(alpha, rate beta) mixture of Poissons is NB(alpha, beta / (beta + 1))
        dist = stats.nbinom(p["alpha"], p["beta"] / (p["beta"] + 1.0))
    return MarginalLaw(model.family, dist)


def check_support(model: ModelSpec, x) -> np.ndarray:
    """Return ``x`` as an array after checking it lies in the data support."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"state must be finite, got {x!r}")
    if model.is_discrete:
        if np.any(arr < 0) or np.any(arr != np.round(arr)):
            raise DomainError(f"{model.family} states are nonnegative integers, got {x!r}")
        if model.family == "beta_binomial" and np.any(arr > model["n"]):
            raise DomainError(f"beta_binomial states lie in 0..{model['n']}, got {x!r}")
    return arr


def sample_posterior(model: ModelSpec, x, rng: np.random.Generator):
    """Draw ``theta | x`` for each entry of ``x``."""
    x = check_support(model, x)
    p = model.params
    if model.family == "gaussian":
        total = p["sigma2"] + p["tau2"]
        mean = (p["tau2"] * x + p["sigma2"] * p["nu"]) / total
        return rng.normal(mean, math.sqrt(p["sigma2"] * p["tau2"] / total))
    if model.family == "beta_binomial":
        return rng.beta(p["alpha"] + x, p["beta"] + p["n"] - x)
    return rng.gamma(p["alpha"] + x, 1.0 / (p["beta"] + 1.0))


def sample_likelihood(model: ModelSpec, theta, rng: np.random.Generator):
    """Draw ``X | theta`` for each entry of ``theta``."""
    p = model.params
    if model.family == "gaussian":
        return rng.normal(theta, math.sqrt(p["sigma2"]))
    if model.family == "beta_binomial":
        return np.asarray(rng.binomial(p["n"], theta), dtype=float)
    return np.asarray(rng.poisson(theta), dtype=float)


def sample_conditionals(model: ModelSpec, x, rng: np.random.Generator):
    """One Gibbs scan from state ``x``: returns ``(theta_draw, x_next)``.

    Works elementwise when ``x`` is an array, which is how replicate
    ensembles are advanced.
    """
    theta = sample_posterior(model, x, rng)
    x_next = sample_likelihood(model, theta, rng)
    if np.ndim(x) == 0:
        return float(theta), float(x_next)
    return theta, x_next
