"""Ground truth for the Gaussian x-chain, plus simulation utilities.

The l-step law of the Gaussian x-chain is normal with closed-form mean and
variance, so the distance to stationarity can be computed exactly.  Because
that distance falls below float64 resolution around ``l = 25`` (the variance
gap shrinks like ``4^-l``), laws here carry mpmath numbers and
:func:`exact_tv` works at 50 significant digits.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np

from .errors import InapplicableOracleError, InsufficientPathError, VarianceWarning
from .models import MarginalLaw, ModelSpec, check_support, sample_conditionals

DPS = 50
REPLICATE_BLOCK = 1024


@dataclass(frozen=True)
class GaussianLaw:
    """Normal law; ``var == 0`` is a point mass.  Fields may be mpmath numbers."""

    mean: float
    var: float

    @property
    def is_point_mass(self) -> bool:
        return self.var == 0

    def cdf(self, x):
        return mpmath.ncdf(x, self.mean, mpmath.sqrt(self.var))


@dataclass(frozen=True)
class LStepLaw:
    l: int
    mean: mpmath.mpf
    variance: mpmath.mpf

    @property
    def law(self) -> GaussianLaw:
        return GaussianLaw(self.mean, self.variance)


def stationary_law(model: ModelSpec) -> GaussianLaw:
    if model.family != "gaussian":
        raise InapplicableOracleError(f"no closed-form Gaussian marginal for {model.family}")
    with mpmath.workdps(DPS):
        return GaussianLaw(mpmath.mpf(model["nu"]), mpmath.mpf(model["sigma2"]) + mpmath.mpf(model["tau2"]))


def exact_l_step_law(model: ModelSpec, x0: float, l: int) -> LStepLaw:
    """Law of ``X_l | X_0 = x0`` for the Gaussian x-chain."""
    if model.family != "gaussian":
        raise InapplicableOracleError(f"the exact l-step oracle is Gaussian-only, not {model.family}")
    if l < 0 or int(l) != l:
        raise ValueError(f"l must be a nonnegative integer, got {l}")
    with mpmath.workdps(DPS):
        sigma2, tau2, nu = (mpmath.mpf(model[k]) for k in ("sigma2", "tau2", "nu"))
        rho = tau2 / (sigma2 + tau2)
        offset = sigma2 * nu / (sigma2 + tau2)
        s2 = sigma2 + sigma2 * tau2 / (sigma2 + tau2)
        rl = rho ** int(l)
        mean = rl * mpmath.mpf(x0) + offset * (1 - rl) / (1 - rho)
        var = s2 * (1 - rl * rl) / (1 - rho * rho)
        return LStepLaw(int(l), mean, var)


def _crossings(a: GaussianLaw, b: GaussianLaw):
    """Real roots of ``log p_a(t) = log p_b(t)``."""
    m1, v1, m2, v2 = a.mean, a.var, b.mean, b.var
    if v1 == v2:
        return [(m1 + m2) / 2]
    qa = 1 / v2 - 1 / v1
    qb = 2 * (m1 / v1 - m2 / v2)
    qc = m2**2 / v2 - m1**2 / v1 + mpmath.log(v2 / v1)
    disc = qb * qb - 4 * qa * qc
    root = mpmath.sqrt(disc)
    # the numerically stable pair of quadratic roots
    q = -(qb + mpmath.sign(qb) * root) / 2 if qb != 0 else -root / 2
    roots = [q / qa, qc / q] if q != 0 else [mpmath.mpf(0)]
    return sorted(roots)


def exact_tv(a: GaussianLaw, b: GaussianLaw) -> float:
    """Total variation distance ``(1/2) int |p_a - p_b|`` between two normals.

    The densities cross at most twice; between consecutive crossings one
    density dominates, so the distance is a sum of CDF differences.
    """
    if a.is_point_mass or b.is_point_mass:
        if a.is_point_mass and b.is_point_mass:
            return 0.0 if a.mean == b.mean else 1.0
        return 1.0
    with mpmath.workdps(DPS):
        a = GaussianLaw(mpmath.mpf(a.mean), mpmath.mpf(a.var))
        b = GaussianLaw(mpmath.mpf(b.mean), mpmath.mpf(b.var))
        if a.mean == b.mean and a.var == b.var:
            return 0.0
        edges = [-mpmath.inf] + _crossings(a, b) + [mpmath.inf]
        total = mpmath.mpf(0)
        for lo, hi in zip(edges[:-1], edges[1:]):
            pa = (a.cdf(hi) if hi != mpmath.inf else 1) - (a.cdf(lo) if lo != -mpmath.inf else 0)
            pb = (b.cdf(hi) if hi != mpmath.inf else 1) - (b.cdf(lo) if lo != -mpmath.inf else 0)
            total += abs(pa - pb)
        return float(min(max(total / 2, 0), 1))


def exact_tv_to_stationarity(model: ModelSpec, x0: float, l: int) -> float:
    return exact_tv(exact_l_step_law(model, x0, l).law, stationary_law(model))


# ---------------------------------------------------------------- simulation

@dataclass(frozen=True)
class ChainPath:
    """Iterates ``X_0, ..., X_length`` of one Gibbs run, with the theta draws."""

    x0: float
    seed: int
    samples: np.ndarray
    thetas: np.ndarray = field(repr=False)

    @property
    def length(self) -> int:
        return self.samples.size - 1

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["i", "x", "theta"])
        writer.writerow([0, f"{self.samples[0]:.9g}", ""])
        for i in range(1, self.samples.size):
            writer.writerow([i, f"{self.samples[i]:.9g}", f"{self.thetas[i - 1]:.9g}"])


def simulate_chain(model: ModelSpec, x0: float, length: int, seed: int) -> ChainPath:
    if length < 1:
        raise ValueError(f"length must be at least 1, got {length}")
    x = float(check_support(model, x0))
    rng = np.random.default_rng(seed)
    xs = np.empty(length + 1)
    thetas = np.empty(length)
    xs[0] = x
    for i in range(length):
        theta, x = sample_conditionals(model, x, rng)
        thetas[i] = theta
        xs[i + 1] = x
    return ChainPath(float(x0), seed, xs, thetas)


def ergodic_average(path: ChainPath, g: Callable[[float], float], B: int, n: int) -> float:
    """``(1/n) sum_{i=B}^{n+B-1} g(X_i)``."""
    if n < 1 or B < 0:
        raise ValueError(f"need n >= 1 and B >= 0, got n={n}, B={B}")
    if path.samples.size < n + B:
        raise InsufficientPathError(
            f"window [{B}, {n + B}) exceeds the {path.samples.size} stored iterates"
        )
    window = path.samples[B:B + n]
    return math.fsum(g(float(x)) for x in window) / n


def plain_standard_error(path: ChainPath, g: Callable[[float], float], B: int, n: int) -> float:
    """Standard error of the window mean ignoring autocorrelation."""
    vals = np.array([g(float(x)) for x in path.samples[B:B + n]])
    return float(vals.std(ddof=1) / math.sqrt(vals.size))


def replicate_ensemble(model: ModelSpec, x0: float, l: int, n_replicates: int, seed: int) -> np.ndarray:
    """``X_l`` from ``n_replicates`` independent chains started at ``x0``.

    Replicates are advanced in blocks; block ``b`` draws from the stream seeded
    by ``(seed, b)``, so the output does not depend on how blocks are scheduled.
    """
    x0 = float(check_support(model, x0))
    out = np.empty(n_replicates)
    for b, start in enumerate(range(0, n_replicates, REPLICATE_BLOCK)):
        stop = min(start + REPLICATE_BLOCK, n_replicates)
        rng = np.random.default_rng([seed, b])
        x = np.full(stop - start, x0)
        for _ in range(l):
            _, x = sample_conditionals(model, x, rng)
        out[start:stop] = x
    return out


@dataclass(frozen=True)
class EmpiricalTV:
    estimate: float
    bins: int
    sensitivity: dict[int, float]


def _histogram_tv(sample: np.ndarray, reference: MarginalLaw, edges: np.ndarray) -> float:
    counts, _ = np.histogram(sample, bins=edges)
    p_hat = counts / sample.size
    q = np.diff(reference.cdf(edges))
    # reference mass outside the sample range has no empirical counterpart
    tails = reference.cdf(edges[0]) + (1.0 - reference.cdf(edges[-1]))
    return 0.5 * (np.abs(p_hat - q).sum() + tails)


def empirical_tv(
    sample: Sequence[float],
    reference: MarginalLaw,
    bins: int | str = "fd",
    sweep: Sequence[float] = (0.5, 1.0, 2.0),
) -> EmpiricalTV:
    """Histogram estimate of the distance between an ensemble and a reference law.

    Discrete references are compared pmf-to-frequency with no binning.  For
    continuous references the estimate is biased by the binning; the
    ``sensitivity`` map reports it at bin counts scaled by ``sweep``.
    """
    sample = np.asarray(sample, dtype=float)
    if sample.size < 10_000:
        warnings.warn(
            f"only {sample.size} replicates; the empirical distance is noisy",
            VarianceWarning,
            stacklevel=2,
        )
    if reference.discrete:
        values, counts = np.unique(sample, return_counts=True)
        p_hat = counts / sample.size
        q = reference.density(values)
        estimate = 0.5 * (np.abs(p_hat - q).sum() + (1.0 - q.sum()))
        return EmpiricalTV(float(estimate), int(values.size), {})
    if np.all(sample == sample[0]):
        # a point mass is singular to any continuous law
        return EmpiricalTV(1.0, 1, {})
    edges = np.histogram_bin_edges(sample, bins=bins)
    n_bins = edges.size - 1
    estimate = _histogram_tv(sample, reference, edges)
    sensitivity = {}
    for factor in sweep:
        k = max(1, int(round(n_bins * factor)))
        sensitivity[k] = float(_histogram_tv(sample, reference, np.linspace(edges[0], edges[-1], k + 1)))
    return EmpiricalTV(float(estimate), n_bins, sensitivity)
