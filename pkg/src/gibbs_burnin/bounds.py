"""Total-variation bounds for the x-chain and burn-in solving.

Two bound families are provided:

* :class:`RosenthalCurve`, the drift-and-minorization bound
  ``(1 - eps)^(r l) + (alpha^-(1-r) A^r)^l (1 + L / (1 - gamma) + V(x0))`` with
  ``alpha = (1 + w) / (1 + 2L + gamma w)`` and ``A = 1 + 2 (gamma w + L)``,
  valid whenever ``w > 2L / (1 - gamma)``;
* :class:`DkscCurve`, the closed-form bound for the Gaussian model with
  ``nu = 0`` and ``sigma2 + tau2 = 1/2``.

:func:`grid_search` picks ``(r, gamma, w)`` minimizing the burn-in for a target
distance.  All cells are evaluated at once with numpy and the burn-in is found
by an integer bisection run elementwise over the grid.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .drift import DriftCertificate, build_drift
from .errors import (
    InapplicableBoundError,
    InfeasibleSearchError,
    InvalidRateError,
    NoSolutionError,
    NotGeometricallyCertifiedError,
    SmallSetTooSmallError,
    UselessBoundWarning,
)
from .minorization import Ar1Law
from .models import ModelSpec, moment_constants
from .normal import norm_cdf

L_MAX = 10**6


def _rosenthal_value(l, log_b1, log_b2, coeff):
    l = np.asarray(l, dtype=float)
    return np.exp(l * log_b1) + coeff * np.exp(l * log_b2)


def _rosenthal_logs(r, gamma, L, w, eps):
    alpha = (1.0 + w) / (1.0 + 2.0 * L + gamma * w)
    A = 1.0 + 2.0 * (gamma * w + L)
    log_b1 = r * np.log1p(-eps)
    log_b2 = -(1.0 - r) * np.log(alpha) + r * np.log(A)
    return log_b1, log_b2, alpha, A


@dataclass(frozen=True)
class RosenthalInputs:
    r: float
    gamma: float
    L: float
    w: float
    eps: float
    v0: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise ValueError(f"r must lie in (0, 1), got {self.r}")
        if not 0.0 <= self.gamma < 1.0:
            raise InvalidRateError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not 0.0 < self.eps <= 1.0:
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        if self.v0 < 0:
            raise ValueError(f"V(x0) must be nonnegative, got {self.v0}")
        threshold = 2.0 * self.L / (1.0 - self.gamma)
        if not self.w > threshold:
            raise SmallSetTooSmallError(
                f"w = {self.w} must exceed 2L/(1-gamma) = {threshold}"
            )

    def as_dict(self) -> dict[str, float]:
        return {
            "r": self.r, "gamma": self.gamma, "L": self.L,
            "w": self.w, "eps": self.eps, "v0": self.v0,
        }


class BoundCurve:
    """A map ``l -> upper bound on ||k_x^l - m||``; call it on ints or arrays."""

    form: str

    def __call__(self, l):
        raise NotImplementedError

    def is_vacuous(self, l) -> bool:
        return bool(self(l) >= 1.0)

    @property
    def decays(self) -> bool:
        return True


@dataclass(frozen=True)
class RosenthalCurve(BoundCurve):
    inputs: RosenthalInputs
    log_base1: float
    log_base2: float
    alpha: float
    A: float
    coeff: float
    form: str = field(default="rosenthal", init=False)

    @property
    def base1(self) -> float:
        return math.exp(self.log_base1)

    @property
    def base2(self) -> float:
        return math.exp(self.log_base2)

    @property
    def decays(self) -> bool:
        return self.log_base1 < 0 and self.log_base2 < 0

    def __call__(self, l):
        value = _rosenthal_value(l, self.log_base1, self.log_base2, self.coeff)
        return float(value) if np.ndim(value) == 0 else value

    def as_dict(self) -> dict[str, float]:
        out = self.inputs.as_dict()
        out.update(base1=self.base1, base2=self.base2, coeff=self.coeff,
                   alpha=self.alpha, A=self.A)
        return out


@dataclass(frozen=True)
class DkscCurve(BoundCurve):
    x: float
    form: str = field(default="dksc", init=False)

    def __call__(self, l):
        l = np.asarray(l, dtype=float)
        quarter = np.exp2(-2.0 * l)
        expo = self.x**2 * 2.0 * quarter / (1.0 + quarter)
        with np.errstate(divide="ignore"):
            inner = np.expm1(expo - 0.5 * np.log1p(-quarter * quarter))
        value = 0.5 * np.sqrt(inner)
        return float(value) if np.ndim(value) == 0 else value


def rosenthal_curve(inputs: RosenthalInputs) -> RosenthalCurve:
    log_b1, log_b2, alpha, A = _rosenthal_logs(
        inputs.r, inputs.gamma, inputs.L, inputs.w, inputs.eps
    )
    coeff = 1.0 + inputs.L / (1.0 - inputs.gamma) + inputs.v0
    curve = RosenthalCurve(inputs, float(log_b1), float(log_b2), float(alpha), float(A), coeff)
    if not curve.decays:
        warnings.warn(
            f"Rosenthal bases ({curve.base1:.6g}, {curve.base2:.6g}) are not both below 1; "
            "the bound never decays",
            UselessBoundWarning,
            stacklevel=2,
        )
    return curve


def dksc_applicable(model: ModelSpec) -> bool:
    return (
        model.family == "gaussian"
        and model["nu"] == 0.0
        and math.isclose(model["sigma2"] + model["tau2"], 0.5, rel_tol=0.0, abs_tol=1e-12)
    )


def dksc_curve(x: float, model: ModelSpec) -> DkscCurve:
    if not dksc_applicable(model):
        raise InapplicableBoundError(
            f"the closed-form Gaussian bound needs nu = 0 and sigma2 + tau2 = 1/2; got {model.describe()}"
        )
    return DkscCurve(float(x))


def solve_n_star(curve: BoundCurve, omega: float, l_max: int = L_MAX) -> int:
    """Smallest ``l >= 1`` with ``curve(l) <= omega``.

    Relies on the curve being nonincreasing in ``l``: doubling brackets the
    answer, then integer bisection closes it.
    """
    if not 0.0 < omega < 1.0:
        raise ValueError(f"omega must lie in (0, 1), got {omega}")
    if not curve.decays:
        raise NoSolutionError(f"{curve.form} curve does not decay; no burn-in reaches {omega}")
    if curve(1) <= omega:
        return 1
    lo, hi = 1, 2
    while curve(hi) > omega:
        if hi >= l_max:
            raise NoSolutionError(
                f"{curve.form} curve still above {omega} at l = {l_max} (value {curve(l_max):.6g})"
            )
        lo, hi = hi, min(2 * hi, l_max)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if curve(mid) <= omega:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class GeometricErgodicityCertificate:
    """``||k_x^l - m|| <= m0 * t^l``."""

    m0: float
    t: float

    def envelope(self, l):
        return self.m0 * np.power(self.t, np.asarray(l, dtype=float))


def certificate_from_curve(curve: RosenthalCurve) -> GeometricErgodicityCertificate:
    if curve.form != "rosenthal":
        raise TypeError("a geometric certificate is read off a Rosenthal curve")
    if not curve.decays:
        raise NotGeometricallyCertifiedError(
            f"bases ({curve.base1:.6g}, {curve.base2:.6g}) must both be below 1"
        )
    return GeometricErgodicityCertificate(1.0 + curve.coeff, max(curve.base1, curve.base2))


# ---------------------------------------------------------------- grid search

EpsilonSource = Callable[[np.ndarray], np.ndarray] | float | None


@dataclass(frozen=True)
class TraceEntry:
    stage: str
    cells: int
    feasible: int
    r: float
    gamma: float
    w: float
    eps: float
    n_star: int
    bound: float
    base1: float
    base2: float
    coeff: float
    improved: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class SearchResult:
    inputs: RosenthalInputs
    n_star: int
    bound: float
    curve: RosenthalCurve
    drift: DriftCertificate
    trace: tuple[TraceEntry, ...]

    def as_dict(self) -> dict:
        out = self.curve.as_dict()
        out.update(n_star=self.n_star, bound=self.bound, u=self.drift.u, ch=self.drift.ch)
        return out


def _epsilon_function(model: ModelSpec, epsilon: EpsilonSource) -> Callable:
    if epsilon is None:
        if model.family != "gaussian":
            raise InapplicableBoundError(
                f"no built-in minorization for {model.family}; pass epsilon explicitly"
            )
        law = Ar1Law.from_model(model)
        return lambda w: 2.0 * norm_cdf(-law.rho * np.sqrt(w) / law.sd)
    if callable(epsilon):
        return lambda w: np.asarray(epsilon(w), dtype=float) * np.ones_like(w)
    value = float(epsilon)
    if not 0.0 < value <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {value}")
    return lambda w: np.full_like(w, value)


def default_grids(ch: float, L: float, w_max: float = 20.0, n_w: int = 200):
    """Coarse grids: r step 0.01, 50 gamma values in [ch, 1), log-spaced w per gamma."""
    r = np.round(np.arange(1, 100) * 0.01, 10)
    gamma = ch + np.arange(50) * (1.0 - ch) / 50.0
    w = default_grids_w(gamma, L, w_max, n_w)
    return r, gamma, w


def _evaluate(r, gamma, w, eps_fn, L, v0, omega, l_max):
    """Burn-in for every cell of ``r x (gamma, w)``; infeasible cells get ``l_max + 1``.

    ``w`` has shape ``(n_gamma, n_w)`` (NaN marks unused slots).
    """
    R = r[:, None, None]
    G = gamma[None, :, None]
    W = w[None, :, :]
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        eps = eps_fn(w)[None, :, :]
        log_b1, log_b2, _, _ = _rosenthal_logs(R, G, L, W, eps)
        coeff = 1.0 + L / (1.0 - G) + v0
        feasible = (
            np.isfinite(W) & (W > 2.0 * L / (1.0 - G))
            & (eps > 0) & (eps <= 1) & (log_b1 < 0) & (log_b2 < 0)
        )
        log_b1, log_b2, coeff = np.broadcast_arrays(log_b1, log_b2, coeff)
        feasible = np.broadcast_to(feasible, log_b1.shape)
        feasible = feasible & (_rosenthal_value(l_max, log_b1, log_b2, coeff) <= omega)
    lo = np.zeros(log_b1.shape, dtype=np.int64)
    hi = np.full(log_b1.shape, l_max, dtype=np.int64)
    idx = np.nonzero(feasible)
    lo_f, hi_f = lo[idx], hi[idx]
    b1_f, b2_f, c_f = log_b1[idx], log_b2[idx], coeff[idx]
    while np.any(hi_f - lo_f > 1):
        mid = (lo_f + hi_f) // 2
        ok = _rosenthal_value(mid, b1_f, b2_f, c_f) <= omega
        hi_f = np.where(ok, mid, hi_f)
        lo_f = np.where(ok, lo_f, mid)
    n_star = np.full(log_b1.shape, l_max + 1, dtype=np.int64)
    bound = np.full(log_b1.shape, np.inf)
    n_star[idx] = np.maximum(hi_f, 1)
    bound[idx] = _rosenthal_value(n_star[idx], b1_f, b2_f, c_f)
    return n_star, bound, np.broadcast_to(eps, log_b1.shape), feasible


def _stage(r, gamma, w, eps_fn, L, v0, omega, l_max):
    n_star, bound, eps, feasible = _evaluate(r, gamma, w, eps_fn, L, v0, omega, l_max)
    n_feasible = int(feasible.sum())
    if n_feasible == 0:
        return None, n_star.size, 0
    shape = n_star.shape
    R = np.broadcast_to(r[:, None, None], shape)
    G = np.broadcast_to(gamma[None, :, None], shape)
    W = np.broadcast_to(np.nan_to_num(w, nan=np.inf)[None, :, :], shape)
    order = np.lexsort((W.ravel(), G.ravel(), R.ravel(), bound.ravel(), n_star.ravel()))
    best = np.unravel_index(order[0], shape)
    cand = (
        int(n_star[best]), float(bound[best]),
        float(R[best]), float(G[best]), float(W[best]), float(eps[best]),
    )
    return cand, n_star.size, n_feasible


def _local_grids(best, ch, L, spacing, r_step, g_step):
    _, _, r0, g0, w0, _ = best
    r = np.round(r0 + np.arange(-100, 101) * r_step, 12)
    r = r[(r > 0) & (r < 1)]
    gamma = g0 + np.arange(-20, 21) * g_step
    gamma = gamma[(gamma >= ch) & (gamma < 1)]
    ratio = np.exp(np.linspace(-1.0, 1.0, 201) * math.log(spacing))
    w = np.broadcast_to(w0 * ratio, (gamma.size, ratio.size)).copy()
    return r, gamma, w


def grid_search(
    model: ModelSpec,
    x0: float,
    omega: float,
    r_grid: Sequence[float] | None = None,
    gamma_grid: Sequence[float] | None = None,
    w_grid: Sequence[float] | None = None,
    *,
    epsilon: EpsilonSource = None,
    refine: bool | None = None,
    l_max: int = L_MAX,
) -> SearchResult:
    """Choose ``(r, gamma, w)`` minimizing the Rosenthal burn-in from ``x0``.

    Grids left as ``None`` take the defaults of :func:`default_grids`.  With
    ``refine`` (default: only when every grid is defaulted) two further passes
    zoom in around the incumbent.  The winner minimizes ``n*``, then the bound
    value at ``n*``, then ``(r, gamma, w)`` lexicographically, so the result
    does not depend on evaluation order.

    ``epsilon`` supplies the minorization mass as a function of ``w`` (or a
    constant); it is required outside the Gaussian family.
    """
    if not 0.0 < omega < 1.0:
        raise ValueError(f"omega must lie in (0, 1), got {omega}")
    drift = build_drift(moment_constants(model))
    ch, L = drift.ch, drift.L
    v0 = float(drift.V(x0))
    eps_fn = _epsilon_function(model, epsilon)
    if refine is None:
        refine = r_grid is None and gamma_grid is None and w_grid is None

    d_r, d_gamma, d_w = default_grids(ch, L)
    r = d_r if r_grid is None else np.asarray(r_grid, dtype=float).ravel()
    if np.any((r <= 0) | (r >= 1)):
        raise ValueError("r grid must lie in (0, 1)")
    if gamma_grid is None:
        gamma = d_gamma
    else:
        gamma = np.asarray(gamma_grid, dtype=float).ravel()
        if np.any((gamma < ch) | (gamma >= 1)):
            raise InvalidRateError(f"gamma grid must lie in [ch, 1) = [{ch}, 1)")
    if w_grid is None:
        w = d_w if gamma_grid is None else default_grids_w(gamma, L)
    else:
        w_vals = np.asarray(w_grid, dtype=float).ravel()
        w = np.broadcast_to(w_vals, (gamma.size, w_vals.size)).copy()
    if r.size == 0 or gamma.size == 0 or w.size == 0:
        raise InfeasibleSearchError("empty grid")

    trace: list[TraceEntry] = []
    incumbent = None

    def run(stage, r, gamma, w):
        nonlocal incumbent
        cand, cells, n_feasible = _stage(r, gamma, w, eps_fn, L, v0, omega, l_max)
        if cand is None:
            return
        key = cand[:5]
        improved = incumbent is None or key < incumbent[:5]
        if improved:
            incumbent = cand
        n, b, cr, cg, cw, ce = cand
        lb1, lb2, _, _ = _rosenthal_logs(cr, cg, L, cw, ce)
        trace.append(TraceEntry(
            stage, cells, n_feasible, cr, cg, cw, ce, n, b,
            math.exp(lb1), math.exp(lb2), 1.0 + L / (1.0 - cg) + v0, improved,
        ))

    run("grid", r, gamma, w)
    if incumbent is None:
        raise InfeasibleSearchError(
            f"no grid cell gives a decaying bound reaching omega={omega} within l={l_max}"
        )
    if refine:
        finite_w = d_w[np.isfinite(d_w)]
        spacing = float(np.max(finite_w[1:] / finite_w[:-1])) if finite_w.size > 1 else 1.1
        g_step = (1.0 - ch) / 50.0
        for level, (r_step, g_div, s_pow) in enumerate(((1e-4, 20.0, 1.0), (1e-5, 400.0, 0.05)), 1):
            lr, lg, lw = _local_grids(incumbent, ch, L, spacing**s_pow, r_step, g_step / g_div)
            run(f"refine-{level}", lr, lg, lw)

    n, b, cr, cg, cw, ce = incumbent
    inputs = RosenthalInputs(cr, cg, L, cw, ce, v0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UselessBoundWarning)
        curve = rosenthal_curve(inputs)
    return SearchResult(inputs, n, b, curve, drift.with_gamma(cg), tuple(trace))


def default_grids_w(gamma: np.ndarray, L: float, w_max: float = 20.0, n_w: int = 200) -> np.ndarray:
    w = np.full((gamma.size, n_w), np.nan)
    for i, g in enumerate(gamma):
        t = 2.0 * L / (1.0 - g)
        if 0 < t < w_max:
            w[i] = np.geomspace(t, w_max, n_w + 1)[1:]
        elif t <= 0:
            w[i] = np.geomspace(1e-3, w_max, n_w)
    return w
