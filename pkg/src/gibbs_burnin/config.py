"""Run configuration: flat ``key = value`` files plus command-line overrides.

Example::

    # worked Gaussian model
    family = gaussian
    nu = 0
    sigma2 = 0.25
    tau2 = 0.25
    x0 = 0
    omega = 0.01
    r = 0.1895820
    gamma = 0.25
    w = 2.203030

Grids accept a comma list (``0.1,0.2``), ``lin:start:stop:num`` or
``log:start:stop:num``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CertificationError, InvalidRateError
from .models import _HYPERPARAMETERS, ModelSpec, moment_constants


class ConfigError(CertificationError):
    pass


FORMATS = ("csv", "jsonl")


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec
    x0: float = 0.0
    omega: float = 0.01
    seed: int = 0
    out: Path = Path("out")
    fmt: str = "csv"
    lmax: int = 200
    grid_r: tuple[float, ...] | None = None
    grid_gamma: tuple[float, ...] | None = None
    grid_w: tuple[float, ...] | None = None
    r: float | None = None
    gamma: float | None = None
    w: float | None = None
    epsilon: float | None = None
    eps_scale: float = 1.0
    samples: int = 100_000
    length: int = 1000

    @property
    def pinned(self) -> bool:
        return None not in (self.r, self.gamma, self.w)


def read_config_file(path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def parse_model_flag(text: str) -> dict[str, str]:
    """``gaussian:nu=0,sigma2=0.25,tau2=0.25`` -> flat key/value dict."""
    family, _, rest = text.partition(":")
    values = {"family": family.strip()}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"bad model parameter {item!r}")
        values[key.strip()] = value.strip()
    return values


def parse_grid(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    kind, _, rest = text.partition(":")
    if kind in ("lin", "log") and rest:
        try:
            start, stop, num = rest.split(":")
            start, stop, num = float(start), float(stop), int(num)
        except ValueError as exc:
            raise ConfigError(f"bad grid {text!r}; expected {kind}:start:stop:num") from exc
        space = np.linspace if kind == "lin" else np.geomspace
        return tuple(float(v) for v in space(start, stop, num))
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}") from exc


def _float(values, key, default=None):
    if key not in values or values[key] in ("", None):
        return default
    try:
        return float(values[key])
    except ValueError as exc:
        raise ConfigError(f"{key} must be a number, got {values[key]!r}") from exc


def build_config(values: dict[str, str]) -> RunConfig:
    """Validate a merged key/value mapping into a :class:`RunConfig`."""
    family = values.get("family")
    if family is None:
        raise ConfigError("no model family given")
    if family not in _HYPERPARAMETERS:
        raise ConfigError(f"unknown family {family!r}")
    hyper = {}
    for key in _HYPERPARAMETERS[family]:
        if key not in values:
            raise ConfigError(f"{family} model needs {key}")
        hyper[key] = _float(values, key)
    model = ModelSpec(family, hyper)

    omega = _float(values, "omega", 0.01)
    if not 0.0 < omega < 1.0:
        raise ConfigError(f"omega must lie in (0, 1), got {omega}")
    fmt = values.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {fmt!r}")

    grids = {}
    for key in ("grid_r", "grid_gamma", "grid_w"):
        grids[key] = parse_grid(values[key]) if key in values else None
    ch = moment_constants(model).ch
    if grids["grid_r"] and any(not 0 < v < 1 for v in grids["grid_r"]):
        raise ConfigError("grid_r entries must lie in (0, 1)")
    if grids["grid_gamma"] and any(not ch <= v < 1 for v in grids["grid_gamma"]):
        raise InvalidRateError(f"grid_gamma entries must lie in [ch, 1) = [{ch:.9g}, 1)")

    gamma = _float(values, "gamma")
    if gamma is not None and not ch <= gamma < 1:
        raise InvalidRateError(f"gamma must lie in [ch, 1) = [{ch:.9g}, 1), got {gamma}")
    epsilon = _float(values, "epsilon")
    if epsilon is not None and not 0 < epsilon <= 1:
        raise ConfigError(f"epsilon must lie in (0, 1], got {epsilon}")
    w = _float(values, "w")
    if w is not None and not w > 0:
        raise ConfigError(f"w must be positive, got {w}")
    r = _float(values, "r")
    if r is not None and not 0 < r < 1:
        raise ConfigError(f"r must lie in (0, 1), got {r}")

    lmax = int(_float(values, "lmax", 200))
    samples = int(_float(values, "samples", 100_000))
    length = int(_float(values, "length", 1000))
    seed = int(_float(values, "seed", 0))
    x0 = _float(values, "x0", 0.0)
    eps_scale = _float(values, "eps_scale", 1.0)
    for name, val in (("lmax", lmax), ("samples", samples), ("length", length)):
        if val < 1:
            raise ConfigError(f"{name} must be positive, got {val}")
    if not math.isfinite(x0):
        raise ConfigError(f"x0 must be finite, got {x0}")

    return RunConfig(
        model=model, x0=x0, omega=omega, seed=seed, out=Path(values.get("out", "out")),
        fmt=fmt, lmax=lmax, r=r, gamma=gamma, w=w, epsilon=epsilon,
        eps_scale=eps_scale, samples=samples, length=length, **grids,
    )


def load_config(path=None, overrides: dict[str, str] | None = None) -> RunConfig:
    values = read_config_file(path) if path is not None else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return build_config(values)
