"""Simulation designs: a persistent AR(1) regressor whose innovations are
contemporaneously correlated with the regression errors, under six error
schemes (heavy tails, asymmetry, a variance break and GARCH with a jump).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import Cauchy, MixtureCauchyNormal, Normal, StudentT
from .signtest import RegressionData

__all__ = ["ERROR_SCHEMES", "DgpSpec", "generate"]

ERROR_SCHEMES = ("normal", "cauchy", "t2", "mixture", "break", "garchjump")

_BREAK_INDEX = 25  # the variance break always hits observation t = 25

_GARCH_OMEGA = 0.00037
_GARCH_ALPHA = 0.0888
_GARCH_BETA = 0.9024


@dataclass(frozen=True)
class DgpSpec:
    """Everything that pins one simulated path."""

    T: int = 50
    scheme: str = "normal"
    rho: float = 0.0
    theta: float = 0.9
    beta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in ERROR_SCHEMES:
            raise ValueError(f"unknown error scheme {self.scheme!r}")
        if not abs(self.theta) < 1.0:
            raise ValueError("theta must satisfy |theta| < 1")
        if not abs(self.rho) < 1.0:
            raise ValueError("rho must satisfy |rho| < 1")
        if self.T < 5:
            raise ValueError("T must be at least 5")
        if self.scheme in ("break", "garchjump") and self.T < _BREAK_INDEX + 1:
            raise ValueError(
                f"scheme {self.scheme!r} needs T >= {_BREAK_INDEX + 1} so the "
                f"break at t = {_BREAK_INDEX} exists")


def _draw_errors(spec, rng):
    T = spec.T
    if spec.scheme == "normal":
        return Normal().sample(T, rng)
    if spec.scheme == "cauchy":
        return Cauchy().sample(T, rng)
    if spec.scheme == "t2":
        return StudentT(2).sample(T, rng)
    if spec.scheme == "mixture":
        return MixtureCauchyNormal().sample(T, rng)
    if spec.scheme == "break":
        eps = rng.standard_normal(T)
        eps[_BREAK_INDEX - 1] *= np.sqrt(1000.0)
        return eps
    # garchjump: recursion runs on realised errors, so the jump at t = 25
    # feeds the conditional variance afterwards.
    z = rng.standard_normal(T)
    eps = np.empty(T)
    var = _GARCH_OMEGA / (1.0 - _GARCH_ALPHA - _GARCH_BETA)
    for t in range(T):
        eps[t] = np.sqrt(var) * z[t]
        if t + 1 == _BREAK_INDEX:
            eps[t] *= 50.0
        var = _GARCH_OMEGA + _GARCH_ALPHA * eps[t] ** 2 + _GARCH_BETA * var
    return eps


def generate(spec, rng=None, return_components=False):
    """Simulate one path of the predictive regression.

    y_t = beta * x_{t-1} + eps_t with x_t = theta * x_{t-1} + u_t,
    u_t = rho * eps_t + w_t * sqrt(1 - rho^2), a stationary start for x and
    standard normal w.  Identical spec and seed give bit-identical output.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    T = spec.T
    w = rng.standard_normal(T)
    eps = _draw_errors(spec, rng)

    x = np.empty(T)
    x[0] = w[0] / np.sqrt(1.0 - spec.theta ** 2)
    scale = np.sqrt(1.0 - spec.rho ** 2)
    u = spec.rho * eps[:-1] + scale * w[1:]
    for t in range(1, T):
        x[t] = spec.theta * x[t - 1] + u[t - 1]

    y = spec.beta * x + eps
    data = RegressionData(y=y, X=x[:, None])
    if return_components:
        return data, {"w": w, "eps": eps, "u": u, "x": x}
    return data
