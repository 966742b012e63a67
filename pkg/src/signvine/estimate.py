"""Sequential tree-by-tree estimation of the sign vine.

One parameter per tree: every sliding window of the series contributes to
the pooled discrete likelihood of its tree, which imposes stationarity of
the sign dependence.  Trees are fitted in order; estimates of earlier
trees are frozen when later trees are fitted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.stats import kendalltau

from .copula import (PROB_FLOOR, Clayton, Gaussian, Gumbel, Independence,
                     JointlySymmetric, tau_to_parameter)
from .dvine import VineSpec, _margin_sides, _sweep
from .errors import NoConvergence

__all__ = [
    "EstimationConfig",
    "FittedVine",
    "fit_tree1",
    "fit_sequential",
    "tau_initializer",
]

_NEUTRAL_START = {"gaussian": 0.0, "clayton": 0.5, "gumbel": 1.5,
                  "js(gaussian)": 0.0}

# Unconstrained search coordinates per family: (to_natural, from_natural,
# search bounds in the transformed coordinate).
_TRANSFORMS = {
    "gaussian": (np.tanh, np.arctanh, (-7.25, 7.25)),
    "js(gaussian)": (np.tanh, np.arctanh, (-7.25, 7.25)),
    "clayton": (np.exp, np.log, (np.log(1e-6), np.log(60.0))),
    "gumbel": (lambda x: 1.0 + np.exp(x), lambda t: np.log(t - 1.0),
               (np.log(1e-8), np.log(59.0))),
}


def _build(family, parameter):
    if family == "gaussian":
        return Gaussian(parameter)
    if family == "js(gaussian)":
        return JointlySymmetric(Gaussian(parameter))
    if family == "clayton":
        return Clayton(parameter)
    if family == "gumbel":
        return Gumbel(parameter)
    raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True)
class EstimationConfig:
    """How to fit the vine: family policy, depth and optimizer knobs.

    ``family`` is a family name, or ``"aic"`` to pick per tree from
    ``aic_candidates`` by AIC.  ``truncation`` caps the number of fitted
    trees.
    """

    family: str = "gaussian"
    aic_candidates: tuple = ("indep", "gaussian", "clayton", "gumbel",
                             "js(gaussian)")
    truncation: int = 2
    param_tol: float = 1e-8
    max_iterations: int = 200
    jitter_seed: int = 0


@dataclass(frozen=True)
class FittedVine:
    """A fitted vine plus per-tree diagnostics."""

    spec: VineSpec
    tree_family: tuple
    tree_loglik: tuple
    tree_aic: tuple
    tree_iterations: tuple
    degenerate_trees: tuple
    total_loglik: float

    def summary(self):
        trees = ", ".join(
            f"T{l + 1}:{fam}"
            + (f"({self.spec.tree_copulas[l].parameter:.3g})"
               if self.spec.tree_copulas[l].nparams else "")
            for l, fam in enumerate(self.tree_family))
        return f"p={self.spec.truncation} [{trees}]"


def _pooled_loglik(cop, corners):
    fpu, fmu, fpv, fmv = corners
    cpp, cpm, cmp_, cmm = cop.corner_cdfs(fpu, fmu, fpv, fmv)
    rect = np.clip(cpp - cpm - cmp_ + cmm, PROB_FLOOR, 1.0)
    return float(np.sum(np.log(rect)))


def _fit_one_family(family, corners, start_parameter, config):
    """Maximise the pooled cell log-likelihood of one family.

    Bounded golden-section/parabolic search on the family's unconstrained
    coordinate, anchored around the supplied start.
    """
    to_nat, from_nat, (lo, hi) = _TRANSFORMS[family]
    try:
        x0 = float(from_nat(start_parameter))
    except (ValueError, FloatingPointError):
        x0 = float(from_nat(_NEUTRAL_START[family]))
    if not np.isfinite(x0):
        x0 = float(from_nat(_NEUTRAL_START[family]))
    lo_, hi_ = max(lo, x0 - 8.0), min(hi, x0 + 8.0)
    if lo_ >= hi_:
        lo_, hi_ = lo, hi

    def neg(x):
        return -_pooled_loglik(_build(family, float(to_nat(x))), corners)

    res = optimize.minimize_scalar(
        neg, bounds=(lo_, hi_), method="bounded",
        options={"xatol": config.param_tol * 0.1,
                 "maxiter": config.max_iterations})
    parameter = float(to_nat(res.x))
    value = -float(res.fun)
    if not res.success:
        raise NoConvergence(
            f"{family} fit hit {config.max_iterations} iterations",
            best_parameter=parameter, best_value=value)
    return _build(family, parameter), value, int(res.nfev)


def _fit_tree(corners, signs, margins, config):
    """Fit one tree on pooled corner data; returns copula and diagnostics.

    The independence copula acts as a floor: if a parametric family cannot
    beat it (negative dependence under Clayton/Gumbel, say) the tree keeps
    independence, which also keeps the pooled likelihood monotone in the
    truncation level.
    """
    indep_loglik = _pooled_loglik(Independence(), corners)
    fits = [(Independence(), indep_loglik, 0)]
    if config.family == "aic":
        candidates = [f for f in config.aic_candidates if f != "indep"]
    elif config.family == "indep":
        candidates = []
    else:
        candidates = [config.family]
    for family in candidates:
        try:
            start = tau_initializer(signs, margins, config.jitter_seed, family)
        except ValueError:
            start = _NEUTRAL_START[family]
        fits.append(_fit_one_family(family, corners, start, config))
    scored = [(-2.0 * ll + 2.0 * cop.nparams, cop, ll, it)
              for cop, ll, it in fits]
    if config.family == "aic":
        aic, cop, ll, iters = min(scored, key=lambda s: s[0])
    else:
        # Fixed-family policy: keep the family unless independence is at
        # least as good in raw likelihood.
        aic, cop, ll, iters = scored[-1]
        if scored[0][2] >= ll:
            aic, cop, ll, iters = scored[0]
    return cop, ll, aic, iters


def fit_tree1(signs, margins, config=EstimationConfig()):
    """Fit the first-tree copula on all adjacent sign pairs.

    Returns the maximising copula and the pooled log-likelihood
    sum_t log P[cell (s_t, s_t+1)].
    """
    signs = np.asarray(signs, dtype=int)
    T = signs.size
    if T < 3:
        raise ValueError("need at least three observations")
    spec0 = VineSpec(margins, [], 1)
    Fp, Fm, _ = _margin_sides(spec0, signs[None, :])
    corners = (Fp[0, :-1], Fm[0, :-1], Fp[0, 1:], Fm[0, 1:])
    cop, ll, _, _ = _fit_tree(corners, signs, spec0.margins, config)
    return cop, ll


def fit_sequential(signs, margins, config=EstimationConfig()):
    """Sequentially fit trees 1..p and assemble the vine.

    Conditional CDFs feeding tree l come from the vine fitted through tree
    l-1; refitting never touches earlier trees.  A tree with no usable
    windows is set to independence and flagged.
    """
    signs = np.asarray(signs, dtype=int)
    T = signs.size
    if T < 3:
        raise ValueError("need at least three observations")
    p = min(config.truncation, T - 1)
    spec0 = VineSpec(margins, [], 1)
    margins_c = spec0.margins

    copulas, families, logliks, aics, iters, degenerate = [], [], [], [], [], []

    Fp, Fm, _ = _margin_sides(spec0, signs[None, :])
    corners = (Fp[0, :-1], Fm[0, :-1], Fp[0, 1:], Fm[0, 1:])
    cop, ll, aic, it = _fit_tree(corners, signs, margins_c, config)
    copulas.append(cop)
    families.append(cop.family)
    logliks.append(ll)
    aics.append(aic)
    iters.append(it)

    for l in range(2, p + 1):
        if T - l < 1:
            break
        partial = VineSpec(margins_c, copulas, l - 1)
        _, captured = _sweep(partial, signs[None, :], capture_after_tree=l - 1)
        lcols = slice(l - 2, T - 2)
        rcols = slice(l - 1, T - 1)
        corners = (captured["Upp"][0, lcols], captured["Upm"][0, lcols],
                   captured["Up"][0, rcols], captured["Um"][0, rcols])
        usable = ((corners[0] - corners[1] > 1e-9)
                  & (corners[2] - corners[3] > 1e-9))
        if not usable.any():
            copulas.append(Independence())
            families.append("indep")
            logliks.append(_pooled_loglik(Independence(), corners))
            aics.append(-2.0 * logliks[-1])
            iters.append(0)
            degenerate.append(l)
            continue
        cop, ll, aic, it = _fit_tree(corners, signs, margins_c, config)
        copulas.append(cop)
        families.append(cop.family)
        logliks.append(ll)
        aics.append(aic)
        iters.append(it)

    spec = VineSpec(margins_c, copulas, max(1, len(copulas)))
    total = float(_sweep(spec, signs[None, :])[0])
    return FittedVine(spec=spec,
                      tree_family=tuple(families),
                      tree_loglik=tuple(logliks),
                      tree_aic=tuple(aics),
                      tree_iterations=tuple(iters),
                      degenerate_trees=tuple(degenerate),
                      total_loglik=total)


def tau_initializer(signs, margins, jitter_seed, family):
    """Optimizer start from the jittered-sign empirical Kendall tau.

    The binary signs get a uniform perturbation into the unit interval;
    Kendall's tau of consecutive jittered pairs is rank-based, so the
    (monotone) marginal CDFs drop out and ``margins`` only participate as
    an interface.  Infeasible taus fall back to a family-neutral start.
    """
    signs = np.asarray(signs, dtype=float)
    if signs.size < 10:
        raise ValueError("need at least ten observations to initialise")
    rng = np.random.default_rng(jitter_seed)
    jittered = signs + rng.uniform(0.0, 1.0, size=signs.size) - 1.0
    tau = kendalltau(jittered[:-1], jittered[1:]).statistic
    base = family[3:-1] if family.startswith("js(") else family
    try:
        value = tau_to_parameter(base, tau)
    except ValueError:
        return _NEUTRAL_START[family]
    return value
