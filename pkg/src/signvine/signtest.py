"""Point-optimal sign statistics, simulated null distributions and the
split-sample adaptive test.

The statistic is the sign log-likelihood ratio of a nominated alternative
(margins, weights and vine copulas all pinned by beta1) against the fair
coin null.  Its null distribution is simulated exactly: under the null the
signs are i.i.d. Bernoulli(1/2), so redrawing them while holding the
regressors and the nominated alternative fixed reproduces the statistic's
law to any Monte Carlo precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .copula import clamp_probability
from .distributions import Normal
from .dvine import log_joint_pmf_batch
from .errors import SingularDesign
from .estimate import EstimationConfig, FittedVine, fit_sequential

__all__ = [
    "RegressionData",
    "SignVector",
    "TestOutcome",
    "sign_vector",
    "weights",
    "alternative_margins",
    "statistic_SN",
    "null_distribution",
    "critical_value",
    "mc_p_value",
    "pos_test",
    "split_sample_test",
]


@dataclass(frozen=True)
class RegressionData:
    """A response series and the regressor rows it is explained by.

    ``X`` has one row per observation; row t-1 holds the regressors of
    y_t.  ``regression_fn(x_row, beta)`` evaluates the (possibly
    nonlinear) regression function; ``None`` means the linear form beta'x.
    """

    y: np.ndarray
    X: np.ndarray
    regression_fn: object = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if y.ndim != 1 or X.shape[0] != y.size:
            raise ValueError("y must be 1-d and match the rows of X")
        if y.size < 5:
            raise ValueError("need at least five observations")
        if X.shape[1] < 1:
            raise ValueError("X needs at least one column")
        if np.isnan(y).any() or np.isnan(X).any():
            raise ValueError("data must not contain NaN")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)

    @property
    def T(self):
        return self.y.size

    @property
    def ncols(self):
        return self.X.shape[1]

    def regression_values(self, beta):
        """f(x_{t-1}, beta) for every row."""
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        if self.regression_fn is None:
            if beta.size != self.ncols:
                raise ValueError(f"beta must have {self.ncols} entries")
            return self.X @ beta
        return np.array([self.regression_fn(row, beta) for row in self.X])

    def subset(self, start, stop):
        return RegressionData(self.y[start:stop], self.X[start:stop],
                              self.regression_fn)


@dataclass(frozen=True)
class SignVector:
    """Residual signs (1 iff residual >= 0) and the null they were taken at."""

    bits: np.ndarray
    beta0: np.ndarray


@dataclass
class TestOutcome:
    """Everything a single test run decided and the settings behind it."""

    statistic: float
    critical_value: float
    mc_p_value: float
    reject: bool
    beta1: np.ndarray
    alpha: float
    m1: int
    seed: int
    t1: int
    t2: int
    vine: FittedVine | None = None
    name: str = "pos"
    extra: dict = field(default_factory=dict)


def sign_vector(data, beta0):
    """Signs of the residuals y - f(X, beta0); exact zeros count as 1."""
    beta0 = np.atleast_1d(np.asarray(beta0, dtype=float))
    residuals = data.y - data.regression_values(beta0)
    return SignVector(bits=(residuals >= 0.0).astype(np.int8), beta0=beta0)


def weights(data, beta0, beta1, errdist=None):
    """Log-odds weights of the nominated alternative.

    With p_t = P[eps_t <= f(x,beta0) - f(x,beta1)], the weight is
    log((1 - p_t)/p_t); for standard normal errors and a linear model this
    is the logit of Phi((beta1 - beta0)'x).  CDF values are clamped before
    the log.
    """
    errdist = errdist or Normal()
    shift = data.regression_values(beta0) - data.regression_values(beta1)
    p = clamp_probability(errdist.cdf(shift))
    return np.log((1.0 - p) / p)


def alternative_margins(data, beta0, beta1, errdist=None):
    """P[s_t = 1] under the alternative: 1 - F_eps(f(beta0) - f(beta1))."""
    errdist = errdist or Normal()
    shift = data.regression_values(beta0) - data.regression_values(beta1)
    return clamp_probability(1.0 - errdist.cdf(shift))


def _statistic_offset(margins):
    # The copula-sum + weighted-sign form of the statistic telescopes into
    # log pmf minus the sign-independent term sum_t log(1 - p_t).
    return float(np.sum(np.log1p(-np.asarray(margins))))


def statistic_SN(data, beta0, beta1, fitted, errdist=None):
    """The point-optimal sign statistic at null beta0 against beta1.

    ``fitted`` must carry margins computed from beta1 and ``errdist``;
    the value is the vine log pmf of the observed residual signs minus the
    sign-independent normalisation, which equals the copula log-density
    sums plus the weighted sign sum.
    """
    signs = sign_vector(data, beta0)
    logpmf = float(log_joint_pmf_batch(fitted.spec, signs.bits[None, :])[0])
    return logpmf - _statistic_offset(fitted.spec.margins)


def null_distribution(data_X, beta0, beta1, fitted, errdist=None,
                      m1=999, seed=0):
    """Simulated null sample of the statistic, sorted ascending.

    Signs are redrawn i.i.d. Bernoulli(1/2) while the regressors, the
    nominated alternative (margins, weights) and the vine copulas stay
    fixed; deterministic given ``seed``.
    """
    if m1 < 99:
        raise ValueError("m1 must be at least 99")
    T = fitted.spec.T
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, 2, size=(m1, T)).astype(np.int8)
    logpmf = log_joint_pmf_batch(fitted.spec, draws)
    values = logpmf - _statistic_offset(fitted.spec.margins)
    return np.sort(values)


def critical_value(nulldist, alpha):
    """Smallest simulated value c with #(null > c)/M1 <= alpha.

    Conservative, nonrandomized cut on the simulated lattice.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    nulldist = np.sort(np.asarray(nulldist, dtype=float))
    m1 = nulldist.size
    budget = alpha * m1
    for v in np.unique(nulldist):
        exceed = m1 - np.searchsorted(nulldist, v, side="right")
        if exceed <= budget:
            return float(v)
    return float(nulldist[-1])


def mc_p_value(nulldist, observed):
    """Monte Carlo p-value (1 + #(null >= observed)) / (M1 + 1)."""
    nulldist = np.asarray(nulldist, dtype=float)
    return float((1 + np.count_nonzero(nulldist >= observed))
                 / (nulldist.size + 1))


def pos_test(data, beta0, beta1, alpha=0.05, errdist=None,
             est_config=EstimationConfig(), m1=999, seed=0):
    """Run the sign test with a known nominated alternative on one series."""
    errdist = errdist or Normal()
    beta0 = np.atleast_1d(np.asarray(beta0, dtype=float))
    beta1 = np.atleast_1d(np.asarray(beta1, dtype=float))
    margins = alternative_margins(data, beta0, beta1, errdist)
    signs = sign_vector(data, beta0)
    fitted = fit_sequential(signs.bits, margins, est_config)
    stat = float(log_joint_pmf_batch(fitted.spec, signs.bits[None, :])[0]) \
        - _statistic_offset(fitted.spec.margins)
    null = null_distribution(data.X, beta0, beta1, fitted, errdist,
                             m1=m1, seed=seed)
    cv = critical_value(null, alpha)
    p = mc_p_value(null, stat)
    return TestOutcome(statistic=stat, critical_value=cv, mc_p_value=p,
                       reject=bool(stat > cv), beta1=beta1, alpha=alpha,
                       m1=m1, seed=seed, t1=0, t2=data.T, vine=fitted)


def split_sample_test(data, beta0, alpha=0.05, fraction=0.10, errdist=None,
                      est_config=EstimationConfig(), m1=999, seed=0):
    """Adaptive test: estimate the alternative on an initial slice, test on
    the rest.

    The first T1 = round(fraction * T) observations give the OLS estimate
    of the alternative; signs, margins, vine fit, statistic and the
    simulated null all use only the remaining T2 observations, which keeps
    the estimate independent of the tested signs under the null.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    errdist = errdist or Normal()
    beta0 = np.atleast_1d(np.asarray(beta0, dtype=float))
    T = data.T
    k1 = data.ncols
    t1 = int(np.floor(fraction * T + 0.5))
    if t1 < k1 + 1:
        raise ValueError(f"first subsample of {t1} cannot identify {k1} "
                         "coefficients")
    if T - t1 < 5:
        raise ValueError("second subsample too small to test on")

    X1 = data.X[:t1]
    y1 = data.y[:t1]
    xtx = X1.T @ X1
    if np.linalg.matrix_rank(X1) < k1:
        raise SingularDesign("first-subsample design matrix is singular")
    beta1_hat = np.linalg.solve(xtx, X1.T @ y1)

    tail = data.subset(t1, T)
    outcome = pos_test(tail, beta0, beta1_hat, alpha=alpha, errdist=errdist,
                       est_config=est_config, m1=m1, seed=seed)
    outcome.t1 = t1
    outcome.t2 = T - t1
    outcome.extra["fraction"] = fraction
    return outcome
