"""Univariate error distributions used for margins, weights and simulated errors.

Every built-in family has median zero, which is what the sign machinery
requires of the error process.  Distributions expose a CDF, a quantile
function and a sampler driven by an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

import numpy as np
from scipy import optimize
from scipy import stats

__all__ = [
    "ErrorDistribution",
    "Normal",
    "Cauchy",
    "StudentT",
    "MixtureCauchyNormal",
    "TabulatedDistribution",
    "parse_distribution",
]


class ErrorDistribution:
    """Base class: a continuous distribution with CDF, quantile and sampler."""

    name = "abstract"

    def cdf(self, x):
        """P[X <= x]; accepts scalars or arrays, including +-inf.

        Raises
        ------
        ValueError
            If ``x`` contains NaN.
        """
        raise NotImplementedError

    def quantile(self, p):
        """Inverse CDF for p in the open interval (0, 1)."""
        raise NotImplementedError

    def sample(self, size, rng):
        """Draw ``size`` variates using the supplied generator."""
        raise NotImplementedError

    @staticmethod
    def _check_cdf_arg(x):
        x = np.asarray(x, dtype=float)
        if np.isnan(x).any():
            raise ValueError("cdf argument must not be NaN")
        return x

    @staticmethod
    def _check_quantile_arg(p):
        p = np.asarray(p, dtype=float)
        if np.isnan(p).any() or np.any(p <= 0.0) or np.any(p >= 1.0):
            raise ValueError("quantile argument must lie in (0, 1)")
        return p


class Normal(ErrorDistribution):
    """Normal(mean, sd).  The default standard normal has median zero."""

    def __init__(self, mean=0.0, sd=1.0):
        if sd <= 0:
            raise ValueError("sd must be positive")
        self.mean = float(mean)
        self.sd = float(sd)
        self.name = "normal"

    def cdf(self, x):
        x = self._check_cdf_arg(x)
        return stats.norm.cdf(x, loc=self.mean, scale=self.sd)

    def quantile(self, p):
        p = self._check_quantile_arg(p)
        return stats.norm.ppf(p, loc=self.mean, scale=self.sd)

    def sample(self, size, rng):
        return self.mean + self.sd * rng.standard_normal(size)


class Cauchy(ErrorDistribution):
    """Cauchy(loc, scale)."""

    def __init__(self, loc=0.0, scale=1.0):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.loc = float(loc)
        self.scale = float(scale)
        self.name = "cauchy"

    def cdf(self, x):
        x = self._check_cdf_arg(x)
        return stats.cauchy.cdf(x, loc=self.loc, scale=self.scale)

    def quantile(self, p):
        p = self._check_quantile_arg(p)
        return stats.cauchy.ppf(p, loc=self.loc, scale=self.scale)

    def sample(self, size, rng):
        return self.loc + self.scale * rng.standard_cauchy(size)


class StudentT(ErrorDistribution):
    """Student's t with ``df`` degrees of freedom, centred at zero."""

    def __init__(self, df):
        if df <= 0:
            raise ValueError("df must be positive")
        self.df = float(df)
        self.name = f"t({df:g})"

    def cdf(self, x):
        x = self._check_cdf_arg(x)
        return stats.t.cdf(x, df=self.df)

    def quantile(self, p):
        p = self._check_quantile_arg(p)
        return stats.t.ppf(p, df=self.df)

    def sample(self, size, rng):
        return rng.standard_t(self.df, size)


class MixtureCauchyNormal(ErrorDistribution):
    """Coin-flip mixture of a positive Cauchy half and a negative normal half.

    X = b * |C| - (1 - b) * |N| with P(b=1) = 1/2, C standard Cauchy and
    N standard normal.  The coin makes the median exactly zero; the CDF is
    the standard normal CDF on the negative axis and the standard Cauchy
    CDF on the positive axis.
    """

    def __init__(self):
        self.name = "mixture"

    def cdf(self, x):
        x = self._check_cdf_arg(x)
        return np.where(x < 0.0, stats.norm.cdf(x), stats.cauchy.cdf(x))

    def quantile(self, p):
        p = self._check_quantile_arg(p)
        return np.where(p < 0.5, stats.norm.ppf(p), stats.cauchy.ppf(p))

    def sample(self, size, rng):
        coin = rng.integers(0, 2, size=size)
        pos = np.abs(rng.standard_cauchy(size))
        neg = np.abs(rng.standard_normal(size))
        return np.where(coin == 1, pos, -neg)


class TabulatedDistribution(ErrorDistribution):
    """Distribution given by a tabulated CDF on a finite grid.

    The CDF is linearly interpolated between knots and held constant at 0/1
    outside the grid.  Quantiles are solved by safeguarded root bracketing
    against the interpolated CDF.
    """

    def __init__(self, x_grid, cdf_values):
        x = np.asarray(x_grid, dtype=float)
        f = np.asarray(cdf_values, dtype=float)
        if x.ndim != 1 or x.shape != f.shape or x.size < 2:
            raise ValueError("need matching 1-d grids with at least two knots")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(f) < 0):
            raise ValueError("x grid must increase and CDF must be nondecreasing")
        if not (0.0 <= f[0] and f[-1] <= 1.0):
            raise ValueError("CDF values must lie in [0, 1]")
        self.x = x
        self.f = f
        self.name = "custom"

    def cdf(self, x):
        x = self._check_cdf_arg(x)
        return np.interp(x, self.x, self.f, left=0.0, right=1.0)

    def quantile(self, p):
        p = self._check_quantile_arg(p)

        def solve_one(pp):
            if pp <= self.f[0]:
                return self.x[0]
            if pp >= self.f[-1]:
                return self.x[-1]
            return optimize.brentq(
                lambda t: np.interp(t, self.x, self.f) - pp,
                self.x[0],
                self.x[-1],
                xtol=1e-12,
            )

        return np.vectorize(solve_one)(p)[()]

    def sample(self, size, rng):
        return self.quantile(rng.uniform(1e-12, 1.0 - 1e-12, size=size))


def parse_distribution(spec):
    """Build a distribution from a config string.

    Accepted forms: ``normal``, ``cauchy``, ``t(df)``, ``mixture``.
    """
    s = spec.strip().lower()
    if s == "normal":
        return Normal()
    if s == "cauchy":
        return Cauchy()
    if s == "mixture":
        return MixtureCauchyNormal()
    if s.startswith("t(") and s.endswith(")"):
        try:
            df = float(s[2:-1])
        except ValueError as exc:
            raise ValueError(f"bad degrees of freedom in {spec!r}") from exc
        return StudentT(df)
    raise ValueError(f"unknown distribution spec {spec!r}")
