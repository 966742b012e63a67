"""Independent reference implementations used only by the tests.

These deliberately avoid the production sweep: conditional CDFs are
computed by direct recursion on contiguous windows, so agreement with the
package's pmf path is a genuine two-route check.
"""

from functools import lru_cache

import numpy as np


def naive_joint_pmf(spec, signs):
    """Joint sign pmf via recursive conditional CDFs.

    For a window lo..hi and an adjacent variable g, the conditional CDF of
    g given the window peels off the window endpoint nearest to g using the
    copula of the tree equal to their index distance.
    """
    signs = np.asarray(signs, dtype=int)
    p = spec.margins

    def margin(g, plus):
        if signs[g - 1] == 1:
            return 1.0 if plus else 1.0 - p[g - 1]
        return 1.0 - p[g - 1] if plus else 0.0

    @lru_cache(maxsize=None)
    def F(g, lo, hi, plus):
        if lo > hi:
            return margin(g, plus)
        if g < lo:
            cop = spec.copula_for_tree(hi - g)
            a = F(g, lo, hi - 1, plus)
            hp = F(hi, lo, hi - 1, True)
            hm = F(hi, lo, hi - 1, False)
            num = cop.cdf(a, hp) - cop.cdf(a, hm)
            den = hp - hm
        else:
            assert g > hi
            cop = spec.copula_for_tree(g - lo)
            b = F(g, lo + 1, hi, plus)
            lp = F(lo, lo + 1, hi, True)
            lm = F(lo, lo + 1, hi, False)
            num = cop.cdf(lp, b) - cop.cdf(lm, b)
            den = lp - lm
        # A vanishing denominator means the conditioning event has ~zero
        # probability; the window pmf that reaches it is zero anyway.
        return min(max(num / max(den, 1e-15), 0.0), 1.0)

    pmf = 1.0
    for t in range(1, spec.T + 1):
        pmf *= F(t, 1, t - 1, True) - F(t, 1, t - 1, False)
    return pmf


def markov_chain_pmf(spec, signs):
    """First-order Markov pmf from the tree-1 copula (for 1-truncated vines)."""
    signs = np.asarray(signs, dtype=int)
    p = spec.margins
    cop = spec.copula_for_tree(1)

    def cell(i, a, b):
        # P[s_i = a, s_{i+1} = b] from the tree-1 rectangle (1-based i).
        qi, qj = 1.0 - p[i - 1], 1.0 - p[i]
        up, um = (1.0, qi) if a == 1 else (qi, 0.0)
        vp, vm = (1.0, qj) if b == 1 else (qj, 0.0)
        return cop.cdf(up, vp) - cop.cdf(up, vm) - cop.cdf(um, vp) + cop.cdf(um, vm)

    pmf = p[0] if signs[0] == 1 else 1.0 - p[0]
    for i in range(1, spec.T):
        mi = p[i - 1] if signs[i - 1] == 1 else 1.0 - p[i - 1]
        pmf *= cell(i, signs[i - 1], signs[i]) / mi
    return pmf


def exhaustive_sign_vectors(T):
    """All 2^T binary vectors of length T in lexicographic order."""
    out = np.zeros((2 ** T, T), dtype=int)
    for i in range(2 ** T):
        for j in range(T):
            out[i, j] = (i >> (T - 1 - j)) & 1
    return out
