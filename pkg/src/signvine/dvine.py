"""Discrete D-vine engine: vine arrays, truncation and the joint sign pmf.

The joint probability of a binary sign vector under a D-vine factorisation
is computed by a single forward sweep that maintains, for every position,
the one-sided conditional CDFs of the leftmost and rightmost variables of
a sliding window.  Each tree widens the windows by one; a pi matrix of
window pmfs accumulates alongside and its bottom-right entry is the joint
pmf.  Trees beyond the truncation level carry the independence copula,
which leaves the conditionals unchanged, so the sweep skips their copula
evaluations entirely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .copula import (PROB_FLOOR, RECT_TOL, BivariateCopula, Independence,
                     clamp_probability)
from .errors import DegenerateConditional, NonIncreasingCopula

__all__ = [
    "VineArray",
    "dvine_array",
    "VineSpec",
    "PmfWorkspace",
    "joint_pmf",
    "log_joint_pmf_batch",
    "conditional_sign_prob",
    "discrete_pair_density",
    "truncate",
]

_INDEP = Independence()


@dataclass(frozen=True)
class VineArray:
    """Triangular array of conditioning orders, one column per variable.

    ``entries[l - 1][t - 1]`` is the variable paired with ``t`` at tree
    ``l`` (for l < t); the diagonal holds ``t`` itself.
    """

    entries: tuple

    @property
    def T(self):
        return len(self.entries)

    def column(self, t):
        """Entries (sigma_1t, ..., sigma_t-1,t, t) of column ``t`` (1-based)."""
        return tuple(self.entries[l - 1][t - 1] for l in range(1, t + 1))

    def is_valid(self):
        """Every column must permute {1..t-1} and end in its diagonal t."""
        for t in range(1, self.T + 1):
            col = self.column(t)
            if col[-1] != t or sorted(col[:-1]) != list(range(1, t)):
                return False
        return True


def dvine_array(T):
    """The D-vine array: column t pairs t with t-1, then t-2, down to 1."""
    if T < 1:
        raise ValueError("T must be at least 1")
    entries = []
    for l in range(1, T + 1):
        row = []
        for t in range(1, T + 1):
            if l < t:
                row.append(t - l)
            elif l == t:
                row.append(t)
            else:
                row.append(0)
        entries.append(tuple(row))
    return VineArray(tuple(entries))


class VineSpec:
    """Margins, per-tree copulas and truncation level of a sign D-vine.

    Parameters
    ----------
    margins : array_like
        Bernoulli success probabilities p_t, one per variable; clamped into
        (0, 1).
    tree_copulas : sequence of BivariateCopula
        Copula for tree l at index l-1.  Missing trees and every tree past
        the truncation level carry the independence copula.
    truncation : int
        Number of estimated trees p; trees p+1, ..., T-1 are independence.
    """

    __slots__ = ("margins", "tree_copulas", "truncation")

    def __init__(self, margins, tree_copulas=(), truncation=None):
        margins = clamp_probability(np.asarray(margins, dtype=float))
        if margins.ndim != 1 or margins.size < 1:
            raise ValueError("margins must be a non-empty 1-d sequence")
        T = margins.size
        if truncation is None:
            truncation = max(1, T - 1)
        truncation = int(truncation)
        if not 1 <= truncation <= max(1, T - 1):
            raise ValueError(f"truncation must be in [1, {max(1, T - 1)}]")
        copulas = []
        for l in range(1, T):
            if l <= truncation and l <= len(tree_copulas):
                cop = tree_copulas[l - 1]
                if not isinstance(cop, BivariateCopula):
                    raise TypeError(f"tree {l} entry is not a copula: {cop!r}")
                copulas.append(cop)
            else:
                copulas.append(_INDEP)
        self.margins = margins
        self.margins.setflags(write=False)
        self.tree_copulas = tuple(copulas)
        self.truncation = truncation

    @property
    def T(self):
        return self.margins.size

    def copula_for_tree(self, l):
        if not 1 <= l <= max(1, self.T - 1):
            raise ValueError(f"tree index {l} out of range")
        if l > self.truncation or l > len(self.tree_copulas):
            return _INDEP
        return self.tree_copulas[l - 1]

    def __repr__(self):
        cops = [repr(c) for c in self.tree_copulas[:self.truncation]]
        return (f"VineSpec(T={self.T}, truncation={self.truncation}, "
                f"trees=[{', '.join(cops)}])")


@dataclass
class PmfWorkspace:
    """Reusable scratch space for single-vector pmf evaluations.

    ``pi[t - 1, j - 1]`` holds the pmf of the sign window (j-t+1):j after
    evaluation; ``pi[T-1, T-1]`` is the joint pmf.  ``rectangle_evaluations``
    counts four-corner copula evaluations for the last call.
    """

    T: int
    pi: np.ndarray = field(init=False)
    rectangle_evaluations: int = field(init=False, default=0)

    def __post_init__(self):
        self.pi = np.full((self.T, self.T), np.nan)

    def reset(self):
        self.pi.fill(np.nan)
        self.rectangle_evaluations = 0


def _margin_sides(spec, S):
    """One-sided marginal CDF values and pmfs for a (n, T) sign matrix."""
    p = spec.margins
    q = 1.0 - p
    s1 = S == 1
    Fp = np.where(s1, 1.0, q)
    Fm = np.where(s1, q, 0.0)
    f = np.where(s1, p, q)
    return Fp, Fm, f


def _sweep(spec, S, workspace=None, capture_after_tree=None):
    """Forward sweep over trees; returns per-row log pmf.

    ``S`` is an (n, T) binary matrix.  When ``capture_after_tree`` is t, the
    one-sided conditional CDF arrays are snapshotted right after tree t's
    update (these are the corner arguments of tree t+1).
    """
    S = np.asarray(S)
    n, T = S.shape
    Fp, Fm, f = _margin_sides(spec, S)
    captured = None
    if capture_after_tree == 0:
        captured = {"Fp": Fp.copy(), "Fm": Fm.copy(), "f": f.copy()}
    if workspace is not None:
        if n != 1:
            raise ValueError("a workspace tracks a single evaluation")
        if workspace.T != T:
            raise ValueError("workspace size does not match the vine")
        workspace.reset()
        workspace.pi[0, :] = f[0]
    if T == 1:
        if capture_after_tree is not None:
            return np.log(f[:, 0]), captured
        return np.log(f[:, 0])

    logpmf = np.log(f[:, 0])
    active_trees = min(spec.truncation, T - 1)

    # Tree 1: plain bivariate cells of adjacent pairs.
    cop = spec.copula_for_tree(1)
    cpp, cpm, cmp_, cmm = cop.corner_cdfs(Fp[:, :-1], Fm[:, :-1],
                                          Fp[:, 1:], Fm[:, 1:])
    rect = cpp - cpm - cmp_ + cmm
    if np.min(rect) < -RECT_TOL:
        raise NonIncreasingCopula(
            f"tree 1 cell mass {np.min(rect):.3e} below -{RECT_TOL:g}")
    rect = np.clip(rect, 0.0, 1.0)
    if workspace is not None:
        workspace.pi[1, 1:] = rect[0]
        workspace.rectangle_evaluations += T - 1
    Upp = np.clip((cpp - cpm) / f[:, 1:], 0.0, 1.0)
    Upm = np.clip((cmp_ - cmm) / f[:, 1:], 0.0, 1.0)
    Up = np.clip((cpp - cmp_) / f[:, :-1], 0.0, 1.0)
    Um = np.clip((cpm - cmm) / f[:, :-1], 0.0, 1.0)
    up = np.clip(Upp - Upm, PROB_FLOOR, 1.0)
    u = np.clip(Up - Um, PROB_FLOOR, 1.0)
    # Column j - 2 of these width-(T-1) arrays belongs to variable j.
    if capture_after_tree == 1:
        captured = {"Upp": Upp.copy(), "Upm": Upm.copy(),
                    "Up": Up.copy(), "Um": Um.copy()}

    for t in range(2, active_trees + 1):
        cop = spec.copula_for_tree(t)
        # Corner arguments for windows ending at j = t+1..T: the left
        # variable's conditionals sit at column j-2, the right's at j-1.
        lcols = slice(t - 2, T - 2)
        rcols = slice(t - 1, T - 1)
        cpp, cpm, cmp_, cmm = cop.corner_cdfs(Upp[:, lcols], Upm[:, lcols],
                                              Up[:, rcols], Um[:, rcols])
        rect = cpp - cpm - cmp_ + cmm
        if np.min(rect) < -RECT_TOL:
            raise NonIncreasingCopula(
                f"tree {t} cell mass {np.min(rect):.3e} below -{RECT_TOL:g}")
        if workspace is not None:
            workspace.rectangle_evaluations += T - t
        w = u[:, rcols].copy()
        wp = up[:, lcols].copy()
        Upp[:, rcols] = np.clip((cpp - cpm) / w, 0.0, 1.0)
        Upm[:, rcols] = np.clip((cmp_ - cmm) / w, 0.0, 1.0)
        up[:, rcols] = np.clip(Upp[:, rcols] - Upm[:, rcols], PROB_FLOOR, 1.0)
        Up[:, rcols] = np.clip((cpp - cmp_) / wp, 0.0, 1.0)
        Um[:, rcols] = np.clip((cpm - cmm) / wp, 0.0, 1.0)
        u[:, rcols] = np.clip(Up[:, rcols] - Um[:, rcols], PROB_FLOOR, 1.0)
        if capture_after_tree == t:
            captured = {"Upp": Upp.copy(), "Upm": Upm.copy(),
                        "Up": Up.copy(), "Um": Um.copy()}
        if workspace is not None:
            cols = np.arange(t, T)
            workspace.pi[t, cols] = workspace.pi[t - 1, cols - 1] * u[0, cols - 1]

    logpmf = logpmf + np.sum(np.log(u), axis=1)

    if workspace is not None:
        # Rows past the estimated trees reuse the frozen conditionals: the
        # remaining copulas are independence, which leaves them unchanged.
        for t in range(active_trees + 1, T):
            cols = np.arange(t, T)
            workspace.pi[t, cols] = workspace.pi[t - 1, cols - 1] * u[0, cols - 1]

    if not np.all(np.isfinite(logpmf)):
        raise DegenerateConditional("non-finite value in the vine sweep")
    if capture_after_tree is not None:
        return logpmf, captured
    return logpmf


def _as_sign_matrix(signs, T=None):
    S = np.asarray(signs)
    if S.ndim == 1:
        S = S[None, :]
    if S.ndim != 2:
        raise ValueError("signs must be a vector or a matrix of rows")
    if not np.isin(S, (0, 1)).all():
        raise ValueError("signs must be 0/1 valued")
    if T is not None and S.shape[1] != T:
        raise ValueError(f"sign length {S.shape[1]} does not match T={T}")
    return S.astype(np.int8)


def joint_pmf(spec, signs, workspace=None):
    """Joint probability of one sign vector under the vine.

    A supplied :class:`PmfWorkspace` is reset, reused and left holding the
    window-pmf matrix and the rectangle-evaluation count.
    """
    S = _as_sign_matrix(signs, spec.T)
    if S.shape[0] != 1:
        raise ValueError("joint_pmf takes a single sign vector")
    logpmf = _sweep(spec, S, workspace=workspace)
    return float(np.exp(logpmf[0]))


def log_joint_pmf_batch(spec, signs):
    """Log joint pmf for each row of an (n, T) sign matrix."""
    S = _as_sign_matrix(signs, spec.T)
    return _sweep(spec, S)


def conditional_sign_prob(spec, signs_prefix, t):
    """P[s_t = 1 | s_1..s_{t-1}] under the vine (t is 1-based, >= 2)."""
    if not 2 <= t <= spec.T:
        raise ValueError(f"t must be in [2, {spec.T}]")
    prefix = np.asarray(signs_prefix)
    if prefix.shape != (t - 1,):
        raise ValueError(f"prefix must have length {t - 1}")
    head_spec = VineSpec(spec.margins[:t], spec.tree_copulas,
                         min(spec.truncation, t - 1))
    tail_spec = VineSpec(spec.margins[:t - 1], spec.tree_copulas,
                         max(1, min(spec.truncation, t - 2)))
    extended = np.concatenate([prefix, [1]])
    num = joint_pmf(head_spec, extended)
    den = joint_pmf(tail_spec, prefix) if t > 2 else float(
        np.where(prefix[0] == 1, tail_spec.margins[0],
                 1.0 - tail_spec.margins[0]))
    if den <= 0.0 or not np.isfinite(den):
        raise DegenerateConditional("prefix has zero probability")
    return num / den


def discrete_pair_density(corners, f_t, f_j):
    """Discrete copula density of a cell: rectangle mass over the margins.

    Clamped below at 1e-12; degenerate cells therefore never produce -inf
    in downstream logs.
    """
    mass = corners.cpp - corners.cmp - corners.cpm + corners.cmm
    denom = clamp_probability(np.asarray(f_t, float)) * \
        clamp_probability(np.asarray(f_j, float))
    dens = np.maximum(np.asarray(mass, float), 0.0) / denom
    dens = np.maximum(dens, PROB_FLOOR)
    if np.ndim(dens) == 0:
        return float(dens)
    return dens


def truncate(spec, p):
    """A copy of the vine truncated at tree p (trees > p become independence)."""
    if not 1 <= p <= max(1, spec.T - 1):
        raise ValueError(f"truncation must be in [1, {max(1, spec.T - 1)}]")
    return VineSpec(spec.margins, spec.tree_copulas[:p], p)
