"""Discrete weighted scenario portfolios and their marginal/joint tail queries.

A portfolio is a finite list of joint loss scenarios with positive weights
summing to one.  All distributional queries (survival functions, quantiles,
tail averages) are exact finite sums over the scenario atoms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DataError, DimensionError, DomainError

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ScenarioSet:
    """Immutable weighted scenario matrix: m rows of d losses (currency units)."""

    names: tuple[str, ...]
    losses: np.ndarray   # shape (m, d)
    weights: np.ndarray  # shape (m,), positive, sums to 1

    @property
    def m(self) -> int:
        return self.losses.shape[0]

    @property
    def dim(self) -> int:
        return self.losses.shape[1]

    @property
    def nonnegative(self) -> bool:
        return bool(np.all(self.losses >= 0.0))

    def column(self, i: int) -> np.ndarray:
        _check_index(self, i)
        return self.losses[:, i]

    def with_losses(self, losses: np.ndarray) -> "ScenarioSet":
        """Same names/weights, new loss matrix of identical shape."""
        losses = np.asarray(losses, dtype=float)
        if losses.shape != self.losses.shape:
            raise DimensionError(
                f"replacement losses have shape {losses.shape}, expected {self.losses.shape}"
            )
        return ScenarioSet(self.names, losses, self.weights)


def scenario_set(
    losses,
    weights=None,
    names: Sequence[str] | None = None,
) -> ScenarioSet:
    """Build a validated :class:`ScenarioSet`.

    Parameters
    ----------
    losses : array-like, shape (m, d)
        Loss amounts per scenario and asset; must be finite.  A 1-D input is
        treated as a single-asset portfolio.
    weights : array-like, shape (m,), optional
        Positive scenario weights.  Uniform when omitted.  Weights are
        renormalized to sum to one (tolerance 1e-12 before renormalizing is
        considered already normalized).
    names : sequence of str, optional
        Asset labels; defaults to ``x1 .. xd``.
    """
    a = np.asarray(losses, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DataError(f"losses must be a non-empty (m, d) matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DataError("losses must be finite")
    m, d = a.shape

    if weights is None:
        w = np.full(m, 1.0 / m)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (m,):
            raise DataError(f"weights must have shape ({m},), got {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise DataError("weights must be finite and strictly positive")
        total = float(w.sum())
        if abs(total - 1.0) > _WEIGHT_TOL:
            w = w / total
    w = w.copy()

    if names is None:
        names = tuple(f"x{i + 1}" for i in range(d))
    else:
        names = tuple(str(n) for n in names)
        if len(names) != d:
            raise DataError(f"expected {d} names, got {len(names)}")

    a = a.copy()
    a.setflags(write=False)
    w.setflags(write=False)
    return ScenarioSet(names, a, w)


def _check_index(s: ScenarioSet, i: int) -> None:
    if not 0 <= i < s.dim:
        raise DimensionError(f"marginal index {i} out of range for dimension {s.dim}")


def marginal_steps(s: ScenarioSet, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints and tail probabilities of marginal ``i``.

    Returns ``(values, tail)`` where ``values`` are the sorted distinct losses
    and ``tail[j] = P(X_i > values[j])``.  The survival function is 1 below
    ``values[0]``, equals ``tail[j]`` on ``[values[j], values[j+1])`` and 0 at
    and above the maximum (right-continuous step function).
    """
    _check_index(s, i)
    col = s.losses[:, i]
    order = np.argsort(col, kind="stable")
    sv, sw = col[order], s.weights[order]
    values, start = np.unique(sv, return_index=True)
    group_w = np.add.reduceat(sw, start)
    below = np.concatenate(([0.0], np.cumsum(group_w)[:-1]))
    tail = 1.0 - (below + group_w)
    tail = np.maximum(tail, 0.0)
    tail[-1] = 0.0
    return values, tail


def survival_from_steps(values: np.ndarray, tail: np.ndarray, t) -> np.ndarray:
    """Evaluate the step survival function given its :func:`marginal_steps` form.

    Every consumer of survival values goes through this lookup so that one
    mathematical quantity always maps to one float: re-deriving S(t) through a
    different summation order can land on the other side of a jump of a
    discontinuous (empirical) copula evaluated at it.
    """
    idx = np.searchsorted(values, np.asarray(t, dtype=float), side="right") - 1
    return np.where(idx >= 0, tail[np.maximum(idx, 0)], 1.0)


def marginal_survival(s: ScenarioSet, i: int, t) -> float | np.ndarray:
    """P(X_i > t), exact weighted tail probability; vectorized over ``t``."""
    values, tail = marginal_steps(s, i)
    out = survival_from_steps(values, tail, t)
    return float(out) if np.ndim(t) == 0 else out


def joint_survival(s: ScenarioSet, t) -> float:
    """P(X_1 > t_1, ..., X_d > t_d) on the scenario atoms (strict in every coordinate)."""
    t_arr = np.asarray(t, dtype=float)
    if t_arr.shape != (s.dim,):
        raise DimensionError(f"threshold must have shape ({s.dim},), got {t_arr.shape}")
    hit = np.all(s.losses > t_arr[None, :], axis=1)
    return float(s.weights[hit].sum())


def _cum_levels(s: ScenarioSet, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Distinct values and cumulative probabilities P(X_i <= v), last pinned to 1."""
    values, tail = marginal_steps(s, i)
    cum = 1.0 - tail
    cum[-1] = 1.0
    return values, cum


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"confidence level must lie in (0, 1), got {alpha}")


def var(s: ScenarioSet, i: int, alpha: float) -> float:
    """Left-continuous generalized quantile inf{x : P(X_i <= x) >= alpha}."""
    _check_alpha(alpha)
    values, cum = _cum_levels(s, i)
    j = int(np.searchsorted(cum, alpha - _WEIGHT_TOL, side="left"))
    return float(values[min(j, len(values) - 1)])


def cvar(s: ScenarioSet, i: int, alpha: float) -> float:
    """Average of the quantile function over (alpha, 1), as an exact step sum.

    When the tail mass 1 - alpha falls inside the top atom this degenerates to
    the maximum loss (the limit of the defining integral).
    """
    _check_alpha(alpha)
    values, cum = _cum_levels(s, i)
    left = np.concatenate(([0.0], cum[:-1]))
    seg = np.maximum(np.minimum(cum, 1.0) - np.maximum(left, alpha), 0.0)
    return float(seg @ values / (1.0 - alpha))


def comonotone_transform(
    s: ScenarioSet,
    maps: Sequence[Callable[[np.ndarray], np.ndarray]],
    preserve_copula: bool = True,
) -> ScenarioSet:
    """Apply one non-decreasing map per marginal, keeping weights.

    Monotonicity is checked on each marginal's breakpoints.  With
    ``preserve_copula=True`` (default) a map that merges previously distinct
    values is rejected, because merged ties change the empirical copula; pass
    ``False`` for deliberately lossy transforms such as clamps.
    """
    if len(maps) != s.dim:
        raise DimensionError(f"expected {s.dim} maps, got {len(maps)}")
    new_cols = []
    for i, h in enumerate(maps):
        values = np.unique(s.losses[:, i])
        hv = np.asarray(h(values), dtype=float)
        if hv.shape != values.shape:
            raise DataError(f"map {i} must be a pointwise transform of the breakpoints")
        if np.any(np.diff(hv) < -1e-12):
            raise DataError(f"map {i} is not non-decreasing on the breakpoints of marginal {i}")
        if preserve_copula and len(np.unique(hv)) < len(values):
            raise DataError(
                f"map {i} merges distinct values of marginal {i}; "
                "this changes the empirical copula (pass preserve_copula=False to allow)"
            )
        new_cols.append(np.asarray(h(s.losses[:, i]), dtype=float))
    return s.with_losses(np.column_stack(new_cols))


def pi_comonotone_split(
    s: ScenarioSet,
    clamps: Sequence[float] | None = None,
) -> tuple[ScenarioSet, ScenarioSet]:
    """Split each marginal into two comonotone non-decreasing parts summing to it.

    By default each loss is halved (``h1(u) = u/2``), which preserves ranks
    exactly.  Passing per-marginal ``clamps`` uses ``h1(u) = min(u, c_i)`` with
    the excess in the second part.  The two parts reassemble to ``s``
    scenario-wise with no rounding (IEEE halving and clamping are exact).
    """
    if clamps is None:
        first = s.losses * 0.5
    else:
        c = np.asarray(clamps, dtype=float)
        if c.shape != (s.dim,):
            raise DimensionError(f"expected {s.dim} clamp levels, got shape {c.shape}")
        first = np.minimum(s.losses, c[None, :])
    second = s.losses - first
    return s.with_losses(first), s.with_losses(second)
