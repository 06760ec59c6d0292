"""Scalar joint risk for two-dimensional portfolios with losses of either sign.

The nonnegative evaluator extends to signed bounded losses through a
four-quadrant decomposition: the positive quadrant keeps the plain distorted
tail integrand, while each quadrant touching negative loss levels subtracts
the matching marginal terms (plus one on the doubly negative quadrant).  All
four integrands vanish outside the scenario range, so the improper integrals
reduce to exact cell sums, and on nonnegative data the three correction
quadrants are empty: the value then coincides bit-for-bit with the
nonnegative evaluator.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError
from .portfolio import ScenarioSet, marginal_steps, survival_from_steps
from .scalar_risk import JointRiskSpec, _grid_sum, _marginal_cells


def _negative_cells(s: ScenarioSet, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Left-edge survival values and widths of the cells covering [min, 0).

    Empty for a nonnegative marginal.  Cells below the smallest loss carry
    survival one and make every correction integrand vanish identically, so
    they are omitted rather than evaluated.
    """
    values, tail = marginal_steps(s, i)
    neg = values[values < 0.0]
    if len(neg) == 0:
        return np.empty(0), np.empty(0)
    edges = np.concatenate((neg, [0.0]))
    widths = np.diff(edges)
    sv = survival_from_steps(values, tail, edges[:-1])
    return sv, widths


def gamma_signed_2d(s: ScenarioSet, spec: JointRiskSpec) -> float:
    """Joint risk of a (possibly negative) two-dimensional loss portfolio.

    Exact on scenario data; can be negative.  Only the two-dimensional
    decomposition is implemented: higher-dimensional signed portfolios are
    rejected rather than extrapolated.
    """
    if s.dim != 2:
        raise DimensionError(
            f"signed evaluation supports dimension 2 only, got dimension {s.dim}"
        )
    if spec.dim != 2:
        raise DimensionError(f"spec dimension {spec.dim} != 2")
    g1, g2 = spec.distortions
    cstar = spec.cstar

    sv_pos, w_pos = zip(*(_marginal_cells(s, i) for i in range(2)))
    sv_neg, w_neg = zip(*(_negative_cells(s, i) for i in range(2)))
    gp = [np.asarray(g(sv), dtype=float) for g, sv in zip((g1, g2), sv_pos)]
    gn = [np.asarray(g(sv), dtype=float) for g, sv in zip((g1, g2), sv_neg)]

    def coupled(levels1: np.ndarray, levels2: np.ndarray) -> np.ndarray:
        pts = np.empty((len(levels1) * len(levels2), 2))
        pts[:, 0] = np.repeat(levels1, len(levels2))
        pts[:, 1] = np.tile(levels2, len(levels1))
        return np.asarray(cstar.cdf(pts)).reshape(len(levels1), len(levels2))

    total = 0.0
    # positive quadrant: same cells and accumulation as the nonnegative evaluator
    if len(w_pos[0]) and len(w_pos[1]):
        total += _grid_sum(cstar, [gp[0], gp[1]], [w_pos[0], w_pos[1]])
    # x1 >= 0, x2 < 0: subtract the first marginal term
    if len(w_pos[0]) and len(w_neg[1]):
        integrand = coupled(gp[0], gn[1]) - gp[0][:, None]
        total += float(w_pos[0] @ integrand @ w_neg[1])
    # x1 < 0, x2 >= 0: subtract the second marginal term
    if len(w_neg[0]) and len(w_pos[1]):
        integrand = coupled(gn[0], gp[1]) - gp[1][None, :]
        total += float(w_neg[0] @ integrand @ w_pos[1])
    # both negative: subtract both marginal terms and add back the unit mass
    if len(w_neg[0]) and len(w_neg[1]):
        integrand = coupled(gn[0], gn[1]) - gn[0][:, None] - gn[1][None, :] + 1.0
        total += float(w_neg[0] @ integrand @ w_neg[1])
    return total
