"""d-dimensional copulas: parametric families, survival copulas, bounds, data fits.

Every copula here exposes ``dim`` and a vectorized ``cdf`` accepting a single
point ``(d,)`` or a batch ``(n, d)`` of points in the unit cube.  Values are
grounded (zero whenever a coordinate is zero) and have uniform margins up to
floating-point rounding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import DataError, DimensionError, DomainError, FitError, ParameterError
from .portfolio import ScenarioSet

INDEPENDENCE = "independence"
COMONOTONE = "comonotone"
COUNTERMONOTONE_2D = "countermonotone"
CLAYTON = "clayton"
GUMBEL = "gumbel"
FRANK = "frank"
EMPIRICAL = "empirical"

PARAMETRIC_FAMILIES = (INDEPENDENCE, COMONOTONE, COUNTERMONOTONE_2D, CLAYTON, GUMBEL, FRANK)
ARCHIMEDEAN_FAMILIES = (CLAYTON, GUMBEL, FRANK)

_FRANK_INDEPENDENCE_EPS = 1e-10  # removable singularity at theta = 0
_U_TOL = 1e-12


def _as_points(u, dim: int) -> tuple[np.ndarray, bool]:
    a = np.asarray(u, dtype=float)
    single = a.ndim == 1
    if single:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] != dim:
        raise DimensionError(f"expected points of dimension {dim}, got shape {np.shape(u)}")
    if np.any(a < -_U_TOL) or np.any(a > 1.0 + _U_TOL):
        raise DomainError("copula arguments must lie in [0, 1]")
    return np.clip(a, 0.0, 1.0), single


@dataclass(frozen=True, eq=False)
class Copula:
    """A copula from one of the supported families.

    ``theta`` is the Archimedean dependence parameter (Clayton theta > 0,
    Gumbel theta >= 1, Frank theta != 0; |theta| < 1e-10 evaluates as
    independence).  Empirical copulas carry the scaled mid-ranks and weights
    of the scenario set they were built from.
    """

    family: str
    dim: int
    theta: float | None = None
    ranks: np.ndarray | None = None
    rank_weights: np.ndarray | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError(f"dimension must be >= 1, got {self.dim}")
        if self.family == COUNTERMONOTONE_2D and self.dim != 2:
            raise DimensionError("the lower Frechet bound is a copula only for dimension 2")
        if self.family == CLAYTON and not (self.theta is not None and self.theta > 0):
            raise ParameterError(f"Clayton requires theta > 0, got {self.theta}")
        if self.family == GUMBEL and not (self.theta is not None and self.theta >= 1):
            raise ParameterError(f"Gumbel requires theta >= 1, got {self.theta}")
        if self.family == FRANK:
            if self.theta is None or self.theta == 0.0:
                raise ParameterError("Frank requires theta != 0")
            if self.dim >= 3 and self.theta < 0:
                raise ParameterError("Frank with theta < 0 is a copula only for dimension 2")
        if self.family == EMPIRICAL and (self.ranks is None or self.rank_weights is None):
            raise DataError("empirical copula requires rank data")

    def cdf(self, u):
        """Evaluate the copula at ``u`` ((d,) or (n, d)); returns float or (n,)."""
        pts, single = _as_points(u, self.dim)
        out = _family_cdf(self, pts)
        return float(out[0]) if single else out


def _family_cdf(c: Copula, u: np.ndarray) -> np.ndarray:
    out = _family_cdf_raw(c, u)
    # boundary identity C(1, ..., 1) = 1 must hold exactly, not to rounding
    if c.family in (CLAYTON, GUMBEL, FRANK):
        out[np.all(u == 1.0, axis=1)] = 1.0
    return out


def _family_cdf_raw(c: Copula, u: np.ndarray) -> np.ndarray:
    fam = c.family
    if fam == INDEPENDENCE:
        return np.prod(u, axis=1)
    if fam == COMONOTONE:
        return np.min(u, axis=1)
    if fam == COUNTERMONOTONE_2D:
        return np.maximum(u.sum(axis=1) - 1.0, 0.0)
    if fam == CLAYTON:
        out = np.zeros(len(u))
        pos = np.all(u > 0.0, axis=1)
        if np.any(pos):
            # u ** -theta can overflow for subnormal u; the 0 limit is correct
            with np.errstate(over="ignore"):
                s = np.sum(u[pos] ** (-c.theta), axis=1) - (c.dim - 1)
                out[pos] = s ** (-1.0 / c.theta)
        return np.clip(out, 0.0, 1.0)
    if fam == GUMBEL:
        out = np.zeros(len(u))
        pos = np.all(u > 0.0, axis=1)
        if np.any(pos):
            with np.errstate(over="ignore"):
                s = np.sum((-np.log(u[pos])) ** c.theta, axis=1)
                out[pos] = np.exp(-(s ** (1.0 / c.theta)))
        return np.clip(out, 0.0, 1.0)
    if fam == FRANK:
        if abs(c.theta) < _FRANK_INDEPENDENCE_EPS:
            return np.prod(u, axis=1)
        th = c.theta
        num = np.prod(np.expm1(-th * u), axis=1)
        den = np.expm1(-th) ** (c.dim - 1)
        return np.clip(-np.log1p(num / den) / th, 0.0, 1.0)
    if fam == EMPIRICAL:
        return _empirical_cdf(c.ranks, c.rank_weights, u)
    raise ParameterError(f"unknown copula family {fam!r}")


def _empirical_cdf(ranks: np.ndarray, w: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = np.empty(len(u))
    # bound the (chunk, m, d) comparison tensor to ~4M entries
    chunk = max(1, int(4_000_000 / max(1, ranks.size)))
    for i in range(0, len(u), chunk):
        blk = u[i : i + chunk]
        hit = np.all(ranks[None, :, :] <= blk[:, None, :], axis=2)
        out[i : i + chunk] = hit @ w
    return out


@dataclass(frozen=True, eq=False)
class SurvivalCopula:
    """Survival copula of ``base``: the 2^d-term inclusion-exclusion increment.

    A valid copula in its own right; applying the construction twice recovers
    the base copula's values (radial involution).
    """

    base: "Copula | SurvivalCopula"

    @property
    def dim(self) -> int:
        return self.base.dim

    def cdf(self, u):
        pts, single = _as_points(u, self.dim)
        out = _survival_cdf(self.base, pts)
        return float(out[0]) if single else out


CopulaLike = Copula | SurvivalCopula


def _survival_cdf(base: CopulaLike, u: np.ndarray) -> np.ndarray:
    d = base.dim
    one_minus = 1.0 - u
    total = np.zeros(len(u))
    for mask in itertools.product((False, True), repeat=d):
        sel = np.array(mask)
        pts = np.where(sel[None, :], one_minus, 1.0)
        sign = -1.0 if sel.sum() % 2 else 1.0
        total += sign * np.asarray(base.cdf(pts))
    return np.clip(total, 0.0, 1.0)


def survival_copula(c: CopulaLike) -> CopulaLike:
    """The survival copula of ``c``; independence is returned unchanged (self-dual)."""
    if isinstance(c, Copula) and c.family == INDEPENDENCE:
        return c
    return SurvivalCopula(c)


def copula_eval(c: CopulaLike, u) -> float:
    """Pointwise evaluation C(u)."""
    return c.cdf(u)


def survival_copula_eval(c: CopulaLike, u) -> float:
    """Evaluate the survival copula of ``c`` at ``u`` via inclusion-exclusion."""
    pts, single = _as_points(u, c.dim)
    out = _survival_cdf(c, pts)
    return float(out[0]) if single else out


def box_increment(c: CopulaLike, a, b) -> float:
    """Mass the copula assigns to the box (a, b], as the alternating corner sum."""
    a_pts, _ = _as_points(np.asarray(a, dtype=float), c.dim)
    b_pts, _ = _as_points(np.asarray(b, dtype=float), c.dim)
    lo, hi = a_pts[0], b_pts[0]
    if np.any(lo > hi):
        raise DomainError("box corners must satisfy a <= b componentwise")
    total = 0.0
    for mask in itertools.product((False, True), repeat=c.dim):
        sel = np.array(mask)
        corner = np.where(sel, lo, hi)
        sign = -1.0 if sel.sum() % 2 else 1.0
        total += sign * c.cdf(corner)
    return max(total, 0.0) if total > -1e-12 else total


def frechet_lower(u: np.ndarray) -> np.ndarray:
    """Pointwise lower Frechet-Hoeffding bound max(sum(u) - d + 1, 0)."""
    a = np.asarray(u, dtype=float)
    return np.maximum(a.sum(axis=-1) - (a.shape[-1] - 1), 0.0)


def frechet_upper(u: np.ndarray) -> np.ndarray:
    """Pointwise upper Frechet-Hoeffding bound min(u)."""
    return np.min(np.asarray(u, dtype=float), axis=-1)


def frechet_bounds(u) -> tuple[float, float]:
    """Lower and upper Frechet-Hoeffding bounds at one point."""
    a = np.asarray(u, dtype=float)
    if a.ndim != 1:
        raise DimensionError("frechet_bounds takes a single point")
    pts, _ = _as_points(a, a.shape[0])
    return float(frechet_lower(pts[0])), float(frechet_upper(pts[0]))


def default_grid_n(dim: int) -> int:
    """Grid resolution balancing Lipschitz error (constant <= d) against cost."""
    if dim <= 2:
        return 200
    if dim == 3:
        return 50
    return 20


def unit_grid(dim: int, grid_n: int) -> np.ndarray:
    """The closed uniform grid {k/grid_n : k = 0..grid_n}^dim, shape ((n+1)^d, d)."""
    axis = np.linspace(0.0, 1.0, grid_n + 1)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def frechet_distances(c: CopulaLike, grid_n: int | None = None) -> tuple[float, float]:
    """Grid maxima of (M - W) and (M - C) over the closed unit grid.

    Returns ``(d_ul, d_uc)``: the distance between the two Frechet-Hoeffding
    bounds and the distance of ``c`` from the upper bound.  Requires
    dimension >= 2 (there is no dependence spread in dimension 1).
    """
    if c.dim < 2:
        raise DimensionError("Frechet distances require dimension >= 2")
    if grid_n is None:
        grid_n = default_grid_n(c.dim)
    if grid_n < 2:
        raise DomainError(f"grid_n must be >= 2, got {grid_n}")
    grid = unit_grid(c.dim, grid_n)
    upper = frechet_upper(grid)
    d_ul = float(np.max(upper - frechet_lower(grid)))
    d_uc = float(max(np.max(upper - np.asarray(c.cdf(grid))), 0.0))
    return d_ul, d_uc


def scaled_midranks(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted mid-ranks in (0, 1]: cumulative weight below plus half the tied weight."""
    order = np.argsort(values, kind="stable")
    sv, sw = values[order], weights[order]
    uniq, start = np.unique(sv, return_index=True)
    group_w = np.add.reduceat(sw, start)
    below = np.concatenate(([0.0], np.cumsum(group_w)[:-1]))
    mid = below + 0.5 * group_w
    out = np.empty_like(values)
    out[order] = np.repeat(mid, np.diff(np.concatenate((start, [len(sv)]))))
    return out


def empirical_copula(s: ScenarioSet) -> Copula:
    """Rank-based empirical copula of a scenario set.

    Evaluation at ``u`` is the weighted fraction of scenarios whose scaled
    mid-ranks are componentwise <= u.  Grounded exactly; uniform margins hold
    exactly at the grid points k/m for equally weighted tie-free data.
    """
    if s.m < 2:
        raise DataError("empirical copula requires at least 2 scenarios")
    ranks = np.column_stack(
        [scaled_midranks(s.losses[:, i], s.weights) for i in range(s.dim)]
    )
    ranks.setflags(write=False)
    return Copula(EMPIRICAL, s.dim, ranks=ranks, rank_weights=s.weights)


def kendall_tau(x: np.ndarray, y: np.ndarray, weights: np.ndarray) -> float:
    """Weighted pairwise Kendall tau (ties contribute zero concordance)."""
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    ww = weights[:, None] * weights[None, :]
    num = float(np.sum(dx * dy * ww))
    den = float(ww.sum() - np.sum(weights**2))
    if den <= 0.0:
        raise DataError("Kendall tau needs at least two scenarios with positive weight")
    return num / den


def _frank_tau(theta: float) -> float:
    # tau(theta) = 1 - 4/theta * (1 - D1(theta)) with D1 the first Debye function
    if theta < 0:
        return -_frank_tau(-theta)
    d1 = integrate.quad(lambda t: t / np.expm1(t), 0.0, theta, limit=200)[0] / theta
    return 1.0 - 4.0 / theta * (1.0 - d1)


_FRANK_THETA_MAX = 300.0


def fit_archimedean(s: ScenarioSet, family: str) -> Copula:
    """Fit an Archimedean family by Kendall-tau inversion.

    Pairwise tau for d = 2; the average pairwise tau for d > 2 (standard
    exchangeable practice, recorded as an approximation by callers).  Clayton
    uses theta = 2 tau / (1 - tau), Gumbel theta = 1 / (1 - tau), Frank solves
    the Debye relation by bracketed root finding.
    """
    if family not in ARCHIMEDEAN_FAMILIES:
        raise FitError(f"cannot fit family {family!r}; choose one of {ARCHIMEDEAN_FAMILIES}")
    if s.dim < 2:
        raise DimensionError("fitting requires dimension >= 2")
    if s.m < 2:
        raise DataError("fitting requires at least 2 scenarios")
    taus = [
        kendall_tau(s.losses[:, i], s.losses[:, j], s.weights)
        for i, j in itertools.combinations(range(s.dim), 2)
    ]
    tau = float(np.mean(taus))

    if family == CLAYTON:
        if tau <= 0.0:
            raise FitError(f"Clayton requires tau > 0 (theta > 0), sample tau = {tau:.6g}")
        if tau >= 1.0 - 1e-9:
            raise FitError("Clayton cannot represent tau = 1 (theta -> infinity)")
        return Copula(CLAYTON, s.dim, theta=2.0 * tau / (1.0 - tau))
    if family == GUMBEL:
        if tau < 0.0:
            raise FitError(f"Gumbel requires tau >= 0 (theta >= 1), sample tau = {tau:.6g}")
        if tau >= 1.0 - 1e-9:
            raise FitError("Gumbel cannot represent tau = 1 (theta -> infinity)")
        return Copula(GUMBEL, s.dim, theta=1.0 / (1.0 - tau))
    # Frank
    if abs(tau) < 1e-12:
        raise FitError("Frank is undefined at tau = 0 (theta -> 0 is independence)")
    if s.dim >= 3 and tau < 0.0:
        raise FitError("Frank with tau < 0 is only a copula for dimension 2")
    if abs(tau) >= _frank_tau(_FRANK_THETA_MAX):
        raise FitError(f"sample tau = {tau:.6g} outside the invertible Frank range")
    mag = optimize.brentq(
        lambda th: _frank_tau(th) - abs(tau), 1e-6, _FRANK_THETA_MAX, xtol=1e-12
    )
    return Copula(FRANK, s.dim, theta=float(np.copysign(mag, tau)))


def gof_distance(e: CopulaLike, c: CopulaLike, grid_n: int | None = None) -> float:
    """Mean squared difference of two copulas over the closed unit grid.

    Used as a Cramer-von-Mises-style statistic to judge whether declared
    dependence is compatible with the data's empirical copula.
    """
    if e.dim != c.dim:
        raise DimensionError(f"dimension mismatch: {e.dim} vs {c.dim}")
    if grid_n is None:
        grid_n = default_grid_n(e.dim)
    grid = unit_grid(e.dim, grid_n)
    diff = np.asarray(e.cdf(grid)) - np.asarray(c.cdf(grid))
    return float(np.mean(diff**2))


def independence(dim: int) -> Copula:
    return Copula(INDEPENDENCE, dim)


def comonotone(dim: int) -> Copula:
    return Copula(COMONOTONE, dim)


def countermonotone_2d() -> Copula:
    return Copula(COUNTERMONOTONE_2D, 2)


def clayton(theta: float, dim: int = 2) -> Copula:
    return Copula(CLAYTON, dim, theta=theta)


def gumbel(theta: float, dim: int = 2) -> Copula:
    return Copula(GUMBEL, dim, theta=theta)


def frank(theta: float, dim: int = 2) -> Copula:
    return Copula(FRANK, dim, theta=theta)
