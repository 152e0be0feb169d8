"""Analytic golden values.

Doubly symmetric binary source (DSBS): X uniform on {0,1}, Y = X xor Z with
Z ~ Bernoulli(rho), Hamming distortion on both sides.  Jointly Gaussian
sources with squared-error distortion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .prob import Channel, JointSource, binary_convolution, binary_entropy, hamming

h = binary_entropy


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 <= rho <= 0.5:
        raise DomainError(f"rho must lie in [0, 1/2], got {rho}")
    return rho


@dataclass(frozen=True)
class DsbsSpec:
    rho: float

    def __post_init__(self):
        _check_rho(self.rho)


def dsbs_source(rho: float) -> JointSource:
    """The DSBS with crossover ``rho`` as a validated source."""
    rho = _check_rho(rho)
    q = np.array([[(1 - rho) / 2, rho / 2], [rho / 2, (1 - rho) / 2]])
    return JointSource.from_arrays(q, hamming(2), hamming(2))


def dsbs_rd(rho: float, d: float) -> float:
    """R(d, d) = R_L(d, d) for the DSBS: h(rho) - h(d) when d <= rho, else 0."""
    rho = _check_rho(rho)
    d = float(d)
    if not 0.0 <= d <= 1.0:
        raise DomainError(f"d must lie in [0, 1], got {d}")
    if d >= rho:
        return 0.0
    return h(rho) - h(d)


def dsbs_d_star(rho: float) -> float:
    """Largest symmetric distortion with R_CR = R: 1/2 - sqrt(1 - 2 rho)/2."""
    rho = _check_rho(rho)
    return 0.5 - 0.5 * math.sqrt(1.0 - 2.0 * rho)


def dsbs_wyner_common_information(rho: float) -> float:
    """K(X;Y) = 1 + h(rho) - 2 h(d*)."""
    rho = _check_rho(rho)
    return 1.0 + h(rho) - 2.0 * h(dsbs_d_star(rho))


def dsbs_cr_alpha(rho: float, d: float) -> float:
    return (2.0 * d - rho) / (2.0 * (1.0 - rho))


def dsbs_cr_upper(rho: float, d: float) -> float:
    """Upper bound on R_CR(d, d) past d*: h(d) - rho - (1 - rho) h(alpha)."""
    rho = _check_rho(rho)
    d = float(d)
    ds = dsbs_d_star(rho)
    if not ds < d <= 0.5:
        raise DomainError(f"d must lie in (d*, 1/2] = ({ds:.6g}, 0.5], got {d}")
    return h(d) - rho - (1.0 - rho) * h(dsbs_cr_alpha(rho, d))


def _bsc(e: float) -> np.ndarray:
    return np.array([[1 - e, e], [e, 1 - e]])


def dsbs_cascade_channel(rho: float, d: float) -> Channel:
    """Test channel ``p(xh,yh|x,y)`` from the chain X - Xh - W - Yh - Y.

    Links are BSC(d), BSC(beta), BSC(beta), BSC(d) with
    ``beta = (d* - d)/(1 - 2d)``, so that ``d conv beta = d*`` and the
    end-to-end crossover is ``d* conv d* = rho``.
    """
    rho = _check_rho(rho)
    ds = dsbs_d_star(rho)
    d = float(d)
    if not 0.0 <= d <= ds + 1e-15:
        raise DomainError(f"d must lie in [0, d*] = [0, {ds:.6g}], got {d}")
    d = min(d, ds)
    beta = 0.0 if d == ds else (ds - d) / (1.0 - 2.0 * d)
    A, B = _bsc(d), _bsc(beta)
    # joint p(x, xh, w, yh, y)
    joint = 0.5 * np.einsum("xa,aw,wb,by->xawby", A, B, B, A)
    p_xy_ab = np.einsum("xawby->xyab", joint)
    q = p_xy_ab.sum(axis=(2, 3))
    out = np.zeros_like(p_xy_ab)
    for x in range(2):
        for y in range(2):
            # inputs of zero mass reproduce themselves
            out[x, y] = p_xy_ab[x, y] / q[x, y] if q[x, y] > 0 else np.eye(2)[x][:, None] * np.eye(2)[y][None, :]
    return Channel(out, n_in=2)


def dsbs_four_input_channel(rho: float, d: float) -> Channel:
    """Common-reconstruction channel ``p(w|x,y)`` with Xh = Yh = W.

    On disagreeing inputs W is a fair coin; on agreeing inputs W repeats
    the common value except with probability ``alpha``.  Both induced
    single-letter channels are BSC(d).  Returned as ``p(xh,yh|x,y)``
    supported on the diagonal ``xh == yh``.
    """
    rho = _check_rho(rho)
    d = float(d)
    ds = dsbs_d_star(rho)
    if not (ds - 1e-15 <= d <= 0.5 and 2 * d >= rho):
        raise DomainError(f"d must lie in [d*, 1/2] = [{ds:.6g}, 0.5], got {d}")
    a = dsbs_cr_alpha(rho, d)
    p = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for w in range(2):
                if x != y:
                    pw = 0.5
                else:
                    pw = 1.0 - a if w == x else a
                p[x, y, w, w] = pw
    return Channel(p, n_in=2)


def cr_objective(source: JointSource, channel: Channel) -> tuple[float, float]:
    """(I(X; Xh Yh | Y), I(Y; Xh Yh | X)) of a pair test channel."""
    from .prob import info_terms

    t = info_terms(source.q_xy, channel.probs)
    return t["xc_y"], t["yc_x"]


# ----------------------------------------------------------------------------
# Gaussian
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianSpec:
    """Jointly Gaussian pair; the means do not affect any rate."""

    sigma_x2: float
    sigma_y2: float
    rho: float
    m_x: float = 0.0
    m_y: float = 0.0

    def __post_init__(self):
        if not (self.sigma_x2 > 0 and self.sigma_y2 > 0):
            raise DomainError("variances must be positive")
        if not -1.0 < self.rho < 1.0:
            raise DomainError("correlation must lie in (-1, 1)")


def gaussian_conditional_rd(spec: GaussianSpec, which: int, d: float) -> float:
    """max(0, 1/2 log2(sigma^2 (1 - rho^2) / d)) for squared error."""
    if which not in (1, 2):
        raise DomainError("which must be 1 or 2")
    d = float(d)
    if not d > 0:
        raise DomainError(f"d must be positive, got {d}")
    s2 = spec.sigma_x2 if which == 1 else spec.sigma_y2
    cond = s2 * (1.0 - spec.rho**2)
    if d >= cond:
        return 0.0
    return 0.5 * math.log2(cond / d)


def gaussian_region(spec: GaussianSpec, d1: float, d2: float) -> float:
    """R(d1, d2) = max{R_{X|Y}(d1), R_{Y|X}(d2)} for the Gaussian pair."""
    return max(gaussian_conditional_rd(spec, 1, d1), gaussian_conditional_rd(spec, 2, d2))


# ----------------------------------------------------------------------------
# Figure tables
# ----------------------------------------------------------------------------


def default_grid(step: float = 0.005) -> np.ndarray:
    n = int(round(0.5 / step))
    return np.round(np.linspace(0.0, 0.5, n + 1), 12)


@dataclass(frozen=True)
class FigureTable:
    """Rows of the DSBS figure: solid RD curve, dotted CR upper bound, d*."""

    rho: float
    d_star: float
    d: np.ndarray
    r: np.ndarray
    cr_upper: np.ndarray
    is_past_dstar: np.ndarray

    def __len__(self) -> int:
        return len(self.d)

    def rows(self):
        for i in range(len(self.d)):
            yield self.d[i], self.r[i], self.cr_upper[i], bool(self.is_past_dstar[i])


def figure_curves(rho: float, grid=None) -> FigureTable:
    """Tabulate R(d,d), the CR upper bound (only past d*) and d*."""
    rho = _check_rho(rho)
    grid = default_grid() if grid is None else np.asarray(list(grid), dtype=float)
    if grid.size and (grid.min() < 0 or grid.max() > 0.5):
        raise DomainError("figure grid must lie in [0, 1/2]")
    ds = dsbs_d_star(rho)
    r = np.array([dsbs_rd(rho, d) for d in grid])
    past = grid > ds
    cr = np.array([dsbs_cr_upper(rho, d) if p else np.nan for d, p in zip(grid, past)])
    return FigureTable(rho, ds, grid, r, cr, past)


__all__ = [
    "DsbsSpec",
    "GaussianSpec",
    "FigureTable",
    "dsbs_source",
    "dsbs_rd",
    "dsbs_d_star",
    "dsbs_wyner_common_information",
    "dsbs_cr_upper",
    "dsbs_cascade_channel",
    "dsbs_four_input_channel",
    "cr_objective",
    "gaussian_conditional_rd",
    "gaussian_region",
    "figure_curves",
    "default_grid",
    "binary_convolution",
]
