"""Common-reconstruction rate-distortion function.

R_CR(d1,d2) = min max{I(X; Xh Yh | Y), I(Y; Xh Yh | X)} over test channels
p(xh,yh|x,y) meeting both distortion targets.  Both terms are convex in the
channel, so the minimax is a convex program solved by
:class:`~twrn_rd.engine.ConvexProgram` with a certified duality gap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import ConvexProgram, TwoSidedBackend
from .errors import DomainError
from .prob import Channel, JointSource, SolverConfig
from .rd import conditional_rd, joint_rd, marginal_rd


@dataclass(frozen=True)
class CrResult:
    """Minimax rate (bits) with its channel and the two information terms."""

    rate: float
    channel: Channel
    two_mis: tuple
    iterations: int
    converged: bool
    achieved_distortions: tuple = ()
    lower_bound: float = -math.inf
    weight: float = 1.0


def _check(*ds):
    for d in ds:
        if not (d >= 0 and math.isfinite(d)):
            raise DomainError(f"distortion must be finite and nonnegative, got {d}")


def pair_costs(source: JointSource):
    """Costs for C = Xh x Yh with flattened index ``c = xh*|Yh| + yh``."""
    nx, ny, nxh, nyh = source.nx, source.ny, source.nxh, source.nyh
    c1 = np.broadcast_to(source.delta1[:, None, :, None], (nx, ny, nxh, nyh)).reshape(nx, ny, nxh * nyh)
    c2 = np.broadcast_to(source.delta2[None, :, None, :], (nx, ny, nxh, nyh)).reshape(nx, ny, nxh * nyh)
    return np.ascontiguousarray(c1), np.ascontiguousarray(c2)


def cr_program(source: JointSource, d1, d2, cfg=None, extra=None, offsets=(0.0, 0.0)) -> ConvexProgram:
    c1, c2 = pair_costs(source)
    return ConvexProgram(TwoSidedBackend(source.q_xy, c1, c2), d1=d1, d2=d2, offsets=offsets, extra=extra, cfg=cfg)


def _to_result(res, source: JointSource) -> CrResult:
    ch = Channel(res.p.reshape(source.nx, source.ny, source.nxh, source.nyh), n_in=2)
    return CrResult(
        rate=max(0.0, res.value),
        channel=ch,
        two_mis=(res.i1, res.i2),
        iterations=res.iterations,
        converged=res.converged,
        achieved_distortions=(res.dist1, res.dist2),
        lower_bound=min(max(0.0, res.value), max(0.0, res.lower)),
        weight=res.lam,
    )


def cr_rd(source: JointSource, d1: float, d2: float, cfg: SolverConfig | None = None) -> CrResult:
    """R_CR(d1, d2) as a certified convex minimax."""
    _check(d1, d2)
    return _to_result(cr_program(source, d1, d2, cfg).solve(), source)


def cr_weighted(source: JointSource, lam: float, d1: float, d2: float, cfg: SolverConfig | None = None) -> CrResult:
    """Minimize ``lam*I(X;XhYh|Y) + (1-lam)*I(Y;XhYh|X)`` under the targets."""
    _check(d1, d2)
    if not 0.0 <= lam <= 1.0:
        raise DomainError("weight must lie in [0, 1]")
    res = cr_program(source, d1, d2, cfg).solve(lam=lam)
    out = _to_result(res, source)
    return out


def cr_rd_joint_upper(source: JointSource, d1: float, d2: float, cfg: SolverConfig | None = None) -> float:
    """max{R_XY(d1,d2) - R_X(d1), R_XY(d1,d2) - R_Y(d2)}, an upper bound on R_CR."""
    _check(d1, d2)
    rxy = joint_rd(source, d1, d2, cfg).rate
    rx = marginal_rd(source.q_x, source.delta1, d1, cfg).rate
    ry = marginal_rd(source.q_y, source.delta2, d2, cfg).rate
    return max(0.0, rxy - rx, rxy - ry)


def cr_rd_max_distortion(source: JointSource, d1: float, cfg: SolverConfig | None = None) -> CrResult:
    """R_CR(d1, d2_max) = min max{I(X;Xh|Y), I(Y;Xh|X)} over p(xh|x,y)."""
    _check(d1)
    nx, ny, nxh = source.nx, source.ny, source.nxh
    c1 = np.ascontiguousarray(np.broadcast_to(source.delta1[:, None, :], (nx, ny, nxh)))
    res = ConvexProgram(TwoSidedBackend(source.q_xy, c1), d1=d1, cfg=cfg).solve()
    ch = Channel(res.p.reshape(nx, ny, nxh), n_in=2)
    return CrResult(max(0.0, res.value), ch, (res.i1, res.i2), res.iterations, res.converged,
                    (res.dist1,), min(max(0.0, res.value), max(0.0, res.lower)), res.lam)


SWEEP_COLUMNS = ("d1", "d2", "r_cr", "mi_x", "mi_y", "gap_to_rl")


def cr_sweep(source: JointSource, pairs, cfg: SolverConfig | None = None, flag_tol: float | None = None):
    """Evaluate R_CR and its gap to the cut-set bound over distortion pairs.

    Returns a list of dicts with the CSV columns plus ``equal_to_rl``,
    set where the gap is below ``flag_tol`` (default five times the solver
    gap tolerance): an empirical picture of the region where R_CR = R_L.
    """
    cfg = cfg or SolverConfig()
    flag_tol = 5 * cfg.gap_tol if flag_tol is None else flag_tol
    rows = []
    for d1, d2 in pairs:
        r = cr_rd(source, d1, d2, cfg)
        rl = max(conditional_rd(source, 1, d1, cfg).rate, conditional_rd(source, 2, d2, cfg).rate)
        gap = r.rate - rl
        rows.append({"d1": float(d1), "d2": float(d2), "r_cr": r.rate, "mi_x": r.two_mis[0],
                     "mi_y": r.two_mis[1], "gap_to_rl": gap, "equal_to_rl": bool(gap < flag_tol)})
    return rows
