"""Rate-distortion functions computed by alternating minimization.

Marginal, conditional (side information at both ends) and joint RD
functions are convex programs; each is solved through the shared
:class:`~twrn_rd.engine.ConvexProgram` with a single information term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .engine import ConvexProgram, TwoSidedBackend
from .errors import DomainError, ValidationError
from .prob import Channel, JointSource, SolverConfig, validate_pmf


@dataclass(frozen=True)
class RdResult:
    """Rate (bits) with its optimizing test channel and certificate.

    ``lower_bound`` is a dual bound on the true minimum, so the true value
    lies in ``[lower_bound, rate]``.  ``lagrange_multipliers`` are slopes in
    bits per unit distortion.
    """

    rate: float
    channel: Channel
    achieved_distortions: tuple
    iterations: int
    converged: bool
    lagrange_multipliers: tuple
    lower_bound: float = -math.inf


def _check_d(*ds):
    for d in ds:
        if not (d >= 0 and math.isfinite(d)):
            raise DomainError(f"distortion must be finite and nonnegative, got {d}")


def _result(res, channel, n_constraints) -> RdResult:
    dists = (res.dist1, res.dist2)[:n_constraints]
    slopes = tuple(res.slopes[:n_constraints])
    return RdResult(
        rate=max(0.0, res.value),
        channel=channel,
        achieved_distortions=tuple(float(x) for x in dists),
        iterations=res.iterations,
        converged=res.converged,
        lagrange_multipliers=slopes,
        lower_bound=min(max(0.0, res.value), max(0.0, res.lower)),
    )


def marginal_rd(q_x, delta, d: float, cfg: SolverConfig | None = None) -> RdResult:
    """R_X(d) = min I(X;Xh) subject to E[delta(X,Xh)] <= d."""
    _check_d(d)
    q = validate_pmf(np.asarray(q_x, dtype=float).ravel(), "q_x")
    delta = np.asarray(delta, dtype=float)
    if delta.ndim != 2 or delta.shape[0] != q.size:
        raise ValidationError("delta must have one row per source symbol")
    cost = delta[:, None, :]
    res = ConvexProgram(TwoSidedBackend(q[:, None], cost), d1=d, cfg=cfg).solve(lam=1.0)
    return _result(res, Channel(res.p, n_in=1), 1)


def conditional_rd(source: JointSource, which: int, d: float, cfg: SolverConfig | None = None) -> RdResult:
    """R_{X|Y}(d) for ``which == 1`` or R_{Y|X}(d) for ``which == 2``.

    The returned channel is ``p(xh|x,y)`` (resp. ``p(yh|y,x)``, with the
    side information on the second axis).
    """
    _check_d(d)
    if which not in (1, 2):
        raise ValidationError("which must be 1 or 2")
    src = source if which == 1 else source.swapped()
    nx, ny, nxh = src.nx, src.ny, src.nxh
    cost = np.broadcast_to(src.delta1[:, None, :], (nx, ny, nxh))
    res = ConvexProgram(TwoSidedBackend(src.q_xy, cost), d1=d, cfg=cfg).solve(lam=1.0)
    return _result(res, Channel(res.p.reshape(nx, ny, nxh), n_in=2), 1)


def joint_costs(source: JointSource):
    """Costs of the pair reconstruction over flattened ``(x,y)`` rows."""
    nx, ny, nxh, nyh = source.nx, source.ny, source.nxh, source.nyh
    c1 = np.broadcast_to(source.delta1[:, None, :, None], (nx, ny, nxh, nyh)).reshape(nx * ny, 1, nxh * nyh)
    c2 = np.broadcast_to(source.delta2[None, :, None, :], (nx, ny, nxh, nyh)).reshape(nx * ny, 1, nxh * nyh)
    return np.ascontiguousarray(c1), np.ascontiguousarray(c2)


def joint_rd(source: JointSource, d1: float, d2: float, cfg: SolverConfig | None = None) -> RdResult:
    """R_XY(d1,d2) = min I(XY; Xh Yh) under both distortion constraints."""
    _check_d(d1, d2)
    c1, c2 = joint_costs(source)
    q = source.q_xy.reshape(-1, 1)
    res = ConvexProgram(TwoSidedBackend(q, c1, c2), d1=d1, d2=d2, cfg=cfg).solve(lam=1.0)
    ch = Channel(res.p.reshape(source.nx, source.ny, source.nxh, source.nyh), n_in=2)
    return _result(res, ch, 2)


SOLVERS = ("marginal", "conditional", "joint", "cr", "wyner-ziv")


def rd_curve(solver: str, source: JointSource, grid: Iterable[float], cfg: SolverConfig | None = None,
             which: int = 1) -> list[tuple[float, float]]:
    """Evaluate one RD-type function along an ascending distortion grid.

    ``solver`` is one of ``marginal``, ``conditional``, ``joint``, ``cr``
    or ``wyner-ziv``; pair-valued functions use ``(d, d)``.
    """
    grid = [float(g) for g in grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValidationError("distortion grid must be sorted ascending")
    out = []
    for d in grid:
        if solver == "marginal":
            src = source if which == 1 else source.swapped()
            r = marginal_rd(src.q_x, src.delta1, d, cfg).rate
        elif solver == "conditional":
            r = conditional_rd(source, which, d, cfg).rate
        elif solver == "joint":
            r = joint_rd(source, d, d, cfg).rate
        elif solver == "cr":
            from .cr import cr_rd

            r = cr_rd(source, d, d, cfg).rate
        elif solver == "wyner-ziv":
            from .auxiliary import wyner_ziv_rd

            r = wyner_ziv_rd(source, which, d, cfg).rate
        else:
            raise ValidationError(f"unknown solver {solver!r}; choose from {SOLVERS}")
        out.append((d, r))
    return out
