"""Auxiliary-variable problems: Wyner-Ziv RD and additive-noise capacities.

Wyner-Ziv
    R^WZ_{X|Y}(d) = min I(X;A|Y) over helpers p(a|x) and decoders
    pi: A x Y -> Xh with E[delta(X, pi(A,Y))] <= d.  Relabelling A by its
    decoder row ``pi(a, .)`` merges symbols, which cannot raise I(X;A|Y) and
    leaves the distortion unchanged.  Hence the minimum equals a convex
    program whose helper alphabet is the set of all maps Y -> Xh; that
    program is solved exactly and the helper is then reduced to at most
    |X|+1 symbols.  For alphabets where the map set is too large an
    alternating multi-start heuristic is used instead.

Additive-noise capacity
    C^add(d, N) = sup I(W; W+N mod l) under E[delta(W)] <= d, a concave
    program solved by cost-constrained Blahut-Arimoto with a dual bound.

Minimax capacity
    C(d) = inf_N C^add(d, N) over noise pmfs with E[delta(N)] <= d, a convex
    program in N solved by a cutting-plane method with certified bounds.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, linprog

from ._kernels import ba_cost_capacity
from .engine import LN2, ConvexProgram, HelperBackend
from .errors import DomainError, InfeasibleDistortion, NoConvergence, NotDifferenceMeasure, ValidationError
from .prob import Channel, JointSource, SolverConfig, entropy, validate_pmf

#: Largest decoder-row alphabet solved by the exact lifted program.
ROW_LIMIT = 4096
#: Largest number of support subsets tried during helper reduction.
SUBSET_LIMIT = 200


@dataclass(frozen=True)
class WzResult:
    """Wyner-Ziv rate (bits), helper ``p(a|x)`` and decoder table ``pi[a, y]``.

    ``exact`` is true when the value comes from the lifted convex program;
    then ``lower_bound`` is a certified dual bound.  ``reduced`` tells
    whether the helper was brought down to at most |X|+1 symbols.
    """

    rate: float
    helper_channel: Channel
    decoder: np.ndarray
    achieved_distortion: float
    n_starts_used: int
    best_start_seed: int
    converged: bool
    exact: bool
    reduced: bool
    lower_bound: float = -math.inf


def decoder_rows(ny: int, nxh: int) -> np.ndarray:
    """All maps ``Y -> Xh`` as an array of shape ``(nxh**ny, ny)``."""
    return np.array(list(itertools.product(range(nxh), repeat=ny)), dtype=np.int64).reshape(-1, ny)


def _helper_cost(src: JointSource, rows: np.ndarray) -> np.ndarray:
    """cost[x, y, a] = delta(x, rows[a, y])."""
    ny = src.ny
    return np.ascontiguousarray(
        np.stack([src.delta1[:, rows[:, y]] for y in range(ny)], axis=1)
    )


def _solve_rows(src, rows, d, cfg):
    prog = ConvexProgram(HelperBackend(src.q_xy, _helper_cost(src, rows)), d1=d, cfg=cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoConvergence)
        return prog.solve(lam=1.0)


def _reduce(src, rows, res, d, cfg, target):
    """Re-solve on small row subsets of the support to get |A| <= |X|+1."""
    na = src.nx + 1
    mass = src.q_x @ res.p
    support = [int(a) for a in np.argsort(-mass) if mass[a] > 1e-12]
    if len(support) <= na:
        keep = sorted(support)
        p = res.p[:, keep]
        return rows[keep], p / p.sum(axis=1, keepdims=True), res, True
    slack = max(cfg.gap_tol, 1e-9)
    for n_tried, subset in enumerate(itertools.combinations(support, na)):
        if n_tried >= SUBSET_LIMIT:
            break
        sub = rows[list(subset)]
        try:
            r = _solve_rows(src, sub, d, cfg)
        except InfeasibleDistortion:
            continue
        if r.value <= target + slack:
            return sub, r.p, r, True
    return rows[support], res.p[:, support], res, False


def _wz_exact(src, d, cfg):
    rows = decoder_rows(src.ny, src.nxh)
    res = _solve_rows(src, rows, d, cfg)
    rows_r, p, r, reduced = _reduce(src, rows, res, d, cfg, res.value)
    na = src.nx + 1
    if rows_r.shape[0] < na:
        # pad with unused symbols so the helper has exactly |X|+1 outputs
        pad = na - rows_r.shape[0]
        rows_r = np.vstack([rows_r, np.repeat(rows_r[:1], pad, axis=0)])
        p = np.hstack([p, np.zeros((p.shape[0], pad))])
    value = max(0.0, r.value)
    converged = (value - max(0.0, res.lower)) <= cfg.gap_tol
    if not converged:
        warnings.warn(f"Wyner-Ziv program stopped with gap {value - res.lower:.3g} bits", NoConvergence,
                      stacklevel=3)
    return WzResult(value, Channel(p), rows_r, r.dist1, 1, cfg.seed, converged, True, reduced,
                    max(0.0, res.lower))


def _best_decoder(src, p):
    """pi(a,y) = argmin_xh sum_x q(x,y) p(a|x) delta(x,xh), ties to lowest index."""
    w = np.einsum("xy,xa,xh->ayh", src.q_xy, p, src.delta1)
    return np.argmin(w, axis=2)


def _wz_alternating(src, d, cfg):
    """Multi-start alternation between decoder tables and helper solves."""
    na = src.nx + 1
    rng = np.random.default_rng(cfg.seed)
    best = None
    for k in range(cfg.n_starts):
        if k == 0:
            p = np.hstack([np.eye(src.nx), np.zeros((src.nx, 1))])
        else:
            p = rng.dirichlet(np.ones(na), size=src.nx)
        seen = set()
        cur = None
        for _ in range(50):
            dec = _best_decoder(src, p)
            key = dec.tobytes()
            if key in seen:
                break
            seen.add(key)
            try:
                r = _solve_rows(src, dec, d, cfg)
            except InfeasibleDistortion:
                break
            if cur is not None and r.value >= cur[0] - 1e-12:
                break
            cur = (r.value, r.p, dec, r.dist1)
            p = np.where(r.p > 0, r.p, 0.0)
        if cur is not None and (best is None or cur[0] < best[0] - 1e-12):
            best = cur + (k,)
    if best is None:
        raise InfeasibleDistortion("no decoder reached the distortion target")
    value, p, dec, dist, seed = best
    return WzResult(max(0.0, value), Channel(p), dec, dist, cfg.n_starts, seed, True, False, True)


def wyner_ziv_rd(source: JointSource, which: int, d: float, cfg: SolverConfig | None = None) -> WzResult:
    """R^WZ_{X|Y}(d) for ``which == 1``, R^WZ_{Y|X}(d) for ``which == 2``."""
    if which not in (1, 2):
        raise ValidationError("which must be 1 or 2")
    if not (d >= 0 and math.isfinite(d)):
        raise DomainError(f"distortion must be finite and nonnegative, got {d}")
    cfg = cfg or SolverConfig()
    src = source if which == 1 else source.swapped()
    if src.nxh ** src.ny <= ROW_LIMIT:
        return _wz_exact(src, d, cfg)
    return _wz_alternating(src, d, cfg)


# ----------------------------------------------------------------------------
# Additive-noise channels
# ----------------------------------------------------------------------------


def check_difference_measure(delta) -> np.ndarray:
    """Validate a difference distortion vector ``delta(z)`` with delta(0) = 0."""
    v = np.asarray(delta, dtype=float).ravel()
    if v.size < 1 or np.any(v < 0) or not np.all(np.isfinite(v)):
        raise DomainError("distortion vector must be finite and nonnegative")
    if v[0] != 0.0:
        raise DomainError("difference measure needs delta(0) = 0")
    return v


def difference_vector(delta) -> np.ndarray:
    """Return ``v`` with ``delta[x, xh] == v[(x - xh) mod l]``, or raise."""
    m = np.asarray(delta, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotDifferenceMeasure("a difference measure needs a square matrix")
    n = m.shape[0]
    v = np.array([m[z % n, 0] for z in range(n)])
    for x in range(n):
        for xh in range(n):
            if m[x, xh] != v[(x - xh) % n]:
                raise NotDifferenceMeasure("distortion is not a function of x - xh mod l")
    if v[0] != 0.0:
        raise NotDifferenceMeasure("difference measure needs delta(0) = 0")
    return v


def additive_channel(noise) -> np.ndarray:
    """Q[w, y] = noise[(y - w) mod l]."""
    n = np.asarray(noise, dtype=float)
    l = n.size
    return np.array([[n[(y - w) % l] for y in range(l)] for w in range(l)])


@dataclass(frozen=True)
class CapacityResult:
    """Capacity value (bits) with its input pmf and a dual upper bound."""

    value: float
    upper: float
    p_w: np.ndarray
    slope: float
    converged: bool


def _cap_run(Q, delta, s, mask, cfg):
    p = np.where(mask, 1.0, 0.0)
    p /= p.sum()
    mi, ec, dual, iters, dec = ba_cost_capacity(Q, delta, s, mask, p, 1e-15, cfg.max_iters)
    return p, mi, ec, dual


def additive_capacity_result(l: int, delta, d: float, noise, cfg: SolverConfig | None = None) -> CapacityResult:
    """Input-constrained capacity of the modulo-``l`` additive-noise channel."""
    cfg = cfg or SolverConfig()
    delta = check_difference_measure(delta)
    if delta.size != l:
        raise DomainError("distortion vector length must equal the alphabet size")
    if not (d >= 0 and math.isfinite(d)):
        raise DomainError("d must be finite and nonnegative")
    noise = validate_pmf(np.asarray(noise, dtype=float).ravel(), "noise")
    if noise.size != l:
        raise DomainError("noise pmf length must equal the alphabet size")
    Q = additive_channel(noise)
    mask = np.ones(l, dtype=bool)
    if d <= 1e-15:
        mask = delta <= 0.0
    if np.mean(delta) <= d:
        # uniform input meets the target and maximizes H(W + N)
        p = np.full(l, 1.0 / l)
        v = max(0.0, math.log2(l) - entropy(noise))
        return CapacityResult(v, v, p, 0.0, True)
    p, mi, ec, dual = _cap_run(Q, delta, 0.0, mask, cfg)
    s = 0.0
    if ec > d + 1e-15 and d > 1e-15:
        f = lambda t: _cap_run(Q, delta, t, mask, cfg)[2] - d
        hi = 1.0
        while f(hi) > 0:
            hi *= 4.0
            if hi > 2.0**40:
                break
        s = brentq(f, 0.0, hi, xtol=1e-13, rtol=1e-12, maxiter=200)
        p, mi, ec, dual = _cap_run(Q, delta, s, mask, cfg)
    lower = max(0.0, mi / LN2)
    upper = max(lower, (dual + s * d) / LN2)
    return CapacityResult(lower, upper, p, s / LN2, bool(upper - lower <= max(cfg.gap_tol, 1e-9)))


def additive_capacity(l: int, delta, d: float, noise, cfg: SolverConfig | None = None) -> float:
    """sup I(W; W + N) over inputs with E[delta(W)] <= d, in bits."""
    return additive_capacity_result(l, delta, d, noise, cfg).value


@dataclass(frozen=True)
class MinimaxResult:
    """Worst-noise capacity bracket: the true value lies in [lower, value]."""

    value: float
    lower: float
    noise: np.ndarray
    p_w: np.ndarray
    iterations: int
    converged: bool


def _noise_gradient(p_w, noise):
    """d/dN(z) of I(W; W+N) at fixed input, in nats (constant shifts dropped)."""
    l = noise.size
    Q = additive_channel(noise)
    py = p_w @ Q
    g = np.empty(l)
    for z in range(l):
        acc = 0.0
        for w in range(l):
            acc += p_w[w] * math.log(py[(w + z) % l])
        g[z] = math.log(noise[z]) - acc
    return g


def _mi(p_w, noise):
    Q = additive_channel(noise)
    joint = p_w[:, None] * Q
    py = joint.sum(axis=0)
    return entropy(py) - entropy(noise)


def minimax_capacity_result(l: int, delta, d: float, cfg: SolverConfig | None = None,
                            max_cuts: int = 300) -> MinimaxResult:
    """inf over noise pmfs with E[delta(N)] <= d of the additive capacity."""
    cfg = cfg or SolverConfig()
    delta = check_difference_measure(delta)
    if delta.size != l:
        raise DomainError("distortion vector length must equal the alphabet size")
    if not (d >= 0 and math.isfinite(d)):
        raise DomainError("d must be finite and nonnegative")
    zero = delta <= 0.0
    if d <= 1e-15:
        # noise confined to the zero set of delta, and so is the input
        n = np.where(zero, 1.0, 0.0) / zero.sum()
        r = additive_capacity_result(l, delta, 0.0, n, cfg)
        return MinimaxResult(r.value, r.value, n, r.p_w, 0, True)
    # full-support feasible anchor used to keep every query point interior
    mean = float(np.mean(delta))
    eta = min(1.0, d / mean) if mean > 0 else 1.0
    anchor = (1 - eta) * np.where(zero, 1.0, 0.0) / zero.sum() + eta / l
    floor = 1e-9
    cuts_g, cuts_b = [], []
    best = None
    lower = -math.inf
    n = anchor.copy()
    it = 0
    tol = max(cfg.gap_tol * 1e-2, 1e-9)
    for it in range(1, max_cuts + 1):
        n = (1 - floor) * n + floor * anchor
        r = additive_capacity_result(l, delta, d, n, cfg)
        if best is None or r.upper < best[0]:
            best = (r.upper, n.copy(), r.p_w)
        f = _mi(r.p_w, n)
        g = _noise_gradient(r.p_w, n) / LN2
        # cut: t >= f + g.(N - n)
        cuts_g.append(g)
        cuts_b.append(f - g @ n)
        A = np.hstack([np.array(cuts_g), -np.ones((len(cuts_g), 1))])
        res = linprog(
            np.r_[np.zeros(l), 1.0],
            A_ub=np.vstack([A, np.r_[delta, 0.0]]),
            b_ub=np.r_[-np.array(cuts_b), d],
            A_eq=np.r_[np.ones(l), 0.0][None, :],
            b_eq=[1.0],
            bounds=[(0, None)] * l + [(None, None)],
            method="highs",
        )
        if res.status != 0:
            break
        lower = max(lower, float(res.x[-1]))
        n = np.clip(res.x[:l], 0, None)
        n /= n.sum()
        if best[0] - lower <= tol:
            break
    value = best[0]
    lower = max(0.0, min(lower, value))
    conv = value - lower <= max(cfg.gap_tol, 1e-9)
    if not conv:
        warnings.warn(f"minimax capacity stopped with gap {value - lower:.3g} bits", NoConvergence, stacklevel=2)
    return MinimaxResult(value, lower, best[1], best[2], it, conv)


def minimax_capacity(l: int, delta, d: float, cfg: SolverConfig | None = None) -> float:
    """C(d) = inf_N sup_W I(W; W + N) under the distortion budget, in bits."""
    return minimax_capacity_result(l, delta, d, cfg).value
