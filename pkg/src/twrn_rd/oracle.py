"""Brute-force ground truth by exhaustive search over a simplex grid.

Every conditional row of the test channel ranges over the pmfs with
entries in {0, 1/k, ..., 1}.  The minimum over the grid is exact for the
grid; the reported ``guaranteed_gap`` estimates how far the grid minimum
can sit above the true minimum:

    gap = (grid min at d) - (grid min at d + dD) + omega

where ``dD`` bounds the distortion change caused by rounding any channel
to the grid (so the relaxed grid minimum, less ``omega``, lies below the
true minimum) and ``omega`` is the local modulus of the objective, i.e.
the summed largest one-step change per row at the relaxed minimizer.
``dD`` is rigorous; ``omega`` is a local estimate.

Objectives (``objective`` argument):

``marginal``          I(X;Xh) over p(xh|x)
``conditional1/2``    I(X;Xh|Y) over p(xh|x,y) (resp. the Y side)
``joint``             I(XY;XhYh) over p(xh,yh|x,y)
``cr``                max{I(X;XhYh|Y), I(Y;XhYh|X)} over p(xh,yh|x,y)
``wz1/wz2``           I(X;A|Y) over p(a|x), best decoder table
``one_description``   max{I(X;C|Y), I(Y;C|X)} over p(c|x,y), best tables
``refined``           the one-description term plus both refinement
                      rates, binary Hamming sources only
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .errors import BudgetExceeded, DomainError, InfeasibleDistortion, NotHamming, ValidationError
from .prob import Channel, JointSource

#: Default cap on objective evaluations.
DEFAULT_BUDGET = 10**8
#: Channels evaluated per vectorized chunk.
CHUNK = 1 << 15

OBJECTIVES = ("marginal", "conditional1", "conditional2", "joint", "cr", "wz1", "wz2", "one_description", "refined")


@dataclass(frozen=True)
class GridSpec:
    """Grid step ``1/k``, auxiliary cardinality, budget and optional symmetry.

    ``symmetry`` is a pair ``(row_perm, out_perm)`` of index permutations
    without fixed rows; rows are then tied by
    ``p(c | row_perm[r]) = p(out_perm[c] | r)``, which keeps the exact
    minimum when objective and constraints are invariant (convexity).
    """

    k: int = 20
    card: Optional[int] = None
    budget: int = DEFAULT_BUDGET
    symmetry: Optional[tuple] = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValidationError("grid resolution k must be a positive integer")


@dataclass(frozen=True)
class OracleResult:
    """Grid minimum (bits), its minimizer, and the discretization gap estimate."""

    value: float
    argmin: Channel
    guaranteed_gap: float
    relaxed_value: float
    modulus: float
    distortion_slack: float
    n_channels: int
    n_evaluations: int


# ----------------------------------------------------------------------------
# Enumeration
# ----------------------------------------------------------------------------


def compositions(k: int, n: int) -> np.ndarray:
    """All vectors of ``n`` nonnegative integers summing to ``k`` (lexicographic)."""
    out = []
    for bars in itertools.combinations(range(k + n - 1), n - 1):
        prev = -1
        row = []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(k + n - 2 - prev)
        out.append(row)
    return np.array(out, dtype=np.int64).reshape(-1, n)


def enumerate_decoders(c_card: int, y_card: int, xhat_card: int, budget: int = DEFAULT_BUDGET) -> Iterator[np.ndarray]:
    """Every decoder table ``pi[c, y]`` with values in ``range(xhat_card)``."""
    if min(c_card, y_card, xhat_card) < 1:
        raise DomainError("cardinalities must be positive")
    n = xhat_card ** (c_card * y_card)
    if n > budget:
        raise BudgetExceeded(f"{n} decoder tables exceed the budget {budget}")
    for vals in itertools.product(range(xhat_card), repeat=c_card * y_card):
        yield np.array(vals, dtype=np.int64).reshape(c_card, y_card)


def complement_symmetry(source: JointSource, objective: str) -> tuple:
    """Symmetry that flips every binary symbol, if the source is invariant.

    Requires binary alphabets, ``q(x,y) = q(1-x,1-y)`` and distortions
    invariant under the flip.  Returns the ``(row_perm, out_perm)`` pair
    for the pair-reconstruction objectives.
    """
    if (source.nx, source.ny, source.nxh, source.nyh) != (2, 2, 2, 2):
        raise DomainError("complement symmetry needs binary alphabets")
    q = source.q_xy
    flip = np.array([[1, 0], [0, 1]])[::-1]
    ok = np.allclose(q, q[::-1, ::-1], atol=1e-15)
    for dm in (source.delta1, source.delta2):
        ok = ok and np.allclose(dm, flip @ dm @ flip)
    if not ok:
        raise DomainError("source is not invariant under the complement")
    rows = np.array([3, 2, 1, 0])  # (x,y) -> (1-x,1-y) on flattened rows
    if objective in ("joint", "cr"):
        outs = np.array([3, 2, 1, 0])
    elif objective in ("conditional1", "conditional2"):
        outs = np.array([1, 0])
    else:
        raise DomainError(f"no complement symmetry registered for {objective!r}")
    return rows, outs


# ----------------------------------------------------------------------------
# Batched information terms
# ----------------------------------------------------------------------------


def _xlogx(a):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(a > 0, a * np.log2(np.where(a > 0, a, 1.0)), 0.0)


def _h_sum(P, axes):
    """Sum of -P log P after marginalizing ``P`` (batch axis 0 kept) onto ``axes``."""
    drop = tuple(a for a in range(1, P.ndim) if a not in axes)
    M = P.sum(axis=drop) if drop else P
    return -_xlogx(M).reshape(M.shape[0], -1).sum(axis=1)


def _cmi(P, a, b, cond):
    """I(A;B|cond) in bits for a batch of joint tensors (axes counted from 1)."""
    cond = tuple(cond)
    return (_h_sum(P, tuple(sorted(set((a,) + cond)))) + _h_sum(P, tuple(sorted(set((b,) + cond))))
            - _h_sum(P, tuple(sorted(set((a, b) + cond)))) - (_h_sum(P, cond) if cond else 0.0))


def _hb(p):
    return -(_xlogx(p) + _xlogx(1.0 - p))


def _waterfill(qs, pis, d, iters=80):
    """Binary Hamming conditional RD sum_s q_s [h(pi_s) - h(min(t, m_s))] at distortion d."""
    m = np.minimum(pis, 1.0 - pis)
    full = (qs * m).sum(axis=1)
    lo = np.zeros(qs.shape[0])
    hi = np.full(qs.shape[0], 0.5)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        tot = (qs * np.minimum(mid[:, None], m)).sum(axis=1)
        big = tot > d
        hi = np.where(big, mid, hi)
        lo = np.where(big, lo, mid)
    t = lo
    r = (qs * (_hb(pis) - _hb(np.minimum(t[:, None], m)))).sum(axis=1)
    return np.where(full <= d, 0.0, np.maximum(r, 0.0))


class _Problem:
    """Objective/constraint evaluation for one objective id on one source."""

    def __init__(self, source: JointSource, objective: str, d1, d2, card):
        if objective not in OBJECTIVES:
            raise DomainError(f"unknown objective {objective!r}; choose from {', '.join(OBJECTIVES)}")
        self.src = source
        self.obj = objective
        self.d = [math.inf if d1 is None else float(d1), math.inf if d2 is None else float(d2)]
        if objective in ("conditional2", "wz2"):
            # the swapped source carries the second target in the first slot
            self.d = [self.d[1], math.inf]
        s = source
        nx, ny = s.nx, s.ny
        self.tables1 = self.tables2 = None
        if objective == "marginal":
            self.w = s.q_x
            self.n_out = s.nxh
            self.cost = [s.delta1, None]
        elif objective in ("conditional1", "conditional2"):
            src = s if objective == "conditional1" else s.swapped()
            self.q = src.q_xy
            self.w = src.q_xy.reshape(-1)
            self.n_out = src.nxh
            self.cost = [np.repeat(src.delta1, src.ny, axis=0), None]
        elif objective in ("joint", "cr"):
            self.q = s.q_xy
            self.w = s.q_xy.reshape(-1)
            self.n_out = s.nxh * s.nyh
            c1 = np.broadcast_to(s.delta1[:, None, :, None], (nx, ny, s.nxh, s.nyh)).reshape(nx * ny, -1)
            c2 = np.broadcast_to(s.delta2[None, :, None, :], (nx, ny, s.nxh, s.nyh)).reshape(nx * ny, -1)
            self.cost = [c1, c2]
        elif objective in ("wz1", "wz2"):
            src = s if objective == "wz1" else s.swapped()
            self.q = src.q_xy
            self.w = src.q_x
            self.n_out = card or src.nx + 1
            self.tables1 = np.array(list(enumerate_decoders(self.n_out, src.ny, src.nxh)))
            self.delta = src.delta1
            self.cost = [None, None]
        elif objective in ("one_description", "refined"):
            self.q = s.q_xy
            self.w = s.q_xy.reshape(-1)
            self.n_out = card or 2
            if objective == "one_description":
                self.tables1 = np.array(list(enumerate_decoders(self.n_out, ny, s.nxh)))
                self.tables2 = np.array(list(enumerate_decoders(self.n_out, nx, s.nyh)))
            elif not (s.is_hamming() and (nx, ny, s.nxh, s.nyh) == (2, 2, 2, 2)):
                raise NotHamming("the refined oracle needs binary Hamming sources")
            self.cost = [None, None]
        self.n_rows = len(self.w)
        self._decoder_mats()

    def _decoder_mats(self):
        """Matrices mapping flattened joint tensors to per-table distortions."""
        s = self.src
        self.M1 = self.M2 = None
        if self.obj in ("wz1", "wz2"):
            nx, ny = self.q.shape
            na = self.n_out
            T = self.tables1
            M = np.zeros((nx, ny, na, len(T)))
            for x in range(nx):
                M[x] = self.delta[x][T.transpose(2, 1, 0)]  # (ny, na, t)
            self.M1 = M.reshape(-1, len(T))
        elif self.obj == "one_description":
            nx, ny, nc = s.nx, s.ny, self.n_out
            T1, T2 = self.tables1, self.tables2
            M1 = np.zeros((nx, ny, nc, len(T1)))
            M2 = np.zeros((nx, ny, nc, len(T2)))
            for x in range(nx):
                for y in range(ny):
                    M1[x, y] = s.delta1[x][T1[:, :, y].T]
                    M2[x, y] = s.delta2[y][T2[:, :, x].T]
            self.M1 = M1.reshape(-1, len(T1))
            self.M2 = M2.reshape(-1, len(T2))

    @property
    def evals_per_channel(self) -> int:
        n = 1
        if self.tables1 is not None:
            n = max(n, len(self.tables1))
        if self.tables2 is not None:
            n = max(n, len(self.tables2))
        return n

    def joint(self, p):
        """Joint tensor (batch, x, y, c) for a batch of channels (batch, rows, c)."""
        B = p.shape[0]
        if self.obj == "marginal":
            return (self.w[None, :, None] * p)[:, :, None, :]
        if self.obj in ("wz1", "wz2"):
            return self.q[None, :, :, None] * p[:, :, None, :]
        nx, ny = self.q.shape
        return self.q[None, :, :, None] * p.reshape(B, nx, ny, -1)

    def evaluate(self, p):
        """(objective, distortion1, distortion2) for a batch of channels."""
        P = self.joint(p)
        B = P.shape[0]
        o = self.obj
        zero = np.zeros(B)
        if o == "marginal":
            f = _cmi(P, 1, 3, ())
        elif o in ("conditional1", "conditional2", "wz1", "wz2"):
            f = _cmi(P, 1, 3, (2,))
        elif o == "joint":
            f = _h_sum(P, (3,)) - _h_sum(P, (1, 2, 3)) + _h_sum(P, (1, 2))
        else:
            f = np.maximum(_cmi(P, 1, 3, (2,)), _cmi(P, 2, 3, (1,)))
        if o in ("wz1", "wz2"):
            d1 = (P.reshape(B, -1) @ self.M1).min(axis=1)
            return f, d1, zero
        if o == "one_description":
            flat = P.reshape(B, -1)
            return f, (flat @ self.M1).min(axis=1), (flat @ self.M2).min(axis=1)
        if o == "refined":
            # side (y, c) for X and (x, c) for Y
            Pyc = P.sum(axis=1).reshape(B, -1)
            with np.errstate(invalid="ignore", divide="ignore"):
                pi1 = np.where(Pyc > 0, P[:, 1].reshape(B, -1) / np.where(Pyc > 0, Pyc, 1), 0.0)
            Pxc = P.sum(axis=2).reshape(B, -1)
            with np.errstate(invalid="ignore", divide="ignore"):
                pi2 = np.where(Pxc > 0, P[:, :, 1].reshape(B, -1) / np.where(Pxc > 0, Pxc, 1), 0.0)
            f = f + _waterfill(Pyc, pi1, self.d[0]) + _waterfill(Pxc, pi2, self.d[1])
            return f, zero, zero
        w = self.w
        d1 = (p * (w[:, None] * self.cost[0])[None]).sum(axis=(1, 2))
        d2 = zero if self.cost[1] is None else (p * (w[:, None] * self.cost[1])[None]).sum(axis=(1, 2))
        return f, d1, d2

    def distortion_slack(self, k: int) -> tuple:
        """Largest change of each expected distortion under rounding to the grid."""
        tv = (self.n_out // 2) / k
        out = []
        for which in (0, 1):
            if not math.isfinite(self.d[which]):
                out.append(0.0)
                continue
            if self.obj in ("wz1", "wz2"):
                rng = float(self.delta.max() - self.delta.min())
            elif self.obj == "one_description":
                dm = self.src.delta1 if which == 0 else self.src.delta2
                rng = float(dm.max() - dm.min())
            elif self.obj == "refined":
                rng = 0.0
            else:
                c = self.cost[which]
                rng = 0.0 if c is None else float((c.max(axis=1) - c.min(axis=1)).max())
            out.append(tv * rng)
        return tuple(out)


# ----------------------------------------------------------------------------
# Search
# ----------------------------------------------------------------------------


def _free_rows(n_rows, symmetry):
    if symmetry is None:
        return list(range(n_rows)), None
    rows, outs = (np.asarray(a) for a in symmetry)
    if sorted(rows.tolist()) != list(range(n_rows)) or np.any(rows == np.arange(n_rows)):
        raise DomainError("row permutation must be fixed-point free")
    if np.any(rows[rows] != np.arange(n_rows)):
        raise DomainError("row permutation must be an involution")
    free = [r for r in range(n_rows) if r < rows[r]]
    return free, (rows, outs)


def _assemble(comp, idx, free, sym, n_rows, k):
    """Channels for a batch of mixed-radix indices over the free rows."""
    base = len(comp)
    B = len(idx)
    p = np.empty((B, n_rows, comp.shape[1]))
    rem = idx.copy()
    for r in reversed(free):
        p[:, r] = comp[rem % base] / k
        rem //= base
    if sym is not None:
        rows, outs = sym
        inv = np.argsort(outs)
        for r in free:
            p[:, rows[r]] = p[:, r][:, inv]
    return p


def grid_min_channel(source: JointSource, objective: str, constraints=(None, None),
                     grid: GridSpec | None = None) -> OracleResult:
    """Exact minimum of ``objective`` over the 1/k grid subject to the targets.

    ``constraints`` is ``(d1, d2)``; ``None`` leaves a target out.  Ties in
    value go to the first channel in lexicographic grid order.
    """
    grid = grid or GridSpec()
    d1, d2 = constraints
    prob = _Problem(source, objective, d1, d2, grid.card)
    k = int(grid.k)
    comp = compositions(k, prob.n_out)
    free, sym = _free_rows(prob.n_rows, grid.symmetry)
    n_ch = len(comp) ** len(free)
    n_eval = n_ch * prob.evals_per_channel
    if n_eval > grid.budget:
        raise BudgetExceeded(f"{n_eval:.3g} evaluations exceed the budget {grid.budget:.3g}")
    slack = prob.distortion_slack(k)
    tgt = prob.d if objective != "refined" else [math.inf, math.inf]
    relaxed = [t + s for t, s in zip(tgt, slack)]
    best = (math.inf, -1)
    best_rel = (math.inf, -1)
    for start in range(0, n_ch, CHUNK):
        idx = np.arange(start, min(n_ch, start + CHUNK), dtype=np.int64)
        p = _assemble(comp, idx, free, sym, prob.n_rows, k)
        f, e1, e2 = prob.evaluate(p)
        ok = (e1 <= tgt[0] + 1e-12) & (e2 <= tgt[1] + 1e-12)
        ok_rel = (e1 <= relaxed[0] + 1e-12) & (e2 <= relaxed[1] + 1e-12)
        if ok.any():
            j = int(np.argmin(np.where(ok, f, np.inf)))
            if f[j] < best[0]:
                best = (float(f[j]), int(idx[j]))
        if ok_rel.any():
            j = int(np.argmin(np.where(ok_rel, f, np.inf)))
            if f[j] < best_rel[0]:
                best_rel = (float(f[j]), int(idx[j]))
    if best[1] < 0:
        raise InfeasibleDistortion("no grid channel meets the distortion targets")
    p_best = _assemble(comp, np.array([best[1]]), free, sym, prob.n_rows, k)[0]
    p_rel = _assemble(comp, np.array([best_rel[1]]), free, sym, prob.n_rows, k)[0]
    omega = _local_modulus(prob, p_rel, free, sym, k)
    gap = max(0.0, best[0] - best_rel[0]) + omega
    return OracleResult(
        value=max(0.0, best[0]), argmin=Channel(_shape_channel(prob, p_best), n_in=_n_in(prob)),
        guaranteed_gap=gap, relaxed_value=best_rel[0], modulus=omega, distortion_slack=max(slack),
        n_channels=n_ch, n_evaluations=n_eval,
    )


def _local_modulus(prob, p, free, sym, k):
    """Sum over free rows of the largest one-step objective change times the step count."""
    f0 = prob.evaluate(p[None])[0][0]
    n = prob.n_out
    total = 0.0
    for r in free:
        moves = []
        for a in range(n):
            for b in range(n):
                if a == b or p[r, a] < 1.0 / k - 1e-12:
                    continue
                q = p.copy()
                q[r, a] -= 1.0 / k
                q[r, b] += 1.0 / k
                if sym is not None:
                    rows, outs = sym
                    q[rows[r]] = q[r][np.argsort(outs)]
                moves.append(q)
        if moves:
            f = prob.evaluate(np.array(moves))[0]
            total += (n - 1) * float(np.max(np.abs(f - f0)))
    return total


def _n_in(prob) -> int:
    return 1 if prob.obj in ("marginal", "wz1", "wz2") else 2


def _shape_channel(prob, p):
    if _n_in(prob) == 1:
        return p
    nx, ny = prob.q.shape
    return p.reshape(nx, ny, -1)


__all__ = [
    "GridSpec",
    "OracleResult",
    "OBJECTIVES",
    "DEFAULT_BUDGET",
    "compositions",
    "enumerate_decoders",
    "complement_symmetry",
    "grid_min_channel",
]
