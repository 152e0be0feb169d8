"""Convex minimax engine over test channels.

Solves

    minimize   max{ I1(p) - a1 - E1, I2(p) - a2 - E2 }
    subject to D1(p) <= d1,  D2(p) <= d2

where ``p`` is a channel from a finite set of input rows to an auxiliary
alphabet, ``I1`` and ``I2`` are channel-convex information terms supplied by
a backend, the ``D`` are linear distortions and ``(E1, E2)`` is an optional
concave "extra" player (used for joint source-channel checks).

Method: the Lagrangian dual in the weight ``lam`` and the two slopes
``(s1, s2)``.  For fixed multipliers the inner problem is solved exactly by
alternating minimization.  The slopes are located by nested bracketing and
Brent root finding, ``lam`` by root finding on ``I1 - I2``.  Every
Lagrangian minimizer encountered is kept as a column; the final channel is
the best convex combination of columns found by a small linear program,
which resolves non-unique minimizers at kinks.  Because the objective is
convex, the true value at the mixture is no larger than the LP value.  Each
inner solve also yields a certified lower bound (objective minus the
Frank-Wolfe gap), so the reported ``lower`` is a dual bound on the optimum.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq, linprog

from ._kernels import gibbs_helper, gibbs_two_sided
from .errors import InfeasibleDistortion, NoConvergence
from .prob import SolverConfig, info_terms

LN2 = math.log(2.0)
#: Stopping threshold on the change of the inner Lagrangian (nats).
INNER_TOL = 1e-14
#: Slack used when comparing distortions against their minimum.
D_EPS = 1e-12
#: Largest slope tried before a constraint is declared unreachable.
S_MAX = 2.0**40
#: Strength of the low-distortion tilt in starting channels.
START_TILT = 20.0
#: Dual weights this close to 0 or 1 also trigger a probe on the boundary.
LAM_SNAP = 1e-3
#: Interior weights whose exact solves feed primal recovery when planes stall.
RECOVERY_WEIGHTS = (0.5, 0.25, 0.75)
#: Plane iterations allowed without a 10% gap reduction.
PLANES_PATIENCE = 30


class BaAudit:
    """Process-wide record of inner-solver monotonicity."""

    runs = 0
    violations = 0
    max_increase = 0.0

    @classmethod
    def record(cls, obj: float, inc: float) -> None:
        cls.runs += 1
        if inc > 1e-11 * (1.0 + abs(obj)):
            cls.violations += 1
        cls.max_increase = max(cls.max_increase, inc)

    @classmethod
    def reset(cls) -> None:
        cls.runs = 0
        cls.violations = 0
        cls.max_increase = 0.0

    @classmethod
    def report(cls) -> dict:
        return {"runs": cls.runs, "violations": cls.violations, "max_increase": cls.max_increase}


# ----------------------------------------------------------------------------
# Backends
# ----------------------------------------------------------------------------


class TwoSidedBackend:
    """Channel ``p(c|x,y)`` with ``I1 = I(X;C|Y)`` and ``I2 = I(Y;C|X)``.

    ``cost1`` and ``cost2`` have shape ``(|X|, |Y|, |C|)``.  A source with a
    trivial ``Y`` axis turns ``I1`` into the plain mutual information.
    """

    def __init__(self, q_xy, cost1, cost2=None):
        self.q = np.ascontiguousarray(q_xy, dtype=float)
        self.cost1 = np.ascontiguousarray(cost1, dtype=float)
        self.cost2 = np.zeros_like(self.cost1) if cost2 is None else np.ascontiguousarray(cost2, dtype=float)
        nx, ny, nc = self.cost1.shape
        self.shape = (nx, ny, nc)
        self.n_rows = nx * ny
        self.nc = nc
        self.weights = self.q.reshape(-1)
        self.C1 = self.cost1.reshape(self.n_rows, nc)
        self.C2 = self.cost2.reshape(self.n_rows, nc)

    def run(self, lam, s1, s2, mask, max_iters, start):
        p3 = start.reshape(self.shape).copy()
        m3 = mask.reshape(self.shape)
        obj, iters, inc, i1, i2, d1, d2, gap = gibbs_two_sided(
            self.q, self.cost1, self.cost2, s1, s2, lam, m3, p3, INNER_TOL, max_iters
        )
        return p3.reshape(self.n_rows, self.nc), i1 / LN2, i2 / LN2, d1, d2, obj, gap, iters, inc

    def info(self, p_rows):
        t = info_terms(self.q, p_rows.reshape(self.shape))
        return t["xc_y"], t["yc_x"]


class HelperBackend:
    """Channel ``p(a|x)`` with ``I1 = I(X;A|Y)`` under ``A - X - Y``.

    ``cost`` has shape ``(|X|, |Y|, |A|)`` (a decoder already folded in).
    ``I2`` is identically zero, so only ``lam = 1`` is meaningful.
    """

    def __init__(self, q_xy, cost):
        self.q = np.ascontiguousarray(q_xy, dtype=float)
        self.cost = np.ascontiguousarray(cost, dtype=float)
        nx, ny, na = self.cost.shape
        self.n_rows = nx
        self.nc = na
        qx = self.q.sum(axis=1)
        self.weights = qx
        with np.errstate(invalid="ignore", divide="ignore"):
            ceff = np.einsum("xy,xya->xa", self.q, self.cost) / qx[:, None]
        self.C1 = np.where(qx[:, None] > 0, ceff, 0.0)
        self.C2 = np.zeros_like(self.C1)

    def run(self, lam, s1, s2, mask, max_iters, start):
        p = np.ascontiguousarray(start, dtype=float).copy()
        obj, iters, inc, rate, dist, gap = gibbs_helper(self.q, self.cost, s1, mask, p, INNER_TOL, max_iters)
        return p, rate / LN2, 0.0, dist, 0.0, obj, gap, iters, inc

    def info(self, p_rows):
        t = info_terms(self.q, np.broadcast_to(p_rows[:, None, :], self.q.shape + (self.nc,)))
        return t["xc_y"], 0.0


# ----------------------------------------------------------------------------
# Engine
# ----------------------------------------------------------------------------


@dataclass
class _Col:
    p: np.ndarray
    i1: float
    i2: float
    d1: float
    d2: float
    const: bool = False


@dataclass
class ProgramResult:
    """Outcome of a convex program (rates in bits)."""

    value: float
    p: np.ndarray
    i1: float
    i2: float
    dist1: float
    dist2: float
    lam: float
    slopes: tuple
    lower: float
    iterations: int
    n_evals: int
    converged: bool
    e1: float = 0.0
    e2: float = 0.0
    extra_payload: object = None

    @property
    def gap(self) -> float:
        return self.value - self.lower


ExtraFn = Callable[[float], tuple]


class ConvexProgram:
    """Constrained minimax of two convex information terms.

    Parameters
    ----------
    backend:
        :class:`TwoSidedBackend` or :class:`HelperBackend`.
    d1, d2:
        Distortion targets; ``None`` or ``inf`` leaves a constraint out.
    offsets:
        Constants ``(a1, a2)`` subtracted from the two terms.
    extra:
        Optional callable ``lam -> (e1, e2, upper, payload, mix)`` that
        maximizes ``lam*e1 + (1-lam)*e2`` over a convex set; ``mix`` maps a
        list of weights and payloads to a mixed payload and its
        ``(e1, e2)``.
    """

    def __init__(self, backend, d1=None, d2=None, offsets=(0.0, 0.0), extra: Optional[ExtraFn] = None,
                 cfg: SolverConfig | None = None):
        self.b = backend
        self.cfg = cfg or SolverConfig()
        self.d = [math.inf if d1 is None else float(d1), math.inf if d2 is None else float(d2)]
        self.a = (float(offsets[0]), float(offsets[1]))
        self.extra = extra
        self.cols: list[_Col] = []
        self.xcols: list = []
        self.lower = -math.inf
        self.iterations = 0
        self.n_evals = 0
        self._cache: dict = {}
        self._xcache: dict = {}
        self.mask = np.ones((backend.n_rows, backend.nc), dtype=bool)
        self.active = [math.isfinite(self.d[0]), math.isfinite(self.d[1])]
        self._prepare()

    # -- set-up ---------------------------------------------------------------

    def _rowmin(self, C):
        masked = np.where(self.mask, C, np.inf)
        return masked.min(axis=1)

    def _dmin(self, k):
        C = self.b.C1 if k == 0 else self.b.C2
        w = self.b.weights
        rm = self._rowmin(C)
        return float(np.sum(np.where(w > 0, w * rm, 0.0)))

    def _prepare(self):
        w = self.b.weights
        for _ in range(3):
            changed = False
            for k in (0, 1):
                if not self.active[k]:
                    continue
                C = self.b.C1 if k == 0 else self.b.C2
                dm = self._dmin(k)
                scale = max(1.0, float(np.max(np.abs(C))))
                if self.d[k] < dm - D_EPS * scale:
                    raise InfeasibleDistortion(
                        f"distortion target {self.d[k]:.6g} below the minimum {dm:.6g}"
                    )
                if self.d[k] <= dm + D_EPS * scale:
                    rm = self._rowmin(C)
                    keep = C <= rm[:, None] + 1e-12 * scale
                    self.mask &= np.where(w[:, None] > 0, keep, True)
                    self.active[k] = False
                    changed = True
            if not changed:
                break
        self._feasibility_column()
        for c in range(self.b.nc):
            if np.all(self.mask[w > 0, c]):
                p = np.zeros((self.b.n_rows, self.b.nc))
                p[:, c] = 1.0
                self.cols.append(_Col(p, 0.0, 0.0, float(w @ self.b.C1[:, c]), float(w @ self.b.C2[:, c]), True))

    def _feasibility_column(self):
        """Channel of least total distortion meeting both targets (an LP)."""
        b = self.b
        w = b.weights
        rows = np.where(w > 0)[0]
        idx = [(r, c) for r in rows for c in range(b.nc) if self.mask[r, c]]
        n = len(idx)
        c1 = np.array([w[r] * b.C1[r, c] for r, c in idx])
        c2 = np.array([w[r] * b.C2[r, c] for r, c in idx])
        A_eq = np.zeros((len(rows), n))
        pos = {r: i for i, r in enumerate(rows)}
        for j, (r, c) in enumerate(idx):
            A_eq[pos[r], j] = 1.0
        A_ub, b_ub = [], []
        for k, ck in ((0, c1), (1, c2)):
            if self.active[k]:
                A_ub.append(ck)
                b_ub.append(self.d[k])
        res = linprog(
            c1 + c2,
            A_ub=np.array(A_ub) if A_ub else None,
            b_ub=np.array(b_ub) if b_ub else None,
            A_eq=A_eq,
            b_eq=np.ones(len(rows)),
            bounds=(0, None),
            method="highs",
        )
        if res.status != 0:
            raise InfeasibleDistortion("no channel meets both distortion targets")
        p = self.mask / self.mask.sum(axis=1, keepdims=True)
        p = p.astype(float)
        p[rows] = 0.0
        for j, (r, c) in enumerate(idx):
            p[r, c] = max(res.x[j], 0.0)
        p[rows] /= p[rows].sum(axis=1, keepdims=True)
        self._add_col(p)

    def _add_col(self, p):
        i1, i2 = self.b.info(p)
        w = self.b.weights
        self.cols.append(_Col(p, i1, i2, float(np.sum(w[:, None] * p * self.b.C1)),
                              float(np.sum(w[:, None] * p * self.b.C2))))

    # -- inner Lagrangian -----------------------------------------------------

    def _run(self, lam, s1, s2):
        key = (lam, s1, s2)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        best = None
        lb = -math.inf
        for start in self._starts(s1, s2):
            p, i1, i2, d1, d2, obj, gap, iters, inc = self.b.run(lam, s1, s2, self.mask, self.cfg.max_iters, start)
            BaAudit.record(obj, inc)
            self.iterations += iters
            self.n_evals += 1
            self.cols.append(_Col(p, i1, i2, d1, d2))
            lb = max(lb, obj - gap)
            if best is None or obj < best[0]:
                best = (obj, i1, i2, d1, d2)
        obj, i1, i2, d1, d2 = best
        if self.active[0]:
            lb -= s1 * self.d[0]
        if self.active[1]:
            lb -= s2 * self.d[1]
        lb = lb / LN2 - lam * self.a[0] - (1.0 - lam) * self.a[1]
        if self.extra is not None:
            e = self._extra(lam)
            lb -= e[2]
        if self.fixed_lam is None or lam == self.fixed_lam:
            self.lower = max(self.lower, lb)
        out = (i1, i2, d1, d2, lb)
        self._cache[key] = out
        return out

    def _start(self, s1, s2):
        """Full-support starting channel tilted toward low distortion.

        The tilt only changes the speed of the (globally convergent)
        alternation, except on directions where the Lagrangian is flat; there
        it selects the least-distortion minimizer.
        """
        sc1 = max(float(np.max(self.b.C1)), 1e-12)
        sc2 = max(float(np.max(self.b.C2)), 1e-12)
        logit = -(s1 + START_TILT / sc1) * self.b.C1 - (s2 + START_TILT / sc2) * self.b.C2
        logit = np.where(self.mask, logit, -np.inf)
        logit -= logit.max(axis=1, keepdims=True)
        p = np.exp(logit)
        return p / p.sum(axis=1, keepdims=True)

    def _starts(self, s1, s2):
        """Two starts: the tilted one and one near the cheapest constant column.

        Where the Lagrangian is nearly flat between a positive-rate
        minimizer and a zero-rate one, a single start drifts slowly; running
        from both ends and keeping the lower objective removes that drift.
        """
        tilted = self._start(s1, s2)
        consts = [c for c in self.cols if c.const]
        if not consts:
            return (tilted,)
        c = min(consts, key=lambda c: s1 * c.d1 + s2 * c.d2)
        return tilted, 0.99 * c.p + 0.01 * tilted

    def _extra(self, lam):
        hit = self._xcache.get(lam)
        if hit is None:
            hit = self.extra(lam)
            self._xcache[lam] = hit
            self.xcols.append(hit)
        return hit

    def _slope_root(self, f, scale):
        """Smallest slope s >= 0 with f(s) <= 0, for f non-increasing."""
        if f(0.0) <= 0.0:
            return 0.0
        lo, hi = 0.0, 1.0 / scale
        while f(hi) > 0.0:
            lo, hi = hi, hi * 4.0
            if hi > S_MAX:
                return hi
        return brentq(f, lo, hi, xtol=1e-13 * max(1.0, hi), rtol=1e-11, maxiter=200)

    def _inner(self, lam, s1):
        if not self.active[1]:
            return 0.0
        sc = self._scale(1)
        return self._slope_root(lambda s: self._run(lam, s1, s)[3] - self.d[1], sc)

    def _scale(self, k):
        C = self.b.C1 if k == 0 else self.b.C2
        return max(float(np.max(np.where(self.mask, C, 0.0))), 1e-12)

    def weighted(self, lam):
        """Minimizer of ``lam*I1 + (1-lam)*I2`` under the distortion targets."""
        if self.active[0]:
            sc = self._scale(0)

            def f(s1):
                s2 = self._inner(lam, s1)
                return self._run(lam, s1, s2)[2] - self.d[0]

            s1 = self._slope_root(f, sc)
        else:
            s1 = 0.0
        s2 = self._inner(lam, s1)
        i1, i2 = self._run(lam, s1, s2)[:2]
        return i1, i2, (s1, s2)

    # -- outer problem ----------------------------------------------------------

    fixed_lam = None

    def _g(self, lam):
        i1, i2, _ = self.weighted(lam)
        e1 = e2 = 0.0
        if self.extra is not None:
            e1, e2 = self._extra(lam)[:2]
        return (i1 - self.a[0] - e1) - (i2 - self.a[1] - e2)

    def solve(self, lam: float | None = None) -> ProgramResult:
        """Run the program; with ``lam`` given, minimize the weighted sum instead."""
        self.fixed_lam = lam
        if self.extra is None:
            zero = self._zero_rate(lam)
            if zero is not None:
                return zero
        n_dual = (lam is None) + self.active[0] + self.active[1]
        if n_dual >= 2 and (self.extra is None or lam is None):
            return self._solve_planes(lam)
        if lam is not None:
            _, _, slopes = self.weighted(lam)
            return self._recover(lam, slopes)
        g1 = self._g(1.0)
        if g1 >= 0.0:
            lam_star = 1.0
        else:
            g0 = self._g(0.0)
            if g0 <= 0.0:
                lam_star = 0.0
            else:
                lam_star = brentq(self._g, 0.0, 1.0, xtol=1e-11, rtol=1e-10, maxiter=200)
        _, _, slopes = self.weighted(lam_star)
        return self._recover(None, slopes, lam_star)

    # -- cutting planes on the dual --------------------------------------------

    def _dual_lp(self, lam_fixed, center, radius):
        """Maximize the column model of the dual function inside a box.

        Variables ``(lam, s1, s2, z)`` with slopes in bits per unit
        distortion; each column j gives the cut
        ``z <= lam*(I1_j - a1) + (1-lam)*(I2_j - a2) + s.(D_j - d)``.
        """
        cols = self._distinct_cols()
        n = len(cols)
        xc = self.xcols if (self.extra is not None and lam_fixed is None) else []
        m = len(xc)
        nv = 5 if m else 4
        A = np.zeros((n + m, nv))
        b = np.zeros(n + m)
        for j, x in enumerate(xc):
            # extra player: z2 <= -(lam*E1 + (1-lam)*E2)
            A[n + j, [0, 4]] = [x[0] - x[1], 1.0]
            b[n + j] = -x[1]
        for j, c in enumerate(cols):
            u1, u2 = c.i1 - self.a[0], c.i2 - self.a[1]
            if lam_fixed is None:
                # z - lam*(u1 - u2) - s.(D - d) <= u2
                A[j, :4] = [-(u1 - u2), -(c.d1 - self.d[0]) if self.active[0] else 0.0,
                            -(c.d2 - self.d[1]) if self.active[1] else 0.0, 1.0]
                b[j] = u2
            else:
                A[j, :4] = [0.0, -(c.d1 - self.d[0]) if self.active[0] else 0.0,
                            -(c.d2 - self.d[1]) if self.active[1] else 0.0, 1.0]
                b[j] = lam_fixed * u1 + (1 - lam_fixed) * u2
        bounds = []
        if lam_fixed is None:
            bounds.append((max(0.0, center[0] - radius[0]), min(1.0, center[0] + radius[0])))
        else:
            bounds.append((lam_fixed, lam_fixed))
        for k in (0, 1):
            if self.active[k]:
                bounds.append((max(0.0, center[k + 1] - radius[k + 1]), center[k + 1] + radius[k + 1]))
            else:
                bounds.append((0.0, 0.0))
        bounds += [(None, None)] * (nv - 3)
        obj = np.r_[0.0, 0.0, 0.0, -np.ones(nv - 3)]
        res = None
        for method in ("highs-ds", "highs-ipm", "highs"):
            res = linprog(obj, A_ub=A, b_ub=b, bounds=bounds, method=method)
            if res.status == 0:
                break
        if res is None or res.status != 0:
            return None, math.inf
        return res.x[:3], -res.fun

    def _solve_planes(self, lam_fixed):
        """Stabilized cutting-plane ascent on the Lagrangian dual.

        Every inner solve adds its channels as columns; the boxed dual LP
        proposes the next multipliers; the box follows the best certified
        multipliers.  The primal channel is recovered by the column LP.
        """
        sc = [self._scale(0), self._scale(1)]
        lam0 = 0.5 if lam_fixed is None else lam_fixed
        # rough slope scale: rate range over distortion range
        s0 = [1.0 / sc[0], 1.0 / sc[1]]
        center = np.array([lam0, s0[0] if self.active[0] else 0.0, s0[1] if self.active[1] else 0.0])
        radius = np.array([0.5, 4.0 * s0[0], 4.0 * s0[1]])
        best_lb = -math.inf
        best_y = center.copy()
        tol = self.cfg.gap_tol * 0.5
        best_gap, idle = math.inf, 0
        y = center
        for _ in range(400):
            lam = float(y[0])
            out = self._run(lam, float(y[1]) * LN2, float(y[2]) * LN2)
            lb = out[4]
            if lb > best_lb:
                expanded = False
                if best_lb > -math.inf:
                    # grow the box along coordinates where the step hit its edge
                    for k in range(3):
                        if abs(y[k] - center[k]) >= 0.99 * radius[k]:
                            radius[k] *= 4.0
                            expanded = True
                best_lb, best_y = lb, y.copy()
                center = y.copy()
                if not expanded:
                    radius[1:] = np.maximum(radius[1:], 1e-3 * np.maximum(center[1:], s0))
            else:
                radius *= 0.6
                radius[1:] = np.maximum(radius[1:], 1e-9 * np.maximum(center[1:], s0))
                radius[0] = max(radius[0], 1e-9)
            self.lower = max(self.lower, lb)
            up = self._upper(lam_fixed)
            if up - self.lower <= tol:
                break
            if up - self.lower < 0.9 * best_gap:
                best_gap, idle = up - self.lower, 0
            else:
                idle += 1
                if idle >= PLANES_PATIENCE:
                    break
            y_new, model = self._dual_lp(lam_fixed, center, radius)
            if y_new is None:
                break
            if lam_fixed is None and 0.0 < min(y_new[0], 1.0 - y_new[0]) < LAM_SNAP:
                # inner certificates degrade just off the boundary; probe the boundary too
                edge = y_new.copy()
                edge[0] = round(float(y_new[0]))
                lb_edge = self._run(float(edge[0]), float(edge[1]) * LN2, float(edge[2]) * LN2)[4]
                if lb_edge > best_lb:
                    best_lb, best_y = lb_edge, edge
                    center = edge.copy()
            if (float(y_new[0]), float(y_new[1]) * LN2, float(y_new[2]) * LN2) in self._cache:
                break  # the model cannot move: stalled at inner-solver accuracy
            y = y_new
        self.lower = max(self.lower, best_lb)
        slopes = (best_y[1] * LN2, best_y[2] * LN2)
        res = self._recover(lam_fixed, slopes, float(best_y[0]), warn=False)
        if lam_fixed is None and self.extra is None and not res.converged:
            res = self._polish(float(best_y[0]), slopes)
        return self._warn(res)

    def _polish(self, lam_best, slopes):
        """Fixed-weight solves that repair a stalled max-program.

        Near an edge of [0, 1] the inner certificates degrade, and on a flat
        dual the columns lack balanced channels.  Each fixed-weight solve
        gives a valid lower bound and contributes its channels as columns.
        """
        weights = list(RECOVERY_WEIGHTS)
        if min(lam_best, 1.0 - lam_best) < LAM_SNAP:
            edge = float(round(lam_best))
            weights = [edge, abs(edge - LAM_SNAP)] + weights
        res = None
        for lam in weights:
            sub = ConvexProgram(self.b, d1=self.d[0] if self.active[0] else None,
                                d2=self.d[1] if self.active[1] else None, offsets=self.a, cfg=self.cfg)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", NoConvergence)
                sub.solve(lam)
            self.lower = max(self.lower, sub.lower)
            self.cols.extend(sub.cols)
            self.iterations += sub.iterations
            self.n_evals += sub.n_evals
            res = self._recover(None, slopes, lam_best, warn=False)
            if res.converged:
                break
        return res

    def _upper(self, lam_fixed):
        """Value of the column LP (an upper bound on the optimum)."""
        cols = self._distinct_cols()
        n = len(cols)
        I1 = np.array([c.i1 for c in cols])
        I2 = np.array([c.i2 for c in cols])
        xc = self.xcols if (self.extra is not None and lam_fixed is None) else []
        m = len(xc)
        E1 = np.array([x[0] for x in xc])
        E2 = np.array([x[1] for x in xc])
        A_ub, b_ub = [], []
        A_eq = [np.r_[np.ones(n), np.zeros(m), 0.0]]
        if m:
            A_eq.append(np.r_[np.zeros(n), np.ones(m), 0.0])
        if lam_fixed is None:
            A_ub += [np.r_[I1, -E1, -1.0], np.r_[I2, -E2, -1.0]]
            b_ub += [self.a[0], self.a[1]]
            cost = np.r_[np.zeros(n + m), 1.0]
        else:
            cost = np.r_[lam_fixed * I1 + (1 - lam_fixed) * I2, 0.0]
        for k, attr in ((0, "d1"), (1, "d2")):
            if self.active[k]:
                A_ub.append(np.r_[[getattr(c, attr) for c in cols], np.zeros(m), 0.0])
                b_ub.append(self.d[k])
        bounds = [(0, None)] * (n + m) + [(None, None) if lam_fixed is None else (0, 0)]
        res = linprog(cost, A_ub=np.array(A_ub) if A_ub else None, b_ub=np.array(b_ub) if b_ub else None,
                      A_eq=np.array(A_eq), b_eq=np.ones(len(A_eq)), bounds=bounds, method="highs")
        return res.fun if res.status == 0 else math.inf

    def _zero_groups(self, lam):
        """Row groups on which a channel constant per group carries no information."""
        n = self.b.n_rows
        if isinstance(self.b, TwoSidedBackend) and lam is not None and lam in (0.0, 1.0):
            nx, ny, _ = self.b.shape
            idx = np.arange(n).reshape(nx, ny)
            # lam = 1 only weighs I(X;C|Y): any C depending on y alone is free
            return [idx[:, j] for j in range(ny)] if lam == 1.0 else [idx[i, :] for i in range(nx)]
        return [np.arange(n)]

    def _zero_rate(self, lam=None):
        """Exit early when a zero-information channel meets the targets (an LP)."""
        b = self.b
        w = b.weights
        groups = self._zero_groups(lam)
        var = []
        for gi, g in enumerate(groups):
            live = g[w[g] > 0]
            if live.size == 0:
                continue
            for c in range(b.nc):
                if np.all(self.mask[live, c]):
                    var.append((gi, c, live))
        live_groups = sorted({v[0] for v in var})
        needed = [gi for gi, g in enumerate(groups) if np.any(w[g] > 0)]
        if not var or live_groups != needed:
            return None
        A_eq = np.zeros((len(needed), len(var)))
        pos = {gi: k for k, gi in enumerate(needed)}
        for j, (gi, c, live) in enumerate(var):
            A_eq[pos[gi], j] = 1.0
        A, bnd = [], []
        for k, C in ((0, b.C1), (1, b.C2)):
            if self.active[k]:
                A.append([float(w[live] @ C[live, c]) for gi, c, live in var])
                bnd.append(self.d[k])
        res = linprog(
            np.zeros(len(var)),
            A_ub=np.array(A) if A else None,
            b_ub=np.array(bnd) if bnd else None,
            A_eq=A_eq,
            b_eq=np.ones(len(needed)),
            bounds=(0, None),
            method="highs",
        )
        if res.status != 0:
            return None
        p = self.mask / self.mask.sum(axis=1, keepdims=True)
        p = p.astype(float)
        for gi, g in enumerate(groups):
            if np.any(w[g] > 0):
                p[g] = 0.0
        for t, (gi, c, live) in zip(np.clip(res.x, 0, None), var):
            p[groups[gi], c] += t
        rows = np.where(p.sum(axis=1) > 0)[0]
        p[rows] /= p[rows].sum(axis=1, keepdims=True)
        i1, i2 = self.b.info(p)
        if lam is None:
            v = max(i1 - self.a[0], i2 - self.a[1])
            low = max(-self.a[0], -self.a[1])
        else:
            v = lam * i1 + (1 - lam) * i2
            low = 0.0
        return ProgramResult(
            value=v, p=p, i1=i1, i2=i2,
            dist1=float(np.sum(w[:, None] * p * self.b.C1)),
            dist2=float(np.sum(w[:, None] * p * self.b.C2)),
            lam=1.0 if lam is None else lam, slopes=(0.0, 0.0), lower=low,
            iterations=0, n_evals=0, converged=True,
        )

    def _distinct_cols(self):
        seen = {}
        for c in self.cols:
            key = (round(c.i1, 12), round(c.i2, 12), round(c.d1, 12), round(c.d2, 12))
            if key not in seen or c.const:
                seen[key] = c
        return list(seen.values())

    @staticmethod
    def _warn(res: ProgramResult) -> ProgramResult:
        if not res.converged:
            warnings.warn(f"convex program stopped with duality gap {res.value - res.lower:.3g} bits",
                          NoConvergence, stacklevel=4)
        return res

    def _recover(self, lam_fixed, slopes, lam_star=None, warn=True):
        cols = self._distinct_cols()
        n = len(cols)
        I1 = np.array([c.i1 for c in cols])
        I2 = np.array([c.i2 for c in cols])
        D1 = np.array([c.d1 for c in cols])
        D2 = np.array([c.d2 for c in cols])
        xc = self.xcols if self.extra is not None else []
        m = len(xc)
        A_ub, b_ub = [], []
        A_eq = [np.r_[np.ones(n), np.zeros(m), 0.0]]
        b_eq = [1.0]
        if m:
            A_eq.append(np.r_[np.zeros(n), np.ones(m), 0.0])
            b_eq.append(1.0)
        E1 = np.array([x[0] for x in xc]) if m else np.zeros(0)
        E2 = np.array([x[1] for x in xc]) if m else np.zeros(0)
        if lam_fixed is None:
            A_ub.append(np.r_[I1, -E1, -1.0])
            b_ub.append(self.a[0])
            A_ub.append(np.r_[I2, -E2, -1.0])
            b_ub.append(self.a[1])
            cost = np.r_[np.zeros(n + m), 1.0]
        else:
            cost = np.r_[lam_fixed * I1 + (1 - lam_fixed) * I2, np.zeros(m), 0.0]
        if self.active[0]:
            A_ub.append(np.r_[D1, np.zeros(m), 0.0])
            b_ub.append(self.d[0])
        if self.active[1]:
            A_ub.append(np.r_[D2, np.zeros(m), 0.0])
            b_ub.append(self.d[1])
        bounds = [(0, None)] * (n + m) + [(None, None) if lam_fixed is None else (0, 0)]
        for method in ("highs-ds", "highs-ipm", "highs"):
            res = linprog(cost, A_ub=np.array(A_ub) if A_ub else None, b_ub=np.array(b_ub) if b_ub else None,
                          A_eq=np.array(A_eq),
                          b_eq=np.array(b_eq), bounds=bounds, method=method)
            if res.status == 0:
                break
        else:
            raise InfeasibleDistortion("could not assemble a channel meeting the targets")
        th = np.clip(res.x[:n], 0, None)
        th /= th.sum()
        p = np.zeros_like(cols[0].p)
        for t, c in zip(th, cols):
            if t > 0:
                p += t * c.p
        p /= p.sum(axis=1, keepdims=True)
        i1, i2 = self.b.info(p)
        w = self.b.weights
        dist1 = float(np.sum(w[:, None] * p * self.b.C1))
        dist2 = float(np.sum(w[:, None] * p * self.b.C2))
        e1 = e2 = 0.0
        payload = None
        if m:
            ph = np.clip(res.x[n:n + m], 0, None)
            ph /= ph.sum()
            payload, e1, e2 = xc[0][4]([(t, x[3]) for t, x in zip(ph, xc) if t > 0])
        if lam_fixed is None:
            value = max(i1 - self.a[0] - e1, i2 - self.a[1] - e2)
            lam_rep = lam_star
        else:
            value = lam_fixed * i1 + (1 - lam_fixed) * i2
            lam_rep = lam_fixed
        lower = self.lower
        if self.extra is None:
            floor = max(-self.a[0], -self.a[1]) if lam_fixed is None else 0.0
            lower = max(lower, floor)
        gap = value - lower
        res = ProgramResult(
            value=value, p=p, i1=i1, i2=i2, dist1=dist1, dist2=dist2, lam=lam_rep,
            slopes=(slopes[0] / LN2, slopes[1] / LN2), lower=lower, iterations=self.iterations,
            n_evals=self.n_evals, converged=bool(gap <= self.cfg.gap_tol), e1=e1, e2=e2, extra_payload=payload,
        )
        return self._warn(res) if warn else res
