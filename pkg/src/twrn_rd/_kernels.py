"""Compiled alternating-minimization kernels (nats internally).

Both kernels minimize a Lagrangian of the form

    sum_{x,y} q(x,y) sum_c p(c|.) [log p(c|.) - <log of output conditionals> + cost]

by alternating between the output conditionals (closed form) and the
channel (Gibbs update).  The Lagrangian is jointly convex in the two
blocks, so each step cannot increase it; the largest observed increase is
returned so callers can audit monotonicity.  A Frank-Wolfe gap at the last
iterate gives a lower bound ``obj - gap`` on the Lagrangian minimum.
"""
from __future__ import annotations

from math import exp, log

import numpy as np
from numba import njit

NEG_INF = -np.inf
#: Channel entries below this are set to zero after each update.
FLUSH = 1e-200


@njit(cache=True)
def _two_sided_marginals(q, qx, qy, p, lr, lt):
    nx, ny, nc = p.shape
    for y in range(ny):
        for c in range(nc):
            s = 0.0
            for x in range(nx):
                s += q[x, y] * p[x, y, c]
            lr[y, c] = log(s / qy[y]) if (s > 0.0 and qy[y] > 0.0) else NEG_INF
    for x in range(nx):
        for c in range(nc):
            s = 0.0
            for y in range(ny):
                s += q[x, y] * p[x, y, c]
            lt[x, c] = log(s / qx[x]) if (s > 0.0 and qx[x] > 0.0) else NEG_INF


@njit(cache=True)
def _two_sided_objective(q, cost1, cost2, s1, s2, lam, p, lr, lt):
    nx, ny, nc = p.shape
    obj = 0.0
    for x in range(nx):
        for y in range(ny):
            if q[x, y] == 0.0:
                continue
            for c in range(nc):
                pc = p[x, y, c]
                if pc > 0.0:
                    v = log(pc) + s1 * cost1[x, y, c] + s2 * cost2[x, y, c]
                    if lam > 0.0:
                        v -= lam * lr[y, c]
                    if lam < 1.0:
                        v -= (1.0 - lam) * lt[x, c]
                    obj += q[x, y] * pc * v
    return obj


@njit(cache=True)
def _two_sided_update(cost1, cost2, s1, s2, lam, mask, lr, lt, p):
    """Gibbs step: ``p(c|x,y)`` proportional to the tilted output conditionals."""
    nx, ny, nc = p.shape
    for x in range(nx):
        for y in range(ny):
            m = NEG_INF
            for c in range(nc):
                if mask[x, y, c]:
                    v = -(s1 * cost1[x, y, c] + s2 * cost2[x, y, c])
                    if lam > 0.0:
                        v += lam * lr[y, c]
                    if lam < 1.0:
                        v += (1.0 - lam) * lt[x, c]
                    p[x, y, c] = v
                    if v > m:
                        m = v
                else:
                    p[x, y, c] = NEG_INF
            if m == NEG_INF:
                # every allowed output unseen so far: restart the row uniformly
                cnt = 0.0
                for c in range(nc):
                    if mask[x, y, c]:
                        cnt += 1.0
                for c in range(nc):
                    p[x, y, c] = 1.0 / cnt if mask[x, y, c] else 0.0
                continue
            z = 0.0
            for c in range(nc):
                if p[x, y, c] > NEG_INF:
                    p[x, y, c] = exp(p[x, y, c] - m)
                    z += p[x, y, c]
                else:
                    p[x, y, c] = 0.0
            for c in range(nc):
                v = p[x, y, c] / z
                # flush values whose marginals would underflow
                p[x, y, c] = v if v > FLUSH else 0.0


@njit(cache=True)
def _log_extrapolate(p0, p1, p2, out):
    """SQUAREM step on log-probabilities; returns False when it degenerates."""
    nx, ny, nc = p0.shape
    rr = 0.0
    vv = 0.0
    for x in range(nx):
        for y in range(ny):
            for c in range(nc):
                if p0[x, y, c] > 0.0 and p1[x, y, c] > 0.0 and p2[x, y, c] > 0.0:
                    l0 = log(p0[x, y, c])
                    l1 = log(p1[x, y, c])
                    l2 = log(p2[x, y, c])
                    r = l1 - l0
                    v = l2 - 2.0 * l1 + l0
                    rr += r * r
                    vv += v * v
    if vv <= 0.0 or rr <= 0.0:
        return False
    alpha = -np.sqrt(rr / vv)
    if alpha > -1.0:
        alpha = -1.0
    for x in range(nx):
        for y in range(ny):
            m = NEG_INF
            for c in range(nc):
                if p0[x, y, c] > 0.0 and p1[x, y, c] > 0.0 and p2[x, y, c] > 0.0:
                    l0 = log(p0[x, y, c])
                    l1 = log(p1[x, y, c])
                    l2 = log(p2[x, y, c])
                    v = l0 - 2.0 * alpha * (l1 - l0) + alpha * alpha * (l2 - 2.0 * l1 + l0)
                    out[x, y, c] = v
                    if v > m:
                        m = v
                else:
                    out[x, y, c] = NEG_INF
            if m == NEG_INF:
                for c in range(nc):
                    out[x, y, c] = p2[x, y, c]
                continue
            z = 0.0
            for c in range(nc):
                if out[x, y, c] > NEG_INF:
                    out[x, y, c] = exp(out[x, y, c] - m)
                    z += out[x, y, c]
                else:
                    out[x, y, c] = 0.0
            for c in range(nc):
                out[x, y, c] /= z
    return True


@njit(cache=True)
def gibbs_two_sided(q, cost1, cost2, s1, s2, lam, mask, p, tol, max_iters):
    """Minimize lam*I(X;C|Y) + (1-lam)*I(Y;C|X) + s1*E[cost1] + s2*E[cost2].

    ``p`` (shape (|X|,|Y|,|C|)) is the starting channel and is overwritten
    by the final iterate.  Each outer step takes two Gibbs updates, a
    squared extrapolation of the log-channel and one more Gibbs update,
    and keeps the extrapolated point only if it lowers the objective below
    the plain double step, so the objective never increases.  Returns
    ``(obj, iters, max_increase, i1, i2, dist1, dist2, fw_gap)``.
    """
    nx, ny, nc = p.shape
    qx = q.sum(axis=1)
    qy = q.sum(axis=0)
    lr = np.empty((ny, nc))
    lt = np.empty((nx, nc))
    p0 = np.empty_like(p)
    p1 = np.empty_like(p)
    p3 = np.empty_like(p)
    prev = np.inf
    max_inc = 0.0
    iters = 0
    for it in range(max_iters + 1):
        _two_sided_marginals(q, qx, qy, p, lr, lt)
        obj = _two_sided_objective(q, cost1, cost2, s1, s2, lam, p, lr, lt)
        if obj - prev > max_inc:
            max_inc = obj - prev
        if abs(prev - obj) < tol or iters >= max_iters:
            break
        prev = obj
        p0[:] = p
        _two_sided_update(cost1, cost2, s1, s2, lam, mask, lr, lt, p)
        p1[:] = p
        _two_sided_marginals(q, qx, qy, p, lr, lt)
        _two_sided_update(cost1, cost2, s1, s2, lam, mask, lr, lt, p)
        iters += 2
        if _log_extrapolate(p0, p1, p, p3):
            _two_sided_marginals(q, qx, qy, p3, lr, lt)
            _two_sided_update(cost1, cost2, s1, s2, lam, mask, lr, lt, p3)
            iters += 1
            _two_sided_marginals(q, qx, qy, p3, lr, lt)
            o3 = _two_sided_objective(q, cost1, cost2, s1, s2, lam, p3, lr, lt)
            _two_sided_marginals(q, qx, qy, p, lr, lt)
            o2 = _two_sided_objective(q, cost1, cost2, s1, s2, lam, p, lr, lt)
            if o3 < o2:
                p[:] = p3
    # final evaluation at the returned iterate
    _two_sided_marginals(q, qx, qy, p, lr, lt)
    use_r = lam > 0.0
    use_t = lam < 1.0
    i1 = 0.0
    i2 = 0.0
    d1 = 0.0
    d2 = 0.0
    gap = 0.0
    for x in range(nx):
        for y in range(ny):
            w = q[x, y]
            if w == 0.0:
                continue
            avg = 0.0
            gmin = np.inf
            for c in range(nc):
                pc = p[x, y, c]
                if pc > 0.0:
                    lp = log(pc)
                    i1 += w * pc * (lp - lr[y, c])
                    i2 += w * pc * (lp - lt[x, c])
                    d1 += w * pc * cost1[x, y, c]
                    d2 += w * pc * cost2[x, y, c]
                    g = lp + s1 * cost1[x, y, c] + s2 * cost2[x, y, c]
                    if use_r:
                        g -= lam * lr[y, c]
                    if use_t:
                        g -= (1.0 - lam) * lt[x, c]
                    avg += pc * g
                    if g < gmin:
                        gmin = g
            gap += w * (avg - gmin)
    obj = lam * i1 + (1.0 - lam) * i2 + s1 * d1 + s2 * d2
    return obj, iters, max_inc, i1, i2, d1, d2, gap


@njit(cache=True)
def gibbs_helper(q, cost, s, mask, p, tol, max_iters):
    """Minimize I(X;A|Y) + s*E[cost(X,Y,A)] over p(a|x), with A - X - Y.

    ``p`` has shape (|X|,|A|) and ``cost`` shape (|X|,|Y|,|A|).  Returns
    ``(obj, iters, max_increase, rate, dist, fw_gap)``.
    """
    nx, na = p.shape
    ny = q.shape[1]
    qy = q.sum(axis=0)
    lr = np.empty((ny, na))
    ceff = np.zeros((nx, na))
    for x in range(nx):
        for a in range(na):
            v = 0.0
            for y in range(ny):
                v += q[x, y] * cost[x, y, a]
            ceff[x, a] = v
    prev = np.inf
    max_inc = 0.0
    iters = 0
    for it in range(max_iters + 1):
        for y in range(ny):
            for a in range(na):
                v = 0.0
                for x in range(nx):
                    v += q[x, y] * p[x, a]
                lr[y, a] = log(v / qy[y]) if (v > 0.0 and qy[y] > 0.0) else NEG_INF
        obj = 0.0
        for x in range(nx):
            for a in range(na):
                pa = p[x, a]
                if pa > 0.0:
                    lp = log(pa)
                    v = 0.0
                    for y in range(ny):
                        if q[x, y] > 0.0:
                            v += q[x, y] * (lp - lr[y, a])
                    obj += pa * (v + s * ceff[x, a])
        if obj - prev > max_inc:
            max_inc = obj - prev
        iters = it
        if abs(prev - obj) < tol or it == max_iters:
            break
        prev = obj
        for x in range(nx):
            qx = 0.0
            for y in range(ny):
                qx += q[x, y]
            m = NEG_INF
            for a in range(na):
                if mask[x, a]:
                    v = 0.0
                    if qx > 0.0:
                        for y in range(ny):
                            if q[x, y] > 0.0:
                                v += q[x, y] / qx * lr[y, a]
                        v -= s * ceff[x, a] / qx
                    p[x, a] = v
                    if v > m:
                        m = v
                else:
                    p[x, a] = NEG_INF
            if m == NEG_INF:
                cnt = 0.0
                for a in range(na):
                    if mask[x, a]:
                        cnt += 1.0
                for a in range(na):
                    p[x, a] = 1.0 / cnt if mask[x, a] else 0.0
                continue
            z = 0.0
            for a in range(na):
                if p[x, a] > NEG_INF:
                    p[x, a] = exp(p[x, a] - m)
                    z += p[x, a]
                else:
                    p[x, a] = 0.0
            for a in range(na):
                v = p[x, a] / z
                p[x, a] = v if v > FLUSH else 0.0
    rate = 0.0
    dist = 0.0
    gap = 0.0
    for x in range(nx):
        avg = 0.0
        gmin = np.inf
        seen = False
        for a in range(na):
            pa = p[x, a]
            if pa > 0.0:
                lp = log(pa)
                g = s * ceff[x, a]
                for y in range(ny):
                    if q[x, y] > 0.0:
                        g += q[x, y] * (lp - lr[y, a])
                        rate += q[x, y] * pa * (lp - lr[y, a])
                dist += pa * ceff[x, a]
                avg += pa * g
                if g < gmin:
                    gmin = g
                seen = True
        if seen:
            gap += avg - gmin
    obj = rate + s * dist
    return obj, iters, max_inc, rate, dist, gap


@njit(cache=True)
def ba_weighted_capacity(qu, qv, lam, pw, tol, max_iters):
    """Maximize lam*I(W;U) + (1-lam)*I(W;V) over the input pmf ``pw``.

    ``qu[w,u]`` and ``qv[w,v]`` are the two marginal channels.  Returns
    ``(value_lower, value_upper, iu, iv, iters, max_decrease)`` in nats;
    ``value_upper`` is the standard max-divergence bound.
    """
    nw, nu = qu.shape
    nv = qv.shape[1]
    du = np.zeros(nw)
    dv = np.zeros(nw)
    prev = NEG_INF
    max_dec = 0.0
    iters = 0
    val = 0.0
    for it in range(max_iters + 1):
        pu = np.zeros(nu)
        pv = np.zeros(nv)
        for w in range(nw):
            for u in range(nu):
                pu[u] += pw[w] * qu[w, u]
            for v in range(nv):
                pv[v] += pw[w] * qv[w, v]
        for w in range(nw):
            a = 0.0
            for u in range(nu):
                if qu[w, u] > 0.0:
                    a += qu[w, u] * log(qu[w, u] / pu[u]) if pu[u] > 0.0 else 0.0
            b = 0.0
            for v in range(nv):
                if qv[w, v] > 0.0:
                    b += qv[w, v] * log(qv[w, v] / pv[v]) if pv[v] > 0.0 else 0.0
            du[w] = a
            dv[w] = b
        val = 0.0
        for w in range(nw):
            val += pw[w] * (lam * du[w] + (1.0 - lam) * dv[w])
        if prev - val > max_dec:
            max_dec = prev - val
        iters = it
        if abs(val - prev) < tol or it == max_iters:
            break
        prev = val
        z = 0.0
        mx = NEG_INF
        for w in range(nw):
            g = lam * du[w] + (1.0 - lam) * dv[w]
            if g > mx:
                mx = g
        for w in range(nw):
            pw[w] = pw[w] * exp(lam * du[w] + (1.0 - lam) * dv[w] - mx)
            z += pw[w]
        for w in range(nw):
            pw[w] /= z
    iu = 0.0
    iv = 0.0
    upper = NEG_INF
    for w in range(nw):
        iu += pw[w] * du[w]
        iv += pw[w] * dv[w]
        g = lam * du[w] + (1.0 - lam) * dv[w]
        if g > upper:
            upper = g
    return val, upper, iu, iv, iters, max_dec


@njit(cache=True)
def ba_cost_capacity(Q, cost, s, mask, p, tol, max_iters):
    """Maximize I(W;Y) - s*E[cost(W)] over ``p`` supported on ``mask``.

    ``Q[w,y]`` is the channel.  ``p`` is overwritten.  Returns
    ``(mi, ecost, dual, iters, max_decrease)`` in nats, where
    ``dual = max_w {D(Q_w || p_Y) - s*cost(w)}`` over the mask.
    """
    nw, ny = Q.shape
    py = np.zeros(ny)
    D = np.zeros(nw)
    prev = NEG_INF
    max_dec = 0.0
    iters = 0
    for it in range(max_iters + 1):
        for y in range(ny):
            v = 0.0
            for w in range(nw):
                v += p[w] * Q[w, y]
            py[y] = v
        for w in range(nw):
            v = 0.0
            if mask[w]:
                for y in range(ny):
                    if Q[w, y] > 0.0:
                        if py[y] > 0.0:
                            v += Q[w, y] * log(Q[w, y] / py[y])
                        else:
                            v = np.inf
                            break
            D[w] = v
        val = 0.0
        for w in range(nw):
            if p[w] > 0.0:
                val += p[w] * (D[w] - s * cost[w])
        if prev - val > max_dec:
            max_dec = prev - val
        iters = it
        if abs(val - prev) < tol or it == max_iters:
            break
        prev = val
        mx = NEG_INF
        for w in range(nw):
            if mask[w]:
                g = D[w] - s * cost[w]
                if g > mx:
                    mx = g
        z = 0.0
        for w in range(nw):
            if mask[w]:
                p[w] = p[w] * exp(D[w] - s * cost[w] - mx)
            else:
                p[w] = 0.0
            z += p[w]
        for w in range(nw):
            p[w] /= z
    mi = 0.0
    ec = 0.0
    dual = NEG_INF
    for w in range(nw):
        if p[w] > 0.0:
            mi += p[w] * D[w]
            ec += p[w] * cost[w]
        if mask[w]:
            g = D[w] - s * cost[w]
            if g > dual:
                dual = g
    return mi, ec, dual, iters, max_dec
