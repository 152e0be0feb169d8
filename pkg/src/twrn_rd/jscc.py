"""Joint source-channel feasibility over a broadcast channel.

The relay sends ``W`` over a broadcast channel ``q(u,v|w)``; receiver 1
sees ``U`` (and has ``Y``), receiver 2 sees ``V`` (and has ``X``).  With
``kappa`` channel uses per source symbol a rate pair ``(r1, r2)`` is
supported when some input pmf gives ``r1 <= kappa I(W;U)`` and
``r2 <= kappa I(W;V)``.

Both informations are concave in ``p_W``, so the set of supported pairs
is convex and the test reduces to the one-dimensional convex problem

    min over mu in [0,1] of  kappa*sigma(mu) - mu*r1 - (1-mu)*r2,

with ``sigma(mu) = max_p mu I(W;U) + (1-mu) I(W;V)``.  Its minimum is the
best worst-case slack; a positive value is witnessed by an explicit input
pmf and a negative one is certified by the divergence upper bound on
``sigma``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping, NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from ._kernels import ba_weighted_capacity
from .auxiliary import wyner_ziv_rd
from .cr import cr_program
from .engine import LN2
from .errors import DomainError, NoConvergence, NotHamming, ShapeMismatch, ValidationError
from .prob import (
    Channel,
    JointSource,
    SolverConfig,
    conditional_entropy_xy,
    info_terms,
    mutual_information,
    validate_pmf,
)
from .rd import conditional_rd

#: Slack (bits) inside which a verdict is reported as "boundary".
MARGIN_TOL = 1e-6
#: Default number of weights on the frontier grid.
N_WEIGHTS = 101


@dataclass(frozen=True)
class BroadcastChannelSpec:
    """Broadcast channel ``q_uv_w[w, u, v]`` and bandwidth expansion ``kappa``."""

    q_uv_w: np.ndarray
    kappa: float
    w_alphabet: tuple = ()
    u_alphabet: tuple = ()
    v_alphabet: tuple = ()

    def __post_init__(self):
        q = np.array(self.q_uv_w, dtype=float)
        if q.ndim != 3:
            raise ShapeMismatch("q_uv_w must have shape (|W|, |U|, |V|)")
        for w in range(q.shape[0]):
            q[w] = validate_pmf(q[w], what=f"q(u,v|w={w})")
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise DomainError("kappa must be positive")
        q.setflags(write=False)
        object.__setattr__(self, "q_uv_w", q)
        for name, n in (("w_alphabet", q.shape[0]), ("u_alphabet", q.shape[1]), ("v_alphabet", q.shape[2])):
            labels = tuple(getattr(self, name)) or tuple(str(i) for i in range(n))
            if len(labels) != n:
                raise ShapeMismatch(f"{name} has {len(labels)} labels for {n} symbols")
            object.__setattr__(self, name, labels)
        object.__setattr__(self, "kappa", float(self.kappa))

    @classmethod
    def from_marginals(cls, q_u_w, q_v_w, kappa: float) -> "BroadcastChannelSpec":
        """Channel with conditionally independent outputs (only marginals matter)."""
        qu = np.asarray(q_u_w, dtype=float)
        qv = np.asarray(q_v_w, dtype=float)
        if qu.ndim != 2 or qv.ndim != 2 or qu.shape[0] != qv.shape[0]:
            raise ShapeMismatch("marginal channels need shapes (|W|,|U|) and (|W|,|V|)")
        return cls(np.einsum("wu,wv->wuv", qu, qv), kappa)

    @classmethod
    def from_json_dict(cls, raw: Mapping[str, Any]) -> "BroadcastChannelSpec":
        try:
            return cls(
                np.asarray(raw["q_uv_w"], dtype=float),
                float(raw["kappa"]),
                tuple(raw.get("w_alphabet", ())),
                tuple(raw.get("u_alphabet", ())),
                tuple(raw.get("v_alphabet", ())),
            )
        except KeyError as e:
            raise ValidationError(f"broadcast channel is missing field {e.args[0]!r}") from None

    def to_json_dict(self) -> dict:
        return {
            "w_alphabet": list(self.w_alphabet),
            "u_alphabet": list(self.u_alphabet),
            "v_alphabet": list(self.v_alphabet),
            "q_uv_w": self.q_uv_w.tolist(),
            "kappa": self.kappa,
        }

    def with_kappa(self, kappa: float) -> "BroadcastChannelSpec":
        return BroadcastChannelSpec(self.q_uv_w, kappa, self.w_alphabet, self.u_alphabet, self.v_alphabet)

    @property
    def q_u_w(self) -> np.ndarray:
        return self.q_uv_w.sum(axis=2)

    @property
    def q_v_w(self) -> np.ndarray:
        return self.q_uv_w.sum(axis=1)


def bsc(e: float) -> np.ndarray:
    return np.array([[1 - e, e], [e, 1 - e]])


def binary_symmetric_broadcast(e_u: float, e_v: float, kappa: float) -> BroadcastChannelSpec:
    """Binary input, BSC(e_u) to receiver 1 and BSC(e_v) to receiver 2."""
    return BroadcastChannelSpec.from_marginals(bsc(e_u), bsc(e_v), kappa)


@dataclass(frozen=True)
class FeasibilityVerdict:
    """Outcome of a feasibility check.

    ``status`` is "feasible", "infeasible" or "boundary" (worst slack within
    ``MARGIN_TOL`` of zero).  ``kind`` says what a feasible verdict means:
    "necessary" (the condition holds but achievability is not certified),
    "sufficient" (achievable) or "exact" (necessary and sufficient).
    ``margins`` are the two slacks in bits at the witness.
    """

    feasible: bool
    status: str
    kind: str
    margins: tuple
    witness_pw: Optional[np.ndarray] = None
    witness_test_channel: Optional[Channel] = None
    value: float = math.nan
    certified_upper: float = math.inf
    details: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        out = {
            "feasible": self.feasible,
            "status": self.status,
            "kind": self.kind,
            "margins": [float(m) for m in self.margins],
            "value": float(self.value),
            "witness_pw": None if self.witness_pw is None else np.asarray(self.witness_pw).tolist(),
            "witness_test_channel": None if self.witness_test_channel is None
            else self.witness_test_channel.probs.tolist(),
        }
        out.update({k: v for k, v in self.details.items() if isinstance(v, (int, float, str, bool, list))})
        return out


class FrontierPoint(NamedTuple):
    i_u: float
    i_v: float
    p_w: np.ndarray


# ----------------------------------------------------------------------------
# Channel side
# ----------------------------------------------------------------------------


def _weighted_capacity(bc: BroadcastChannelSpec, mu: float, cfg: SolverConfig):
    """(value, upper, I(W;U), I(W;V), p_W) in bits for the weight ``mu``."""
    nw = bc.q_uv_w.shape[0]
    pw = np.full(nw, 1.0 / nw)
    qu = np.ascontiguousarray(bc.q_u_w)
    qv = np.ascontiguousarray(bc.q_v_w)
    val, upper, iu, iv, iters, _ = ba_weighted_capacity(qu, qv, float(mu), pw, 1e-15, cfg.max_iters)
    val, upper, iu, iv = val / LN2, upper / LN2, iu / LN2, iv / LN2
    if upper - val > cfg.gap_tol:
        warnings.warn(f"weighted capacity stopped with gap {upper - val:.3g} bits", NoConvergence, stacklevel=3)
    return val, max(upper, val), iu, iv, pw


def _input_mis(bc: BroadcastChannelSpec, pw) -> tuple[float, float]:
    pw = np.asarray(pw, dtype=float)
    return (mutual_information(pw[:, None] * bc.q_u_w), mutual_information(pw[:, None] * bc.q_v_w))


def channel_mi_frontier(bc: BroadcastChannelSpec, n_weights: int = N_WEIGHTS,
                        cfg: SolverConfig | None = None) -> list[FrontierPoint]:
    """Pareto frontier of ``(I(W;U), I(W;V))`` from weighted-sum maximization.

    Points are sorted by increasing ``I(W;U)``; dominated and repeated
    points are dropped.
    """
    if n_weights < 2:
        raise DomainError("n_weights must be at least 2")
    cfg = cfg or SolverConfig()
    pts = []
    for mu in np.linspace(0.0, 1.0, int(n_weights)):
        _, _, iu, iv, pw = _weighted_capacity(bc, mu, cfg)
        pts.append(FrontierPoint(float(iu), float(iv), pw))
    tol = 1e-9
    keep = []
    for i, a in enumerate(pts):
        dominated = any(
            (b.i_u >= a.i_u - tol and b.i_v >= a.i_v - tol and (b.i_u > a.i_u + tol or b.i_v > a.i_v + tol))
            for b in pts
        )
        if dominated:
            continue
        if any(abs(b.i_u - a.i_u) <= tol and abs(b.i_v - a.i_v) <= tol for b in keep):
            continue
        keep.append(a)
    return sorted(keep, key=lambda p: (p.i_u, -p.i_v))


def _status(best_slack: float, certified: float, tol: float) -> str:
    if best_slack >= tol:
        return "feasible"
    if certified <= -tol:
        return "infeasible"
    return "boundary"


def supported_pair(bc: BroadcastChannelSpec, r1: float, r2: float, cfg: SolverConfig | None = None,
                   tol: float = MARGIN_TOL):
    """Best worst-case slack of ``(r1, r2)`` against the scaled channel region.

    Returns ``(slack, certified_upper, p_W, margins, mu)`` where ``slack``
    is attained by ``p_W`` and ``certified_upper`` bounds every input pmf.
    """
    cfg = cfg or SolverConfig()
    k = bc.kappa
    cache: dict = {}

    def ev(mu):
        mu = float(min(1.0, max(0.0, mu)))
        if mu not in cache:
            cache[mu] = _weighted_capacity(bc, mu, cfg)
        return cache[mu]

    def phi(mu):
        val = ev(mu)[0]
        return k * val - mu * r1 - (1 - mu) * r2

    res = minimize_scalar(phi, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-10})
    cands = [0.0, 1.0, float(res.x)]
    mu_star = min(cands, key=phi)
    certified = min(k * ev(m)[1] - m * r1 - (1 - m) * r2 for m in list(cache))

    def slack_of(pw):
        iu, iv = _input_mis(bc, pw)
        return min(k * iu - r1, k * iv - r2), (k * iu - r1, k * iv - r2)

    best_pw = ev(mu_star)[4]
    best, margins = slack_of(best_pw)
    # at a kink the maximizer switches: mixtures of the neighbouring inputs
    # are at least as good in both coordinates (concavity)
    for eps in (1e-3, 1e-5, 1e-7):
        lo, hi = ev(mu_star - eps)[4], ev(mu_star + eps)[4]
        r = minimize_scalar(lambda t: -slack_of(t * lo + (1 - t) * hi)[0], bounds=(0.0, 1.0), method="bounded",
                            options={"xatol": 1e-10})
        pw = r.x * lo + (1 - r.x) * hi
        s, m = slack_of(pw)
        if s > best:
            best, margins, best_pw = s, m, pw
    return best, certified, best_pw, margins, mu_star


def _verdict(bc, r1, r2, cfg, kind, tol, channel=None, details=None):
    slack, cert, pw, margins, mu = supported_pair(bc, r1, r2, cfg, tol)
    status = _status(slack, cert, tol)
    d = {"r1": float(r1), "r2": float(r2), "weight": float(mu)}
    d.update(details or {})
    return FeasibilityVerdict(
        feasible=status == "feasible", status=status, kind=kind, margins=tuple(float(m) for m in margins),
        witness_pw=pw, witness_test_channel=channel, value=float(slack), certified_upper=float(cert), details=d,
    )


# ----------------------------------------------------------------------------
# Checks
# ----------------------------------------------------------------------------


def jscc_cut_set_feasible(source: JointSource, bc: BroadcastChannelSpec, d1: float, d2: float,
                          cfg: SolverConfig | None = None, tol: float = MARGIN_TOL) -> FeasibilityVerdict:
    """Necessary condition: R_{X|Y}(d1) <= kappa I(W;U) and R_{Y|X}(d2) <= kappa I(W;V).

    An "infeasible" verdict certifies that (d1, d2) is not achievable; a
    "feasible" one does not certify achievability.
    """
    if not (d1 >= 0 and d2 >= 0):
        raise DomainError("distortions must be nonnegative")
    cfg = cfg or SolverConfig()
    r1 = conditional_rd(source, 1, d1, cfg).rate
    r2 = conditional_rd(source, 2, d2, cfg).rate
    return _verdict(bc, r1, r2, cfg, "necessary", tol)


def tuncel_zero_distortion_feasible(source: JointSource, bc: BroadcastChannelSpec, cfg: SolverConfig | None = None,
                                    tol: float = MARGIN_TOL) -> FeasibilityVerdict:
    """Exact test for zero Hamming distortion: H(X|Y) <= kappa I(W;U), H(Y|X) <= kappa I(W;V)."""
    if not source.is_hamming():
        raise NotHamming("zero-distortion test needs Hamming distortion measures")
    hxy, hyx = conditional_entropy_xy(source.q_xy)
    return _verdict(bc, hxy, hyx, cfg or SolverConfig(), "exact", tol)


def jscc_cr_achievable(source: JointSource, bc: BroadcastChannelSpec, d1: float, d2: float,
                       cfg: SolverConfig | None = None, tol: float = MARGIN_TOL) -> FeasibilityVerdict:
    """Exact test with common reconstructions.

    Minimizes ``max{I(X;XhYh|Y) - kappa I(W;U), I(Y;XhYh|X) - kappa I(W;V)}``
    jointly over test channels and channel inputs: a convex-concave
    saddle problem whose value is nonpositive exactly when (d1, d2) is
    achievable with common reconstructions.
    """
    if not (d1 >= 0 and d2 >= 0):
        raise DomainError("distortions must be nonnegative")
    cfg = cfg or SolverConfig()
    k = bc.kappa

    def mix(items):
        pw = sum(t * p for t, p in items)
        pw = pw / pw.sum()
        iu, iv = _input_mis(bc, pw)
        return pw, k * iu, k * iv

    def extra(lam):
        val, upper, iu, iv, pw = _weighted_capacity(bc, lam, cfg)
        return k * iu, k * iv, k * upper, pw, mix

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoConvergence)
        res = cr_program(source, d1, d2, cfg, extra=extra).solve()
    pw = res.extra_payload
    iu, iv = _input_mis(bc, pw)
    margins = (k * iu - res.i1, k * iv - res.i2)
    slack = min(margins)
    status = _status(slack, -res.lower, tol)
    ch = Channel(res.p.reshape(source.nx, source.ny, source.nxh, source.nyh), n_in=2)
    return FeasibilityVerdict(
        feasible=status == "feasible", status=status, kind="exact", margins=tuple(float(m) for m in margins),
        witness_pw=pw, witness_test_channel=ch, value=float(slack), certified_upper=float(-res.lower),
        details={"mi_x": float(res.i1), "mi_y": float(res.i2), "weight": float(res.lam)},
    )


def nayak_sufficient_check(source: JointSource, bc: BroadcastChannelSpec, d1: float, d2: float,
                           c_channel, pi1, pi2, p_w, tol: float = MARGIN_TOL) -> FeasibilityVerdict:
    """Sufficient condition from an explicit description ``C`` and input pmf.

    Checks E[delta1(X, pi1(C,Y))] <= d1, E[delta2(Y, pi2(C,X))] <= d2,
    I(X;C|Y) <= kappa I(W;U) and I(Y;C|X) <= kappa I(W;V).  A feasible
    verdict certifies achievability; an infeasible one only says that
    this candidate does not.  ``pi1[c, y]`` and ``pi2[c, x]`` are decoder
    tables.
    """
    p = np.asarray(c_channel.probs if isinstance(c_channel, Channel) else c_channel, dtype=float)
    nx, ny = source.nx, source.ny
    if p.ndim != 3 or p.shape[:2] != (nx, ny):
        raise ShapeMismatch(f"description channel must have shape ({nx}, {ny}, |C|)")
    nc = p.shape[2]
    pi1 = np.asarray(pi1)
    pi2 = np.asarray(pi2)
    if pi1.shape != (nc, ny) or pi2.shape != (nc, nx):
        raise ShapeMismatch(f"decoder tables must have shapes ({nc}, {ny}) and ({nc}, {nx})")
    if pi1.min() < 0 or pi1.max() >= source.nxh or pi2.min() < 0 or pi2.max() >= source.nyh:
        raise ShapeMismatch("decoder table entry outside the reconstruction alphabet")
    pw = np.asarray(p_w, dtype=float)
    if pw.shape != (bc.q_uv_w.shape[0],):
        raise ShapeMismatch("input pmf does not match the channel input alphabet")
    pw = validate_pmf(pw, "p_w")
    ch = Channel(p, n_in=2)
    P = source.q_xy[:, :, None] * ch.probs
    dist1 = float(sum(P[x, y, c] * source.delta1[x, pi1[c, y]] for x in range(nx) for y in range(ny) for c in range(nc)))
    dist2 = float(sum(P[x, y, c] * source.delta2[y, pi2[c, x]] for x in range(nx) for y in range(ny) for c in range(nc)))
    t = info_terms(source.q_xy, ch.probs)
    iu, iv = _input_mis(bc, pw)
    k = bc.kappa
    margins = (k * iu - t["xc_y"], k * iv - t["yc_x"])
    dist_ok = dist1 <= d1 + tol and dist2 <= d2 + tol
    slack = min(margins)
    if not dist_ok:
        status = "infeasible"
    elif slack >= -tol and slack < tol:
        status = "boundary"
    else:
        status = "feasible" if slack >= tol else "infeasible"
    # equality margins (slack within tol of zero) still satisfy the lemma
    feasible = dist_ok and slack >= -tol
    return FeasibilityVerdict(
        feasible=feasible, status=status, kind="sufficient", margins=tuple(float(m) for m in margins),
        witness_pw=pw, witness_test_channel=ch, value=float(slack),
        details={"dist1": dist1, "dist2": dist2, "mi_x": float(t["xc_y"]), "mi_y": float(t["yc_x"])},
    )


# ----------------------------------------------------------------------------
# Explicit descriptions
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Description:
    """A description channel ``p(c|x,y)`` with its two decoder tables."""

    channel: Channel
    pi1: np.ndarray
    pi2: np.ndarray


def zero_wz_loss_description(source: JointSource, d1: float, d2: float, cfg: SolverConfig | None = None) -> Description:
    """C = (A, B) from the two Wyner-Ziv helpers, drawn independently given (x, y).

    Then I(X;C|Y) = I(X;A|Y) and I(Y;C|X) = I(Y;B|X), so for sources with no
    Wyner-Ziv rate loss the description meets the conditional RD rates.
    """
    cfg = cfg or SolverConfig()
    wa = wyner_ziv_rd(source, 1, d1, cfg)
    wb = wyner_ziv_rd(source, 2, d2, cfg)
    pa = wa.helper_channel.probs  # p(a|x)
    pb = wb.helper_channel.probs  # p(b|y)
    na, nb = pa.shape[1], pb.shape[1]
    p = np.einsum("xa,yb->xyab", pa, pb).reshape(source.nx, source.ny, na * nb)
    c = np.arange(na * nb)
    pi1 = wa.decoder[c // nb]  # (c, y)
    pi2 = wb.decoder[c % nb]  # (c, x)
    return Description(Channel(p, n_in=2), pi1, pi2)


def one_lossless_description(source: JointSource, d2: float, cfg: SolverConfig | None = None) -> Description:
    """C = (Xh, Yh) with Xh a zero-distortion copy of X and Yh from R_{Y|X}(d2).

    Gives I(X;C|Y) = H(X|Y) and I(Y;C|X) = R_{Y|X}(d2) at distortions (0, d2).
    """
    cfg = cfg or SolverConfig()
    nx, ny, nyh = source.nx, source.ny, source.nyh
    r = conditional_rd(source, 2, d2, cfg)
    py = r.channel.probs  # p(yh | y, x)
    xh = np.argmin(source.delta1, axis=1)
    p = np.zeros((nx, ny, nx * nyh))
    for x in range(nx):
        for y in range(ny):
            p[x, y, x * nyh:(x + 1) * nyh] = py[y, x]
    c = np.arange(nx * nyh)
    pi1 = np.repeat(xh[c // nyh][:, None], ny, axis=1)
    pi2 = np.repeat((c % nyh)[:, None], nx, axis=1)
    return Description(Channel(p, n_in=2), pi1, pi2)


__all__ = [
    "BroadcastChannelSpec",
    "FeasibilityVerdict",
    "FrontierPoint",
    "Description",
    "MARGIN_TOL",
    "binary_symmetric_broadcast",
    "channel_mi_frontier",
    "supported_pair",
    "jscc_cut_set_feasible",
    "jscc_cr_achievable",
    "tuncel_zero_distortion_feasible",
    "nayak_sufficient_check",
    "zero_wz_loss_description",
    "one_lossless_description",
]
