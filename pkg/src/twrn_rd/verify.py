"""Invariant suite over a small bundled instance set.

Each check compares a solver route against an independent route (closed
form, brute-force grid, or an identity) and returns a :class:`CheckResult`.
The suite is the package's quick self-test; the full-scale criteria live in
the test suite.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bounds import bound_bundle, cut_set_lower
from .closed_forms import (GaussianSpec, dsbs_cr_upper, dsbs_d_star, dsbs_rd, dsbs_source,
                           dsbs_wyner_common_information, figure_curves, gaussian_region)
from .cr import cr_rd
from .engine import BaAudit
from .errors import NoConvergence
from .jscc import binary_symmetric_broadcast, jscc_cr_achievable, jscc_cut_set_feasible, tuncel_zero_distortion_feasible
from .oracle import GridSpec, grid_min_channel
from .prob import (JointSource, SolverConfig, binary_entropy, conditional_entropy_xy,
                   conditional_mutual_information, hamming, mutual_information, random_pmf)

h = binary_entropy


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""
    seconds: float = 0.0


CHECK_COLUMNS = ("check", "passed", "value", "threshold", "detail")


def bundled_instances(seed: int = 7) -> dict[str, JointSource]:
    """DSBS(0.25), a seeded random binary source and a product source."""
    rng = np.random.default_rng(seed)
    q = random_pmf(rng, 4).reshape(2, 2)
    prod = np.outer([0.3, 0.7], [0.6, 0.4])
    return {
        "dsbs25": dsbs_source(0.25),
        "random22": JointSource.from_arrays(q),
        "product": JointSource.from_arrays(prod),
    }


# ----------------------------------------------------------------------------
# Reusable predicates
# ----------------------------------------------------------------------------


def figure_contract(rho: float, d, r, cr_upper, past, tol: float = 1e-9) -> tuple[bool, str]:
    """Qualitative contract of a DSBS figure table.

    Solid curve is h(rho) - h(d) up to rho and zero after; the dotted curve
    is defined exactly past d*; where both exist the dotted one is not lower.
    """
    ds = dsbs_d_star(rho)
    for di, ri, ci, pi in zip(d, r, cr_upper, past):
        want = h(rho) - h(di) if di <= rho else 0.0
        if abs(ri - want) > tol:
            return False, f"solid curve off at d={di}"
        defined = ci is not None and not (isinstance(ci, float) and math.isnan(ci))
        if bool(pi) != (di > ds) or defined != (di > ds):
            return False, f"dotted curve domain wrong at d={di}"
        if defined and ci < ri - tol:
            return False, f"dotted below solid at d={di}"
    return True, ""


def chain_rule_residual(q_xy, p_c_xy) -> float:
    """|I(X;C|Y) - (I(XY;C) - I(Y;C))| for one instance."""
    q = np.asarray(q_xy)
    P = q[:, :, None] * np.asarray(p_c_xy).reshape(q.shape + (-1,))
    lhs = conditional_mutual_information(P, axis=1)
    rhs = mutual_information(P.reshape(-1, P.shape[2])) - mutual_information(P.sum(axis=0))
    return abs(lhs - rhs)


def convexity_excess(q_xy, p1, p2) -> float:
    """I(mix) - (I(p1) + I(p2))/2 for the conditional MI I(X;C|Y)."""
    q = np.asarray(q_xy)

    def cmi(p):
        return conditional_mutual_information(q[:, :, None] * p, axis=1)

    return cmi(0.5 * (p1 + p2)) - 0.5 * (cmi(p1) + cmi(p2))


# ----------------------------------------------------------------------------
# Checks
# ----------------------------------------------------------------------------


def _dsbs_golden(cfg):
    err = 0.0
    for d in (0.02, 0.05, 0.1):
        want = h(0.25) - h(d)
        err = max(err, abs(cr_rd(dsbs_source(0.25), d, d, cfg).rate - want),
                  abs(cut_set_lower(dsbs_source(0.25), d, d, cfg) - want))
    return err, 1e-4


def _strict_past_dstar(cfg):
    d = 0.3
    r = cr_rd(dsbs_source(0.25), d, d, cfg).rate
    margin = min(r - dsbs_rd(0.25, d) - 1e-3, dsbs_cr_upper(0.25, d) + 1e-3 - r)
    return -margin, 0.0


def _wyner_identity(cfg):
    err = 0.0
    for rho in np.linspace(0.02, 0.48, 20):
        ds = dsbs_d_star(rho)
        err = max(err, abs(dsbs_rd(rho, ds) - (dsbs_wyner_common_information(rho) - (1 - h(ds)))))
    return err, 1e-12


def _zero_distortion(cfg):
    err = 0.0
    for name, s in bundled_instances().items():
        err = max(err, abs(cr_rd(s, 0.0, 0.0, cfg).rate - max(conditional_entropy_xy(s.q_xy))))
    return err, 1e-4


def _tuncel_flip(cfg):
    s = dsbs_source(0.25)
    a = tuncel_zero_distortion_feasible(s, binary_symmetric_broadcast(0.1, 0.2, 2.0), cfg)
    b = tuncel_zero_distortion_feasible(s, binary_symmetric_broadcast(0.1, 0.2, 3.0), cfg)
    return (0.0 if (a.status == "infeasible" and b.status == "feasible") else 1.0), 0.5


def _bound_ladder(cfg):
    worst = 0.0
    for name, (d1, d2) in (("dsbs25", (0.1, 0.1)), ("random22", (0.1, 0.15))):
        b = bound_bundle(bundled_instances()[name], d1, d2, cfg)
        worst = max(worst, 0.0 if b.ordering_ok and b.gap_ok is not False else 1.0)
    return worst, 0.5


def _independence(cfg):
    b = bound_bundle(bundled_instances()["product"], 0.1, 0.1, cfg, with_cr=False)
    return b.r_u - b.r_l, 2e-3


def _gaussian(cfg):
    return abs(gaussian_region(GaussianSpec(1.0, 1.0, 0.5), 0.25, 0.75) - math.log2(3.0) / 2), 1e-9


def _figures(cfg):
    bad = 0.0
    for rho in (0.15, 0.30, 0.40):
        t = figure_curves(rho)
        ok, _ = figure_contract(rho, t.d, t.r, t.cr_upper, t.is_past_dstar)
        bad = max(bad, 0.0 if ok else 1.0)
    return bad, 0.5


def _identities(cfg):
    rng = np.random.default_rng(cfg.seed)
    worst_chain = 0.0
    worst_cvx = -math.inf
    for _ in range(200):
        q = random_pmf(rng, 4).reshape(2, 2)
        p1 = random_pmf(rng, (2, 2, 3))
        p2 = random_pmf(rng, (2, 2, 3))
        worst_chain = max(worst_chain, chain_rule_residual(q, p1))
        worst_cvx = max(worst_cvx, convexity_excess(q, p1, p2))
    return max(worst_chain, worst_cvx), 1e-12


def _oracle_marginal(cfg):
    r = grid_min_channel(dsbs_source(0.25), "marginal", (0.1, None), GridSpec(k=100))
    return abs(r.value - (1 - h(0.1))), 1e-3


def _jscc_consistency(cfg):
    s = dsbs_source(0.25)
    bc = binary_symmetric_broadcast(0.1, 0.1, 1.0)
    a = jscc_cr_achievable(s, bc, 0.1, 0.1, cfg)
    c = jscc_cut_set_feasible(s, bc, 0.1, 0.1, cfg)
    ok = (not a.feasible) or c.feasible
    return (0.0 if ok else 1.0), 0.5


def _ba_monotone(cfg):
    return float(BaAudit.violations), 0.0


CHECKS: dict[str, Callable] = {
    "dsbs_golden": _dsbs_golden,
    "strict_past_dstar": _strict_past_dstar,
    "wyner_identity": _wyner_identity,
    "zero_distortion": _zero_distortion,
    "tuncel_flip": _tuncel_flip,
    "bound_ladder": _bound_ladder,
    "independence": _independence,
    "gaussian": _gaussian,
    "figures": _figures,
    "identities": _identities,
    "oracle_marginal": _oracle_marginal,
    "jscc_consistency": _jscc_consistency,
    "ba_monotone": _ba_monotone,
}


def run_checks(cfg: SolverConfig | None = None, names=None, progress=None) -> list[CheckResult]:
    """Run the named checks (default: all, in registry order)."""
    cfg = cfg or SolverConfig()
    out = []
    for name in names or CHECKS:
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NoConvergence)
            value, thr = CHECKS[name](cfg)
        res = CheckResult(name, bool(value <= thr), float(value), float(thr), "", time.perf_counter() - t0)
        out.append(res)
        if progress is not None:
            progress(res)
    return out


__all__ = [
    "CheckResult",
    "CHECKS",
    "CHECK_COLUMNS",
    "bundled_instances",
    "figure_contract",
    "chain_rule_residual",
    "convexity_excess",
    "run_checks",
]
