import numpy as np
import pytest

from twrn_rd import (BroadcastChannelSpec, ShapeMismatch, binary_entropy as h, binary_symmetric_broadcast,
                     channel_mi_frontier, conditional_rd, cr_rd, dsbs_source, jscc_cr_achievable,
                     jscc_cut_set_feasible, nayak_sufficient_check, tuncel_zero_distortion_feasible)
from twrn_rd.jscc import bsc, one_lossless_description, zero_wz_loss_description


def test_frontier_symmetric():
    pts = channel_mi_frontier(binary_symmetric_broadcast(0.1, 0.1, 1.0))
    assert len(pts) == 1
    assert pts[0].i_u == pytest.approx(1 - h(0.1), abs=1e-6)
    assert pts[0].i_v == pytest.approx(1 - h(0.1), abs=1e-6)
    np.testing.assert_allclose(pts[0].p_w, [0.5, 0.5], atol=1e-6)


def test_frontier_asymmetric():
    pts = channel_mi_frontier(binary_symmetric_broadcast(0.1, 0.2, 1.0))
    assert len(pts) == 1
    assert (pts[0].i_u, pts[0].i_v) == (pytest.approx(0.531004, abs=1e-6), pytest.approx(0.278072, abs=1e-6))


def test_frontier_useless_receiver():
    bc = BroadcastChannelSpec.from_marginals(np.array([[0.8, 0.2], [0.3, 0.7]]), np.full((2, 2), 0.5), 1.0)
    pts = channel_mi_frontier(bc)
    assert len(pts) == 1 and pts[0].i_v == pytest.approx(0.0, abs=1e-9)
    cap = max(-sum(t * np.log2(t) for t in np.array([p, 1 - p]) @ np.array([[0.8, 0.2], [0.3, 0.7]]))
              - (p * h(0.2) + (1 - p) * h(0.3)) for p in np.linspace(0, 1, 100001))
    assert pts[0].i_u == pytest.approx(cap, abs=1e-6)


def test_frontier_concave_chain():
    bc = BroadcastChannelSpec.from_marginals(np.array([[0.9, 0.1], [0.4, 0.6]]),
                                             np.array([[0.5, 0.5], [0.05, 0.95]]), 1.0)
    pts = channel_mi_frontier(bc)
    xs = np.array([p.i_u for p in pts])
    ys = np.array([p.i_v for p in pts])
    assert np.all(np.diff(xs) >= 0) and np.all(np.diff(ys) <= 1e-12)
    for i in range(1, len(pts) - 1):
        t = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]) if xs[i + 1] > xs[i - 1] else 0.5
        assert ys[i] >= (1 - t) * ys[i - 1] + t * ys[i + 1] - 1e-6


def test_cut_set_examples(dsbs25):
    assert jscc_cut_set_feasible(dsbs25, binary_symmetric_broadcast(0.1, 0.2, 1.0), 0.5, 0.5).feasible
    a = jscc_cut_set_feasible(dsbs25, binary_symmetric_broadcast(0.1, 0.2, 2.0), 0.0, 0.0)
    b = jscc_cut_set_feasible(dsbs25, binary_symmetric_broadcast(0.1, 0.2, 3.0), 0.0, 0.0)
    assert a.status == "infeasible" and a.kind == "necessary"
    assert b.status == "feasible"
    assert min(a.margins) == pytest.approx(2 * 0.278072 - 0.811278, abs=1e-5)
    assert min(b.margins) == pytest.approx(3 * 0.278072 - 0.811278, abs=1e-5)


def test_tuncel_examples(dsbs25):
    a = tuncel_zero_distortion_feasible(dsbs25, binary_symmetric_broadcast(0.1, 0.2, 2.0))
    b = tuncel_zero_distortion_feasible(dsbs25, binary_symmetric_broadcast(0.1, 0.2, 3.0))
    assert (a.status, b.status) == ("infeasible", "feasible")
    assert a.kind == "exact"
    same = tuncel_zero_distortion_feasible(dsbs_source(0.0), binary_symmetric_broadcast(0.3, 0.4, 0.1))
    assert same.feasible


def test_cr_achievable_examples(dsbs25):
    bc = binary_symmetric_broadcast(0.1, 0.1, 1.0)
    v = jscc_cr_achievable(dsbs25, bc, 0.1, 0.1)
    assert v.feasible and v.kind == "exact"
    assert v.margins[0] == pytest.approx(v.margins[1], abs=1e-6)
    assert v.margins[0] == pytest.approx((1 - h(0.1)) - cr_rd(dsbs25, 0.1, 0.1).rate, abs=1e-5)
    assert jscc_cr_achievable(dsbs25, bc, 0.5, 0.5).feasible
    z = jscc_cr_achievable(dsbs25, binary_symmetric_broadcast(0.1, 0.2, 2.0), 0.0, 0.0)
    t = tuncel_zero_distortion_feasible(dsbs25, binary_symmetric_broadcast(0.1, 0.2, 2.0))
    assert z.status == t.status


def test_cr_implies_cut_set(dsbs25):
    for kappa in (0.5, 0.8, 1.0):
        bc = binary_symmetric_broadcast(0.1, 0.2, kappa)
        if jscc_cr_achievable(dsbs25, bc, 0.1, 0.15).feasible:
            assert jscc_cut_set_feasible(dsbs25, bc, 0.1, 0.15).feasible


def test_monotone_in_kappa(dsbs25):
    got = [jscc_cut_set_feasible(dsbs25, binary_symmetric_broadcast(0.1, 0.2, k), 0.05, 0.05).feasible
           for k in (0.5, 1.0, 2.0, 4.0)]
    assert got == sorted(got)


def test_nayak_lossless_candidate(dsbs25):
    p = np.zeros((2, 2, 4))
    for x in range(2):
        for y in range(2):
            p[x, y, 2 * x + y] = 1.0
    c = np.arange(4)
    pi1 = np.repeat((c // 2)[:, None], 2, axis=1)
    pi2 = np.repeat((c % 2)[:, None], 2, axis=1)
    v = nayak_sufficient_check(dsbs25, binary_symmetric_broadcast(0.0, 0.0, 5.0), 0.0, 0.0, p, pi1, pi2, [0.5, 0.5])
    assert v.feasible and v.kind == "sufficient"


def test_nayak_zero_wz_loss(dsbs25):
    d = zero_wz_loss_description(dsbs25, 0.1, 0.1)
    bc = binary_symmetric_broadcast(0.1, 0.1, 1.0)
    v = nayak_sufficient_check(dsbs25, bc, 0.1, 0.1, d.channel, d.pi1, d.pi2, [0.5, 0.5])
    assert v.feasible
    assert v.details["mi_x"] == pytest.approx(v.details["mi_y"], abs=1e-9)
    assert v.details["dist1"] <= 0.1 + 1e-9


def test_nayak_one_lossless(dsbs25):
    d = one_lossless_description(dsbs25, 0.1)
    bc = binary_symmetric_broadcast(0.0, 0.0, 2.0)
    v = nayak_sufficient_check(dsbs25, bc, 0.0, 0.1, d.channel, d.pi1, d.pi2, [0.5, 0.5])
    assert v.details["mi_x"] == pytest.approx(h(0.25), abs=1e-9)
    assert v.details["mi_y"] == pytest.approx(conditional_rd(dsbs25, 2, 0.1).rate, abs=1e-6)
    assert v.details["dist1"] == pytest.approx(0.0, abs=1e-12)


def test_nayak_shape_mismatch(dsbs25):
    with pytest.raises(ShapeMismatch):
        nayak_sufficient_check(dsbs25, binary_symmetric_broadcast(0.1, 0.1, 1.0), 0.1, 0.1,
                               np.ones((2, 2, 2)) / 2, np.zeros((3, 2), int), np.zeros((2, 2), int), [0.5, 0.5])


def test_channel_json_round_trip():
    bc = binary_symmetric_broadcast(0.1, 0.2, 1.5)
    again = BroadcastChannelSpec.from_json_dict(bc.to_json_dict())
    np.testing.assert_allclose(again.q_uv_w, bc.q_uv_w)
    assert again.kappa == 1.5
    np.testing.assert_allclose(bc.q_u_w, bsc(0.1))
