import numpy as np
import pytest

from twrn_rd import (JointSource, appendix_lower_candidate, binary_entropy as h, bound_bundle,
                     compress_linear_upper, conditional_entropy_xy, conditional_rd, cut_set_lower,
                     heegard_berger_upper, minimax_capacity, minimax_gap, one_description_upper)
from twrn_rd.bounds import BUNDLE_COLUMNS


def test_cut_set_examples(dsbs25):
    assert cut_set_lower(dsbs25, 0.1, 0.1) == pytest.approx(0.342282, abs=1e-6)
    assert cut_set_lower(dsbs25, 0.5, 0.5) == pytest.approx(0.0, abs=1e-9)
    want = conditional_rd(dsbs25, 1, 0.0).rate
    assert cut_set_lower(dsbs25, 0.0, 0.5) == pytest.approx(want, abs=1e-9)
    assert want == pytest.approx(h(0.25), abs=1e-6)


def test_compress_linear_examples(dsbs25, indep):
    assert compress_linear_upper(dsbs25, 0.0, 0.0) == pytest.approx(h(0.25), abs=1e-6)
    assert compress_linear_upper(dsbs25, 0.5, 0.5) == pytest.approx(0.0, abs=1e-9)
    assert compress_linear_upper(indep, 0.1, 0.1) == pytest.approx(cut_set_lower(indep, 0.1, 0.1), abs=2e-6)


def test_one_description_examples(dsbs25):
    r = one_description_upper(dsbs25, 0.2, 0.2)
    assert r.rate == pytest.approx(h(0.25) - h(0.2), abs=1e-2)
    assert r.rate <= compress_linear_upper(dsbs25, 0.2, 0.2) + 1e-6
    assert one_description_upper(dsbs25, 0.0, 0.0).rate == pytest.approx(h(0.25), abs=1e-6)
    assert one_description_upper(dsbs25, 0.5, 0.5).rate == pytest.approx(0.0, abs=1e-9)


def test_heegard_berger_examples(dsbs25):
    assert heegard_berger_upper(dsbs25, 0.5, 0.5).rate == pytest.approx(0.0, abs=1e-9)
    assert heegard_berger_upper(dsbs25, 0.0, 0.0).rate == pytest.approx(h(0.25), abs=1e-6)
    assert heegard_berger_upper(dsbs25, 0.2, 0.2).rate <= h(0.25) - h(0.2) + 1e-2


def test_minimax_gap_examples(dsbs25):
    assert minimax_gap(dsbs25, 0.0, 0.0) == pytest.approx(0.0, abs=1e-9)
    assert minimax_gap(dsbs25, 0.25, 0.25) == pytest.approx(minimax_capacity(2, [0, 1], 0.25), abs=1e-7)
    gap = compress_linear_upper(dsbs25, 0.1, 0.1) - cut_set_lower(dsbs25, 0.1, 0.1)
    assert gap <= minimax_gap(dsbs25, 0.1, 0.1) + 4e-6


def test_appendix_candidate(dsbs25):
    c = appendix_lower_candidate(dsbs25, 0.5, 0.5)
    assert c.value == pytest.approx(0.0, abs=1e-6)
    c = appendix_lower_candidate(dsbs25, 0.1, 0.1, cards=(2, 2, 2))
    assert c.value >= 0.342282 - 1e-3
    assert set(c.residuals)


def test_bundle_dsbs(dsbs25):
    b = bound_bundle(dsbs25, 0.1, 0.1)
    assert b.ordering_ok and b.gap_ok
    assert list(b.row()) == list(BUNDLE_COLUMNS)
    assert b.r_cr == pytest.approx(0.342282, abs=1e-5)


def test_bundle_independent(indep):
    b = bound_bundle(indep, 0.1, 0.1, with_cr=False)
    assert b.r_l == pytest.approx(1 - h(0.1), abs=2e-6)
    assert b.r_u == pytest.approx(1 - h(0.1), abs=2e-6)


def test_bundle_dmax(dsbs25):
    b = bound_bundle(dsbs25, 0.5, 0.5)
    for v in (b.r_l, b.r_u_dstar, b.r_u_star, b.r_u):
        assert v == pytest.approx(0.0, abs=1e-9)


def test_bundle_random_ternary_ordering(rng):
    s = JointSource.from_arrays(rng.dirichlet(np.ones(9)).reshape(3, 3))
    b = bound_bundle(s, 0.1, 0.2, with_cr=False)
    assert b.ordering_ok
    assert b.r_l <= b.r_u_dstar + 2e-3 <= b.r_u_star + 4e-3 <= b.r_u + 6e-3


def test_deterministic_functions_zero_distortion():
    q = np.array([[0.3, 0.1], [0.1, 0.2], [0.05, 0.25]])
    psi = np.array([0, 1, 1])
    d1 = (psi[:, None] != np.arange(2)[None, :]).astype(float)
    s = JointSource.from_arrays(q, delta1=d1)
    p_uy = np.array([q[psi == u].sum(axis=0) for u in range(2)])
    want = max(conditional_entropy_xy(p_uy)[0], conditional_entropy_xy(q)[1])
    b = bound_bundle(s, 0.0, 0.0, with_cr=False)
    assert b.r_l == pytest.approx(want, abs=1e-6) and b.r_u == pytest.approx(want, abs=1e-6)
