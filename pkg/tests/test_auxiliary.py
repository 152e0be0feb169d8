import numpy as np
import pytest

from twrn_rd import (JointSource, NotDifferenceMeasure, additive_capacity, additive_channel,
                     binary_entropy as h, check_difference_measure, minimax_capacity, wyner_ziv_rd)
from twrn_rd.auxiliary import difference_vector
from twrn_rd.oracle import GridSpec, grid_min_channel
from twrn_rd.prob import conditional_entropy_xy

HAM = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_wz_zero_distortion(dsbs25):
    assert wyner_ziv_rd(dsbs25, 1, 0.0).rate == pytest.approx(h(0.25), abs=1e-6)


def test_wz_deterministic_function():
    # U = x mod 2 on a ternary X; receiver needs U exactly
    q = np.array([[0.2, 0.05, 0.05], [0.05, 0.2, 0.05], [0.1, 0.1, 0.2]])
    psi = np.array([0, 1, 0])
    delta1 = (psi[:, None] != np.arange(2)[None, :]).astype(float)
    s = JointSource.from_arrays(q, delta1=delta1)
    p_uy = np.array([q[psi == u].sum(axis=0) for u in range(2)])
    want = conditional_entropy_xy(p_uy)[0]
    assert wyner_ziv_rd(s, 1, 0.0).rate == pytest.approx(want, abs=1e-6)


def test_wz_dsbs_bracketed_and_oracle(dsbs25):
    r = wyner_ziv_rd(dsbs25, 1, 0.1)
    assert 0.342282 - 1e-6 <= r.rate <= 0.531004 + 1e-6
    o = grid_min_channel(dsbs25, "wz1", (0.1, None), GridSpec(k=20, card=3))
    assert r.rate <= o.value + 1e-6
    assert r.rate >= o.value - o.guaranteed_gap
    assert r.achieved_distortion <= 0.1 + 1e-9


def test_wz_second_receiver_symmetric(dsbs25):
    assert wyner_ziv_rd(dsbs25, 2, 0.1).rate == pytest.approx(wyner_ziv_rd(dsbs25, 1, 0.1).rate, abs=1e-7)


def test_additive_capacity_examples():
    assert additive_capacity(2, [0, 1], 0.0, [0.75, 0.25]) == pytest.approx(0.0, abs=1e-9)
    assert additive_capacity(2, [0, 1], 0.3, [0.5, 0.5]) == pytest.approx(0.0, abs=1e-9)
    want = h(0.375) - h(0.25)
    assert additive_capacity(2, [0, 1], 0.25, [0.75, 0.25]) == pytest.approx(want, abs=1e-6)
    assert want == pytest.approx(0.143156, abs=1e-6)


def test_minimax_capacity_examples():
    assert minimax_capacity(2, [0, 1], 0.0) == pytest.approx(0.0, abs=1e-9)
    assert minimax_capacity(2, [0, 1], 0.5) == pytest.approx(0.0, abs=1e-7)
    c = minimax_capacity(2, [0, 1], 0.25)
    assert c <= 0.143156 + 1e-6
    # admissible noise Bern(t), t <= d, on a step-0.01 grid
    grid = min(additive_capacity(2, [0, 1], 0.25, [1 - t, t]) for t in np.linspace(0, 0.25, 26))
    assert c == pytest.approx(grid, abs=1e-4)


def test_difference_measure_checks():
    np.testing.assert_array_equal(check_difference_measure([0, 1]), [0.0, 1.0])
    np.testing.assert_array_equal(difference_vector(HAM), [0.0, 1.0])
    with pytest.raises(NotDifferenceMeasure):
        difference_vector(np.array([[0.0, 1.0], [2.0, 0.0]]))
    ch = additive_channel([0.75, 0.25])
    np.testing.assert_allclose(ch.sum(axis=1), 1.0)
