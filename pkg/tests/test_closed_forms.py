import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from twrn_rd import (DomainError, GaussianSpec, binary_convolution, binary_entropy as h, dsbs_cascade_channel,
                     dsbs_cr_upper, dsbs_d_star, dsbs_four_input_channel, dsbs_rd, dsbs_source,
                     dsbs_wyner_common_information, figure_curves, gaussian_conditional_rd, gaussian_region)
from twrn_rd.closed_forms import cr_objective
from twrn_rd.prob import expected_distortion


def test_dsbs_rd_examples():
    assert dsbs_rd(0.25, 0.1) == pytest.approx(0.342282, abs=1e-6)
    assert dsbs_rd(0.25, 0.3) == 0.0
    assert dsbs_rd(0.3, 0.3) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("rho,want", [(0.0, 0.0), (0.5, 0.5), (0.25, 0.146447)])
def test_d_star(rho, want):
    assert dsbs_d_star(rho) == pytest.approx(want, abs=1e-6)


def test_d_star_self_convolution():
    for rho in np.linspace(0, 0.5, 26):
        ds = dsbs_d_star(rho)
        assert binary_convolution(ds, ds) == pytest.approx(rho, abs=1e-12)


def test_cr_upper_examples():
    assert dsbs_cr_upper(0.25, 0.5) == pytest.approx(0.0, abs=1e-12)
    assert dsbs_cr_upper(0.25, 0.3) == pytest.approx(0.0434, abs=1e-4)


def test_wyner_common_information_examples():
    assert dsbs_wyner_common_information(0.0) == pytest.approx(1.0)
    assert dsbs_wyner_common_information(0.5) == pytest.approx(0.0, abs=1e-12)
    # direct minimization of I(XY;W) over symmetric splits X = W + BSC(a), Y = W + BSC(b)
    rho = 0.25
    res = minimize_scalar(lambda a: 1 + h(rho) - h(a) - h((rho - a) / (1 - 2 * a)),
                          bounds=(1e-9, rho - 1e-9), method="bounded", options={"xatol": 1e-12})
    assert dsbs_wyner_common_information(rho) == pytest.approx(res.fun, abs=1e-9)


def test_part_two_identity():
    for rho in np.linspace(0.01, 0.49, 20):
        ds = dsbs_d_star(rho)
        lhs = dsbs_rd(rho, ds)
        rhs = dsbs_wyner_common_information(rho) - (1 - h(ds))
        assert abs(lhs - rhs) <= 1e-12


def test_cascade_channel():
    s = dsbs_source(0.25)
    ch = dsbs_cascade_channel(0.25, 0.1)
    np.testing.assert_allclose(ch.probs.sum(axis=(2, 3)), 1.0, atol=1e-12)
    assert max(cr_objective(s, ch)) == pytest.approx(0.342282, abs=1e-6)
    assert max(cr_objective(s, ch)) == pytest.approx(h(0.25) - h(0.1), abs=1e-12)
    assert expected_distortion(s, ch, 1) == pytest.approx(0.1, abs=1e-12)
    ident = dsbs_cascade_channel(0.0, 0.0).probs
    for x in range(2):
        for y in range(2):
            if x == y:
                assert ident[x, y, x, y] == pytest.approx(1.0)


def test_cascade_at_dstar_reconstructions_agree():
    ds = dsbs_d_star(0.25)
    p = dsbs_cascade_channel(0.25, ds).probs
    assert p[:, :, 0, 1].max() == pytest.approx(0.0, abs=1e-12)
    assert p[:, :, 1, 0].max() == pytest.approx(0.0, abs=1e-12)


def test_four_input_channel():
    s = dsbs_source(0.25)
    ch = dsbs_four_input_channel(0.25, 0.3)
    assert max(cr_objective(s, ch)) == pytest.approx(dsbs_cr_upper(0.25, 0.3), abs=1e-9)
    assert expected_distortion(s, ch, 1) == pytest.approx(0.3, abs=1e-12)
    assert max(cr_objective(s, dsbs_four_input_channel(0.25, 0.5))) == pytest.approx(0.0, abs=1e-12)


def test_gaussian_examples():
    g = GaussianSpec(1.0, 1.0, 0.5)
    assert gaussian_conditional_rd(g, 1, 0.25) == pytest.approx(0.5 * math.log2(3))
    assert gaussian_conditional_rd(g, 1, 0.75) == 0.0
    assert gaussian_conditional_rd(GaussianSpec(1.0, 1.0, 0.0), 1, 0.25) == pytest.approx(1.0)
    assert gaussian_region(g, 0.25, 0.75) == pytest.approx(0.792481, abs=1e-6)
    assert gaussian_region(g, 0.3, 0.3) == gaussian_conditional_rd(g, 2, 0.3)
    with pytest.raises(DomainError):
        GaussianSpec(1.0, 1.0, 1.0)


def test_figure_tables():
    t = figure_curves(0.25)
    assert np.all(np.diff(t.r) <= 1e-15)
    assert np.all(t.r[t.d >= 0.25] == 0.0)
    assert figure_curves(0.15).d_star == pytest.approx(0.5 - 0.5 * math.sqrt(0.7))
    assert len(figure_curves(0.25, [])) == 0
