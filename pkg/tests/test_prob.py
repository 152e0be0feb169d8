import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twrn_rd import (Channel, JointSource, NotNormalized, NegativeProbability, ShapeMismatch, SolverConfig,
                     binary_convolution, binary_entropy, conditional_entropy_xy, conditional_mutual_information,
                     entropy, expected_distortion, hamming, info_terms, mutual_information, random_pmf,
                     validate_joint_source, validate_pmf)
from twrn_rd.closed_forms import dsbs_source
from twrn_rd.verify import chain_rule_residual, convexity_excess


def test_validate_dsbs_matrix():
    s = validate_joint_source({"q_xy": [[0.375, 0.125], [0.125, 0.375]], "delta1": hamming(2), "delta2": hamming(2)})
    assert s.nx == s.ny == 2
    np.testing.assert_allclose(s.q_x, [0.5, 0.5])


def test_validate_point_mass_source():
    s = validate_joint_source({"q_xy": [[1, 0], [0, 0]], "delta1": [[0, 1], [1, 0]], "delta2": [[0, 1], [1, 0]]})
    assert entropy(s.q_xy) == 0.0


def test_validate_not_normalized():
    with pytest.raises(NotNormalized):
        validate_joint_source({"q_xy": [[0.6, 0.5], [0, 0]], "delta1": hamming(2), "delta2": hamming(2)})


def test_validate_negative():
    with pytest.raises(NegativeProbability):
        validate_pmf([1.2, -0.2])


def test_small_drift_renormalized():
    p = validate_pmf([0.5 + 4e-10, 0.5])
    assert abs(p.sum() - 1.0) < 1e-12


def test_json_round_trip(dsbs25):
    again = validate_joint_source(dsbs25.to_json_dict())
    np.testing.assert_array_equal(again.q_xy, dsbs25.q_xy)


def test_swapped_roles(dsbs25):
    s = JointSource.from_arrays([[0.1, 0.2], [0.3, 0.4]])
    np.testing.assert_allclose(s.swapped().q_xy, s.q_xy.T)


@pytest.mark.parametrize("p,want", [([0.5, 0.5], 1.0), ([1.0, 0.0], 0.0), ([0.25, 0.75], 0.811278)])
def test_entropy_examples(p, want):
    assert entropy(p) == pytest.approx(want, abs=1e-6)


def test_mutual_information_examples():
    assert mutual_information(np.outer([0.3, 0.7], [0.4, 0.6])) == pytest.approx(0.0, abs=1e-12)
    assert mutual_information(np.eye(2) / 2) == pytest.approx(1.0)
    assert mutual_information(dsbs_source(0.25).q_xy) == pytest.approx(0.188722, abs=1e-6)


def test_cmi_examples():
    ab = np.array([[0.2, 0.3], [0.1, 0.4]])
    indep = ab[:, :, None] * np.array([0.3, 0.7])[None, None, :]
    assert conditional_mutual_information(indep, axis=1) == pytest.approx(0.0, abs=1e-12)
    # A uniform given B and C = A
    j = np.zeros((2, 2, 2))
    for a in range(2):
        for b in range(2):
            j[a, b, a] = 0.25
    assert conditional_mutual_information(j, axis=1) == pytest.approx(1.0)


def test_cmi_shape_error():
    with pytest.raises(ShapeMismatch):
        conditional_mutual_information(np.ones((2, 2)) / 4)


def test_binary_entropy_and_convolution():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(0.1) == pytest.approx(0.468996, abs=1e-6)
    assert binary_convolution(0, 0.3) == pytest.approx(0.3)
    assert binary_convolution(0.5, 0.2) == pytest.approx(0.5)
    assert binary_convolution(0.1, 0.2) == pytest.approx(0.26)


def test_expected_distortion_examples(dsbs25):
    assert expected_distortion(dsbs25, np.eye(2), 1) == 0.0
    assert expected_distortion(dsbs25, np.array([[1.0, 0.0], [1.0, 0.0]]), 1) == pytest.approx(0.5)
    bsc = np.array([[0.9, 0.1], [0.1, 0.9]])
    assert expected_distortion(dsbs25, Channel(bsc), 1) == pytest.approx(0.1)


def test_expected_distortion_shape_mismatch(dsbs25):
    with pytest.raises(ShapeMismatch):
        expected_distortion(dsbs25, np.ones((3, 2)) / 2, 1)


def test_info_terms_consistent(rng):
    q = random_pmf(rng, 4).reshape(2, 2)
    p = random_pmf(rng, (2, 2, 3))
    t = info_terms(q, p)
    P = q[:, :, None] * p
    assert t["xc_y"] == pytest.approx(conditional_mutual_information(P, axis=1), abs=1e-12)
    assert t["yc_x"] == pytest.approx(conditional_mutual_information(P.transpose(1, 0, 2), axis=1), abs=1e-12)


def test_conditional_entropies(dsbs25):
    hx, hy = conditional_entropy_xy(dsbs25.q_xy)
    assert hx == pytest.approx(binary_entropy(0.25)) and hy == pytest.approx(binary_entropy(0.25))


def test_solver_config_replace():
    c = SolverConfig().replace(tol=1e-6)
    assert c.tol == 1e-6 and c.n_starts == 32


pmf_seeds = st.integers(min_value=0, max_value=2**31 - 1)


@settings(max_examples=60, deadline=None)
@given(pmf_seeds)
def test_information_nonnegative(seed):
    rng = np.random.default_rng(seed)
    J = random_pmf(rng, 12).reshape(2, 3, 2)
    assert entropy(J) >= 0
    assert mutual_information(J.reshape(6, 2)) >= 0
    assert conditional_mutual_information(J, axis=1) >= 0


@settings(max_examples=60, deadline=None)
@given(pmf_seeds)
def test_chain_rule_identity(seed):
    rng = np.random.default_rng(seed)
    q = random_pmf(rng, 6).reshape(2, 3)
    p = random_pmf(rng, (2, 3, 4))
    assert chain_rule_residual(q, p) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(pmf_seeds)
def test_cmi_midpoint_convex(seed):
    rng = np.random.default_rng(seed)
    q = random_pmf(rng, 4).reshape(2, 2)
    assert convexity_excess(q, random_pmf(rng, (2, 2, 3)), random_pmf(rng, (2, 2, 3))) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 0.5), st.floats(0, 0.5), st.floats(0, 0.5))
def test_binary_convolution_monotone(a, b, c):
    lo, hi = sorted((b, c))
    assert binary_convolution(a, lo) <= binary_convolution(a, hi) + 1e-15


def test_random_pmf_accepts_numpy_integer_shapes():
    rng = np.random.default_rng(0)
    n = np.int64(3)
    assert random_pmf(rng, n).shape == (3,)
    assert random_pmf(rng, (np.int64(2), n)).shape == (2, 3)
