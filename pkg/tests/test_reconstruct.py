import json
import math

import numpy as np
import pytest

from infoloss import distributions as D
from infoloss import loss as L
from infoloss import pbf as P
from infoloss import reconstruct as R
from infoloss.errors import DomainError
from infoloss.gallery import cubic_pe, staircase_input

LOG3 = math.log2(3)


def test_map_tie_breaks_to_lower_index():
    assert R.map_reconstruct(P.square_law(), D.gaussian(), 4.0) == -2.0


def test_map_empty_preimage():
    with pytest.raises(DomainError):
        R.map_reconstruct(P.square_law(), D.gaussian(), -1.0)


def test_cubic_map_selects_middle_branch_inside_fold():
    f, d = P.cubic_map(), D.gaussian(0, 10)
    top = 2 * 100 * math.sqrt(100 / 3) / 3
    y_in = np.linspace(-0.99 * top, 0.99 * top, 41)
    np.testing.assert_array_equal(R.map_branch(f, d, y_in), 1)
    y_out = np.array([-top - 50, top + 50])
    np.testing.assert_array_equal(R.map_branch(f, d, y_out), [0, 2])


def test_staircase_map_picks_first_piece():
    f, d = P.staircase_map(), staircase_input()
    np.testing.assert_array_equal(R.map_branch(f, d, np.linspace(0.01, 0.99, 25)), 0)


@pytest.mark.parametrize("sigma", [2.0, 10.0, 30.0])
def test_cubic_map_error_closed_form(sigma):
    f, d = P.cubic_map(), D.gaussian(0, sigma)
    assert R.map_error_probability(f, d) == pytest.approx(cubic_pe(sigma), abs=1e-8)


def test_square_law_error_and_bounds():
    m = R.map_result(P.square_law(), D.gaussian())
    assert m.error_prob == pytest.approx(0.5, abs=1e-8)
    assert m.classic_fano_bound == pytest.approx(1.0, abs=1e-8)
    assert m.fano_type_bound == pytest.approx(1.5, abs=1e-8)
    assert m.extra_bounds["fano_type_e_card"] == pytest.approx(2.0, abs=1e-8)


def test_staircase_error_probability():
    f, d = P.staircase_map(), staircase_input()
    assert R.map_error_probability(f, d) == pytest.approx(1 / LOG3, abs=1e-6)
    sub = R.suboptimal_reconstructor(f, d)
    assert sub.details["branch"] == 1
    assert sub.error_prob == pytest.approx(1 / LOG3, abs=1e-6)
    assert math.isinf(sub.suboptimal_bound)
    assert math.isinf(R.map_result(f, d).fano_type_bound)


def test_fano_type_bound_values():
    assert R.fano_type_bound(0.0, 0.3, 2.0) == 0.0
    assert R.fano_type_bound(0.5, 0.0, 2.0) == pytest.approx(1.5)
    with pytest.raises(DomainError):
        R.fano_type_bound(0.2, 0.0, 0.5)
    with pytest.raises(DomainError):
        R.fano_type_bound(1.2, 0.0, 2.0)


def test_classic_fano_values():
    assert R.classic_fano_bound(0.5, 2) == pytest.approx(1.0)
    assert R.classic_fano_bound(0.0, 7) == 0.0
    with pytest.raises(DomainError):
        R.classic_fano_bound(0.1, 1)


def test_feder_merhav_phi_knots():
    assert R.feder_merhav_phi(0.0) == 0.0
    assert R.feder_merhav_phi(0.5) == pytest.approx(1.0)
    assert R.feder_merhav_phi(2 / 3) == pytest.approx(LOG3)
    assert R.feder_merhav_phi(0.25) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        R.feder_merhav_phi(1.0)


def test_feder_merhav_phi_continuous_nondecreasing():
    x = np.linspace(0, 0.99, 2000)
    v = np.array([R.feder_merhav_phi(t) for t in x])
    assert np.all(np.diff(v) >= -1e-12)
    for i in range(1, 10):
        k = i / (i + 1)
        assert R.feder_merhav_phi(k - 1e-12) == pytest.approx(R.feder_merhav_phi(k), abs=1e-9)


def test_classic_and_fano_type_curves_cross_on_cubic():
    diffs = []
    for sigma in (2.0, 10.0, 30.0):
        m = R.map_result(P.cubic_map(), D.gaussian(0, sigma))
        diffs.append(m.classic_fano_bound - m.fano_type_bound)
    assert min(diffs) < 0 < max(diffs)


def test_cubic_suboptimal_not_better_than_map():
    f, d = P.cubic_map(), D.gaussian(0, 10)
    sub = R.suboptimal_reconstructor(f, d)
    # the MAP value comes from quadrature with a 1e-6 tolerance
    assert sub.error_prob >= R.map_error_probability(f, d) - 1e-6
    loss = L.loss_via_partition(f, d).loss_bits
    assert loss <= sub.suboptimal_bound
    for v in sub.extra_bounds.values():
        assert loss <= v


def test_identity_suboptimal():
    sub = R.suboptimal_reconstructor(P.identity_map(), D.gaussian())
    assert sub.error_prob == 0.0
    assert sub.suboptimal_bound == 0.0


def test_empirical_error_matches_closed_form():
    f, d = P.cubic_map(), D.gaussian(0, 10)
    p, se = R.empirical_error_probability(f, d, R.map_result(f, d), samples=200_000, seed=1)
    assert abs(p - cubic_pe(10)) <= 3 * se


def test_empirical_error_identity_and_square_law():
    p, _ = R.empirical_error_probability(P.identity_map(), D.gaussian(), R.map_result(P.identity_map(), D.gaussian()))
    assert p == 0.0
    f, d = P.square_law(), D.gaussian()
    p, se = R.empirical_error_probability(f, d, R.suboptimal_reconstructor(f, d), samples=100_000, seed=2)
    assert abs(p - 0.5) <= 3 * se


def test_per_y_error_zero_on_bijective_image():
    f, d = P.cubic_map(), D.gaussian(0, 10)
    y = np.array([-2000.0, -500.0, 500.0, 2000.0])
    np.testing.assert_array_equal(R.map_error_given_y(f, d, y), 0.0)


def test_recon_result_serializes():
    m = R.map_result(P.staircase_map(), staircase_input())
    out = json.loads(json.dumps(m.to_dict()))
    assert out["fano_type_bound"] == "inf"
