import json
import math
import time

import numpy as np
import pytest

from infoloss import distributions as D
from infoloss import loss as L
from infoloss import pbf as P
from infoloss.entropy import q_function
from infoloss.errors import ConfigurationError, VariantError

LOG3 = math.log2(3)


@pytest.mark.parametrize("estimator", [L.loss_via_partition, L.loss_via_differential_entropy])
def test_square_law_one_bit(estimator):
    t = time.perf_counter()
    rep = estimator(P.square_law(), D.gaussian())
    assert time.perf_counter() - t < 1.0
    assert rep.loss_bits == pytest.approx(1.0, abs=1e-6)
    assert not rep.infinite


def test_square_law_monte_carlo():
    rep = L.loss_monte_carlo(P.square_law(), D.gaussian(), samples=10**6, seed=0)
    assert rep.loss_bits == pytest.approx(1.0, abs=0.002)


def test_identity_zero_everywhere():
    f, d = P.identity_map(), D.gaussian(0, 3)
    assert L.loss_via_partition(f, d).loss_bits == 0.0
    assert L.loss_monte_carlo(f, d, samples=10_000).loss_bits == 0.0
    assert L.loss_via_differential_entropy(f, d).loss_bits == pytest.approx(0.0, abs=2e-3)
    assert L.bound_chain(f, d).as_tuple() == (0.0, 0.0, 0.0, 0.0)


@pytest.mark.parametrize("slope, offset", [(3.0, 1.0), (-0.25, 4.0)])
def test_monotone_affine_is_lossless(slope, offset):
    rep = L.loss_via_differential_entropy(P.affine_map(slope, offset), D.gaussian(1, 2))
    assert rep.loss_bits == pytest.approx(0.0, abs=2e-3)


def test_cubic_frozen_value_and_cross_method():
    f, d = P.cubic_map(), D.gaussian(0, 10)
    part = L.loss_via_partition(f, d)
    dif = L.loss_via_differential_entropy(f, d)
    assert part.loss_bits == pytest.approx(0.9430698470809893, abs=1e-8)
    assert abs(part.loss_bits - dif.loss_bits) <= 0.02


def test_cubic_monte_carlo_within_three_stderr():
    f, d = P.cubic_map(), D.gaussian(0, 5)
    mc = L.loss_monte_carlo(f, d, samples=200_000, seed=3)
    part = L.loss_via_partition(f, d)
    assert abs(mc.loss_bits - part.loss_bits) <= 3 * mc.numeric_error


def test_monte_carlo_is_seed_deterministic():
    f, d = P.cubic_map(), D.gaussian(0, 10)
    a = L.loss_monte_carlo(f, d, samples=20_000, seed=7).loss_bits
    b = L.loss_monte_carlo(f, d, samples=20_000, seed=7).loss_bits
    assert a == b
    with pytest.raises(ConfigurationError):
        L.loss_monte_carlo(f, d, samples=100)


@pytest.mark.parametrize("sigma", [4.0, 10.0, 30.0])
def test_cubic_bound_chain_closed_form(sigma):
    pb = 2 * q_function(20 / (math.sqrt(3) * sigma))
    c = L.bound_chain(P.cubic_map(), D.gaussian(0, sigma))
    np.testing.assert_allclose(c.as_tuple(), [(1 - pb) * LOG3, math.log2(3 - 2 * pb), LOG3, LOG3], atol=1e-9)
    assert c.ordered()


def test_square_law_chain_all_one_bit():
    c = L.bound_chain(P.square_law(), D.gaussian())
    np.testing.assert_allclose(c.as_tuple(), [1, 1, 1, 1], atol=1e-12)
    assert c.h_of_w == pytest.approx(1.0)


def test_equality_condition():
    assert L.equality_condition_check(P.square_law(), D.gaussian())[0]
    assert L.equality_condition_check(P.identity_map(), D.gaussian())[0]
    ok, dev = L.equality_condition_check(P.cubic_map(), D.gaussian(0, 10))
    assert not ok and dev > 1e-3


def test_cascade_examples():
    d = D.gaussian()
    s, direct = L.cascade_loss(P.identity_map(), P.square_law(), d)
    assert s == pytest.approx(1.0, abs=1e-6) and direct == pytest.approx(1.0, abs=1e-6)
    s, direct = L.cascade_loss(P.square_law(), P.square_law(), d)
    assert s == pytest.approx(direct, abs=1e-4)
    s, direct = L.cascade_loss(P.affine_map(2.0), P.affine_map(-1.0, 3.0), d)
    assert s == 0.0 and direct == 0.0


def test_partition_and_output_determine_input():
    # given Y and the branch index W, inverting that branch recovers X, so every quantized X is determined
    f, d = P.cubic_map(), D.gaussian(0, 10)
    x = d.sample(100_000, 0)
    w = f.owner(x)
    y = f(x)
    rec = np.empty_like(x)
    for pos, br in enumerate(f.branches):
        m = w == pos
        rec[m] = br.invert(y[m])
    for n in (4, 8, 12):
        mismatch = np.mean(np.floor(rec * 2**n) != np.floor(x * 2**n))
        assert mismatch <= 1e-3


def test_staircase_is_flagged_infinite():
    rep = L.loss_via_partition(P.staircase_map(), D.uniform(0, 1))
    assert rep.infinite and math.isinf(rep.loss_bits)
    assert rep.details["truncated_value"] > 0


def test_infinite_loss_probe_cases():
    d = D.gaussian()
    quantizer = [{"domain": (k, k + 1), "class": "constant"} for k in range(-8, 8)]
    assert L.infinite_loss_probe(quantizer, d).infinite is True
    clipper = [{"domain": (-math.inf, -1), "class": "bijective"}, {"domain": (-1, 1), "class": "constant"},
               {"domain": (1, math.inf), "class": "bijective"}]
    assert L.infinite_loss_probe(clipper, d).infinite is True
    assert L.infinite_loss_probe(L.piece_classes_of(P.cubic_map()), d).infinite is False
    assert L.infinite_loss_probe([{"domain": (0, 1), "class": "fractal"}], d).infinite is None
    assert L.infinite_loss_probe(quantizer, D.discrete([[0.5, 1.0]])).infinite is False


def test_estimators_reject_non_ac_input():
    with pytest.raises(VariantError):
        L.loss_via_partition(P.square_law(), D.discrete([[1.0, 1.0]]))


def test_report_serializes():
    rep = L.loss_via_partition(P.cubic_map(), D.gaussian(0, 10))
    out = json.loads(json.dumps(rep.to_dict()))
    assert set(out["bound_chain"]) >= {"e_log_card", "log_e_card", "ess_sup_log_card", "log_K", "h_of_w"}
    assert out["flags"]["infinite"] is False
    inf = json.loads(json.dumps(L.loss_via_partition(P.staircase_map(), D.uniform()).to_dict()))
    assert inf["loss_bits"] == "inf"
