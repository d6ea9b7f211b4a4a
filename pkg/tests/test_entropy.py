import math

import numpy as np
import pytest

from infoloss import distributions as D
from infoloss import entropy as E
from infoloss.errors import ConfigurationError, DomainError, InvalidPmfError


def test_discrete_entropy_values():
    assert E.discrete_entropy([0.5, 0.5]) == 1.0
    assert E.discrete_entropy([1.0, 0.0]) == 0.0
    assert E.discrete_entropy(np.full(8, 1 / 8)) == pytest.approx(3.0)
    with pytest.raises(InvalidPmfError):
        E.discrete_entropy([0.5, 0.6])
    with pytest.raises(InvalidPmfError):
        E.discrete_entropy([])


def test_binary_entropy():
    assert E.binary_entropy(0.5) == 1.0
    assert E.binary_entropy(0.0) == E.binary_entropy(1.0) == 0.0
    assert E.binary_entropy(0.11) == pytest.approx(0.4999162, abs=1e-6)
    with pytest.raises(DomainError):
        E.binary_entropy(1.5)


def test_q_function():
    assert E.q_function(0.0) == 0.5
    assert E.q_function(1.0) == pytest.approx(0.15865525393145707, rel=1e-12)
    assert 0.0 <= E.q_function(40.0) < 1e-300
    np.testing.assert_allclose(E.q_function([-1.0, 1.0]).sum(), 1.0)


def test_partial_entropy_sums_monotone():
    s = E.partial_entropy_sums([0.5, 0.25, 0.125])
    np.testing.assert_allclose(s, [0.5, 1.0, 1.375])


def test_differential_entropy_gaussian_and_uniform():
    assert E.differential_entropy(D.gaussian()) == pytest.approx(0.5 * math.log2(2 * math.pi * math.e), abs=1e-8)
    assert E.differential_entropy(D.gaussian(0, 4)) == pytest.approx(0.5 * math.log2(2 * math.pi * math.e) + 2, abs=1e-8)
    assert E.differential_entropy(D.uniform(-4, 4)) == pytest.approx(3.0, abs=1e-10)


def test_quantize_uniform_is_exact():
    q = E.quantize(D.uniform(0, 1), 5)
    assert len(q.masses) == 32
    np.testing.assert_allclose(q.masses, 1 / 32)
    assert q.entropy() == pytest.approx(5.0)


def test_quantize_mixed_places_atom():
    d = D.mixed(0.6, D.uniform(0, 1), [[2.0, 0.4]])
    q = E.quantize(d, 3)
    assert q.cell_mass(16) == pytest.approx(0.4)
    assert q.masses.sum() == pytest.approx(1.0)


def test_regression_slope_exact_line():
    slope, err = E.regression_slope([1, 2, 3, 4], [2.5, 4.5, 6.5, 8.5])
    assert slope == pytest.approx(2.0)
    assert err == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("d, expected", [
    (D.uniform(0, 1), 1.0),
    (D.gaussian(), 1.0),
    (D.discrete([[0.0, 0.3], [1.0, 0.7]]), 0.0),
    (D.mixed(0.6, D.uniform(0, 1), [[2.0, 0.4]]), 0.6),
])
def test_information_dimension_analytic(d, expected):
    assert E.information_dimension(d, 6, 14).estimate == pytest.approx(expected, abs=0.01)


def test_information_dimension_product_law():
    d = D.VectorDistribution.product([D.uniform(0, 1), D.uniform(0, 1)])
    assert E.information_dimension(d, 4, 8).estimate == pytest.approx(2.0, abs=1e-9)


def test_information_dimension_empirical_flags_fine_resolution():
    est = E.information_dimension(D.uniform(0, 1), 6, 20, samples=100_000, seed=1)
    assert any("singleton" in w for w in est.warnings)


def test_information_dimension_rejects_bad_window():
    with pytest.raises(DomainError):
        E.information_dimension(D.uniform(), 6, 6)
    with pytest.raises(ConfigurationError):
        E.information_dimension(D.uniform(), 6, 8, method="kde")
