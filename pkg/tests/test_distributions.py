import math

import numpy as np
import pytest

from infoloss import distributions as D
from infoloss.errors import ConfigurationError, DomainError, InvalidPmfError


def test_gaussian_mass_and_quantile_roundtrip():
    d = D.gaussian(1.0, 2.0)
    assert d.mass(-1.0, 3.0) == pytest.approx(0.6826894921370859, abs=1e-12)
    u = np.linspace(0.01, 0.99, 9)
    np.testing.assert_allclose(d.cdf(d.quantile(u)), u, atol=1e-12)


def test_uniform_pdf_support():
    d = D.uniform(-4.0, 4.0)
    np.testing.assert_allclose(d.pdf([-5.0, 0.0, 3.9, 5.0]), [0.0, 0.125, 0.125, 0.0])
    assert d.truncated_support() == (-4.0, 4.0)


def test_truncated_support_tail_mass():
    d = D.gaussian()
    lo, hi = d.truncated_support(1e-6)
    # mass beyond each end
    assert d.cdf(lo) == pytest.approx(1e-6, rel=1e-6)
    assert 1 - d.cdf(hi) == pytest.approx(1e-6, rel=1e-6)


def test_sampling_is_seeded():
    d = D.gaussian()
    np.testing.assert_array_equal(d.sample(5, 3), d.sample(5, 3))


def test_piecewise_uniform():
    d = D.piecewise_uniform([-2.0, -1.0, 1.0, 2.0], [0.25, 0.5, 0.25])
    assert d.mass(-1.0, 1.0) == pytest.approx(0.5)
    np.testing.assert_allclose(d.pdf([-1.5, 0.0, 1.5]), [0.25, 0.25, 0.25])
    with pytest.raises(InvalidPmfError):
        D.piecewise_uniform([0.0, 1.0], [0.9])


def test_mixed_distribution_masses():
    d = D.mixed(0.6, D.uniform(0.0, 1.0), [[2.0, 0.4]])
    assert d.ac_mass(0.0, 0.5) == pytest.approx(0.3)
    assert d.mass(1.5, 2.5) == pytest.approx(0.4)
    x = d.sample(100_000, 0)
    assert np.mean(x == 2.0) == pytest.approx(0.4, abs=0.005)
    with pytest.raises(InvalidPmfError):
        D.mixed(0.6, D.uniform(), [[2.0, 0.5]])


def test_discrete_rejects_bad_pmf():
    with pytest.raises(InvalidPmfError):
        D.discrete([[0.0, 0.7], [1.0, 0.7]])


def test_from_json_kinds():
    assert D.from_json({"kind": "gaussian", "mean": 0, "std": 2}).mass(-2, 2) == pytest.approx(0.6826894921370859)
    assert D.from_json({"kind": "uniform", "a": 0, "b": 2}).support == (0.0, 2.0)
    st = D.from_json({"kind": "staircase"})
    assert st.support == (0.0, 1.0)
    with pytest.raises(ConfigurationError):
        D.from_json({"mean": 0})
    with pytest.raises(ConfigurationError):
        D.from_json({"kind": "cauchy-ish"})


def test_affine_transform():
    d = D.gaussian().affine(3.0, 1.0)
    assert d.mass(-2.0, 4.0) == pytest.approx(0.6826894921370859, abs=1e-12)
