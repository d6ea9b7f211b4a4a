import math
from fractions import Fraction

import numpy as np
import pytest

from infoloss import acr
from infoloss.errors import DomainError


def test_reference_instance_n8():
    a = acr.mc_acr_analysis(8, (1, 2, 3))
    assert (a.t_branch, a.t_sum, a.t_lag) == (Fraction(15, 16), Fraction(2, 15), Fraction(1, 8))
    assert a.t_joint_bound == Fraction(3, 8) and a.tight
    assert a.t_zero_lag == Fraction(1, 16)
    assert a.t_full == Fraction(1, 2) and a.l_full == Fraction(1, 2)


def test_jacobian_ranks_confirm_lag_and_joint_transfers():
    a = acr.mc_acr_analysis(8, (1, 2, 3))
    assert a.diagnostics["t_joint_from_jacobian"] == Fraction(3, 8)
    assert a.diagnostics["t_full_from_jacobian"] == Fraction(1, 2)
    assert a.diagnostics["t_zero_lag_from_jacobian"] == Fraction(1, 16)
    for v in a.diagnostics["lags"].values():
        assert v["t_lag_from_jacobian"] == Fraction(1, 8)


def test_branch_rank_diagnostics_disagree_with_closed_form():
    # the product map Y_k loses one real dimension per cycle of the shift, not one in total
    a = acr.mc_acr_analysis(8, (1, 2, 3))
    lag2 = a.diagnostics["lags"]["2"]
    assert lag2["rank_I_minus_Ck"] == 6
    assert lag2["t_branch_from_jacobian"] == Fraction(3, 4)
    assert a.flags


@pytest.mark.parametrize("N, k, expected", [(8, 1, (7, 7)), (8, 2, (6, 6)), (8, 4, (4, 4)), (9, 3, (9, 6)),
                                            (5, 2, (5, 4))])
def test_shift_ranks_closed_form(N, k, expected):
    assert acr.shift_ranks(N, k) == expected
    C = acr.circulant_shift(N, k)
    assert (np.linalg.matrix_rank(np.eye(N) + C), np.linalg.matrix_rank(np.eye(N) - C)) == expected


def test_autocorrelation_matches_definition():
    rng = np.random.default_rng(0)
    x = rng.normal(size=6) + 1j * rng.normal(size=6)
    r = acr.autocorrelation(x, [0, 2])
    assert r[0] == pytest.approx(np.sum(np.abs(x) ** 2))
    assert r[1] == pytest.approx(sum(x[n] * np.conj(x[(n + 2) % 6]) for n in range(6)))


def test_autocorrelation_jacobian_against_finite_differences():
    rng = np.random.default_rng(1)
    x = rng.normal(size=5) + 1j * rng.normal(size=5)
    lags = [1, 3]
    J = acr.autocorrelation_jacobian(x, lags)
    h = 1e-7
    num = np.zeros_like(J)
    for j in range(10):
        e = np.zeros(5, dtype=complex)
        e[j % 5] = h if j < 5 else 1j * h
        diff = (acr.autocorrelation(x + e, lags) - acr.autocorrelation(x - e, lags)) / (2 * h)
        num[:, j] = np.column_stack([diff.real, diff.imag]).ravel()
    np.testing.assert_allclose(J, num, atol=1e-6)


def test_duplicate_lags_flagged_non_tight():
    a = acr.mc_acr_analysis(8, (1, 1, 2))
    assert not a.tight
    assert any("duplicate" in f for f in a.flags)


def test_lags_beyond_half_not_tight():
    assert not acr.mc_acr_analysis(8, (1, 2, 5)).tight


def test_bad_arguments():
    with pytest.raises(DomainError):
        acr.mc_acr_analysis(3, (1, 2, 2))
    with pytest.raises(DomainError):
        acr.mc_acr_analysis(8, (1, 2))
    with pytest.raises(DomainError):
        acr.mc_acr_analysis(8, (0, 2, 3))
