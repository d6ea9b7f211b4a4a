import math

import numpy as np
import pytest

from infoloss import distributions as D
from infoloss import pbf as P
from infoloss.entropy import q_function
from infoloss.errors import (CompositionDomainError, ConditioningOnNullError, ConfigurationError, DomainError,
                             SingularDerivativeError)


def test_branches_are_indexed_from_one():
    f = P.cubic_map()
    assert [b.index for b in f.branches] == [1, 2, 3]
    assert f.K == 3


def test_overlapping_domains_rejected():
    with pytest.raises(DomainError):
        P.Pbf((P.affine_branch((0.0, 2.0), 1.0), P.affine_branch((1.0, 3.0), 1.0)))


def test_evaluate_and_outside_domain():
    f = P.square_law()
    assert P.evaluate(f, -3.0) == 9.0
    g = P.Pbf((P.affine_branch((0.0, 1.0), 1.0),))
    with pytest.raises(DomainError):
        P.evaluate(g, 2.0)


def test_staircase_evaluates_by_dyadic_piece():
    f = P.staircase_map()
    assert P.evaluate(f, 0.75) == pytest.approx(0.5)
    assert P.evaluate(f, 0.3) == pytest.approx(0.2)
    assert f.infinite_family


def test_cubic_preimages_at_zero():
    got = P.preimage(P.cubic_map(), 0.0)
    assert [i for i, _ in got] == [1, 2, 3]
    np.testing.assert_allclose([x for _, x in got], [-10.0, 0.0, 10.0], atol=1e-9)


def test_cubic_preimage_count_by_region():
    f = P.cubic_map()
    top = 2 * 100 * math.sqrt(100 / 3) / 3
    assert len(P.preimage(f, top + 1.0)) == 1
    assert len(P.preimage(f, top - 1.0)) == 3
    assert len(P.preimage(f, -top - 1.0)) == 1


def test_roots_scalar_and_vector_shapes():
    f = P.cubic_map()
    xs, valid = f.roots(5.0)
    assert xs.shape == valid.shape == (3,)
    xs, valid = f.roots(np.array([[0.0, 1e4]]))
    assert xs.shape == (3, 1, 2)
    assert valid[:, 0, 1].sum() == 1


def test_square_law_output_pdf_is_chi_square():
    from scipy import stats
    y = np.array([0.1, 0.5, 2.0, 7.0])
    np.testing.assert_allclose(P.output_pdf(P.square_law(), D.gaussian(), y), stats.chi2(1).pdf(y), rtol=1e-12)


def test_branch_posterior_sums_to_one_and_null_conditioning():
    f, d = P.cubic_map(), D.gaussian(0, 10)
    p = P.branch_posterior(f, d, 12.0)
    assert p.shape == (3,)
    assert p.sum() == pytest.approx(1.0)
    # symmetric input: the outer branches at y = 0 are equally likely
    p0 = P.branch_posterior(f, d, 0.0)
    assert p0[0] == pytest.approx(p0[2])
    g = P.Pbf((P.affine_branch((0.0, 1.0), 1.0),))
    with pytest.raises(ConditioningOnNullError):
        P.branch_posterior(g, D.uniform(5, 6), 0.5)


def test_singular_derivative_detected():
    # x**3 on [0, 1] has a flat point at the left end where the input density is positive
    f = P.Pbf((P.power_branch((0.0, 1.0), 3),))
    assert P.output_pdf(f, D.uniform(0, 1), 0.125) == pytest.approx(1 / 0.75)
    with pytest.raises(SingularDerivativeError):
        P.output_pdf(f, D.uniform(0, 1), 0.0)


@pytest.mark.parametrize("sigma", [2.0, 10.0, 30.0])
def test_cubic_bijective_mass_matches_q_function(sigma):
    _, pb = P.bijective_part(P.cubic_map(), D.gaussian(0, sigma))
    assert pb == pytest.approx(2 * q_function(20 / (math.sqrt(3) * sigma)), abs=1e-12)


def test_image_cells_of_cubic():
    cells = P.image_cells(P.cubic_map())
    assert [c.card for c in cells] == [1, 3, 1]
    assert P.essential_sup_card(P.cubic_map(), D.gaussian(0, 10)) == 3


def test_compose_square_law_twice():
    h = P.compose(P.square_law(), P.square_law())
    assert P.evaluate(h, -2.0) == pytest.approx(16.0)
    assert h.K == 2


def test_compose_rejects_domain_gap():
    inner = P.square_law()
    outer = P.Pbf((P.affine_branch((-math.inf, -1.0), 1.0), P.affine_branch((1.0, math.inf), 1.0)))
    with pytest.raises(CompositionDomainError):
        P.compose(inner, outer)


def test_pushforward_matches_sampling():
    f, d = P.cubic_map(), D.gaussian(0, 10)
    py = P.pushforward(f, d)
    y = f(d.sample(200_000, 0))
    for t in (-500.0, 0.0, 200.0):
        assert py.cdf(t) == pytest.approx(np.mean(y <= t), abs=0.005)


def test_from_json_branches_and_named():
    f = P.from_json({"branches": [{"domain": ["-inf", 0], "map": "affine", "slope": -1},
                                  {"domain": [0, "inf"], "map": "expr", "expr": "x**2",
                                   "derivative": "2*x", "inverse": "sqrt(x)"}]})
    assert P.evaluate(f, -2.0) == 2.0
    assert P.evaluate(f, 3.0) == 9.0
    assert P.from_json({"named": "cubic", "params": {"c": 3}}).K == 3
    with pytest.raises(ConfigurationError):
        P.from_json({"named": "nope"})


def test_expression_sandbox():
    fn = P.compile_expression("where(abs(x) <= 1, 0, x)")
    np.testing.assert_array_equal(fn(np.array([-2.0, 0.5, 3.0])), [-2.0, 0.0, 3.0])
    for bad in ("__import__('os')", "x.real", "open(x)"):
        with pytest.raises(ConfigurationError):
            P.compile_expression(bad)


def test_numeric_inverse_without_closed_form():
    br = P.Branch((0.0, 2.0), lambda x: np.asarray(x) ** 3 + np.asarray(x), lambda x: 3 * np.asarray(x) ** 2 + 1)
    assert br.invert(10.0) == pytest.approx(2.0, abs=1e-9)
    np.testing.assert_allclose(br.invert(np.array([0.0, 2.0, 0.625])), [0.0, 1.0, 0.5], atol=1e-9)
