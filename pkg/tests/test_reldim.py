import json
import math
from fractions import Fraction

import numpy as np
import pytest

from infoloss import distributions as D
from infoloss import reldim as RD
from infoloss.errors import (ConfigurationError, DomainError, InconsistentDimensionsError, InvalidPmfError,
                             UnsupportedClassError)


def test_dimension_ratio_examples():
    assert RD.rel_loss_from_dimensions(1, 0).rel_loss == 0
    assert RD.rel_loss_from_dimensions(2, 1).rel_loss == 0.5
    assert RD.rel_loss_from_dimensions(0.6, 0.6).rel_loss == 1
    with pytest.raises(DomainError):
        RD.rel_loss_from_dimensions(0, 0)
    with pytest.raises(InconsistentDimensionsError):
        RD.rel_loss_from_dimensions(1, 2)


def test_lipschitz_transfer_examples():
    N = 8
    assert RD.rel_transfer_lipschitz(Fraction(2 * N), Fraction(2 * N - 1)).rel_transfer == Fraction(15, 16)
    assert RD.rel_transfer_lipschitz(Fraction(2 * N - 1), Fraction(2)).rel_transfer == Fraction(2, 15)
    assert RD.rel_transfer_lipschitz(3, 3).rel_transfer == 1
    with pytest.raises(InconsistentDimensionsError):
        RD.rel_transfer_lipschitz(1, 2)


def test_loss_plus_transfer_is_one_exactly():
    r = RD.rel_loss_from_dimensions(Fraction(7), Fraction(3))
    assert r.rel_loss + r.rel_transfer == 1


def test_structural_projection_and_constant_set():
    proj = RD.DimensionPieceSpec(4, (RD.Piece(1.0, 1),))
    assert RD.rel_loss_structural(proj).rel_loss == 0.75
    pa = 0.6826894921370859
    const = RD.DimensionPieceSpec(1, (RD.Piece(pa, 0, "constant"), RD.Piece(1 - pa, 1)))
    assert RD.rel_loss_structural(const).rel_loss == pytest.approx(pa, abs=1e-15)
    full = RD.DimensionPieceSpec(3, (RD.Piece(0.5, 3), RD.Piece(0.5, 3)))
    assert RD.rel_loss_structural(full).rel_loss == 0


def test_structural_rejects_injective_and_bad_specs():
    spec = RD.DimensionPieceSpec(2, (RD.Piece(1.0, 2, "injective"),))
    with pytest.raises(UnsupportedClassError):
        RD.rel_loss_structural(spec)
    with pytest.raises(UnsupportedClassError):
        RD.DimensionPieceSpec(2, (RD.Piece(1.0, 2, "fractal"),))
    with pytest.raises(InvalidPmfError):
        RD.DimensionPieceSpec(2, (RD.Piece(0.5, 1),))
    with pytest.raises(InconsistentDimensionsError):
        RD.DimensionPieceSpec(2, (RD.Piece(1.0, 3),))


def test_piece_spec_json_roundtrip():
    desc = {"N": 4, "pieces": [{"mass": 0.5, "M": 1}, {"mass": 0.5, "M": 0, "class": "constant"}]}
    spec = RD.DimensionPieceSpec.from_json(desc)
    assert RD.rel_loss_structural(spec).rel_loss == pytest.approx(0.5 * 0.75 + 0.5)
    assert RD.DimensionPieceSpec.from_json(spec.to_dict()) == spec
    with pytest.raises(ConfigurationError):
        RD.DimensionPieceSpec.from_json({"pieces": []})


def test_mixed_rule():
    assert RD.rel_loss_mixed(0.3, 0.6).rel_loss == 0.5
    assert RD.rel_loss_mixed(0.2, 1.0).rel_loss == 0.2
    assert RD.rel_loss_mixed(0.0, 0.4).rel_loss == 0
    with pytest.raises(DomainError):
        RD.rel_loss_mixed(0.0, 0.0)


def test_cascade_relative():
    assert RD.cascade_relative(1, Fraction(1, 3)) == (Fraction(1, 3), Fraction(2, 3))
    t, l = RD.cascade_relative(0.5, 0.5)
    assert (t, l) == (0.25, 0.75)
    t, l = RD.cascade_relative(Fraction(15, 16), Fraction(2, 15))
    assert t == Fraction(1, 8) and l == 1 - t


def test_joint_bounds():
    b = RD.ub_rel_transfer([Fraction(1, 8)] * 3)
    assert b.raw == Fraction(3, 8) and b.clipped == Fraction(3, 8)
    b = RD.ub_rel_transfer([0.5, 0.75])
    assert b.raw == 1.25 and b.clipped == 1
    assert RD.ub_rel_transfer([]).raw == 0
    assert RD.ub_rel_loss([0, 1, 1, 1]) == 0.75
    assert RD.ub_rel_loss([0, 0]) == 0 and RD.ub_rel_loss([1, 1]) == 1


def test_fano_relative_bound():
    b = RD.fano_relative_bound(0.3, 1.0, 0.6)
    assert b.raw == pytest.approx(0.5, abs=1e-15)
    assert b.raw == pytest.approx(RD.rel_loss_mixed(0.3, 0.6).rel_loss, abs=1e-15)
    assert RD.fano_relative_bound(0.0, 1, 1).raw == 0
    # quantizer: l = 1 needs P_e >= d_X / d_B = 1
    assert RD.fano_relative_bound(1.0, 1, 1).raw == 1
    with pytest.raises(InconsistentDimensionsError):
        RD.fano_relative_bound(0.5, 0.5, 1.0)


def test_compression_converse():
    assert RD.compression_converse(1, 0) == 1
    assert RD.compression_converse(0.6, 0.1) == pytest.approx(0.5)
    assert RD.compression_converse(0.5, 0.5) == 0


def test_positive_relative_loss_classification():
    assert RD.positive_rel_implies_infinite_abs(0.5, True) == "infinite"
    assert RD.positive_rel_implies_infinite_abs(0, True) == "inconclusive"
    assert RD.positive_rel_implies_infinite_abs(0, False) == "inconclusive"


def test_empirical_quantizer_and_monotone():
    q = RD.rel_loss_empirical(D.uniform(0, 1), np.floor, 6, 12, 10**6, seed=0)
    assert q.ratios[-1] >= 0.95
    assert q.result.rel_loss == pytest.approx(1.0, abs=0.05)
    m = RD.rel_loss_empirical(D.gaussian(), lambda x: 2 * x + 1, 6, 12, 10**6, seed=0)
    assert m.result.rel_loss == pytest.approx(0.0, abs=0.05)


def test_empirical_center_clipper():
    d = D.gaussian()
    r = RD.rel_loss_empirical(d, lambda x: np.where(np.abs(x) <= 1, 0.0, x), 6, 12, 10**6, seed=0)
    assert r.result.rel_loss == pytest.approx(float(d.mass(-1, 1)), abs=0.05)
    # bound from the box dimension of the truncated support holds
    assert r.result.rel_loss <= RD.fano_relative_bound(float(d.mass(-1, 1)), 1, 1).raw + 3 * r.result.stderr


def test_empirical_projection():
    d = D.VectorDistribution.product([D.uniform(0, 1)] * 4)
    r = RD.rel_loss_empirical(d, lambda x: x[:, 0], 2, 4, 10**6, seed=0)
    assert r.result.rel_loss == pytest.approx(0.75, abs=0.05)


def test_empirical_warns_on_small_samples():
    r = RD.rel_loss_empirical(D.uniform(0, 1), np.floor, 6, 12, 20_000, seed=0)
    assert r.result.warnings


def test_result_serializes_fractions():
    r = RD.cascade_result(Fraction(15, 16), Fraction(2, 15))
    out = json.loads(json.dumps(r.to_dict()))
    assert out["rel_transfer"]["exact"] == "1/8"
