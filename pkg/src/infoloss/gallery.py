"""Named example systems with reference values, the cubic figure data and the
comparison table of information flow measures."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import distributions as D
from . import loss as L
from . import pbf as P
from . import reconstruct as R
from . import reldim as RD
from .accumulator import accumulate, accumulator_loss_bound, accumulator_preimage_count
from .acr import mc_acr_analysis
from .entropy import discrete_entropy, partial_entropy_sums, q_function
from .errors import ConfigurationError

LOG2_3 = math.log2(3.0)


# -------------------------------------------------------------- staircase law


def staircase_mass(n):
    """``P(X in (2**-n, 2**(1-n)]) = 1/log2(n+1) - 1/log2(n+2)``, evaluated without cancellation."""
    n = np.asarray(n, dtype=float)
    out = np.log1p(1.0 / (n + 1.0)) / math.log(2.0) / (np.log2(n + 1.0) * np.log2(n + 2.0))
    return float(out) if out.ndim == 0 else out


def _staircase_index(x):
    """Piece index ``n`` with ``x`` in ``(2**-n, 2**(1-n)]``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        n = np.ceil(-np.log2(np.where(x > 0, x, 1.0)))
    n = np.maximum(n, 1.0)
    # exact powers of two belong to the piece on their left
    return np.where(np.ldexp(1.0, -n.astype(int) + 1) < x, n - 1, n)


def staircase_input() -> D.ContinuousDistribution:
    """Input law on ``(0, 1]`` that is uniform within each dyadic piece with mass :func:`staircase_mass`."""

    def pdf(x):
        x = np.asarray(x, dtype=float)
        n = np.maximum(_staircase_index(x), 1.0)
        inside = (x > 0) & (x <= 1)
        return np.where(inside, staircase_mass(n) * np.exp2(n), 0.0)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        n = np.maximum(_staircase_index(x), 1.0)
        val = 1.0 / np.log2(n + 2.0) + staircase_mass(n) * np.exp2(n) * (x - np.exp2(-n))
        return np.where(x <= 0, 0.0, np.where(x >= 1, 1.0, val))

    def quantile(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(over="ignore", divide="ignore"):
            # smallest n with 1/log2(n+2) <= u
            n = np.maximum(np.ceil(np.exp2(1.0 / np.where(u > 0, u, 1e-300)) - 2.0), 1.0)
        n = np.where(np.isfinite(n), n, 1e300)
        lo_mass = 1.0 / np.log2(n + 2.0)
        x = np.exp2(-n) + (u - lo_mass) / (staircase_mass(n) * np.exp2(n))
        return np.clip(np.where(u >= 1, 1.0, x), 0.0, 1.0)

    return D.ContinuousDistribution(pdf=pdf, cdf=cdf, quantile=quantile, support=(0.0, 1.0),
                                    breakpoints=tuple(2.0**-n for n in range(1, 60)), name="staircase",
                                    params={})


def staircase_entropy_partial_sums(K: int) -> np.ndarray:
    """``H`` of the first ``1..K`` piece masses; divergent as ``K`` grows."""
    return partial_entropy_sums(staircase_mass(np.arange(1, K + 1)))


# ---------------------------------------------------------------- cubic example


def cubic_pb(sigma: float) -> float:
    """Mass of the bijective part of ``x**3 - 100 x`` under ``N(0, sigma**2)``."""
    return 2.0 * q_function(20.0 / (math.sqrt(3.0) * sigma))


def cubic_pe(sigma: float) -> float:
    """MAP error probability for the same system."""
    s3 = math.sqrt(3.0) * sigma
    return 2.0 * q_function(10.0 / s3) - 2.0 * q_function(20.0 / s3)


FIGURE_COLUMNS = ("sigma", "numeric_loss", "fano", "fano_type", "feder_merhav_lower", "ordered_ub")


def figure_cubic_row(sigma: float) -> dict:
    if not sigma > 0:
        raise ConfigurationError("sigma must be positive")
    f, d = P.cubic_map(), D.gaussian(0.0, sigma)
    loss = L.loss_via_partition(f, d)
    rec = R.map_result(f, d)
    return {
        "sigma": float(sigma),
        "numeric_loss": loss.loss_bits,
        "fano": rec.classic_fano_bound,
        "fano_type": rec.fano_type_bound,
        "feder_merhav_lower": rec.feder_merhav_lower,
        "ordered_ub": loss.bound_chain.e_log_card,
    }


def figure_cubic(sigma_grid) -> list[dict]:
    """Loss and bounds of the cubic example along a grid of input standard deviations."""
    return [figure_cubic_row(float(s)) for s in sigma_grid]


# -------------------------------------------------------------- other systems


def floor_quantizer_pieces(d, tail_mass: float = D.TAIL_MASS) -> list[dict]:
    lo, hi = d.truncated_support(tail_mass)
    return [{"domain": (float(k), float(k + 1)), "class": "constant"}
            for k in range(math.floor(lo), math.floor(hi) + 1)]


def center_clipper_pieces(c: float) -> list[dict]:
    return [{"domain": (-math.inf, -c), "class": "bijective"},
            {"domain": (-c, c), "class": "constant"},
            {"domain": (c, math.inf), "class": "bijective"}]


def center_clipper(c: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: np.where(np.abs(x) <= c, 0.0, x)


def energy_maps(a: float = 4.0) -> tuple[P.Pbf, P.Pbf]:
    """Two odd maps on ``[-a, a]`` with one bit of loss each but different reconstruction MSE."""
    q1, q2 = a / 4.0, a / 2.0
    aff = P.affine_branch
    g1 = P.Pbf((
        aff((-4 * q1, -3 * q1), 1.0, 2 * q1), aff((-3 * q1, -q1), 1.0, q1), aff((-q1, q1), 1.0, 0.0),
        aff((q1, 3 * q1), 1.0, -q1), aff((3 * q1, 4 * q1), 1.0, -2 * q1),
    ), name="g1")
    g2 = P.Pbf((aff((-2 * q2, -q2), 1.0, q2), aff((-q2, q2), 1.0, 0.0), aff((q2, 2 * q2), 1.0, -q2)), name="g2")
    return g1, g2


def reconstruction_mse(f: P.Pbf, d, reconstructor) -> float:
    """``E[(X - r(g(X)))**2]`` by quadrature over each branch."""
    total = 0.0
    for pos, br in enumerate(f.branches):
        edges = L._x_panels(f, d, pos, D.TAIL_MASS)
        if len(edges) < 2:
            continue

        def integrand(x, br=br):
            return np.asarray(d.pdf(x)) * (x - np.asarray(reconstructor(br.forward(x)))) ** 2

        v, _, _ = L.integrate_panels(integrand, edges)
        total += v
    return total


# -------------------------------------------------------------------- registry


@dataclass(frozen=True)
class Reference:
    value: object
    provenance: str
    tol: float = 1e-9


@dataclass(frozen=True)
class GallerySystem:
    name: str
    description: str
    builder: Callable[[], tuple]
    compute: Callable[..., dict]
    references: dict = field(default_factory=dict)

    def build(self):
        return self.builder()

    def run(self) -> list[dict]:
        system, dist = self.build()
        got = self.compute(system, dist)
        rows = []
        for key, ref in self.references.items():
            val = got.get(key)
            rows.append({"quantity": key, "reference": ref.value, "computed": val,
                         "provenance": ref.provenance, "tol": ref.tol, "ok": _matches(val, ref)})
        return rows


def _matches(val, ref: Reference) -> bool:
    if val is None:
        return False
    if isinstance(ref.value, str) or isinstance(val, str):
        return val == ref.value
    if isinstance(ref.value, bool):
        return val is ref.value
    a, b = float(val), float(ref.value)
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= ref.tol


def _pbf_summary(f, d, with_map=True) -> dict:
    rep = L.loss_via_partition(f, d)
    out = {"loss": rep.loss_bits, "e_log_card": rep.bound_chain.e_log_card,
           "log_e_card": rep.bound_chain.log_e_card, "ess_sup_log_card": rep.bound_chain.ess_sup_log_card,
           "log_K": rep.bound_chain.log_K, "H_W": rep.bound_chain.h_of_w, "P_b": rep.bound_chain.bijective_mass}
    if with_map:
        m = R.map_result(f, d)
        out.update(P_e=m.error_prob, fano_type=m.fano_type_bound, fano_type_e_card=m.extra_bounds["fano_type_e_card"],
                   classic_fano=m.classic_fano_bound)
    return out


def _identity():
    return P.identity_map(), D.gaussian()


def _square():
    return P.square_law(), D.gaussian()


def _cubic(sigma=10.0):
    return P.cubic_map(), D.gaussian(0.0, sigma)


def _compute_cubic(f, d):
    out = _pbf_summary(f, d)
    out["loss_diffent"] = L.loss_via_differential_entropy(f, d).loss_bits
    out["loss_gap"] = abs(out["loss_diffent"] - out["loss"])
    sub = R.suboptimal_reconstructor(f, d)
    out["P_e_hat"] = sub.error_prob
    return out


def _staircase(pieces=40):
    return P.staircase_map(pieces), staircase_input()


def _compute_staircase(f, d):
    m = R.map_result(f, d)
    sub = R.suboptimal_reconstructor(f, d)
    y = np.linspace(0.01, 0.99, 50)
    fy = P.output_pdf(f, d, y)
    return {"P_e": m.error_prob, "P_e_hat": sub.error_prob, "suboptimal_branch": sub.details["branch"],
            "loss": L.loss_via_partition(f, d).loss_bits, "fano_type": m.fano_type_bound,
            "f_Y_max_dev": float(np.max(np.abs(fy / (1.0 - 1.0 / math.log2(f.K + 2)) - 1.0))),
            "tail_mass": 1.0 / math.log2(f.K + 2)}


def _compute_quantizer(_, d):
    probe = L.infinite_loss_probe(floor_quantizer_pieces(d), d)
    spec = RD.DimensionPieceSpec(1, (RD.Piece(1.0, 0, "constant"),))
    return {"infinite_loss": probe.infinite, "rel_loss": RD.rel_loss_structural(spec).rel_loss}


def _clipper_parts(c, d):
    pa = float(d.mass(-c, c))
    spec = RD.DimensionPieceSpec(1, (RD.Piece(pa, 0, "constant"), RD.Piece(1.0 - pa, 1)))
    return pa, spec


def _compute_clipper(c, d):
    pa, spec = _clipper_parts(c, d)
    return {"infinite_loss": L.infinite_loss_probe(center_clipper_pieces(c), d).infinite,
            "rel_loss": RD.rel_loss_structural(spec).rel_loss, "P_A": pa}


def _compute_mixed_clipper(c, d):
    l_mixed = RD.rel_loss_mixed(float(d.ac_weight * d.ac.mass(-c, c)), d.ac_weight).rel_loss
    pe = float(d.ac_weight * d.ac.mass(-c, c))  # reconstruct every 0 as the atom at 0
    b = RD.fano_relative_bound(pe, 1.0, d.ac_weight)
    return {"rel_loss": l_mixed, "fano_relative_bound": b.raw, "P_e": pe}


def _compute_energy(maps, d):
    g1, g2 = maps
    out = {}
    for name, g in (("g1", g1), ("g2", g2)):
        out[f"loss_{name}"] = L.loss_via_partition(g, d).loss_bits
        out[f"mse_{name}"] = reconstruction_mse(g, d, lambda y, g=g: R.map_reconstruct(g, d, y))
    return out


def _compute_projection(spec, _):
    N, M = spec.N, spec.pieces[0].M
    per_coord = [0.0] * M + [1.0] * (N - M)
    return {"rel_loss": RD.rel_loss_structural(spec).rel_loss, "ub_rel_loss": RD.ub_rel_loss(per_coord),
            "ub_rel_transfer": RD.ub_rel_transfer([Fraction(1, N)] * M).raw}


def _compute_acr(args, _):
    a = mc_acr_analysis(*args)
    return {"t_branch": a.t_branch, "t_sum": a.t_sum, "t_lag": a.t_lag, "t_joint_bound": a.t_joint_bound,
            "tight": a.tight, "t_zero_lag": a.t_zero_lag, "t_full": a.t_full}


def _compute_accumulator(args, _):
    N, i, p = args
    target = accumulate(p, i).p
    count = accumulator_preimage_count(N, i, target)
    return {"loss_bound": accumulator_loss_bound(N, i), "preimage_count_ok": math.log2(count) <= accumulator_loss_bound(N, i),
            "uniform_gap_200": accumulate(p, 200).uniform_gap() < 1e-6}


def _cubic_refs(sigma=10.0):
    pb = cubic_pb(sigma)
    return {
        "P_b": Reference(pb, "PUBLISHED: bijective-part formula", 1e-9),
        "P_e": Reference(cubic_pe(sigma), "PUBLISHED: MAP error formula", 1e-6),
        "P_e_hat": Reference(cubic_pe(sigma), "DERIVED: single-branch reconstructor equals MAP here", 1e-6),
        "e_log_card": Reference((1 - pb) * LOG2_3, "PUBLISHED: first bound of the chain", 1e-9),
        "log_e_card": Reference(math.log2(3 - 2 * pb), "PUBLISHED: second bound of the chain", 1e-9),
        "ess_sup_log_card": Reference(LOG2_3, "PUBLISHED: third bound of the chain", 1e-12),
        "loss_gap": Reference(0.0, "DERIVED: two estimators agree", 0.02),
    }


GALLERY: dict[str, GallerySystem] = {}


def _register(s: GallerySystem):
    GALLERY[s.name] = s


_register(GallerySystem(
    "identity", "zero-loss control: g(x) = x with a Gaussian input", _identity,
    lambda f, d: _pbf_summary(f, d),
    {"loss": Reference(0.0, "TRIVIAL", 1e-9), "P_e": Reference(0.0, "TRIVIAL", 1e-9),
     "log_K": Reference(0.0, "TRIVIAL", 0.0)},
))
_register(GallerySystem(
    "square-law", "g(x) = x^2 with a standard Gaussian input", _square,
    lambda f, d: _pbf_summary(f, d),
    {"loss": Reference(1.0, "PUBLISHED: loss of the square-law device", 0.01),
     "P_e": Reference(0.5, "TRIVIAL: two equiprobable preimages", 1e-6),
     "e_log_card": Reference(1.0, "PUBLISHED: every bound holds with equality", 1e-9),
     "log_K": Reference(1.0, "PUBLISHED: every bound holds with equality", 1e-9),
     "fano_type": Reference(1.5, "DERIVED: literal evaluation of the Fano-type bound", 1e-6),
     "fano_type_e_card": Reference(2.0, "PUBLISHED: quoted value, obtained with log E[card]", 1e-6)},
))
_register(GallerySystem(
    "cubic", "g(x) = x^3 - 100 x with a Gaussian input of standard deviation 10", _cubic, _compute_cubic,
    _cubic_refs(),
))
_register(GallerySystem(
    "staircase", "g(x) = 2^n (x - 2^-n) on (2^-n, 2^(1-n)], truncated to 40 pieces", _staircase, _compute_staircase,
    {"P_e": Reference(1.0 / LOG2_3, "PUBLISHED: MAP error equals the single-branch error", 1e-6),
     "P_e_hat": Reference(1.0 / LOG2_3, "PUBLISHED: single-branch error", 1e-6),
     "suboptimal_branch": Reference(1, "PUBLISHED: the first piece carries the most mass", 0.0),
     "loss": Reference(math.inf, "PUBLISHED: infinite loss", 0.0),
     "fano_type": Reference(math.inf, "PUBLISHED: every Fano-type bound is infinite", 0.0),
     "f_Y_max_dev": Reference(0.0, "PUBLISHED: output uniform on (0, 1]", 1e-9)},
))
_register(GallerySystem(
    "quantizer", "g(x) = floor(x) with a Gaussian input", lambda: (None, D.gaussian()), _compute_quantizer,
    {"infinite_loss": Reference(True, "PUBLISHED: quantizer loss is infinite"),
     "rel_loss": Reference(1.0, "PUBLISHED: the quantizer destroys all information", 0.0)},
))
_register(GallerySystem(
    "center-clipper", "g(x) = x for |x| > 1, 0 otherwise, Gaussian input", lambda: (1.0, D.gaussian()),
    _compute_clipper,
    {"infinite_loss": Reference(True, "PUBLISHED: clipper loss is infinite"),
     "rel_loss": Reference(float(D.gaussian().mass(-1.0, 1.0)), "PUBLISHED: mass of the clipping region", 1e-12)},
))
_register(GallerySystem(
    "center-clipper-mixed", "center clipper, input 0.6 continuous (half inside [-c, c]) plus an atom of 0.4 at 0",
    lambda: (1.0, D.mixed(0.6, D.piecewise_uniform([-2.0, -1.0, 1.0, 2.0], [0.25, 0.5, 0.25]), [[0.0, 0.4]])),
    _compute_mixed_clipper,
    {"rel_loss": Reference(0.5, "PUBLISHED: mixed-input rule", 0.0),
     "fano_relative_bound": Reference(0.5, "PUBLISHED: bound holds with equality", 1e-15),
     "P_e": Reference(0.3, "PUBLISHED: error of the fixed reconstructor", 1e-15)},
))
_register(GallerySystem(
    "rectifier", "g(x) = |x| with a standard Gaussian input", lambda: (P.rectifier(), D.gaussian()),
    lambda f, d: _pbf_summary(f, d),
    {"loss": Reference(1.0, "DERIVED: even-symmetric input, two preimages", 0.01)},
))
_register(GallerySystem(
    "energy-information", "two maps with one bit of loss and different MSE, uniform input on [-4, 4]",
    lambda: (energy_maps(4.0), D.uniform(-4.0, 4.0)), _compute_energy,
    {"loss_g1": Reference(1.0, "PUBLISHED: both maps lose one bit", 1e-6),
     "loss_g2": Reference(1.0, "PUBLISHED: both maps lose one bit", 1e-6),
     "mse_g1": Reference(16.0 / 32.0, "DERIVED: error a/4 with probability 1/2", 1e-9),
     "mse_g2": Reference(16.0 / 8.0, "DERIVED: error a/2 with probability 1/2", 1e-9)},
))
_register(GallerySystem(
    "projection", "keep 1 of 4 coordinates of an absolutely continuous vector",
    lambda: (RD.DimensionPieceSpec(4, (RD.Piece(1.0, 1),)), None), _compute_projection,
    {"rel_loss": Reference(0.75, "PUBLISHED: (N - M) / N", 0.0),
     "ub_rel_loss": Reference(0.75, "PUBLISHED: bound on relative loss is tight", 0.0),
     "ub_rel_transfer": Reference(Fraction(1, 4), "PUBLISHED: bound on relative transfer is tight", 0.0)},
))
_register(GallerySystem(
    "adder", "Y = X1 + X2 for a scalar pair with a joint density", lambda: ((2, 1), None),
    lambda dims, _: {"rel_loss": RD.rel_loss_from_dimensions(*dims).rel_loss},
    {"rel_loss": Reference(0.5, "PUBLISHED: adding two variables loses half", 0.0)},
))
_register(GallerySystem(
    "mc-acr", "multi-channel autocorrelation receiver, N = 8, lags 1, 2, 3", lambda: ((8, (1, 2, 3)), None),
    _compute_acr,
    {"t_branch": Reference(Fraction(15, 16), "PUBLISHED: branch transfer", 0.0),
     "t_sum": Reference(Fraction(2, 15), "PUBLISHED: summation transfer", 0.0),
     "t_lag": Reference(Fraction(1, 8), "PUBLISHED: per-lag transfer", 0.0),
     "t_joint_bound": Reference(Fraction(3, 8), "PUBLISHED: joint bound", 0.0),
     "tight": Reference(True, "PUBLISHED: distinct lags below N/2"),
     "t_zero_lag": Reference(Fraction(1, 16), "PUBLISHED: zero lag", 0.0),
     "t_full": Reference(Fraction(1, 2), "PUBLISHED: full autocorrelation", 0.0)},
))
_register(GallerySystem(
    "accumulator", "modulo-4 accumulator after 4 steps", lambda: ((4, 4, np.array([0.4, 0.3, 0.2, 0.1])), None),
    _compute_accumulator,
    {"loss_bound": Reference(3.0, "DERIVED: (N/2 - 1) log2 i + 1", 1e-12),
     "preimage_count_ok": Reference(True, "DERIVED: enumeration vs bound"),
     "uniform_gap_200": Reference(True, "PUBLISHED: convergence to uniform")},
))


def gallery(name: str) -> GallerySystem:
    try:
        return GALLERY[name]
    except KeyError:
        raise ConfigurationError(f"unknown gallery system {name!r}; available: {', '.join(sorted(GALLERY))}") from None


# ------------------------------------------------------------ comparison table

TABLE_ONE_REFERENCE = {
    "quantizer": ("c", "inf", "0", "1"),
    "rectifier": ("inf", "c", "1", "0"),
    "center-clipper": ("inf", "inf", "c", "1-c"),
    "staircase": ("inf", "inf", "1", "0"),
    "mc-acr": ("inf", "inf", "c", "1-c"),
    "accumulator": ("inf", "c", "1", "0"),
}


def _classify_transfer(t) -> tuple[str, str]:
    if t == 0:
        return "0", "1"
    if t == 1:
        return "1", "0"
    return "c", "1-c"


def _classify_measure(v) -> str:
    return "inf" if (v is None or math.isinf(float(v))) else "c"


def table_one() -> dict[str, dict]:
    """``(I, L, t, l)`` classification of each listed system, from computed values.

    Mutual information between input and output is infinite exactly when the
    output keeps a positive information dimension (``t > 0`` for an input of
    positive dimension); otherwise it equals the finite output entropy.
    """
    rows = {}

    def row(name, mi, loss, t, values):
        ts, ls = _classify_transfer(t)
        rows[name] = {"pattern": (_classify_measure(mi), _classify_measure(loss), ts, ls), "values": values}

    # quantizer on a Gaussian input
    d = D.gaussian()
    lo, hi = d.truncated_support()
    ks = np.arange(math.floor(lo), math.floor(hi) + 1)
    pmf = np.asarray(d.mass(ks, ks + 1.0), dtype=float)
    h_y = discrete_entropy(pmf / pmf.sum())
    probe = L.infinite_loss_probe(floor_quantizer_pieces(d), d)
    t = RD.rel_loss_structural(RD.DimensionPieceSpec(1, (RD.Piece(1.0, 0, "constant"),))).rel_transfer
    row("quantizer", h_y, math.inf if probe.infinite else 0.0, t, {"H_Y": h_y, "rel_transfer": t})

    # rectifier
    f = P.rectifier()
    rep = L.loss_via_partition(f, d)
    t = RD.rel_loss_structural(RD.DimensionPieceSpec(1, (RD.Piece(1.0, 1),))).rel_transfer
    row("rectifier", math.inf if t > 0 else 0.0, rep.loss_bits, t, {"loss": rep.loss_bits, "rel_transfer": t})

    # center clipper
    pa, spec = _clipper_parts(1.0, d)
    t = RD.rel_loss_structural(spec).rel_transfer
    probe = L.infinite_loss_probe(center_clipper_pieces(1.0), d)
    row("center-clipper", math.inf if t > 0 else 0.0, math.inf if probe.infinite else 0.0, t, {"rel_transfer": t})

    # staircase: countable preimages, divergent partition entropy
    f, d_s = _staircase()
    rep = L.loss_via_partition(f, d_s)
    t = RD.rel_loss_structural(RD.DimensionPieceSpec(1, (RD.Piece(1.0, 1),))).rel_transfer
    row("staircase", math.inf if t > 0 else 0.0, rep.loss_bits, t,
        {"truncated_loss": rep.details.get("truncated_value"), "rel_transfer": t})

    # MC-AcR: positive relative loss on an input of infinite entropy
    a = mc_acr_analysis(8, (1, 2, 3))
    t = a.t_joint_bound
    verdict = RD.positive_rel_implies_infinite_abs(1 - t, True)
    row("mc-acr", math.inf if t > 0 else 0.0, math.inf if verdict == "infinite" else None, t,
        {"rel_transfer": t})

    # accumulator: finitely many preimages, finite loss bound
    bound = accumulator_loss_bound(4, 4)
    t = 1  # finitely many preimage pmfs: countable fibres
    row("accumulator", math.inf, bound, t, {"loss_bound": bound})
    return rows
