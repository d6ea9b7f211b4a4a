"""Input reconstruction from the output of a piecewise bijective map.

Includes the MAP and the single-branch (suboptimal) reconstructors, their
error probabilities, and the Fano-type relations between loss and error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import pbf as _pbf
from .distributions import TAIL_MASS, as_generator
from .entropy import binary_entropy
from .errors import ConfigurationError, DomainError, VariantError
from .loss import _check, _dedupe, _json_float, _y_panels, bound_chain, integrate_panels


def _xlog2x(p: float) -> float:
    return 0.0 if p <= 0 else p * math.log2(p)


@dataclass(frozen=True)
class ReconResult:
    kind: str
    error_prob: float
    per_y_error: Callable[[np.ndarray], np.ndarray] | None = None
    reconstruct: Callable[[np.ndarray], np.ndarray] | None = None
    fano_type_bound: float = math.nan
    classic_fano_bound: float = math.nan
    feder_merhav_lower: float = math.nan
    suboptimal_bound: float = math.nan
    extra_bounds: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        keys = ("error_prob", "fano_type_bound", "classic_fano_bound", "feder_merhav_lower", "suboptimal_bound")
        out = {"kind": self.kind, **{k: _json_float(getattr(self, k)) for k in keys}}
        out["extra_bounds"] = {k: _json_float(v) for k, v in self.extra_bounds.items()}
        out["details"] = {k: _json_float(v) for k, v in self.details.items()}
        return out


# ------------------------------------------------------------- reconstructors


def map_branch(f, d, y) -> np.ndarray:
    """0-based position of the MAP branch for each ``y`` (-1 for an empty preimage)."""
    y = np.asarray(y, dtype=float)
    q = f.branch_densities(d, y)
    _, valid = f.roots(y)
    score = np.where(valid, q, -1.0)
    k = np.argmax(score, axis=0)  # first maximum: ties go to the lower index
    return np.where(valid.any(axis=0), k, -1)


def map_reconstruct(f, d, y):
    """The preimage of ``y`` with the largest ``f_X(x_i) / |g'(x_i)|``."""
    ya = np.asarray(y, dtype=float)
    k = map_branch(f, d, ya)
    if np.any(k < 0):
        raise DomainError(f"y={y!r} has an empty preimage")
    xs, _ = f.roots(ya)
    out = np.take_along_axis(xs, k[None, ...], axis=0)[0]
    return float(out) if out.ndim == 0 else out


def map_error_given_y(f, d, y) -> np.ndarray:
    """``1 - max_i p(i|y)``."""
    p = _pbf._posteriors(f, d, np.asarray(y, dtype=float))
    return np.where(p.sum(axis=0) > 0, 1.0 - p.max(axis=0), 0.0)


def map_error_probability(f, d, *, tail_mass: float = TAIL_MASS, tol: float = 1e-6) -> float:
    """``P_e = 1 - ∫ max_i q_i(y) dy``.

    Cells with a single active branch contribute their exact mass; the rest
    are integrated with tanh-sinh, which copes with the inverse square root
    peaks where two branches meet.
    """
    if getattr(d, "variant", None) != "ac":
        raise VariantError("MAP error probability needs an absolutely continuous input")
    cells = _pbf.image_cells(f)
    masses = _pbf.cell_masses(f, d, cells)
    panels = _y_panels(f, d, tail_mass)
    ylo, yhi = panels[0], panels[-1]
    correct = 0.0
    for cell, m in zip(cells, masses):
        if cell.card == 1:
            correct += m
            continue
        lo, hi = max(cell.lo, ylo), min(cell.hi, yhi)
        if not lo < hi:
            continue
        # density jumps (images of input breakpoints) become panel edges
        edges = _dedupe([lo, *(e for e in panels if lo < e < hi), hi])
        if len(edges) < 2:
            continue
        edges[-1] = hi

        def integrand(y):
            q = f.branch_densities(d, y)
            q = np.where(np.isfinite(q), q, 0.0)
            return q.max(axis=0)

        v, e, ok = integrate_panels(integrand, edges)
        _check(v, e, ok, tol, "MAP error probability")
        correct += v
    return float(min(max(1.0 - correct, 0.0), 1.0))


def _restricted_mass(d, intervals, domain) -> float:
    a, b = domain
    return sum(float(d.mass(max(a, lo), min(b, hi))) for lo, hi in intervals if max(a, lo) < min(b, hi))


def suboptimal_branch(f, d) -> tuple[int, float, float]:
    """``(k, P_X(X_k ∪ X_b), P_b)`` with ``k`` 0-based, maximising the union mass."""
    xb, pb = _pbf.bijective_part(f, d)
    scores = [float(d.mass(*br.domain)) + pb - _restricted_mass(d, xb, br.domain) for br in f.branches]
    k = int(np.argmax(scores))
    return k, scores[k], pb


def suboptimal_reconstructor(f, d) -> ReconResult:
    """Always invert branch ``k`` when possible, otherwise the unique preimage."""
    if getattr(d, "variant", None) != "ac":
        raise VariantError("reconstruction needs an absolutely continuous input")
    k, union_mass, pb = suboptimal_branch(f, d)
    pe_hat = min(max(1.0 - union_mass, 0.0), 1.0)
    chain = bound_chain(f, d)
    kbar = chain.ess_sup_card
    if f.infinite_family or math.isinf(kbar):
        bound = ess = logk = math.inf
    else:
        bound = 1.0 - pb + (pe_hat * math.log2(kbar - 1) if pe_hat > 0 else 0.0)
        ess = binary_entropy(pe_hat) + pe_hat * math.log2(kbar)
        logk = binary_entropy(pe_hat) + pe_hat * math.log2(f.K)
    br = f.branches[k]

    def rec(y):
        y = np.asarray(y, dtype=float)
        xs, valid = f.roots(y)
        first = np.argmax(valid, axis=0)
        alt = np.take_along_axis(xs, first[None, ...], axis=0)[0]
        return np.where(br.covers(y), br.invert(y), alt)

    def per_y(y):
        p = _pbf._posteriors(f, d, np.asarray(y, dtype=float))
        return np.where(br.covers(y), 1.0 - p[k], np.where(p.sum(axis=0) > 0, 1.0 - p.max(axis=0), 0.0))

    return ReconResult(
        kind="suboptimal",
        error_prob=pe_hat,
        per_y_error=per_y,
        reconstruct=rec,
        suboptimal_bound=bound,
        extra_bounds={"h2_plus_log_ess_sup": ess, "h2_plus_log_K": logk},
        details={"branch": br.index, "P_b": pb, "ess_sup_card": kbar},
    )


def map_result(f, d, *, tail_mass: float = TAIL_MASS) -> ReconResult:
    """MAP reconstructor with every bound that uses its error probability."""
    chain = bound_chain(f, d)
    pe = map_error_probability(f, d, tail_mass=tail_mass)
    pb = chain.bijective_mass
    if f.infinite_family:
        fano = classic = ecard = math.inf
    else:
        fano = fano_type_bound(pe, pb, chain.expected_card)
        classic = classic_fano_bound(pe, max(chain.ess_sup_card, 2))
        ecard = fano_type_bound_ecard(pe, pb, chain.expected_card)
    return ReconResult(
        kind="MAP",
        error_prob=pe,
        per_y_error=lambda y: map_error_given_y(f, d, y),
        reconstruct=lambda y: map_reconstruct(f, d, y),
        fano_type_bound=fano,
        classic_fano_bound=classic,
        feder_merhav_lower=feder_merhav_phi(pe) if pe < 1 else math.inf,
        extra_bounds={"fano_type_e_card": ecard},
        details={"P_b": pb, "expected_card": chain.expected_card, "ess_sup_card": chain.ess_sup_card},
    )


# ---------------------------------------------------------------- inequalities


def fano_type_bound(pe: float, pb: float, e_card: float) -> float:
    """``min{1-P_b, H2(P_e)} - P_e log P_e + P_e log(E[card] - 1)``."""
    if not 0 <= pe <= 1 or not 0 <= pb <= 1:
        raise DomainError("P_e and P_b must lie in [0, 1]")
    if e_card < 1:
        raise DomainError(f"expected cardinality {e_card!r} is below 1")
    if pe == 0:
        return 0.0
    if math.isinf(e_card):
        return math.inf
    if e_card == 1:
        raise DomainError("P_e > 0 is impossible when every output has a single preimage")
    return min(1.0 - pb, binary_entropy(pe)) - _xlog2x(pe) + pe * math.log2(e_card - 1.0)


def fano_type_bound_ecard(pe: float, pb: float, e_card: float) -> float:
    """As :func:`fano_type_bound` with ``log E[card]`` in the last term."""
    if not 0 <= pe <= 1 or not 0 <= pb <= 1:
        raise DomainError("P_e and P_b must lie in [0, 1]")
    if e_card < 1:
        raise DomainError(f"expected cardinality {e_card!r} is below 1")
    if pe == 0:
        return 0.0
    if math.isinf(e_card):
        return math.inf
    return min(1.0 - pb, binary_entropy(pe)) - _xlog2x(pe) + pe * math.log2(e_card)


def classic_fano_bound(pe: float, cardinality_cap: float) -> float:
    """``H2(P_e) + P_e log(cap - 1)``."""
    if not 0 <= pe <= 1:
        raise DomainError("P_e must lie in [0, 1]")
    if cardinality_cap < 2:
        raise DomainError("the cardinality cap must be at least 2")
    if pe == 0:
        return 0.0
    if math.isinf(cardinality_cap):
        return math.inf
    return binary_entropy(pe) + pe * math.log2(cardinality_cap - 1.0)


def feder_merhav_phi(x: float) -> float:
    """Piecewise linear lower bound on conditional entropy given the MAP error.

    On ``[(i-1)/i, i/(i+1)]`` it rises linearly from ``log2 i`` to ``log2(i+1)``.
    """
    if not 0 <= x < 1:
        raise DomainError("phi is defined on [0, 1)")
    i = math.floor(1.0 / (1.0 - x))
    return (x - (i - 1) / i) * (i + 1) * i * math.log2(1.0 + 1.0 / i) + math.log2(i)


# ---------------------------------------------------------------- Monte Carlo


def empirical_error_probability(f, d, reconstructor, samples: int = 100_000, seed=0, *,
                                rtol: float = 1e-8) -> tuple[float, float]:
    """Fraction of draws with ``r(g(X)) != X`` and its standard error."""
    if samples < 10_000:
        raise ConfigurationError("use at least 10^4 samples")
    rec = reconstructor.reconstruct if isinstance(reconstructor, ReconResult) else reconstructor
    x = d.sample(samples, as_generator(seed))
    xr = np.asarray(rec(f(x)), dtype=float)
    wrong = ~np.isclose(xr, x, rtol=rtol, atol=rtol)
    p = float(wrong.mean())
    return p, math.sqrt(p * (1.0 - p) / samples)
