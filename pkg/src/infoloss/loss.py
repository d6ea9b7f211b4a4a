"""Absolute information loss of piecewise bijective maps."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import tanhsinh

from . import pbf as _pbf
from .distributions import TAIL_MASS, as_generator
from .entropy import differential_entropy, discrete_entropy
from .errors import ConfigurationError, ToleranceNotMetError, UnsupportedClassError, VariantError

LOG2E = 1.0 / math.log(2.0)
TINY = 1e-300


@dataclass(frozen=True)
class BoundChain:
    """Upper bounds on the loss in increasing order, plus ``H(W)``."""

    e_log_card: float
    log_e_card: float
    ess_sup_log_card: float
    log_K: float
    h_of_w: float
    expected_card: float = 1.0
    ess_sup_card: float = 1.0
    bijective_mass: float = 1.0

    def ordered(self) -> bool:
        return self.e_log_card <= self.log_e_card <= self.ess_sup_log_card <= self.log_K

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.e_log_card, self.log_e_card, self.ess_sup_log_card, self.log_K)


@dataclass(frozen=True)
class LossReport:
    loss_bits: float
    method: str
    numeric_error: float
    bound_chain: BoundChain | None = None
    infinite: bool = False
    reason: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "loss_bits": _json_float(self.loss_bits),
            "method": self.method,
            "numeric_error": _json_float(self.numeric_error),
            "flags": {"infinite": self.infinite, "reason": self.reason},
            "details": {k: _json_float(v) for k, v in self.details.items()},
        }
        if self.bound_chain is not None:
            out["bound_chain"] = {k: _json_float(v) for k, v in asdict(self.bound_chain).items()}
        return out


def _json_float(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
    return v


# ---------------------------------------------------------------- quadrature


def integrate_panels(fun, edges, *, rtol: float = 1e-10, atol: float = 1e-13) -> tuple[float, float, bool]:
    """Tanh-sinh quadrature of a vectorised ``fun`` over consecutive panels.

    End point singularities of integrable type are fine since the rule never
    evaluates the end points.  Returns ``(value, abserr, converged)``.
    """
    e = np.asarray(sorted(edges), dtype=float)
    a, b = e[:-1], e[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    if a.size == 0:
        return 0.0, 0.0, True
    with np.errstate(all="ignore"):
        res = tanhsinh(fun, a, b, rtol=rtol, atol=atol, maxlevel=12)
    val = float(np.sum(res.integral))
    err = float(np.sum(np.abs(res.error)))
    ok = bool(np.all(res.status == 0))
    return val, err, ok


def _check(val, err, ok, tol, what):
    if not math.isfinite(val) or (not ok and err > tol):
        raise ToleranceNotMetError(f"{what}: quadrature did not converge (estimate {val!r}, error {err!r})",
                                   val, err)


def _require_ac(d):
    if getattr(d, "variant", None) != "ac":
        raise VariantError("this estimator needs an absolutely continuous input")


def _x_panels(f, d, pos: int, tail_mass: float) -> list[float]:
    """Panel edges inside branch ``pos`` so the active set and the density are smooth per panel."""
    br = f.branches[pos]
    xlo, xhi = d.truncated_support(tail_mass)
    a, b = max(br.domain[0], xlo), min(br.domain[1], xhi)
    if not a < b:
        return []
    pts = {a, b}
    lo, hi = br.image
    for yv in {v for other in f.branches for v in other.image}:
        if lo < yv < hi and math.isfinite(yv):
            x = float(br.invert(yv))
            if a < x < b:
                pts.add(x)
    pts.update(p for p in getattr(d, "breakpoints", ()) if a < p < b)
    return _dedupe(sorted(pts))


def _y_panels(f, d, tail_mass: float) -> list[float]:
    xlo, xhi = d.truncated_support(tail_mass)
    edges = set()
    for br in f.branches:
        a, b = max(br.domain[0], xlo), min(br.domain[1], xhi)
        if not a < b:
            continue
        for x in (a, b, *(p for p in getattr(d, "breakpoints", ()) if a < p < b)):
            edges.add(float(br.forward(np.float64(x))))
        edges.update(v for v in br.image if math.isfinite(v))
    return _dedupe(sorted(edges))


def _dedupe(edges: list[float], rel: float = 1e-12) -> list[float]:
    out: list[float] = []
    for e in edges:
        if out and abs(e - out[-1]) <= rel * (1.0 + abs(e)):
            continue
        out.append(e)
    return out


def _posterior_entropy(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return t.sum(axis=0)


# -------------------------------------------------------------- bound chain


def bound_chain(f, d) -> BoundChain:
    """Expected log cardinality, log expected cardinality, ess-sup, ``log K`` and ``H(W)``."""
    _require_ac(d)
    bij = _pbf.bijective_part(f, d)[1]
    if f.infinite_family:
        inf = math.inf
        return BoundChain(inf, inf, inf, inf, inf, inf, inf, bij)
    cells = _pbf.image_cells(f)
    m = _pbf.cell_masses(f, d, cells)
    card = np.array([c.card for c in cells], dtype=float)
    total = m.sum()
    w = m / total if total > 0 else m
    e_log = float(np.sum(w * np.log2(card)))
    e_card = float(np.sum(w * card))
    pos = card[m > 0]
    sup = float(pos.max()) if pos.size else 1.0
    bm = _pbf.branch_masses(f, d)
    hw = discrete_entropy(bm / bm.sum())
    # exact arithmetic would give these inequalities; guard against last-bit rounding
    log_e = max(math.log2(e_card), e_log)
    return BoundChain(e_log, log_e, max(math.log2(sup), log_e), max(math.log2(f.K), math.log2(sup)), hw,
                      e_card, sup, bij)


# ----------------------------------------------------------------- estimators


def _infinite_report(f, d, method, value, err):
    return LossReport(math.inf, method, err, bound_chain(f, d), True,
                      "countably infinite branch family; the truncated value is only a lower bound",
                      {"truncated_value": value, "truncation_pieces": f.K})


def loss_via_partition(f, d, *, tail_mass: float = TAIL_MASS, tol: float = 1e-4) -> LossReport:
    """``H(W|Y)`` by quadrature, written as an input-space integral per branch."""
    _require_ac(d)
    total, err = 0.0, 0.0
    for pos, br in enumerate(f.branches):
        edges = _x_panels(f, d, pos, tail_mass)
        if len(edges) < 2:
            continue

        def integrand(x, br=br):
            fx = np.asarray(d.pdf(x), dtype=float)
            h = _posterior_entropy(_pbf._posteriors(f, d, br.forward(x)))
            return np.where(fx > TINY, fx * h, 0.0)

        v, e, ok = integrate_panels(integrand, edges)
        _check(v, e, ok, tol, "partition loss")
        total += v
        err += e
    if f.infinite_family:
        return _infinite_report(f, d, "partition", total, err)
    return LossReport(total, "partition", err + tail_mass * math.log2(max(f.K, 2)), bound_chain(f, d))


def expected_log_derivative(f, d, *, tail_mass: float = TAIL_MASS, tol: float = 1e-4) -> tuple[float, float]:
    """``E[log2 |g'(X)|]`` and its quadrature error."""
    total, err = 0.0, 0.0
    for pos, br in enumerate(f.branches):
        edges = _x_panels(f, d, pos, tail_mass)
        if len(edges) < 2:
            continue

        def integrand(x, br=br):
            fx = np.asarray(d.pdf(x), dtype=float)
            with np.errstate(divide="ignore"):
                lg = np.log2(np.abs(br.derivative(x)))
            return np.where(fx > TINY, fx * lg, 0.0)

        v, e, ok = integrate_panels(integrand, edges)
        _check(v, e, ok, tol, "E log|g'|")
        total += v
        err += e
    return total, err


def output_entropy(f, d, *, tail_mass: float = TAIL_MASS, tol: float = 1e-4) -> tuple[float, float]:
    """``h(Y)`` by quadrature over the output line, split at image end points."""

    def integrand(y):
        fy = f.branch_densities(d, y).sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            good = (fy > TINY) & np.isfinite(fy)
            return np.where(good, -fy * np.log2(np.where(good, fy, 1.0)), 0.0)

    v, e, ok = integrate_panels(integrand, _y_panels(f, d, tail_mass))
    _check(v, e, ok, tol, "h(Y)")
    return v, e


def loss_via_differential_entropy(f, d, *, tail_mass: float = TAIL_MASS, tol: float = 1e-4) -> LossReport:
    """``h(X) - h(Y) + E[log2|g'(X)|]``, each term integrated on its own."""
    _require_ac(d)
    hx, ex = differential_entropy(d, tail_mass=tail_mass, return_error=True)
    try:
        hy, ey = output_entropy(f, d, tail_mass=tail_mass, tol=tol)
        eg, eg_err = expected_log_derivative(f, d, tail_mass=tail_mass, tol=tol)
    except ToleranceNotMetError as exc:
        return LossReport(math.nan, "diffent", math.inf, None, True,
                          f"infinite or undefined: {exc}", {})
    if not (math.isfinite(hy) and math.isfinite(eg)):
        return LossReport(math.nan, "diffent", math.inf, None, True,
                          "E[log|g'(X)|] or h(Y) diverges", {"h_X": hx, "h_Y": hy, "E_log_deriv": eg})
    val = hx - hy + eg
    details = {"h_X": hx, "h_Y": hy, "E_log_deriv": eg}
    err = ex + ey + eg_err
    if f.infinite_family:
        return _infinite_report(f, d, "diffent", val, err)
    return LossReport(val, "diffent", err, bound_chain(f, d), details=details)


def _batches(samples: int, batch: int):
    full, rest = divmod(samples, batch)
    return [batch] * full + ([rest] if rest else [])


def loss_monte_carlo(f, d, samples: int = 100_000, seed=0, *, batch: int = 250_000) -> LossReport:
    """Sample mean of ``H(W | Y = g(X_j))``.

    Batches use seeds spawned from one :class:`numpy.random.SeedSequence`,
    so the result depends only on ``seed``, ``samples`` and ``batch``.
    """
    _require_ac(d)
    if samples < 10_000:
        raise ConfigurationError("Monte Carlo loss needs at least 10^4 samples")
    sizes = _batches(samples, batch)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    s1 = s2 = 0.0
    for n, ss in zip(sizes, seqs):
        x = d.sample(n, as_generator(ss))
        h = _posterior_entropy(_pbf._posteriors(f, d, f(x)))
        s1 += float(h.sum())
        s2 += float(np.square(h).sum())
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    stderr = math.sqrt(var / samples)
    if f.infinite_family:
        return _infinite_report(f, d, "mc", mean, stderr)
    return LossReport(mean, "mc", stderr, bound_chain(f, d), details={"samples": samples, "stderr": stderr})


ESTIMATORS = {
    "partition": loss_via_partition,
    "diffent": loss_via_differential_entropy,
    "mc": loss_monte_carlo,
}


# --------------------------------------------------------- further checks


def equality_condition_check(f, d, probes: int = 100, seed=0, *, tol: float = 1e-6) -> tuple[bool, float]:
    """Check whether the density ratio sum equals the preimage count at random inputs.

    At each probe ``x`` the sum over preimages ``x_k`` of ``g(x)`` of
    ``f_X(x_k) |g'(x)| / (|g'(x_k)| f_X(x))`` is compared with their number.
    Equality almost surely is the case where every bound in the chain is tight.
    """
    _require_ac(d)
    if probes < 100:
        raise ConfigurationError("use at least 100 probes")
    x = d.sample(probes, as_generator(seed))
    y = f(x)
    q = f.branch_densities(d, y)
    _, valid = f.roots(y)
    own = f.owner(x)
    qx = np.asarray(d.pdf(x), dtype=float) / np.abs(f.derivative(x))
    lhs = q.sum(axis=0) / qx
    card = valid.sum(axis=0)
    ok = own >= 0
    dev = float(np.max(np.abs(lhs[ok] - card[ok]))) if np.any(ok) else 0.0
    return dev <= tol, dev


def cascade_loss(f, h, d, *, estimator=loss_via_partition) -> tuple[float, float]:
    """``(L(X->Y) + L(Y->Z), L(X->Z))`` for ``Y = f(X)`` and ``Z = h(Y)``."""
    first = estimator(f, d).loss_bits
    second = estimator(h, _pbf.pushforward(f, d)).loss_bits
    direct = estimator(_pbf.compose(f, h), d).loss_bits
    return first + second, direct


# ---------------------------------------------------- declarative infinite probe

PIECE_CLASSES = ("bijective", "constant", "submersion")


@dataclass(frozen=True)
class ProbeResult:
    infinite: bool | None
    reason: str

    def to_dict(self) -> dict:
        return {"infinite": self.infinite, "reason": self.reason}


def infinite_loss_probe(pieces, d) -> ProbeResult:
    """Classify the loss from declared piece classes.

    ``pieces`` is a sequence of mappings with ``domain`` (a pair) and
    ``class`` in :data:`PIECE_CLASSES`; ``submersion`` marks a piece with
    uncountable fibres.  A piece may carry ``mass`` directly instead of a
    domain.  Unknown classes give an undetermined result.
    """
    variant = getattr(d, "variant", None)
    for k, piece in enumerate(pieces):
        cls = piece.get("class")
        if cls not in PIECE_CLASSES:
            return ProbeResult(None, f"piece {k}: class {cls!r} is not one of {PIECE_CLASSES}")
    if variant == "discrete":
        return ProbeResult(False, "discrete input: the loss is bounded by H(X)")
    for k, piece in enumerate(pieces):
        cls = piece["class"]
        if cls == "bijective":
            continue
        if "mass" in piece:
            ac = float(piece["mass"])
        else:
            a, b = piece["domain"]
            ac = float(d.ac_mass(float(a), float(b)))
        if ac > 0:
            what = "constant on a set" if cls == "constant" else "uncountable fibres on a set"
            return ProbeResult(True, f"piece {k} is {what} of positive continuous mass {ac:.6g}")
    return ProbeResult(False, "all pieces with positive continuous mass are bijective")


def piece_classes_of(f) -> list[dict]:
    """Declarative description of a Pbf: every branch bijective."""
    return [{"domain": br.domain, "class": "bijective"} for br in f.branches]


def check_piece_class(cls: str):
    if cls not in PIECE_CLASSES:
        raise UnsupportedClassError(f"piece class {cls!r} is not supported")
