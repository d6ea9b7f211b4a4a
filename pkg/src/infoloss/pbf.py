"""Scalar piecewise bijective functions.

A :class:`Pbf` is an ordered tuple of :class:`Branch` objects, each strictly
monotone on a closed interval.  Branch indices are 1-based and follow the
order in which branches are given; a point on a shared boundary belongs to
the lower-indexed branch.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize
from scipy.optimize import elementwise

from .distributions import TAIL_MASS, ContinuousDistribution, as_generator
from .errors import (
    CompositionDomainError,
    ConditioningOnNullError,
    ConfigurationError,
    DomainError,
    NumericError,
    SingularDerivativeError,
)

#: Derivatives below this magnitude are treated as singular in public density calls.
SINGULAR_DERIVATIVE = 1e-12


def _interior_point(a: float, b: float) -> float:
    if math.isinf(a) and math.isinf(b):
        return 0.0
    if math.isinf(a):
        return b - 1.0
    if math.isinf(b):
        return a + 1.0
    return 0.5 * (a + b)


@dataclass(frozen=True, eq=False)
class Branch:
    """One monotone piece ``forward: [a, b] -> image``.

    ``inverse`` is optional; without it the branch is inverted with a
    vectorised bracketing root finder.  ``image`` and ``increasing`` are
    derived from the end points when not supplied.
    """

    domain: tuple[float, float]
    forward: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray] | None = None
    index: int = 0
    name: str = ""
    image: tuple[float, float] | None = None
    increasing: bool | None = None

    def __post_init__(self):
        a, b = (float(v) for v in self.domain)
        if not a < b:
            raise DomainError(f"branch domain {self.domain} has empty interior")
        object.__setattr__(self, "domain", (a, b))
        if self.increasing is None:
            d = float(self.derivative(np.float64(_interior_point(a, b))))
            if d == 0 or not math.isfinite(d):
                raise DomainError(f"branch {self.name or self.index}: derivative vanishes at an interior probe")
            object.__setattr__(self, "increasing", d > 0)
        if self.image is None:
            ends = [self._end_value(a, lower=True), self._end_value(b, lower=False)]
            object.__setattr__(self, "image", (min(ends), max(ends)))

    def _end_value(self, x: float, lower: bool) -> float:
        with np.errstate(all="ignore"):
            v = float(self.forward(np.float64(x)))
        if math.isnan(v):
            # e.g. inf - inf at an infinite end: the direction decides
            v = -math.inf if (lower == self.increasing) else math.inf
        return v

    def with_index(self, index: int) -> "Branch":
        return Branch(self.domain, self.forward, self.derivative, self.inverse, index, self.name,
                      self.image, self.increasing)

    def contains(self, x) -> np.ndarray:
        a, b = self.domain
        x = np.asarray(x, dtype=float)
        return (x >= a) & (x <= b)

    def covers(self, y) -> np.ndarray:
        lo, hi = self.image
        y = np.asarray(y, dtype=float)
        return (y >= lo) & (y <= hi)

    def invert(self, y) -> np.ndarray:
        """Inverse for ``y`` inside the image (values outside are clipped)."""
        y = np.asarray(y, dtype=float)
        lo, hi = self.image
        yc = np.clip(y, lo, hi)
        if self.inverse is not None:
            with np.errstate(all="ignore"):
                x = np.asarray(self.inverse(yc), dtype=float)
            return np.clip(x, *self.domain)
        return self._numeric_inverse(yc)

    def _numeric_inverse(self, y: np.ndarray) -> np.ndarray:
        a, b = self.domain
        shape = y.shape
        yy = np.atleast_1d(y).astype(float).ravel()
        out = np.empty_like(yy)
        # values at the image ends map to the domain ends
        lo_end, hi_end = (a, b) if self.increasing else (b, a)
        at_lo = yy <= self.image[0]
        at_hi = yy >= self.image[1]
        out[at_lo] = lo_end
        out[at_hi] = hi_end
        todo = ~(at_lo | at_hi)
        if np.any(todo):
            yt = yy[todo]

            def fun(x, target):
                return self.forward(x) - target

            if math.isinf(a) or math.isinf(b):
                c = _interior_point(a, b)
                xl0 = np.full(yt.shape, c)
                br = elementwise.bracket_root(fun, xl0, xl0 + 1.0, xmin=np.full(yt.shape, a),
                                              xmax=np.full(yt.shape, b), args=(yt,))
                if not np.all(br.success):
                    raise NumericError(f"branch {self.index}: could not bracket the inverse")
                bracket = br.bracket
            else:
                bracket = (np.full(yt.shape, a), np.full(yt.shape, b))
            res = elementwise.find_root(fun, bracket, args=(yt,))
            if not np.all(res.success):
                raise NumericError(f"branch {self.index}: root finder failed on its bracket")
            out[todo] = res.x
        return out.reshape(shape)

    def preimage_interval(self, ylo: float, yhi: float) -> tuple[float, float] | None:
        """The sub-interval of the domain mapped into ``[ylo, yhi]``."""
        lo, hi = self.image
        ylo, yhi = max(ylo, lo), min(yhi, hi)
        if not ylo < yhi:
            return None
        a, b = self.domain
        xa = a if ylo == lo and self.increasing else b if ylo == lo else float(self.invert(ylo))
        xb = b if yhi == hi and self.increasing else a if yhi == hi else float(self.invert(yhi))
        return (xa, xb) if xa <= xb else (xb, xa)


@dataclass(frozen=True, eq=False)
class Pbf:
    """Ordered branches with pairwise disjoint interiors.

    ``infinite_family`` marks a finite truncation of a countably infinite
    branch family; cardinality-based bounds are then infinite.
    """

    branches: tuple[Branch, ...]
    name: str = ""
    infinite_family: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.branches:
            raise DomainError("a Pbf needs at least one branch")
        brs = tuple(b.with_index(i + 1) for i, b in enumerate(self.branches))
        spans = sorted(b.domain for b in brs)
        for (a0, b0), (a1, b1) in zip(spans[:-1], spans[1:]):
            if a1 < b0:
                raise DomainError(f"branch domains {(a0, b0)} and {(a1, b1)} overlap")
        object.__setattr__(self, "branches", brs)

    @property
    def K(self) -> int:
        return len(self.branches)

    @property
    def domain(self) -> tuple[float, float]:
        return min(b.domain[0] for b in self.branches), max(b.domain[1] for b in self.branches)

    def owner(self, x) -> np.ndarray:
        """0-based position of the branch owning each ``x`` (-1 outside)."""
        x = np.asarray(x, dtype=float)
        own = np.full(x.shape, -1, dtype=int)
        for pos in range(self.K - 1, -1, -1):
            own = np.where(self.branches[pos].contains(x), pos, own)
        return own

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        own = self.owner(x)
        out = np.full(x.shape, np.nan)
        for pos, br in enumerate(self.branches):
            m = own == pos
            if np.any(m):
                out[m] = br.forward(x[m])
        return out

    def derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        own = self.owner(x)
        out = np.full(x.shape, np.nan)
        for pos, br in enumerate(self.branches):
            m = own == pos
            if np.any(m):
                out[m] = br.derivative(x[m])
        return out

    def roots(self, y) -> tuple[np.ndarray, np.ndarray]:
        """Per-branch preimages of ``y``: ``(x, valid)`` arrays of shape ``(K, *y.shape)``."""
        y = np.asarray(y, dtype=float)
        shape = y.shape
        y = y.reshape(-1)
        xs = np.zeros((self.K, y.size))
        valid = np.zeros((self.K, y.size), dtype=bool)
        for pos, br in enumerate(self.branches):
            v = br.covers(y)
            valid[pos] = v
            if np.any(v):
                xs[pos, v] = br.invert(y[v])
        return xs.reshape((self.K,) + shape), valid.reshape((self.K,) + shape)

    def branch_densities(self, d, y) -> np.ndarray:
        """``f_X(x_i) / |g'(x_i)|`` per branch, zero where ``y`` is outside the image."""
        y = np.asarray(y, dtype=float)
        xs, valid = self.roots(y)
        shape = xs.shape
        xs, valid = xs.reshape(self.K, -1), valid.reshape(self.K, -1)
        q = np.zeros_like(xs)
        with np.errstate(divide="ignore", invalid="ignore"):
            for pos, br in enumerate(self.branches):
                v = valid[pos]
                if np.any(v):
                    x = xs[pos, v]
                    q[pos, v] = np.asarray(d.pdf(x), dtype=float) / np.abs(br.derivative(x))
        return np.nan_to_num(q, nan=0.0, posinf=np.inf).reshape(shape)

    def to_dict(self) -> dict:
        return {"name": self.name, "K": self.K, "infinite_family": self.infinite_family,
                "branches": [{"index": b.index, "domain": list(b.domain), "image": list(b.image),
                              "increasing": b.increasing, "name": b.name} for b in self.branches]}


# ---------------------------------------------------------------- operations


def evaluate(f: Pbf, x):
    """``g(x)`` using the branch that owns ``x``."""
    xa = np.asarray(x, dtype=float)
    if np.any(f.owner(xa) < 0):
        raise DomainError(f"x={x!r} lies outside every branch domain")
    out = f(xa)
    return float(out) if out.ndim == 0 else out


def preimage(f: Pbf, y: float) -> list[tuple[int, float]]:
    """All solutions of ``g(x) = y`` as ``(branch index, x)`` pairs."""
    y = float(y)
    out = []
    for br in f.branches:
        if not br.covers(y):
            continue
        x = float(br.invert(y))
        if abs(float(br.forward(x)) - y) > 1e-9 * (1.0 + abs(y)):
            raise NumericError(f"branch {br.index}: inverse residual too large at y={y!r}")
        out.append((br.index, x))
    return out


def _checked_densities(f: Pbf, d, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    xs, valid = f.roots(y)
    xs, valid = xs.reshape(f.K, -1), valid.reshape(f.K, -1)
    for pos, br in enumerate(f.branches):
        v = valid[pos]
        if np.any(v):
            x = xs[pos, v]
            bad = (np.abs(br.derivative(x)) < SINGULAR_DERIVATIVE) & (np.asarray(d.pdf(x)) > 0)
            if np.any(bad):
                raise SingularDerivativeError(
                    f"branch {br.index}: |g'| < {SINGULAR_DERIVATIVE:g} at x={x[bad][0]!r}"
                )
    return f.branch_densities(d, y)


def output_pdf(f: Pbf, d: ContinuousDistribution, y):
    """Density of ``Y = g(X)`` by the method of transformation."""
    q = _checked_densities(f, d, y)
    out = q.sum(axis=0)
    return float(out) if out.ndim == 0 else out


def branch_posterior(f: Pbf, d: ContinuousDistribution, y: float) -> np.ndarray:
    """``P(W = i | Y = y)`` for every branch, in branch order."""
    q = _checked_densities(f, d, float(y))
    total = q.sum()
    if not total > 0:
        raise ConditioningOnNullError(f"f_Y({y!r}) = 0")
    return q / total


def _posteriors(f: Pbf, d, y) -> np.ndarray:
    """Vectorised posteriors ``(K, m)``; columns with zero density are all zero."""
    q = f.branch_densities(d, y)
    tot = q.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(tot > 1e-300, q / np.where(tot > 0, tot, 1.0), 0.0)
    # an infinite density (derivative exactly zero) gets all the posterior mass
    inf = np.isinf(q)
    if np.any(inf):
        cols = inf.any(axis=0)
        p[:, cols] = inf[:, cols] / inf[:, cols].sum(axis=0)
    return p


# ------------------------------------------------------------ image geometry


@dataclass(frozen=True)
class ImageCell:
    """A maximal output interval on which the set of active branches is constant."""

    lo: float
    hi: float
    active: tuple[int, ...]  # 0-based positions
    pieces: tuple[tuple[int, float, float], ...]  # (position, x_lo, x_hi)

    @property
    def card(self) -> int:
        return len(self.active)


def image_cells(f: Pbf) -> list[ImageCell]:
    """Split the output line at every image end point."""
    edges = sorted({v for br in f.branches for v in br.image})
    cells = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if not lo < hi:
            continue
        mid = _interior_point(lo, hi)
        active = tuple(pos for pos, br in enumerate(f.branches) if br.image[0] <= mid <= br.image[1])
        if not active:
            continue
        pieces = []
        for pos in active:
            iv = f.branches[pos].preimage_interval(lo, hi)
            if iv is not None:
                pieces.append((pos, *iv))
        cells.append(ImageCell(lo, hi, active, tuple(pieces)))
    return cells


def cell_masses(f: Pbf, d, cells=None) -> np.ndarray:
    """``P_Y`` of every image cell."""
    cells = image_cells(f) if cells is None else cells
    return np.array([sum(float(d.mass(a, b)) for _, a, b in c.pieces) for c in cells])


def branch_masses(f: Pbf, d) -> np.ndarray:
    """``P_X`` of every branch domain, in branch order."""
    return np.array([float(d.mass(*br.domain)) for br in f.branches])


def bijective_part(f: Pbf, d) -> tuple[list[tuple[float, float]], float]:
    """The set of inputs whose image has a single preimage, and its mass."""
    pieces = []
    for c in image_cells(f):
        if c.card == 1:
            pieces.extend((a, b) for _, a, b in c.pieces)
    pieces.sort()
    merged: list[list[float]] = []
    for a, b in pieces:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    intervals = [(a, b) for a, b in merged]
    return intervals, float(sum(float(d.mass(a, b)) for a, b in intervals))


def essential_sup_card(f: Pbf, d) -> int:
    """Largest preimage cardinality on a set of positive output probability."""
    if f.infinite_family:
        return math.inf
    cells = image_cells(f)
    masses = cell_masses(f, d, cells)
    cards = [c.card for c, m in zip(cells, masses) if m > 0]
    return max(cards) if cards else 0


# ----------------------------------------------------------------- composition


def _interval_gaps(lo: float, hi: float, covers: Sequence[tuple[float, float]]) -> float:
    """Length of ``[lo, hi]`` not covered by the union of ``covers``."""
    cur = lo
    gap = 0.0
    for a, b in sorted(covers):
        if b <= cur:
            continue
        if a > cur:
            if math.isinf(a) or math.isinf(cur):
                return math.inf
            gap += min(a, hi) - cur
        cur = max(cur, b)
        if cur >= hi:
            return gap
    if cur < hi:
        return math.inf if math.isinf(hi) else gap + hi - cur
    return gap


def compose(f: Pbf, h: Pbf, tol: float = 1e-9) -> Pbf:
    """The map ``x -> h(f(x))`` as a Pbf on the refined partition."""
    hdoms = [br.domain for br in h.branches]
    for br in f.branches:
        lo, hi = br.image
        gap = _interval_gaps(lo, hi, hdoms)
        if gap > tol * (1.0 + (abs(hi - lo) if math.isfinite(hi - lo) else 0.0)):
            raise CompositionDomainError(f"image {br.image} of branch {br.index} leaves the outer domain")
    new = []
    for gi in f.branches:
        for hj in h.branches:
            iv = gi.preimage_interval(*hj.domain)
            if iv is None or not iv[0] < iv[1]:
                continue

            def fwd(x, gi=gi, hj=hj):
                return hj.forward(gi.forward(x))

            def der(x, gi=gi, hj=hj):
                return hj.derivative(gi.forward(x)) * gi.derivative(x)

            def inv(z, gi=gi, hj=hj):
                return gi.invert(hj.invert(z))

            new.append(Branch(iv, fwd, der, inv, name=f"{hj.name or hj.index}∘{gi.name or gi.index}",
                              increasing=(gi.increasing == hj.increasing)))
    new.sort(key=lambda b: b.domain[0])
    return Pbf(tuple(new), name=f"{h.name}∘{f.name}", infinite_family=f.infinite_family or h.infinite_family)


# ------------------------------------------------------------ pushforward law


def pushforward(f: Pbf, d: ContinuousDistribution, tail_mass: float = TAIL_MASS) -> ContinuousDistribution:
    """The law of ``Y = g(X)`` as an absolutely continuous distribution."""
    branches = f.branches

    def pdf(y):
        return f.branch_densities(d, y).sum(axis=0)

    def cdf(y):
        y = np.asarray(y, dtype=float)
        tot = np.zeros(y.shape)
        for br in branches:
            a, b = br.domain
            lo, hi = br.image
            yc = np.clip(y, lo, hi)
            x = br.invert(yc)
            if br.increasing:
                part = np.asarray(d.cdf(x)) - float(d.cdf(a))
            else:
                part = float(d.cdf(b)) - np.asarray(d.cdf(x))
            part = np.where(y < lo, 0.0, np.where(y >= hi, float(d.mass(a, b)), part))
            tot = tot + part
        return np.clip(tot, 0.0, 1.0)

    lo = min(br.image[0] for br in branches)
    hi = max(br.image[1] for br in branches)

    def quantile(u):
        u = np.asarray(u, dtype=float)
        flat = np.atleast_1d(u).ravel()
        out = np.array([_scalar_quantile(cdf, float(v), lo, hi) for v in flat])
        return out.reshape(u.shape) if u.ndim else float(out[0])

    edges = sorted({v for br in branches for v in br.image if math.isfinite(v)})
    return ContinuousDistribution(
        pdf=pdf,
        cdf=cdf,
        quantile=quantile,
        support=(lo, hi),
        breakpoints=tuple(e for e in edges if lo < e < hi),
        name=f"pushforward({f.name}, {d.name})",
        params={},
        sampler=lambda rng, n: f(d.sample(n, rng)),
    )


def _scalar_quantile(cdf, u: float, lo: float, hi: float) -> float:
    a = lo if math.isfinite(lo) else -1.0
    b = hi if math.isfinite(hi) else 1.0
    step = 1.0
    while not math.isfinite(lo) and float(cdf(a)) > u:
        a -= step
        step *= 2.0
    step = 1.0
    while not math.isfinite(hi) and float(cdf(b)) < u:
        b += step
        step *= 2.0
    if u <= float(cdf(a)):
        return a
    if u >= float(cdf(b)):
        return b
    return optimize.brentq(lambda y: float(cdf(y)) - u, a, b, xtol=1e-14, rtol=1e-13)


# -------------------------------------------------------------- built-in maps


def identity_map(domain=(-math.inf, math.inf)) -> Pbf:
    return Pbf((Branch(domain, lambda x: np.asarray(x, dtype=float) * 1.0, lambda x: np.ones_like(np.asarray(x, dtype=float)),
                       lambda y: np.asarray(y, dtype=float) * 1.0, name="id"),), name="identity")


def affine_branch(domain, slope: float, offset: float = 0.0, name="") -> Branch:
    if slope == 0:
        raise DomainError("affine branch needs a nonzero slope")
    return Branch(domain, lambda x: slope * np.asarray(x, dtype=float) + offset,
                  lambda x: np.full_like(np.asarray(x, dtype=float), slope),
                  lambda y: (np.asarray(y, dtype=float) - offset) / slope, name=name or f"{slope}x+{offset}")


def affine_map(slope: float, offset: float = 0.0) -> Pbf:
    return Pbf((affine_branch((-math.inf, math.inf), slope, offset),), name=f"affine({slope},{offset})")


def power_branch(domain, exponent: int, scale: float = 1.0, name="") -> Branch:
    """``scale * x**exponent`` restricted to a domain on one side of zero."""
    a, b = domain
    if a < 0 < b:
        raise DomainError("power branch domain must not straddle zero")
    sign = -1.0 if b <= 0 else 1.0
    p = int(exponent)

    def inv(y):
        r = np.abs(np.asarray(y, dtype=float) / scale) ** (1.0 / p)
        if p % 2:
            return np.sign(np.asarray(y, dtype=float) / scale) * r
        return sign * r

    return Branch(domain, lambda x: scale * np.asarray(x, dtype=float) ** p,
                  lambda x: scale * p * np.asarray(x, dtype=float) ** (p - 1), inv, name=name or f"x^{p}")


def square_law() -> Pbf:
    return Pbf((power_branch((-math.inf, 0.0), 2, name="x^2,-"), power_branch((0.0, math.inf), 2, name="x^2,+")),
               name="square-law")


def rectifier() -> Pbf:
    """Full-wave rectifier ``|x|``."""
    return Pbf((affine_branch((-math.inf, 0.0), -1.0, name="-x"), affine_branch((0.0, math.inf), 1.0, name="x")),
               name="rectifier")


def cubic_map(c: float = 100.0) -> Pbf:
    """``x**3 - c x`` split at its critical points, with closed-form inverses."""
    s = math.sqrt(c / 3.0)
    m = 2.0 * c * s / 3.0

    def fwd(x):
        x = np.asarray(x, dtype=float)
        return x * x * x - c * x

    def der(x):
        x = np.asarray(x, dtype=float)
        return 3.0 * x * x - c

    def trig(y, k):
        t = np.clip(np.asarray(y, dtype=float) / m, -1.0, 1.0)
        return 2.0 * s * np.cos(np.arccos(t) / 3.0 - 2.0 * math.pi * k / 3.0)

    def outer(y, sign):
        y = np.asarray(y, dtype=float)
        big = np.abs(y) > m
        with np.errstate(invalid="ignore"):
            hyp = sign * 2.0 * s * np.cosh(np.arccosh(np.maximum(np.abs(y) / m, 1.0)) / 3.0)
        return np.where(big, hyp, trig(y, 0 if sign > 0 else 2))

    return Pbf((
        Branch((-math.inf, -s), fwd, der, lambda y: outer(y, -1.0), name="left", image=(-math.inf, m), increasing=True),
        Branch((-s, s), fwd, der, lambda y: trig(y, 1), name="middle", image=(-m, m), increasing=False),
        Branch((s, math.inf), fwd, der, lambda y: outer(y, 1.0), name="right", image=(-m, math.inf), increasing=True),
    ), name="cubic", meta={"c": c, "critical": s, "extremum": m})


def staircase_map(pieces: int = 40) -> Pbf:
    """``2**n (x - 2**-n)`` on ``(2**-n, 2**(1-n)]``, truncated after ``pieces`` branches."""
    if pieces < 1:
        raise DomainError("need at least one piece")
    brs = []
    for n in range(1, pieces + 1):
        scale = 2.0**n
        brs.append(affine_branch((2.0**-n, 2.0 ** (1 - n)), scale, -1.0, name=f"n={n}"))
    return Pbf(tuple(brs), name="staircase", infinite_family=True, meta={"pieces": pieces})


def composition_check(f: Pbf, h: Pbf, x) -> float:
    """Largest deviation of ``compose(f, h)(x)`` from ``h(f(x))``."""
    comp = compose(f, h)
    return float(np.max(np.abs(comp(x) - h(f(x)))))


# ------------------------------------------------------------ JSON descriptions

_SAFE_FUNCS = {
    name: getattr(np, name)
    for name in ("exp", "log", "log2", "log10", "sqrt", "sin", "cos", "tan", "sinh", "cosh", "tanh",
                 "arctan", "arcsinh", "abs", "sign", "expm1", "log1p", "cbrt", "floor", "ceil",
                 "minimum", "maximum", "where")
}
_SAFE_CONSTS = {"pi": math.pi, "e": math.e}
_ALLOWED_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant,
                  ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Compare,
                  ast.Lt, ast.LtE, ast.Gt, ast.GtE)


def compile_expression(text: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compile an arithmetic expression in ``x`` using a small numpy vocabulary."""
    tree = ast.parse(text, mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ConfigurationError(f"expression {text!r}: {type(node).__name__} is not allowed")
        if isinstance(node, ast.Name) and node.id not in _SAFE_FUNCS and node.id not in _SAFE_CONSTS and node.id != "x":
            raise ConfigurationError(f"expression {text!r}: unknown name {node.id!r}")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in _SAFE_FUNCS):
            raise ConfigurationError(f"expression {text!r}: only numpy functions may be called")
    code = compile(tree, "<expr>", "eval")
    env = {"__builtins__": {}, **_SAFE_FUNCS, **_SAFE_CONSTS}

    def fn(x):
        x = np.asarray(x, dtype=float)
        return np.asarray(eval(code, env, {"x": x}), dtype=float) + 0.0 * x

    return fn


def finite_difference(fn, rel_step: float = 1e-6):
    """Central difference derivative with step ``rel_step * (1 + |x|)``."""

    def der(x):
        x = np.asarray(x, dtype=float)
        h = rel_step * (1.0 + np.abs(x))
        return (fn(x + h) - fn(x - h)) / (2.0 * h)

    return der


def _bound(v) -> float:
    if v is None:
        return math.nan
    if isinstance(v, str):
        return {"-inf": -math.inf, "inf": math.inf, "+inf": math.inf}[v]
    return float(v)


def branch_from_json(spec: dict) -> Branch:
    try:
        domain = tuple(_bound(v) for v in spec["domain"])
        kind = spec.get("map", "expr")
        if kind == "affine":
            return affine_branch(domain, float(spec["slope"]), float(spec.get("offset", 0.0)))
        if kind == "power":
            return power_branch(domain, int(spec["exponent"]), float(spec.get("scale", 1.0)))
        if kind == "cubic":
            a3, a2, a1, a0 = (float(v) for v in spec["coeffs"])
            fwd = lambda x: ((a3 * np.asarray(x, dtype=float) + a2) * x + a1) * x + a0  # noqa: E731
            der = lambda x: (3 * a3 * np.asarray(x, dtype=float) + 2 * a2) * x + a1  # noqa: E731
            return Branch(domain, fwd, der, name=spec.get("name", "cubic"))
        if kind == "expr":
            fwd = compile_expression(spec["expr"])
            der = compile_expression(spec["derivative"]) if "derivative" in spec else finite_difference(fwd)
            inv = compile_expression(spec["inverse"].replace("y", "x")) if "inverse" in spec else None
            return Branch(domain, fwd, der, inv, name=spec.get("name", spec["expr"]))
    except KeyError as exc:
        raise ConfigurationError(f"branch description is missing field {exc}") from None
    raise ConfigurationError(f"unknown branch map {kind!r}")


def from_json(desc: dict) -> Pbf:
    """Build a Pbf from ``{"branches": [...]}`` or ``{"named": "<gallery map>"}``."""
    if not isinstance(desc, dict):
        raise ConfigurationError("Pbf description must be a JSON object")
    if "named" in desc:
        return named_map(desc["named"], **desc.get("params", {}))
    if "branches" not in desc:
        raise ConfigurationError("Pbf description needs 'branches' or 'named'")
    return Pbf(tuple(branch_from_json(b) for b in desc["branches"]), name=desc.get("name", "custom"))


NAMED_MAPS: dict[str, Callable[..., Pbf]] = {
    "identity": identity_map,
    "square-law": square_law,
    "rectifier": rectifier,
    "cubic": cubic_map,
    "staircase": staircase_map,
    "affine": affine_map,
}


def named_map(name: str, **params) -> Pbf:
    try:
        return NAMED_MAPS[name](**params)
    except KeyError:
        raise ConfigurationError(f"unknown map {name!r}; available: {', '.join(sorted(NAMED_MAPS))}") from None


def sample_outputs(f: Pbf, d, n: int, seed=None) -> tuple[np.ndarray, np.ndarray]:
    """Seeded draws ``(x, g(x))``."""
    x = d.sample(n, as_generator(seed))
    return x, f(x)
