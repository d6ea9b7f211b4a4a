"""Scalar and vector input laws: absolutely continuous, discrete and mixed.

All distributions are immutable once built.  Sampling always takes an
explicit seed (or a ``numpy.random.Generator``) so that every Monte Carlo
result in the package is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import special, stats

from .errors import ConfigurationError, DomainError, InvalidPmfError

#: Probability mass (per side) discarded when an unbounded support is clipped.
TAIL_MASS = 5e-11


def as_generator(seed) -> np.random.Generator:
    """Return a Generator for an int seed, a SeedSequence or a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class ContinuousDistribution:
    """An absolutely continuous law on the real line.

    ``pdf``, ``cdf`` and ``quantile`` must accept numpy arrays.  ``breakpoints``
    lists interior points where the density is not smooth (kinks, jumps or
    integrable singularities); quadratures split there.
    """

    pdf: Callable[[np.ndarray], np.ndarray]
    cdf: Callable[[np.ndarray], np.ndarray]
    quantile: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float] = (-math.inf, math.inf)
    breakpoints: tuple[float, ...] = ()
    name: str = "continuous"
    params: dict = field(default_factory=dict)
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None

    variant = "ac"

    def sample(self, n: int, seed=None) -> np.ndarray:
        rng = as_generator(seed)
        if self.sampler is not None:
            return np.asarray(self.sampler(rng, n), dtype=float)
        return np.asarray(self.quantile(rng.random(n)), dtype=float)

    def mass(self, lo, hi):
        """Probability of the interval between ``lo`` and ``hi``."""
        return np.asarray(self.cdf(hi)) - np.asarray(self.cdf(lo))

    def ac_mass(self, lo, hi):
        return self.mass(lo, hi)

    def truncated_support(self, tail_mass: float | None = TAIL_MASS) -> tuple[float, float]:
        """Support clipped where the mass beyond each end is below ``tail_mass``."""
        lo, hi = self.support
        if math.isinf(lo) or math.isinf(hi):
            if tail_mass is None:
                raise ConfigurationError(
                    f"{self.name}: unbounded support and no tail-truncation policy"
                )
            if math.isinf(lo):
                lo = float(self.quantile(np.array(tail_mass)))
            if math.isinf(hi):
                hi = float(self.quantile(np.array(1.0 - tail_mass)))
        return float(lo), float(hi)

    def affine(self, a: float, b: float) -> "ContinuousDistribution":
        """Law of ``a * X + b``."""
        if a == 0:
            raise DomainError("affine map with zero slope is not absolutely continuous")
        lo, hi = sorted((a * self.support[0] + b, a * self.support[1] + b))
        pdf, cdf, quantile = self.pdf, self.cdf, self.quantile
        if a > 0:
            new_cdf = lambda y: cdf((np.asarray(y) - b) / a)  # noqa: E731
            new_q = lambda u: a * quantile(u) + b  # noqa: E731
        else:
            new_cdf = lambda y: 1.0 - cdf((np.asarray(y) - b) / a)  # noqa: E731
            new_q = lambda u: a * quantile(1.0 - np.asarray(u)) + b  # noqa: E731
        return ContinuousDistribution(
            pdf=lambda y: pdf((np.asarray(y) - b) / a) / abs(a),
            cdf=new_cdf,
            quantile=new_q,
            support=(lo, hi),
            breakpoints=tuple(sorted(a * p + b for p in self.breakpoints)),
            name=f"affine({self.name})",
            params={"a": a, "b": b, "base": self.params},
        )

    def to_dict(self) -> dict:
        return {"kind": self.name, **self.params}


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Finitely many atoms ``(location, mass)``.

    The masses may sum to less than one when the object is the atomic part of
    a :class:`MixedDistribution`; pass ``total`` accordingly.
    """

    locations: np.ndarray
    masses: np.ndarray
    name: str = "discrete"

    variant = "discrete"

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=float).ravel()
        m = np.asarray(self.masses, dtype=float).ravel()
        if loc.shape != m.shape:
            raise InvalidPmfError("atom locations and masses differ in length")
        if np.any(m <= 0) or np.any(m > 1):
            raise InvalidPmfError("atom masses must lie in (0, 1]")
        if len(np.unique(loc)) != len(loc):
            raise InvalidPmfError("atom locations must be distinct")
        order = np.argsort(loc)
        object.__setattr__(self, "locations", loc[order])
        object.__setattr__(self, "masses", m[order])

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    @property
    def support(self) -> tuple[float, float]:
        return float(self.locations[0]), float(self.locations[-1])

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.locations, x, side="right")
        csum = np.concatenate(([0.0], np.cumsum(self.masses)))
        return csum[idx]

    def mass(self, lo, hi):
        return self.cdf(hi) - self.cdf(lo)

    def ac_mass(self, lo, hi):
        return np.zeros_like(np.asarray(lo, dtype=float) + np.asarray(hi, dtype=float))

    def sample(self, n: int, seed=None) -> np.ndarray:
        rng = as_generator(seed)
        p = self.masses / self.masses.sum()
        return self.locations[rng.choice(len(p), size=n, p=p)]

    def truncated_support(self, tail_mass=TAIL_MASS) -> tuple[float, float]:
        return self.support

    def to_dict(self) -> dict:
        return {"kind": "discrete", "atoms": [[float(x), float(m)] for x, m in zip(self.locations, self.masses)]}


@dataclass(frozen=True, eq=False)
class MixedDistribution:
    """``ac_weight`` times an absolutely continuous law plus atoms."""

    ac_weight: float
    ac: ContinuousDistribution
    atoms: DiscreteDistribution
    name: str = "mixed"

    variant = "mixed"

    def __post_init__(self):
        if not 0.0 < self.ac_weight < 1.0:
            raise InvalidPmfError("ac_weight must lie in (0, 1)")
        if abs(self.ac_weight + self.atoms.total - 1.0) > 1e-12:
            raise InvalidPmfError(
                f"ac_weight + atom masses = {self.ac_weight + self.atoms.total!r}, expected 1"
            )

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.ac.support
        alo, ahi = self.atoms.support
        return min(lo, alo), max(hi, ahi)

    def cdf(self, x):
        return self.ac_weight * np.asarray(self.ac.cdf(x)) + self.atoms.cdf(x)

    def mass(self, lo, hi):
        return self.cdf(hi) - self.cdf(lo)

    def ac_mass(self, lo, hi):
        return self.ac_weight * self.ac.mass(lo, hi)

    def sample(self, n: int, seed=None) -> np.ndarray:
        rng = as_generator(seed)
        is_ac = rng.random(n) < self.ac_weight
        out = self.atoms.sample(n, rng)
        out[is_ac] = self.ac.sample(int(is_ac.sum()), rng)
        return out

    def truncated_support(self, tail_mass=TAIL_MASS) -> tuple[float, float]:
        lo, hi = self.ac.truncated_support(tail_mass)
        alo, ahi = self.atoms.support
        return min(lo, alo), max(hi, ahi)

    def to_dict(self) -> dict:
        return {
            "kind": "mixed",
            "ac_weight": self.ac_weight,
            "ac": self.ac.to_dict(),
            "atoms": self.atoms.to_dict()["atoms"],
        }


ScalarDistribution = ContinuousDistribution | DiscreteDistribution | MixedDistribution


@dataclass(frozen=True, eq=False)
class VectorDistribution:
    """An ``N``-dimensional input.

    ``dependence`` is ``"independent"`` (product of ``marginals``) or
    ``"pushforward"``, in which case samples are ``transform(base.sample())``.
    """

    dimension: int
    marginals: tuple = ()
    dependence: str = "independent"
    base: "VectorDistribution | None" = None
    transform: Callable[[np.ndarray], np.ndarray] | None = None
    transform_name: str = ""

    def __post_init__(self):
        if self.dependence == "independent" and len(self.marginals) != self.dimension:
            raise ConfigurationError("independent product needs one marginal per coordinate")
        if self.dependence == "pushforward" and (self.base is None or self.transform is None):
            raise ConfigurationError("pushforward needs a base distribution and a transform")

    def sample(self, n: int, seed=None) -> np.ndarray:
        rng = as_generator(seed)
        if self.dependence == "independent":
            cols = [m.sample(n, rng) for m in self.marginals]
            return np.column_stack(cols)
        out = np.asarray(self.transform(self.base.sample(n, rng)), dtype=float)
        if out.ndim == 1:
            out = out[:, None]
        if out.shape[1] != self.dimension:
            raise ConfigurationError(
                f"transform {self.transform_name!r} returned {out.shape[1]} coordinates, "
                f"expected {self.dimension}"
            )
        return out

    def pdf(self, x: np.ndarray) -> np.ndarray:
        if self.dependence != "independent" or not all(m.variant == "ac" for m in self.marginals):
            raise ConfigurationError("joint pdf is only available for products of continuous laws")
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.ones(x.shape[0])
        for j, m in enumerate(self.marginals):
            out = out * m.pdf(x[:, j])
        return out

    @classmethod
    def product(cls, marginals: Sequence) -> "VectorDistribution":
        return cls(dimension=len(marginals), marginals=tuple(marginals))

    @classmethod
    def pushforward(cls, base: "VectorDistribution", transform, dimension: int, name: str = ""):
        return cls(
            dimension=dimension,
            dependence="pushforward",
            base=base,
            transform=transform,
            transform_name=name,
        )


# ---------------------------------------------------------------- factories


def gaussian(mean: float = 0.0, std: float = 1.0) -> ContinuousDistribution:
    if not std > 0:
        raise DomainError("std must be positive")
    mean, std = float(mean), float(std)
    norm = std * math.sqrt(2.0 * math.pi)

    def pdf(x):
        z = (np.asarray(x, dtype=float) - mean) / std
        return np.exp(-0.5 * z * z) / norm

    return ContinuousDistribution(
        pdf=pdf,
        cdf=lambda x: special.ndtr((np.asarray(x, dtype=float) - mean) / std),
        quantile=lambda u: mean + std * special.ndtri(u),
        name="gaussian",
        params={"mean": mean, "std": std},
        sampler=lambda rng, n: rng.normal(mean, std, size=n),
    )


def uniform(a: float = 0.0, b: float = 1.0) -> ContinuousDistribution:
    a, b = float(a), float(b)
    if not b > a:
        raise DomainError("uniform needs a < b")
    w = b - a

    def pdf(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= a) & (x <= b), 1.0 / w, 0.0)

    return ContinuousDistribution(
        pdf=pdf,
        cdf=lambda x: np.clip((np.asarray(x, dtype=float) - a) / w, 0.0, 1.0),
        quantile=lambda u: a + w * np.asarray(u, dtype=float),
        support=(a, b),
        name="uniform",
        params={"a": a, "b": b},
        sampler=lambda rng, n: rng.uniform(a, b, size=n),
    )


def from_scipy(rv, name: str, params: dict | None = None, breakpoints=()) -> ContinuousDistribution:
    """Wrap a frozen ``scipy.stats`` continuous distribution."""
    lo, hi = rv.support()
    return ContinuousDistribution(
        pdf=rv.pdf,
        cdf=rv.cdf,
        quantile=rv.ppf,
        support=(float(lo), float(hi)),
        breakpoints=tuple(breakpoints),
        name=name,
        params=params or {},
    )


def chi2(df: float = 1.0) -> ContinuousDistribution:
    return from_scipy(stats.chi2(df), "chi2", {"df": float(df)})


def piecewise_uniform(edges: Sequence[float], masses: Sequence[float], name="piecewise-uniform"):
    """Histogram density: constant on each ``[edges[k], edges[k+1]]``."""
    edges = np.asarray(edges, dtype=float)
    masses = np.asarray(masses, dtype=float)
    if len(edges) != len(masses) + 1 or np.any(np.diff(edges) <= 0):
        raise DomainError("edges must be increasing with one more entry than masses")
    if np.any(masses < 0) or abs(masses.sum() - 1.0) > 1e-12:
        raise InvalidPmfError("piece masses must be nonnegative and sum to 1")
    dens = masses / np.diff(edges)
    cum = np.concatenate(([0.0], np.cumsum(masses)))

    def pdf(x):
        x = np.asarray(x, dtype=float)
        k = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(masses) - 1)
        inside = (x >= edges[0]) & (x <= edges[-1])
        return np.where(inside, dens[k], 0.0)

    def cdf(x):
        x = np.clip(np.asarray(x, dtype=float), edges[0], edges[-1])
        k = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(masses) - 1)
        return np.minimum(cum[k] + dens[k] * (x - edges[k]), 1.0)

    def quantile(u):
        u = np.asarray(u, dtype=float)
        k = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(masses) - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            off = np.where(dens[k] > 0, (u - cum[k]) / dens[k], 0.0)
        return edges[k] + off

    return ContinuousDistribution(
        pdf=pdf,
        cdf=cdf,
        quantile=quantile,
        support=(float(edges[0]), float(edges[-1])),
        breakpoints=tuple(float(e) for e in edges[1:-1]),
        name=name,
        params={"edges": edges.tolist(), "masses": masses.tolist()},
    )


def discrete(atoms: Sequence[Sequence[float]]) -> DiscreteDistribution:
    atoms = np.asarray(atoms, dtype=float).reshape(-1, 2)
    d = DiscreteDistribution(atoms[:, 0], atoms[:, 1])
    if abs(d.total - 1.0) > 1e-12:
        raise InvalidPmfError(f"atom masses sum to {d.total!r}, expected 1")
    return d


def mixed(ac_weight: float, ac: ContinuousDistribution, atoms: Sequence[Sequence[float]]):
    atoms = np.asarray(atoms, dtype=float).reshape(-1, 2)
    return MixedDistribution(float(ac_weight), ac, DiscreteDistribution(atoms[:, 0], atoms[:, 1]))


def from_json(desc: dict[str, Any]):
    """Build a scalar distribution from its JSON description.

    >>> from_json({"kind": "uniform", "a": 0, "b": 1}).support
    (0.0, 1.0)
    """
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigurationError("distribution description needs a 'kind' field")
    kind = desc["kind"]
    try:
        if kind in ("gaussian", "normal"):
            return gaussian(desc.get("mean", 0.0), desc.get("std", 1.0))
        if kind == "uniform":
            return uniform(desc.get("a", 0.0), desc.get("b", 1.0))
        if kind == "chi2":
            return chi2(desc.get("df", 1.0))
        if kind == "discrete":
            return discrete(desc["atoms"])
        if kind == "mixed":
            return mixed(desc["ac_weight"], from_json(desc["ac"]), desc["atoms"])
        if kind == "piecewise-uniform":
            return piecewise_uniform(desc["edges"], desc["masses"])
        if kind == "staircase":
            from .gallery import staircase_input

            return staircase_input()
    except KeyError as exc:
        raise ConfigurationError(f"distribution {kind!r} is missing field {exc}") from None
    raise ConfigurationError(f"unknown distribution kind {kind!r}")
