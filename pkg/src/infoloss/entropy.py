"""Entropy primitives, uniform quantization and information-dimension estimation.

Everything is measured in bits.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .distributions import TAIL_MASS, VectorDistribution, as_generator
from .errors import ConfigurationError, DomainError, InvalidPmfError, ToleranceNotMetError, VariantError

#: Largest number of quantization cells materialised analytically.
MAX_CELLS = 20_000_000


def _plogp(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = -p[pos] * np.log2(p[pos])
    return out


def discrete_entropy(pmf) -> float:
    """Shannon entropy ``-sum p log2 p`` of a probability vector (0 log 0 = 0)."""
    p = np.asarray(pmf, dtype=float).ravel()
    if p.size == 0:
        raise InvalidPmfError("empty pmf")
    if np.any(p < 0):
        raise InvalidPmfError("pmf has negative entries")
    if abs(p.sum() - 1.0) > 1e-6:
        raise InvalidPmfError(f"pmf sums to {p.sum()!r}")
    return float(max(_plogp(p).sum(), 0.0))


def partial_entropy_sums(masses) -> np.ndarray:
    """Running sums of ``-p log2 p`` over a (possibly unnormalised) mass sequence.

    Used to witness divergence of the entropy of countably infinite pmfs,
    where no finite truncation sums to one.
    """
    m = np.asarray(masses, dtype=float).ravel()
    if np.any(m < 0) or np.any(m > 1):
        raise InvalidPmfError("masses must lie in [0, 1]")
    return np.cumsum(_plogp(m))


def binary_entropy(p: float) -> float:
    """``H2(p) = -p log2 p - (1 - p) log2(1 - p)``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"binary entropy needs p in [0, 1], got {p!r}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p))


def q_function(x):
    """Gaussian tail probability ``Q(x) = 1 - Phi(x)``."""
    out = special.ndtr(-np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def _quad(fun, a, b, points=None, epsabs=1e-11, epsrel=1e-10, limit=400):
    """``scipy.integrate.quad`` returning ``(value, abserr, converged)``."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        val, err = integrate.quad(fun, a, b, points=points, epsabs=epsabs, epsrel=epsrel, limit=limit)
    ok = not any(issubclass(w.category, integrate.IntegrationWarning) for w in caught)
    return val, err, ok


def integrate_pieces(fun, edges, tol: float = 1e-4):
    """Integrate ``fun`` over consecutive intervals of ``edges``.

    Returns ``(value, abserr)``; raises :class:`ToleranceNotMetError` when a
    panel reports a warning and the accumulated error exceeds ``tol``.
    """
    total = 0.0
    err = 0.0
    ok = True
    for a, b in zip(edges[:-1], edges[1:]):
        if not b > a:
            continue
        v, e, good = _quad(fun, a, b)
        total += v
        err += e
        ok = ok and good
    if not math.isfinite(total) or (not ok and err > tol):
        raise ToleranceNotMetError(
            f"quadrature did not converge (estimate {total!r}, error {err!r})", total, err
        )
    return total, err


def differential_entropy(d, *, tail_mass: float = TAIL_MASS, tol: float = 1e-4, return_error: bool = False):
    """Differential entropy ``-∫ f log2 f`` of an absolutely continuous law.

    The support is clipped where less than ``tail_mass`` lies beyond each end
    and split at ``d.breakpoints``.  With ``return_error=True`` the result is
    ``(value, abserr)``.
    """
    if getattr(d, "variant", None) != "ac":
        raise VariantError("differential entropy needs an absolutely continuous distribution")
    lo, hi = d.truncated_support(tail_mass)
    edges = sorted({lo, hi, *(p for p in d.breakpoints if lo < p < hi)})

    def integrand(x):
        f = float(d.pdf(x))
        return -f * math.log2(f) if f > 1e-300 else 0.0

    val, err = integrate_pieces(integrand, edges, tol)
    if err > tol:
        raise ToleranceNotMetError(f"differential entropy error {err:.3g} exceeds {tol:.3g}", val, err)
    return (val, err) if return_error else val


# ------------------------------------------------------------- quantization


@dataclass(frozen=True)
class QuantizedView:
    """Cells of side ``2**-n`` and their probabilities.

    ``cells`` holds integer cell indices ``k`` (``[k, k+1) / 2**n``); for
    vector inputs it is a 2-D array with one row per occupied cell.
    """

    n: int
    cells: np.ndarray
    masses: np.ndarray
    distribution: object = field(repr=False, default=None)
    empirical: bool = False
    sample_count: int = 0

    def entropy(self, miller_madow: bool = False) -> float:
        h = float(_plogp(self.masses).sum())
        if miller_madow and self.empirical and self.sample_count:
            h += (np.count_nonzero(self.masses) - 1) / (2.0 * self.sample_count * math.log(2.0))
        return h

    def cell_mass(self, k) -> float:
        """Mass of the scalar cell with index ``k`` (0 when absent)."""
        hit = np.nonzero(self.cells == k)[0]
        return float(self.masses[hit[0]]) if hit.size else 0.0

    def singleton_fraction(self) -> float:
        if not self.empirical or self.sample_count == 0:
            return 0.0
        counts = np.rint(self.masses * self.sample_count)
        return float(np.mean(counts == 1))


def _ac_cells(d, n: int, tail_mass, weight=1.0):
    lo, hi = d.truncated_support(tail_mass)
    scale = 2.0**n
    k0, k1 = math.floor(lo * scale), math.floor(hi * scale)
    if hi * scale == k1 and k1 > k0:
        k1 -= 1
    if k1 - k0 + 1 > MAX_CELLS:
        raise ConfigurationError(f"resolution n={n} needs {k1 - k0 + 1} cells")
    ks = np.arange(k0, k1 + 1)
    edges = np.arange(k0, k1 + 2) / scale
    cdf = np.asarray(d.cdf(edges), dtype=float)
    m = np.diff(cdf)
    # mass beyond the clipped support goes to the extreme cells
    m[0] += cdf[0]
    m[-1] += 1.0 - cdf[-1]
    return ks, np.clip(m, 0.0, None) * weight


def _merge(ks_list, ms_list):
    ks = np.concatenate(ks_list)
    ms = np.concatenate(ms_list)
    uk, inv = np.unique(ks, return_inverse=True)
    return uk, np.bincount(inv, weights=ms)


def quantize(d, n: int, *, tail_mass: float | None = TAIL_MASS, samples: int | None = None, seed=None):
    """Uniform quantization ``floor(2**n X) / 2**n`` of ``d``.

    Cell masses are exact (cdf differences and atom placement) for scalar
    laws and for products of scalar laws.  Pushforward vector laws, or any
    call with ``samples`` given, use the empirical pmf of seeded draws.
    """
    if n < 0 or int(n) != n:
        raise DomainError("resolution must be a nonnegative integer")
    n = int(n)
    if samples is not None or (isinstance(d, VectorDistribution) and d.dependence != "independent"):
        if samples is None:
            raise ConfigurationError("empirical quantization needs a sample count")
        return _empirical_view(d, n, d.sample(samples, seed))
    if isinstance(d, VectorDistribution):
        views = [quantize(m, n, tail_mass=tail_mass) for m in d.marginals]
        total = math.prod(len(v.masses) for v in views)
        if total > MAX_CELLS:
            raise ConfigurationError(f"product quantization needs {total} cells")
        grids = np.meshgrid(*[v.cells for v in views], indexing="ij")
        cells = np.column_stack([g.ravel() for g in grids])
        masses = views[0].masses
        for v in views[1:]:
            masses = np.multiply.outer(masses, v.masses)
        return QuantizedView(n, cells, masses.ravel(), d)
    variant = d.variant
    if variant == "ac":
        ks, ms = _ac_cells(d, n, tail_mass)
    elif variant == "discrete":
        ks, ms = _merge([np.floor(d.locations * 2.0**n).astype(np.int64)], [d.masses])
    elif variant == "mixed":
        ak, am = _ac_cells(d.ac, n, tail_mass, d.ac_weight)
        dk = np.floor(d.atoms.locations * 2.0**n).astype(np.int64)
        ks, ms = _merge([ak, dk], [am, d.atoms.masses])
    else:  # pragma: no cover - guarded by the type union
        raise VariantError(f"unsupported distribution variant {variant!r}")
    return QuantizedView(n, np.asarray(ks), ms, d)


def _empirical_view(d, n: int, x: np.ndarray) -> QuantizedView:
    codes = np.floor(np.asarray(x, dtype=float) * 2.0**n).astype(np.int64)
    if codes.ndim == 2 and codes.shape[1] == 1:
        codes = codes[:, 0]
    cells, counts = np.unique(codes, axis=0 if codes.ndim == 2 else None, return_counts=True)
    return QuantizedView(n, cells, counts / codes.shape[0], d, empirical=True, sample_count=codes.shape[0])


# ---------------------------------------------------------- information dimension


@dataclass(frozen=True)
class DimensionEstimate:
    estimate: float
    stderr: float
    resolutions: tuple[int, ...]
    entropies: tuple[float, ...]
    method: str
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "resolutions": list(self.resolutions),
            "entropies": list(self.entropies),
            "method": self.method,
            "warnings": list(self.warnings),
        }


def regression_slope(xs, ys) -> tuple[float, float]:
    """Least-squares slope of ``ys`` on ``xs`` and its standard error."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * xc
    dof = max(len(x) - 2, 1)
    stderr = math.sqrt(float(resid @ resid) / dof / sxx)
    return slope, stderr


def information_dimension(
    d,
    n_lo: int = 6,
    n_hi: int = 14,
    samples: int | None = None,
    seed=0,
    *,
    method: str = "auto",
    miller_madow: bool = False,
) -> DimensionEstimate:
    """Estimate the Rényi information dimension of ``d``.

    The estimate is the least-squares slope of ``H(X_n)`` against ``n`` over
    ``n_lo..n_hi``, which cancels the additive ``O(1)`` term of the entropy.
    ``method="analytic"`` uses exact cell masses, ``"empirical"`` the plug-in
    entropy of ``samples`` seeded draws; ``"auto"`` prefers analytic masses
    unless ``samples`` is given or the law is a pushforward.
    """
    if not (n_hi > n_lo >= 4):
        raise DomainError("need n_hi > n_lo >= 4")
    if method == "auto":
        pushforward = isinstance(d, VectorDistribution) and d.dependence != "independent"
        method = "empirical" if (samples is not None or pushforward) else "analytic"
    if method not in ("analytic", "empirical"):
        raise ConfigurationError(f"unknown method {method!r}")
    ns = tuple(range(n_lo, n_hi + 1))
    notes: list[str] = []
    if method == "analytic":
        hs = tuple(quantize(d, n).entropy() for n in ns)
    else:
        if samples is None:
            raise ConfigurationError("empirical estimation needs a sample count")
        if samples < 100_000:
            notes.append(f"only {samples} samples; at least 1e5 recommended")
        x = d.sample(samples, as_generator(seed))
        views = [_empirical_view(d, n, x) for n in ns]
        hs = tuple(v.entropy(miller_madow) for v in views)
        frac = views[-1].singleton_fraction()
        if frac >= 0.01:
            notes.append(f"resolution too fine: {frac:.1%} singleton cells at n={n_hi}")
    slope, stderr = regression_slope(ns, hs)
    return DimensionEstimate(slope, stderr, ns, hs, method, tuple(notes))
