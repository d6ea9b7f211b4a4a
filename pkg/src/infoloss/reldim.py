"""Relative information loss and transfer.

Arithmetic helpers accept :class:`fractions.Fraction` as well as floats and
keep exact types when given exact inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .distributions import as_generator
from .entropy import regression_slope
from .errors import (
    ConfigurationError,
    DomainError,
    InconsistentDimensionsError,
    InvalidPmfError,
    UnsupportedClassError,
)

PROVENANCES = ("dimension-ratio", "structural", "mixed", "empirical", "cascade")


def _num(v):
    return float(v) if isinstance(v, Fraction) else v


@dataclass(frozen=True)
class RelLossResult:
    """Relative loss ``l`` with its complement ``t = 1 - l``."""

    rel_loss: Any
    provenance: str
    inputs: dict = field(default_factory=dict)
    stderr: float = 0.0
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0 <= self.rel_loss <= 1:
            raise DomainError(f"relative loss {self.rel_loss!r} is outside [0, 1]")

    @property
    def rel_transfer(self):
        return 1 - self.rel_loss

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return {"value": float(v), "exact": str(v)}
            if isinstance(v, (list, tuple)):
                return [enc(u) for u in v]
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        return {
            "rel_loss": enc(self.rel_loss),
            "rel_transfer": enc(self.rel_transfer),
            "provenance": self.provenance,
            "stderr": self.stderr,
            "inputs": {k: enc(v) for k, v in self.inputs.items()},
            "warnings": list(self.warnings),
        }


# --------------------------------------------------------------- analytic rules


def rel_loss_from_dimensions(d_X, d_X_given_Y) -> RelLossResult:
    """``l = d(X|Y) / d(X)``."""
    if not d_X > 0:
        raise DomainError("the input information dimension must be positive")
    if d_X_given_Y < 0 or d_X_given_Y > d_X:
        raise InconsistentDimensionsError(f"need 0 <= d(X|Y) <= d(X), got {d_X_given_Y!r} and {d_X!r}")
    return RelLossResult(d_X_given_Y / d_X, "dimension-ratio", {"d_X": d_X, "d_X_given_Y": d_X_given_Y})


def rel_transfer_lipschitz(d_X, d_Y) -> RelLossResult:
    """``t = d(Y) / d(X)``, valid when the caller asserts a Lipschitz map."""
    if not d_X > 0:
        raise DomainError("the input information dimension must be positive")
    if d_Y < 0:
        raise DomainError("dimensions are nonnegative")
    if d_Y > d_X:
        raise InconsistentDimensionsError(f"a Lipschitz map cannot raise the dimension ({d_Y!r} > {d_X!r})")
    t = d_Y / d_X
    return RelLossResult(1 - t, "dimension-ratio", {"d_X": d_X, "d_Y": d_Y, "lipschitz": True})


@dataclass(frozen=True)
class Piece:
    mass: float
    M: int
    piece_class: str = "submersion"


@dataclass(frozen=True)
class DimensionPieceSpec:
    """Pieces of an ``N``-dimensional input mapped to ``M_i``-dimensional sets."""

    N: int
    pieces: tuple[Piece, ...]

    CLASSES = ("submersion", "injective", "constant")

    def __post_init__(self):
        if self.N < 1:
            raise DomainError("N must be at least 1")
        total = sum(p.mass for p in self.pieces)
        if abs(total - 1) > 1e-12:
            raise InvalidPmfError(f"piece masses sum to {total!r}, not 1")
        for p in self.pieces:
            if not 0 <= p.mass <= 1:
                raise InvalidPmfError(f"piece mass {p.mass!r} outside [0, 1]")
            if not 0 <= p.M <= self.N:
                raise InconsistentDimensionsError(f"piece dimension M={p.M} outside [0, {self.N}]")
            if p.piece_class not in self.CLASSES:
                raise UnsupportedClassError(f"piece class {p.piece_class!r}; expected one of {self.CLASSES}")

    @classmethod
    def from_json(cls, desc: dict) -> "DimensionPieceSpec":
        try:
            n = int(desc["N"])
            pieces = tuple(Piece(p["mass"], int(p["M"]), p.get("class", "submersion")) for p in desc["pieces"])
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"bad piece specification: {exc!r}") from None
        return cls(n, pieces)

    def to_dict(self) -> dict:
        return {"N": self.N, "pieces": [{"mass": _num(p.mass), "M": p.M, "class": p.piece_class}
                                        for p in self.pieces]}


def rel_loss_structural(spec: DimensionPieceSpec) -> RelLossResult:
    """``sum_i P_X(X_i) (N - M_i) / N`` for submersions on each piece.

    A piece declared ``constant`` counts as a submersion onto a point and
    must have ``M = 0``.
    """
    for p in spec.pieces:
        if p.piece_class == "constant" and p.M != 0:
            raise InconsistentDimensionsError("a constant piece has output dimension 0")
        if p.piece_class not in ("submersion", "constant"):
            raise UnsupportedClassError(f"structural rule needs submersions, got {p.piece_class!r}")
    value = sum(p.mass * (spec.N - p.M) / spec.N for p in spec.pieces)
    value = min(max(value, 0), 1)
    return RelLossResult(value, "structural", {"spec": spec.to_dict()})


def rel_loss_mixed(P_ac_A, P_ac_total) -> RelLossResult:
    """``P_ac(A) / P_ac(total)`` for maps injective or constant piecewise."""
    if not P_ac_total > 0:
        raise DomainError("the input has no continuous part: its information dimension is zero")
    if not 0 <= P_ac_A <= P_ac_total:
        raise DomainError(f"need 0 <= P_ac(A) <= P_ac(total), got {P_ac_A!r}, {P_ac_total!r}")
    return RelLossResult(P_ac_A / P_ac_total, "mixed", {"P_ac_A": P_ac_A, "P_ac_total": P_ac_total})


def cascade_relative(t1, t2) -> tuple[Any, Any]:
    """``(t1 t2, l1 + l2 - l1 l2)`` for two stages in series."""
    for t in (t1, t2):
        if not 0 <= t <= 1:
            raise DomainError(f"transfer {t!r} outside [0, 1]")
    l1, l2 = 1 - t1, 1 - t2
    return t1 * t2, l1 + l2 - l1 * l2


def cascade_result(t1, t2) -> RelLossResult:
    t, l_ie = cascade_relative(t1, t2)
    return RelLossResult(1 - t, "cascade", {"t1": t1, "t2": t2, "l_inclusion_exclusion": l_ie})


@dataclass(frozen=True)
class JointBound:
    raw: Any
    clipped: Any
    tight: bool | None = None
    note: str = ""

    def to_dict(self) -> dict:
        enc = (lambda v: {"value": float(v), "exact": str(v)} if isinstance(v, Fraction) else v)
        return {"raw": enc(self.raw), "clipped": enc(self.clipped), "tight": self.tight, "note": self.note}


def ub_rel_transfer(per_output: Sequence) -> JointBound:
    """Sum of per-output transfers, also reported clipped to 1."""
    for t in per_output:
        if not 0 <= t <= 1:
            raise DomainError(f"transfer {t!r} outside [0, 1]")
    raw = sum(per_output, start=0)
    return JointBound(raw, min(raw, 1))


def ub_rel_loss(per_coordinate: Sequence):
    """Mean of the per-coordinate relative losses."""
    if len(per_coordinate) == 0:
        raise DomainError("need at least one coordinate")
    for v in per_coordinate:
        if not 0 <= v <= 1:
            raise DomainError(f"loss {v!r} outside [0, 1]")
    return sum(per_coordinate, start=0) / len(per_coordinate)


def fano_relative_bound(pe, d_B, d_X) -> JointBound:
    """``P_e d_B / d_X`` for a compactly supported input; ``raw`` may exceed 1."""
    if not 0 <= pe <= 1:
        raise DomainError("P_e must lie in [0, 1]")
    if not d_X > 0:
        raise DomainError("the input information dimension must be positive")
    if d_B < d_X:
        raise InconsistentDimensionsError(f"box dimension {d_B!r} below information dimension {d_X!r}")
    raw = pe * d_B / d_X
    return JointBound(raw, min(raw, 1))


def compression_converse(d_X, epsilon):
    """Smallest rate of a Lipschitz encoder with error ``epsilon``: ``max(0, d(X) - epsilon)``."""
    if not 0 < d_X <= 1:
        raise DomainError("d(X) must lie in (0, 1]")
    if not 0 <= epsilon <= 1:
        raise DomainError("epsilon must lie in [0, 1]")
    return max(0, d_X - epsilon)


def positive_rel_implies_infinite_abs(l, h_X_infinite: bool) -> str:
    """``"infinite"`` when a positive relative loss meets an input of infinite entropy."""
    if not 0 <= l <= 1:
        raise DomainError("relative loss outside [0, 1]")
    if h_X_infinite and l > 0:
        return "infinite"
    return "inconclusive"


# ----------------------------------------------------------- empirical estimate


def _row_ids(codes: np.ndarray) -> np.ndarray:
    """Dense integer label per distinct row of a 2-D integer array."""
    ids = np.zeros(codes.shape[0], dtype=np.int64)
    for col in codes.T:
        _, inv = np.unique(col, return_inverse=True)
        ids = ids * (int(inv.max()) + 1) + inv
        if ids.max() > 2**40:
            _, ids = np.unique(ids, return_inverse=True)
    return ids


def _codes_entropy(codes: np.ndarray) -> tuple[float, float]:
    """Plug-in entropy of integer rows and the fraction of cells seen once."""
    if codes.ndim > 1:
        codes = _row_ids(codes)
    _, counts = np.unique(codes, return_counts=True)
    p = counts / counts.sum()
    return float(-np.sum(p * np.log2(p))), float(np.mean(counts == 1))


def _cells(v: np.ndarray, n: int) -> np.ndarray:
    c = np.floor(np.ldexp(v, n))
    if not np.all(np.isfinite(c)) or np.max(np.abs(c)) >= 2.0**62:
        raise ConfigurationError("samples too large to quantise at this resolution")
    return c.astype(np.int64)


@dataclass(frozen=True)
class EmpiricalRelLoss:
    result: RelLossResult
    resolutions: tuple[int, ...]
    ratios: tuple[float, ...]
    h_x: tuple[float, ...]
    h_x_given_y: tuple[float, ...]
    raw_estimate: float

    def to_dict(self) -> dict:
        out = self.result.to_dict()
        out.update(resolutions=list(self.resolutions), ratios=list(self.ratios), h_x=list(self.h_x),
                   h_x_given_y=list(self.h_x_given_y), raw_estimate=self.raw_estimate)
        return out


def rel_loss_empirical(d, g, n_lo: int = 6, n_hi: int = 12, samples: int = 1_000_000, seed=0) -> EmpiricalRelLoss:
    """Finite-resolution ratios ``H(X_n | Y_n) / H(X_n)`` and their slope ratio.

    ``Y`` is binned at the same resolution as ``X``; the extrapolated value
    is the ratio of the least-squares slopes of both entropies against ``n``.
    """
    if not n_hi > n_lo >= 1:
        raise ConfigurationError("need n_hi > n_lo >= 1")
    x = np.asarray(d.sample(samples, as_generator(seed)), dtype=float)
    y = np.asarray(g(x), dtype=float)
    warnings = []
    if samples < 100_000:
        warnings.append(f"only {samples} samples; the plug-in entropies are biased")
    ns = tuple(range(n_lo, n_hi + 1))
    hx, hxy, ratios = [], [], []
    for n in ns:
        cx = _cells(x, n).reshape(samples, -1)
        cy = _cells(y, n).reshape(samples, -1)
        h_x, single = _codes_entropy(cx)
        h_y, _ = _codes_entropy(cy)
        h_joint, _ = _codes_entropy(np.hstack([cx, cy]))
        cond = max(h_joint - h_y, 0.0)
        hx.append(h_x)
        hxy.append(cond)
        ratios.append(cond / h_x if h_x > 0 else math.nan)
        if n == n_hi and single >= 0.01:
            warnings.append(f"resolution too fine: {single:.1%} of cells hold a single sample at n={n}")
    sx, ex = regression_slope(ns, hx)
    sc, ec = regression_slope(ns, hxy)
    raw = sc / sx if sx > 0 else math.nan
    stderr = math.hypot(ec / sx, raw * ex / sx) if sx > 0 else math.nan
    value = min(max(raw, 0.0), 1.0) if math.isfinite(raw) else 0.0
    res = RelLossResult(value, "empirical", {"n_lo": n_lo, "n_hi": n_hi, "samples": samples, "seed": seed},
                        stderr=stderr, warnings=tuple(warnings))
    return EmpiricalRelLoss(res, ns, tuple(ratios), tuple(hx), tuple(hxy), raw)
