"""Modulo-N accumulator of i.i.d. symbols.

``S_i = (X_1 + ... + X_i) mod N``; the pmf of ``S_i`` is the ``i``-fold
circular convolution of ``p_X``, equivalently the inverse DFT of the
element-wise ``i``-th power of its spectrum.  The DFT is formed explicitly
as a matrix; sizes here are small.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousRootError, ConsistencyError, DomainError, InvalidPmfError

STEP_AGREEMENT = 1e-10
STEP_FAILURE = 1e-8


def dft_matrix(N: int) -> np.ndarray:
    j = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(j, j) / N)


def spectrum(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return dft_matrix(p.size) @ p


def inverse_spectrum(F: np.ndarray) -> np.ndarray:
    N = F.size
    return (np.conj(dft_matrix(N)) @ F) / N


def circular_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``c[n] = sum_m a[m] b[(n - m) mod N]``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    N = a.size
    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    return b[idx] @ a


def _check_pmf(p, N=None) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or (N is not None and p.size != N):
        raise InvalidPmfError("pmf must be a vector of length N")
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
        raise InvalidPmfError("pmf must be nonnegative and sum to 1 within 1e-12")
    return p


@dataclass(frozen=True, eq=False)
class AccumulatorState:
    """Distribution of ``S_i`` together with the per-symbol law it is built from."""

    N: int
    p: np.ndarray
    i: int
    F: np.ndarray
    base: np.ndarray
    gap: float = 0.0

    def __post_init__(self):
        if self.N % 2:
            raise DomainError("the accumulator analysis assumes an even N")
        _check_pmf(self.p, self.N)
        F = self.F
        if abs(F[0] - 1) > 1e-12:
            raise ConsistencyError("spectrum at bin 0 must equal 1")
        if np.max(np.abs(F - np.conj(np.roll(F[::-1], 1)))) > 1e-12:
            raise ConsistencyError("spectrum is not Hermitian-symmetric")
        if abs(F[self.N // 2].imag) > 1e-12:
            raise ConsistencyError("spectrum at bin N/2 must be real")

    @classmethod
    def start(cls, p_X) -> "AccumulatorState":
        p = _check_pmf(p_X)
        return cls(p.size, p.copy(), 1, spectrum(p), p.copy())

    def uniform_gap(self) -> float:
        return float(np.max(np.abs(self.p - 1.0 / self.N)))

    def to_dict(self) -> dict:
        return {"N": self.N, "i": self.i, "p": self.p.tolist(), "consistency_gap": self.gap,
                "max_deviation_from_uniform": self.uniform_gap()}


def accumulator_step(state: AccumulatorState) -> AccumulatorState:
    """One more modulo addition, by convolution and by spectral power."""
    direct = circular_convolve(state.p, state.base)
    F_base = spectrum(state.base)
    F_next = F_base ** (state.i + 1)
    spectral = inverse_spectrum(F_next)
    gap = float(np.max(np.abs(spectral - direct)))
    if gap > STEP_FAILURE:
        raise ConsistencyError(f"spectral and direct evolution differ by {gap:.3g}")
    p = np.clip(direct, 0.0, None)
    p = p / p.sum()
    return AccumulatorState(state.N, p, state.i + 1, spectrum(p), state.base, gap)


def accumulate(p_X, steps: int) -> AccumulatorState:
    """State after ``steps`` symbols (``steps >= 1``)."""
    if steps < 1:
        raise DomainError("need at least one step")
    s = AccumulatorState.start(p_X)
    for _ in range(steps - 1):
        s = accumulator_step(s)
    return s


def accumulator_loss_bound(N: int, i: int) -> float:
    """``(N/2 - 1) log2 i`` for the complex bins plus one bit for the real bin when ``i`` is even."""
    if N % 2 or N < 2:
        raise DomainError("unsupported: N must be even and at least 2")
    if i < 1:
        raise DomainError("i must be at least 1")
    real_bin = 1.0 if i % 2 == 0 else 0.0  # cos^2(i pi / 2) without rounding residue
    return (N // 2 - 1) * math.log2(i) + real_bin


def accumulator_preimages(N: int, i: int, p_target, *, tol: float = 1e-9) -> list[np.ndarray]:
    """Every pmf whose ``i``-fold self-convolution equals ``p_target``."""
    if N % 2:
        raise DomainError("unsupported: N must be even")
    p_target = _check_pmf(p_target, N)
    F = spectrum(p_target)
    if np.min(np.abs(F)) < 1e-12:
        raise AmbiguousRootError("a spectral bin of the target is zero")
    half = N // 2
    choices = []
    for k in range(1, half):
        r = abs(F[k]) ** (1.0 / i)
        phi = np.angle(F[k])
        choices.append([r * np.exp(1j * (phi + 2 * np.pi * m) / i) for m in range(i)])
    v = F[half].real
    if i % 2:
        real_roots = [math.copysign(abs(v) ** (1.0 / i), v)]
    else:
        real_roots = [abs(v) ** (1.0 / i), -abs(v) ** (1.0 / i)] if v > 0 else []
    out = []
    W_inv = np.conj(dft_matrix(N)) / N
    for combo in itertools.product(*choices, real_roots):
        G = np.empty(N, dtype=complex)
        G[0] = 1.0
        G[half] = combo[-1]
        for k, z in enumerate(combo[:-1], start=1):
            G[k] = z
            G[N - k] = np.conj(z)
        q = W_inv @ G
        if np.max(np.abs(q.imag)) > tol or np.min(q.real) < -tol:
            continue
        out.append(np.clip(q.real, 0.0, None))
    return out


def accumulator_preimage_count(N: int, i: int, p_target) -> int:
    return len(accumulator_preimages(N, i, p_target))
