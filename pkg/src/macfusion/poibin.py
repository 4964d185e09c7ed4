"""Exact Poisson-Binomial pmf of the active-sensor count.

Four engines are provided and are interchangeable up to round-off:

* ``ENUMERATE`` sums over all 2^K decision vectors (K <= 20 only).
* ``CONVOLVE`` folds in one Bernoulli pmf at a time, carrying a double-double
  error term so every entry is accurate to a few ulps. This is the default.
* ``RECURSIVE`` is the plain one-pass update
  ``P_t(l) = p_t P_{t-1}(l-1) + (1 - p_t) P_{t-1}(l)``.
* ``DFT`` evaluates the characteristic function on the (K+1)-th roots of unity
  and inverts it with an FFT.

The first three only add and multiply nonnegative numbers, so tail entries keep
their relative accuracy. ``DFT`` has absolute accuracy near machine epsilon and
cannot resolve tails much below that.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .sensors import Hypothesis, SensorEnsemble

NORMALIZATION_TOL = 1e-12
ENUMERATE_MAX_K = 20
DFT_NEGATIVE_TOL = 1e-12


class PmfEngine(str, Enum):
    ENUMERATE = "enumerate"
    CONVOLVE = "convolve"
    RECURSIVE = "recursive"
    DFT = "dft"


@dataclass(frozen=True, eq=False)
class CountDistribution:
    """Pmf over l = 0..K, stored as a read-only float array."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float).ravel()
        if p.size == 0:
            raise ValueError("count distribution needs at least one entry")
        if not np.all(np.isfinite(p)) or np.any(p < 0.0):
            raise ValueError("count distribution entries must be finite and nonnegative")
        total = float(np.sum(p))
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"count distribution sums to {total!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_weights(cls, w: Sequence[float]) -> "CountDistribution":
        """Normalize nonnegative weights into a pmf (e.g. a rounded table)."""
        w = np.asarray(w, dtype=float)
        s = w.sum()
        if not np.isfinite(s) or s <= 0:
            raise ValueError("weights must have a positive finite sum")
        return cls(w / s)

    @property
    def k(self) -> int:
        return self.p.size - 1

    def __len__(self) -> int:
        return self.p.size

    def __getitem__(self, ell):
        return self.p[ell]

    def mean(self) -> float:
        return float(np.dot(np.arange(self.p.size), self.p))

    def tolist(self) -> list[float]:
        return self.p.tolist()


# --- error-free transformations -------------------------------------------

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


# --- engines ---------------------------------------------------------------


def _pmf_enumerate(probs: np.ndarray) -> np.ndarray:
    k = probs.size
    if k > ENUMERATE_MAX_K:
        raise ValueError(f"enumeration engine limited to K <= {ENUMERATE_MAX_K}, got K={k}")
    out = np.zeros(k + 1)
    shifts = np.arange(k)
    total = 1 << k
    chunk = 1 << 16
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total))
        bits = (codes[:, None] >> shifts) & 1
        weight = np.prod(np.where(bits == 1, probs, 1.0 - probs), axis=1)
        out += np.bincount(bits.sum(axis=1), weights=weight, minlength=k + 1)
    return out


def _pmf_recursive(probs: np.ndarray) -> np.ndarray:
    out = np.zeros(probs.size + 1)
    out[0] = 1.0
    for t, p in enumerate(probs, start=1):
        # slice RHS is evaluated before assignment, so this is the one-pass update
        out[1 : t + 1] = p * out[0:t] + (1.0 - p) * out[1 : t + 1]
        out[0] *= 1.0 - p
    return out


def _pmf_convolve(probs: np.ndarray) -> np.ndarray:
    k = probs.size
    hi = np.zeros(k + 2)
    lo = np.zeros(k + 2)
    # index 0 is a permanent zero guard so that hi[l-1] is defined at l = 0
    hi[1] = 1.0
    for t, p in enumerate(probs, start=1):
        q, q_err = _two_sum(1.0, -p)
        cur_hi, cur_lo = hi[1 : t + 2], lo[1 : t + 2]
        prev_hi, prev_lo = hi[0 : t + 1], lo[0 : t + 1]
        a, a_err = _two_prod(q, cur_hi)
        b, b_err = _two_prod(p, prev_hi)
        s, s_err = _two_sum(a, b)
        tail = s_err + a_err + b_err + (q * cur_lo + q_err * cur_hi + p * prev_lo)
        new_hi = s + tail
        new_lo = tail - (new_hi - s)
        hi[1 : t + 2] = new_hi
        lo[1 : t + 2] = new_lo
    return hi[1:] + lo[1:]


def _pmf_dft(probs: np.ndarray) -> np.ndarray:
    k = probs.size
    n = k + 1
    roots = np.exp(2j * np.pi * np.arange(n) / n)
    factors = 1.0 - probs[None, :] + probs[None, :] * roots[:, None]
    # characteristic function chi(m) = sum_l P(l) w^(l m); forward FFT inverts it
    chi = np.prod(factors, axis=1)
    out = np.fft.fft(chi).real / n
    worst = out.min()
    if worst < -DFT_NEGATIVE_TOL:
        raise FloatingPointError(f"DFT engine produced a negative probability {worst:.3e}")
    out[out < 0.0] = 0.0
    return out / out.sum()


_ENGINES = {
    PmfEngine.ENUMERATE: _pmf_enumerate,
    PmfEngine.CONVOLVE: _pmf_convolve,
    PmfEngine.RECURSIVE: _pmf_recursive,
    PmfEngine.DFT: _pmf_dft,
}


def poisson_binomial(probs: Sequence[float], engine: PmfEngine | str = PmfEngine.CONVOLVE) -> CountDistribution:
    """Pmf of a sum of independent Bernoulli(probs[k]) variables."""
    probs = np.asarray(probs, dtype=float).ravel()
    if probs.size == 0:
        return CountDistribution(np.array([1.0]))
    if np.any(probs < 0.0) or np.any(probs > 1.0):
        raise ValueError("success probabilities must lie in [0, 1]")
    return CountDistribution(_ENGINES[PmfEngine(engine)](probs))


def pmf(e: SensorEnsemble, h: Hypothesis, engine: PmfEngine | str = PmfEngine.CONVOLVE) -> CountDistribution:
    """P(l | h) for the active count l of ensemble ``e``."""
    return poisson_binomial(e.probs(h), engine)


def pmf_pair(e: SensorEnsemble, engine: PmfEngine | str = PmfEngine.CONVOLVE) -> tuple[CountDistribution, CountDistribution]:
    """``(P(l|H1), P(l|H0))``, in the order the LLR routines take them."""
    return pmf(e, Hypothesis.H1, engine), pmf(e, Hypothesis.H0, engine)


def convolve_counts(a: CountDistribution, b: CountDistribution) -> CountDistribution:
    """Pmf of the sum of two independent counts."""
    out = np.convolve(a.p, b.p)
    # exact renormalization guard against the 1e-12 sum check for long supports
    return CountDistribution(out / out.sum())


def single_sensor(p: float) -> CountDistribution:
    return CountDistribution(np.array([1.0 - p, p]))
