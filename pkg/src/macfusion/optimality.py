"""Certificates for optimality of the received-energy test.

The energy test is optimal when the fusion LLR is strictly increasing in the
received energy. A sufficient condition depends only on the pmfs of the active
count: the count log-likelihood ratio lambda(l) = ln P(l|H1) - ln P(l|H0) must
be strictly increasing in l. The check works for any pair of count pmfs,
including ones produced by correlated sensors. Failing it means "not
certified", not "not optimal".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .poibin import CountDistribution, PmfEngine, pmf_pair
from .sensors import SensorEnsemble

DEFAULT_EPS = 1e-12


class SingularDistributionError(ValueError):
    """H0 count pmf has a zero entry, so lambda(l) is undefined there."""

    def __init__(self, ell: int):
        super().__init__(f"P(l={ell} | H0) = 0; count LLR is singular at l={ell}")
        self.ell = ell


@dataclass(frozen=True, eq=False)
class EllLlr:
    lam: np.ndarray
    margins: np.ndarray

    @property
    def k(self) -> int:
        return self.lam.size - 1


@dataclass(frozen=True)
class OptimalityReport:
    increasing: bool
    min_margin: float
    failing_indices: tuple[int, ...]
    theorem2_applicable: bool = False
    flat_indices: tuple[int, ...] = field(default=())

    @property
    def verdict(self) -> str:
        return "certified" if self.increasing else "not certified"


def _check_pair(d1: CountDistribution, d0: CountDistribution) -> None:
    if len(d1) != len(d0):
        raise ValueError(f"support mismatch: {len(d1)} vs {len(d0)} entries")


def ell_llr(d1: CountDistribution, d0: CountDistribution) -> EllLlr:
    """lambda(l) for every l, as a difference of logs.

    A zero in ``d1`` is allowed and yields -inf; a zero in ``d0`` raises.
    """
    _check_pair(d1, d0)
    zeros = np.flatnonzero(d0.p == 0.0)
    if zeros.size:
        raise SingularDistributionError(int(zeros[0]))
    with np.errstate(divide="ignore"):
        lam = np.log(d1.p) - np.log(d0.p)
    with np.errstate(invalid="ignore"):
        margins = np.diff(lam)
    # -inf followed by -inf is a tie, not NaN
    margins = np.where(np.isnan(margins), 0.0, margins)
    return EllLlr(lam, margins)


def check_prop1(
    d1: CountDistribution,
    d0: CountDistribution,
    eps: float = DEFAULT_EPS,
    theorem2_applicable: bool = False,
) -> OptimalityReport:
    """Strict increase of lambda(l) on l = 1..K, required margin > ``eps``."""
    llr = ell_llr(d1, d0)
    m = llr.margins
    failing = tuple(int(i) + 1 for i in np.flatnonzero(~(m > eps)))
    flat = tuple(int(i) + 1 for i in np.flatnonzero(np.abs(m) <= eps))
    min_margin = float(m.min()) if m.size else float("inf")
    increasing = not failing
    return OptimalityReport(
        increasing=increasing,
        min_margin=min_margin,
        failing_indices=failing,
        theorem2_applicable=theorem2_applicable and increasing,
        flat_indices=flat,
    )


def check_theorem2(e: SensorEnsemble) -> bool:
    """Fast sufficient path for independent sensors: P_D,k > P_F,k for every k."""
    return all(d > f for d, f in zip(e.pd, e.pf))


def certify_ensemble(
    e: SensorEnsemble, engine: PmfEngine | str = PmfEngine.CONVOLVE, eps: float = DEFAULT_EPS
) -> OptimalityReport:
    d1, d0 = pmf_pair(e, engine)
    return check_prop1(d1, d0, eps, theorem2_applicable=check_theorem2(e))


def pairwise_sign_matrix(d1: CountDistribution, d0: CountDistribution) -> np.ndarray:
    """k(a, b) = P(a|H1) P(b|H0) - P(b|H1) P(a|H0) for all a, b."""
    _check_pair(d1, d0)
    return np.outer(d1.p, d0.p) - np.outer(d0.p, d1.p)


def check_pairwise_sign(d1: CountDistribution, d0: CountDistribution) -> bool:
    """True iff k(a, b) > 0 for every a > b.

    Evaluated on linear-domain products, so entries small enough for the
    products to underflow read as ties.
    """
    kmat = pairwise_sign_matrix(d1, d0)
    if np.any(d0.p == 0.0):
        raise SingularDistributionError(int(np.flatnonzero(d0.p == 0.0)[0]))
    lower = np.tril_indices(kmat.shape[0], k=-1)
    return bool(np.all(kmat[lower] > 0.0))
