"""Non-coherent decision fusion over a Rayleigh-fading diversity MAC."""

__version__ = "0.1.0"

from .sensors import Hypothesis, SensorEnsemble, make_iid, make_inid, sample_decisions
from .poibin import CountDistribution, PmfEngine, convolve_counts, pmf, pmf_pair
from .optimality import (
    EllLlr,
    OptimalityReport,
    SingularDistributionError,
    check_pairwise_sign,
    check_prop1,
    check_theorem2,
    ell_llr,
)
from .fusion import FusionModel, energy, energy_test, llr_inverse, llr_of_energy, scan_monotonicity
from .channel import ChannelConfig, PowerMode, batch_energies, simulate_given_ell, simulate_received
from .montecarlo import McConfig
from .roc import RocCurve, empirical_roc, llr_vs_energy_roc, roc_deviation
from .asymptotics import LargeSystemParams, chi2_upper_tail, j_divergence, roc_closed_form
