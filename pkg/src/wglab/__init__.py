"""wglab: a desk-scale laboratory for Waring-Goldbach representations.

Sums of s k-th powers of primes confined to short intervals: exact local
congruence arithmetic, segmented prime generation, Selberg sieve majorants
under the W-trick, Fourier diagnostics for the transference conditions,
and empirical representation scans.
"""

__version__ = "0.1.0"

from .errors import PreconditionError, ResourceBudgetError, WglabError
from .local import (
    CongruenceCount,
    LocalConstants,
    cauchy_davenport_check,
    count_unit_solutions,
    count_unit_solutions_direct,
    decompose_residue,
    gamma,
    lift_prime_power,
    sigma_w,
    tau,
    waring_goldbach_modulus,
)
from .primes import DensityCheck, PrimeInterval, check_density_lower_bound, count_primes_in_ap, primes_in_interval
from .sieve import (
    SieveWeights,
    WTrickContext,
    WeightTable,
    alpha_plus,
    build_context,
    build_f_b,
    build_v_b,
    compute_J,
    indicator_table,
    rho_plus,
    selberg_weights,
    with_residue,
)
from .fourier import (
    ArcDissection,
    Spectrum,
    classify,
    dft_at,
    exponential_sum,
    pseudorandomness_report,
    restriction_norm,
    spectrum,
)
from .represent import (
    RepresentationQuery,
    ScanReport,
    convolution_at,
    count_convolution,
    count_exact,
    representation_witnesses,
    residue_setup,
    scan_exceptional,
    subdivide_range,
)

__all__ = [
    "ArcDissection",
    "CongruenceCount",
    "DensityCheck",
    "LocalConstants",
    "PreconditionError",
    "PrimeInterval",
    "RepresentationQuery",
    "ResourceBudgetError",
    "ScanReport",
    "SieveWeights",
    "Spectrum",
    "WTrickContext",
    "WeightTable",
    "WglabError",
    "alpha_plus",
    "build_context",
    "build_f_b",
    "build_v_b",
    "cauchy_davenport_check",
    "check_density_lower_bound",
    "classify",
    "compute_J",
    "convolution_at",
    "count_convolution",
    "count_exact",
    "count_primes_in_ap",
    "count_unit_solutions",
    "count_unit_solutions_direct",
    "decompose_residue",
    "dft_at",
    "exponential_sum",
    "gamma",
    "indicator_table",
    "lift_prime_power",
    "primes_in_interval",
    "pseudorandomness_report",
    "representation_witnesses",
    "residue_setup",
    "restriction_norm",
    "rho_plus",
    "scan_exceptional",
    "selberg_weights",
    "sigma_w",
    "spectrum",
    "subdivide_range",
    "tau",
    "waring_goldbach_modulus",
    "with_residue",
    "__version__",
]
