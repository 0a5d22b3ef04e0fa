"""Hierarchical spherical codes for deterministic identification over AWGN.

Builds nested minimum-angle codebooks under a power constraint, decodes
with shell and projection-slab tests along each codeword's ancestor chain,
verifies the structural distance guarantees exhaustively, and estimates
type I/II identification errors by seeded Monte Carlo.
"""

from .channel import DecoderParams, identify, in_shell, in_slab, transmit
from .experiments import (
    ErrorEstimate,
    PairStrategy,
    RateReport,
    StructureReport,
    estimate_type1,
    estimate_type2,
    rate_report,
    sweep,
    verify_structure,
    wilson_interval,
)
from .galaxy import (
    Codeword,
    GalaxyCode,
    GalaxyParams,
    asymptotic_rate,
    build_code,
    build_galaxy,
    center_count_bounds,
    depth_bar,
    meet_depth,
    pack_centers,
    pair_distance_lower_bound,
    radial_bounds,
    rate_lower_bound,
    separation_condition,
    theta_of_k,
)
from .gaussian import (
    ShellSpec,
    chi_square_cdf,
    mills_bound,
    projection_tail,
    shell_prob_cross,
    shell_prob_same,
    std_normal_cdf,
    std_normal_pdf,
)
from .spherical import SphericalCode, csw_lower_bound, generate, min_pairwise_angle

__version__ = "0.1.0"
