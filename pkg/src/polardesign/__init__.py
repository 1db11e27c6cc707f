"""Frozen-set design for precoded polar codes under SCL decoding.

Modules
-------
polar_core   transform, index weights, Kronecker sub-matrices
channel      Gaussian-approximation reliabilities and bit-channel entropies
weights      ensemble-averaged and exact weight distributions
ml_bounds    union bound, tangential-sphere bound, SC estimate
list_bounds  entropy profiles bounding the SCL list size
design       genetic search with list-size, S and B constraints
codec        precoded encoder and SCL decoder
sim          paired Monte Carlo FER simulation
cli          command-line front end
"""

__version__ = "0.1.0"

from .channel import EntropyTable, ReliabilitySequence, entropy_table, reliability_sequence
from .codec import DecoderConfig, PrecodedCode, SCLDecoder
from .design import GeneticConfig, InfeasibleDesign, ParetoPoint, best_of_runs, pareto_front
from .list_bounds import BoundProfile, profile
from .ml_bounds import FerEstimate, tsb, union_bound
from .weights import WeightDistribution, average_weight_distribution

__all__ = [
    "BoundProfile", "DecoderConfig", "EntropyTable", "FerEstimate", "GeneticConfig",
    "InfeasibleDesign", "ParetoPoint", "PrecodedCode", "ReliabilitySequence", "SCLDecoder",
    "WeightDistribution", "average_weight_distribution", "best_of_runs", "entropy_table",
    "pareto_front", "profile", "reliability_sequence", "tsb", "union_bound",
]
