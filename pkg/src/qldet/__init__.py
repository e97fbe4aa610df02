"""Synthesis and analysis toolkit for linear quantum detectors."""

from .tf_core import (FrequencyGrid, QuadratureTransferMatrix,
                      RationalFunction, build_quadrature_tf, check_realness,
                      check_symplectic_realizability, evaluate_rational,
                      expander_g11, free_parameter_count,
                      internal_squeezing_g11, picture_convert)
from .statespace import (StateSpace, TimeResponse, canonical_realization,
                         frequency_response, is_hurwitz, minimal_realization,
                         similarity_transform, tf_distance, time_response)
from .physical_realization import (NetworkDecomposition, OpenOscillator,
                                   RealizabilityCertificate,
                                   decompose_network, extract_open_oscillator,
                                   factor_indefinite,
                                   make_physically_realizable,
                                   recombine_network,
                                   solve_realizability_constraint,
                                   verify_physical)

__all__ = [
    "FrequencyGrid", "QuadratureTransferMatrix", "RationalFunction",
    "build_quadrature_tf", "check_realness", "check_symplectic_realizability",
    "evaluate_rational", "expander_g11", "free_parameter_count",
    "internal_squeezing_g11", "picture_convert",
    "StateSpace", "TimeResponse", "canonical_realization",
    "frequency_response", "is_hurwitz", "minimal_realization",
    "similarity_transform", "tf_distance", "time_response",
    "NetworkDecomposition", "OpenOscillator", "RealizabilityCertificate",
    "decompose_network", "extract_open_oscillator", "factor_indefinite",
    "make_physically_realizable", "recombine_network",
    "solve_realizability_constraint", "verify_physical",
]

__version__ = "0.1.0"
