"""Simulation and analysis toolkit for a cold-atom quantum memory storing
heralded single photons with orbital angular momentum.

Submodules:

- `pair_source`: correlated photon-pair time-tag generator
- `timetag_analysis`: coincidence histograms, g2, alpha and the decay fit
- `memory_channel`: storage efficiency, leakage noise and image blur
- `spatial_modes`: LG modes, transverse scans, visibility and similarity
- `polarization`: Jones calculus, the dual-rail storage channel and tomography
- `oam_interference`: hybrid polarization-OAM states and rotating patterns
- `pipelines` / `cli`: config-driven experiments writing result files
"""

from ._core import BACKEND
from .config import ExperimentConfig, default_config, load_config, parse_config
from .errors import (ConfigError, IllConditionedFit, IllConditionedReconstruction,
                     InsufficientStatistics, InvalidArgument, InvalidData, NoSolution,
                     QMemError, SortRequiredError, StreamParseError, UndefinedNormalization,
                     UndefinedSimilarity, UndefinedVisibility)
from .memory_channel import MemoryParams, storage_efficiency
from .pair_source import SourceParams, analytic_g2, calibrate_to_peak, simulate_timetags
from .polarization import ChannelParams, ProcessMatrix
from .spatial_modes import IntensityImage, TransverseGrid, lg_mode, similarity, visibility
from .streams import TimeTagStream, read_csv, write_csv
from .timetag_analysis import (G2Curve, cauchy_schwarz_R, coincidence_histogram,
                               fit_exponential_decay, g2_from_stream, measure_alpha)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ExperimentConfig", "default_config", "load_config", "parse_config",
    "ConfigError", "IllConditionedFit", "IllConditionedReconstruction", "InsufficientStatistics",
    "InvalidArgument", "InvalidData", "NoSolution", "QMemError", "SortRequiredError",
    "StreamParseError", "UndefinedNormalization", "UndefinedSimilarity", "UndefinedVisibility",
    "MemoryParams", "storage_efficiency", "SourceParams", "analytic_g2", "calibrate_to_peak",
    "simulate_timetags", "ChannelParams", "ProcessMatrix", "IntensityImage", "TransverseGrid",
    "lg_mode", "similarity", "visibility", "TimeTagStream", "read_csv", "write_csv", "G2Curve",
    "cauchy_schwarz_R", "coincidence_histogram", "fit_exponential_decay", "g2_from_stream",
    "measure_alpha",
]
