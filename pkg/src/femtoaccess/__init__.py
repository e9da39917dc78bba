"""Downlink throughput models for open, closed and shared femtocell access."""

from .geometry import Zone, ZoneUndefinedError, classify_zone, user_counts, zone_geometry
from .montecarlo import McConfig, empirical_cdf, empirical_zone_throughput
from .params import ConfigError, SystemParams, default_params, derive_constants, load_params
from .shared import grid_search_eta, optimal_eta
from .sir import Access, SirCdf, zone_cdf
from .specfun import expint_ei, hyp2f1_neg
from .throughput import (network_throughput, tier_throughput_closed, tier_throughput_open,
                         zone_throughput, zone_throughputs)

__version__ = "0.1.0"

__all__ = [
    "Access", "ConfigError", "McConfig", "SirCdf", "SystemParams", "Zone", "ZoneUndefinedError",
    "classify_zone", "default_params", "derive_constants", "empirical_cdf",
    "empirical_zone_throughput", "expint_ei", "grid_search_eta", "hyp2f1_neg", "load_params",
    "network_throughput", "optimal_eta", "tier_throughput_closed", "tier_throughput_open",
    "user_counts", "zone_cdf", "zone_geometry", "zone_throughput", "zone_throughputs",
]
