"""Optical transmittance of ultra-diluted gas clouds of spread particles."""

from .cloud import (CloudSegment, CloudSpec, Layer, LayerPlan, SquareLayer,
                    classic_tr, plan_layers, project_3d, total_tr)
from .distribution import (SpreadDistribution, erf, interval_probability,
                           load_density_csv, pdf, cdf, sample_positions)
from .engine import (DetectorGeometry, ParticleLattice, TransmittanceCurve,
                     closed_limit, finite_k_limit, lattice_offsets, mass_sum,
                     pilotwave_tr, product_tr, single_particle_tr,
                     square_detector_tr, transmittance_curve, MODELS)
from .montecarlo import (McConfig, McReport, coverage_bias_bound, mc_coverage,
                         mc_nonlocal)
from .opacity import KINDS, OpacitySpec, compose_layers, make_opacity
from .config import ConfigError, McMatrix, ScenarioConfig, load_scenario

__version__ = "0.1.0"

__all__ = [
    "CloudSegment", "CloudSpec", "Layer", "LayerPlan", "SquareLayer",
    "classic_tr", "plan_layers", "project_3d", "total_tr",
    "SpreadDistribution", "erf", "interval_probability", "load_density_csv",
    "pdf", "cdf", "sample_positions",
    "DetectorGeometry", "ParticleLattice", "TransmittanceCurve",
    "closed_limit", "finite_k_limit", "lattice_offsets", "mass_sum",
    "pilotwave_tr", "product_tr", "single_particle_tr", "square_detector_tr",
    "transmittance_curve", "MODELS",
    "McConfig", "McReport", "coverage_bias_bound", "mc_coverage", "mc_nonlocal",
    "KINDS", "OpacitySpec", "compose_layers", "make_opacity",
    "ConfigError", "McMatrix", "ScenarioConfig", "load_scenario",
    "__version__",
]
