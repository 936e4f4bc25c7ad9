"""Physical cloud descriptions reduced to engine-ready layer plans.

A cloud is a stack of homogeneous segments (number density, attenuation
cross-section, thickness, transverse extent).  Each segment is split into
layers thin enough to carry statistically one particle per detector area;
every layer gets an artificial-particle lattice spanning the transverse
extent and an absorbed fraction chosen so the layer product reproduces the
segment's classical transmittance.  Artificial particles inherit the
single-particle spread, never an aggregate of the represented masses.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .distribution import SpreadDistribution
from .engine import ParticleLattice, lattice_offsets, product_tr
from .opacity import OpacitySpec, make_opacity

DIMENSIONALITIES = ("d1", "d2_projected")


@dataclass(frozen=True)
class CloudSegment:
    """One homogeneous stretch of cloud along the light path."""

    number_density: float
    cross_section: float
    thickness: float
    transverse_extent: float

    def __post_init__(self):
        for name in ("number_density", "cross_section", "thickness", "transverse_extent"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"segment {name} must be positive, got {getattr(self, name)}")

    @property
    def depth(self) -> float:
        """Classical optical depth n*l*sigma of the segment."""
        return self.number_density * self.thickness * self.cross_section


@dataclass(frozen=True)
class CloudSpec:
    segments: tuple[CloudSegment, ...]
    dimensionality: str = "d1"

    def __post_init__(self):
        segments = tuple(self.segments)
        if not segments:
            raise ValueError("cloud needs at least one segment")
        if self.dimensionality not in DIMENSIONALITIES:
            raise ValueError(f"unknown dimensionality {self.dimensionality!r}, "
                             f"expected one of {DIMENSIONALITIES}")
        object.__setattr__(self, "segments", segments)


@dataclass(frozen=True)
class Layer:
    opacity: OpacitySpec
    lattice: ParticleLattice


@dataclass(frozen=True)
class LayerPlan:
    layers: tuple[Layer, ...]


@dataclass(frozen=True)
class SquareLayer:
    """Per-layer parameters for the square-detector (projected 2D) product."""

    grid_n: int
    g: float


def classic_tr(spec: CloudSpec) -> OpacitySpec:
    """Beer-Lambert transmittance e^{-sum(n*l*sigma)} of the whole cloud."""
    tau = math.fsum(seg.depth for seg in spec.segments)
    return make_opacity("tau", tau)


def _chunk_count(transverse_extent: float, r: float) -> int:
    if transverse_extent < 2.0 * r:
        warnings.warn("transverse extent smaller than the detector diameter; "
                      "using a single-particle lattice", stacklevel=3)
        return 1
    n = math.ceil(transverse_extent / (2.0 * r))
    return n if n % 2 == 1 else n + 1  # keep a lattice point on the axis


def _check_cross_section(spec: CloudSpec, r: float):
    for seg in spec.segments:
        if seg.cross_section > 0.01 * (2.0 * r) ** 2:
            warnings.warn(f"cross section {seg.cross_section} is not small against "
                          f"the detector area (2r)^2 = {(2 * r) ** 2}", stacklevel=3)


def _segment_layers(seg: CloudSegment, layers_per_segment: int | None):
    """Layer count and per-layer absorbed fraction for one segment."""
    depth = seg.depth
    if layers_per_segment is None:
        n_layers = max(1, math.ceil(depth))  # keeps per-layer g <= 1 - 1/e
    else:
        if layers_per_segment < 1:
            raise ValueError(f"layers_per_segment must be >= 1, got {layers_per_segment}")
        n_layers = layers_per_segment
    g_layer = -math.expm1(-depth / n_layers)
    return n_layers, g_layer


def plan_layers(spec: CloudSpec, r: float,
                layers_per_segment: int | None = None) -> LayerPlan:
    """Split the cloud into single-particle-per-detector-area layers.

    Each segment becomes identical layers whose absorbed fractions multiply
    back to the segment's classical transmittance; each layer carries a
    centered lattice of artificial particles spaced 2r across the
    transverse extent.  The layer count defaults to ceil(n*l*sigma) per
    segment and may be forced with ``layers_per_segment``.
    """
    if not r > 0.0:
        raise ValueError(f"detector radius r must be positive, got {r}")
    _check_cross_section(spec, r)
    layers = []
    for seg in spec.segments:
        n_layers, g_layer = _segment_layers(seg, layers_per_segment)
        lattice = lattice_offsets(_chunk_count(seg.transverse_extent, r), r)
        opacity = make_opacity("g", g_layer)
        layers.extend(Layer(opacity=opacity, lattice=lattice) for _ in range(n_layers))
    return LayerPlan(layers=tuple(layers))


def total_tr(plan: LayerPlan, dist_shape: SpreadDistribution, r: float) -> float:
    """Product of per-layer non-local transmittances."""
    tr = 1.0
    for layer in plan.layers:
        tr *= product_tr(layer.lattice, dist_shape, r, layer.opacity.g)
    return tr


def project_3d(spec: CloudSpec, r: float,
               layers_per_segment: int | None = None) -> list[SquareLayer]:
    """Cast a 3D cloud onto the detector plane as square-detector layers.

    Emits one entry per layer with the per-axis chunk count (transverse
    extent divided by 2r, forced odd) and the same per-layer absorbed
    fraction as :func:`plan_layers`, ready for ``square_detector_tr``.
    """
    if spec.dimensionality != "d2_projected":
        raise ValueError("projection needs a d2_projected cloud, "
                         f"got dimensionality {spec.dimensionality!r}")
    if not r > 0.0:
        raise ValueError(f"detector radius r must be positive, got {r}")
    _check_cross_section(spec, r)
    out = []
    for seg in spec.segments:
        n_layers, g_layer = _segment_layers(seg, layers_per_segment)
        grid_n = _chunk_count(seg.transverse_extent, r)
        out.extend(SquareLayer(grid_n=grid_n, g=g_layer) for _ in range(n_layers))
    return out
